use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::Schedule;
use crate::party::{Party, Topology};

/// Cost model of the optimal search protocol: `length` charged operations,
/// each moving one qubit from every player to the coordinator and one back,
/// followed by a one-qubit broadcast. Never executed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaCostModel {
    pub n: usize,
    pub k: usize,
    pub constant: f64,
    pub length: u64,
}

/// `ceil(sqrt(x))` in integers.
pub fn ceil_sqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

impl AaCostModel {
    pub fn new(n: usize, k: usize, constant: f64) -> Result<AaCostModel> {
        if constant.is_nan() || constant <= 0.0 {
            return Err(Error::InvalidParameter(format!("AA constant {constant} must be positive")));
        }
        let length = if constant == 1.0 {
            ceil_sqrt(n as u64)
        } else {
            (constant * (n as f64).sqrt()).ceil() as u64
        };
        Topology::coordinator(k)?;
        Ok(AaCostModel { n, k, constant, length })
    }

    /// `2 k L + k`.
    pub fn qcc(&self) -> u64 {
        let k = self.k as u64;
        2 * k * self.length + k
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let topology = Topology::coordinator(self.k)?;
        let mut s = Schedule::new(topology, self.n);
        let players: Vec<Party> = topology.players().collect();
        for round in 1..=self.length as u32 {
            for &p in &players {
                s.add(round, p, Party::Coordinator, 1)?;
                s.add(round, Party::Coordinator, p, 1)?;
            }
        }
        for &p in &players {
            s.add(self.length as u32 + 1, Party::Coordinator, p, 1)?;
        }
        s.set_meta("model", "aa".into());
        s.set_meta("constant", self.constant.into());
        Ok(s)
    }
}

pub fn build_aa_cost_model(n: usize, k: usize) -> Result<Schedule> {
    AaCostModel::new(n, k, 1.0)?.schedule()
}
