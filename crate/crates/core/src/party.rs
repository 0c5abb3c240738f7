use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A participant. Players are numbered from 1; the coordinator holds no input.
///
/// Ordering places every player before the coordinator, so `(from, to)`
/// lexicographic order is the serialization order inside a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Party {
    Player(u32),
    Coordinator,
}

impl Party {
    pub fn player(i: usize) -> Party {
        Party::Player(i as u32)
    }

    pub fn is_coordinator(self) -> bool {
        matches!(self, Party::Coordinator)
    }

    /// 1-based player index, `None` for the coordinator.
    pub fn index(self) -> Option<usize> {
        match self {
            Party::Player(i) => Some(i as usize),
            Party::Coordinator => None,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Player(i) => write!(f, "P{i}"),
            Party::Coordinator => f.write_str("Co"),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Party> {
        if s == "Co" {
            return Ok(Party::Coordinator);
        }
        s.strip_prefix('P')
            .and_then(|rest| rest.parse::<u32>().ok())
            .filter(|&i| i >= 1)
            .map(Party::Player)
            .ok_or_else(|| Error::UnknownParty(s.to_string()))
    }
}

impl TryFrom<String> for Party {
    type Error = Error;

    fn try_from(s: String) -> Result<Party> {
        s.parse()
    }
}

impl From<Party> for String {
    fn from(p: Party) -> String {
        p.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    PointToPoint,
    Coordinator,
}

/// Network shape: `k` input-holding players, plus an inputless coordinator
/// in the coordinator topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    pub kind: TopologyKind,
    pub k: usize,
}

impl Topology {
    pub fn new(kind: TopologyKind, k: usize) -> Result<Topology> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("topology needs k >= 2, got {k}")));
        }
        Ok(Topology { kind, k })
    }

    pub fn point_to_point(k: usize) -> Result<Topology> {
        Topology::new(TopologyKind::PointToPoint, k)
    }

    pub fn coordinator(k: usize) -> Result<Topology> {
        Topology::new(TopologyKind::Coordinator, k)
    }

    pub fn has_coordinator(&self) -> bool {
        self.kind == TopologyKind::Coordinator
    }

    pub fn players(&self) -> impl Iterator<Item = Party> {
        (1..=self.k).map(Party::player)
    }

    pub fn parties(&self) -> Vec<Party> {
        let mut out: Vec<Party> = self.players().collect();
        if self.has_coordinator() {
            out.push(Party::Coordinator);
        }
        out
    }

    pub fn contains(&self, p: Party) -> bool {
        match p {
            Party::Player(i) => i >= 1 && (i as usize) <= self.k,
            Party::Coordinator => self.has_coordinator(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TopologyKind::PointToPoint => "point-to-point",
            TopologyKind::Coordinator => "coordinator",
        }
    }
}
