use crate::error::{Error, Result};
use crate::netmodel::{Action, ProgramBuilder, ProtocolProgram, RegId};
use crate::party::{Party, Topology};

use super::ceil_log2;

/// Distributed oracle `|i>|y> -> |i>|y xor AND_j x_j[offset + i]>` on the
/// coordinator's registers. Indices at or beyond `n` read as 0.
///
/// Four rounds: the coordinator sends each player a copy of the index; each
/// player returns the copy with its bit loaded into a fresh qubit; the
/// coordinator folds the AND into `y` and hands copies and bits back; each
/// player clears its bit and returns the copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryGadget {
    n: usize,
    k: usize,
    offset: usize,
}

impl QueryGadget {
    pub const ROUNDS: u32 = 4;

    pub fn new(n: usize, k: usize) -> Result<QueryGadget> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("query gadget needs n >= 2, got {n}")));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("query gadget needs k >= 1".into()));
        }
        Ok(QueryGadget { n, k, offset: 0 })
    }

    /// Reads coordinates `offset..offset + n` of the players' inputs.
    pub fn at_offset(self, offset: usize) -> QueryGadget {
        QueryGadget { offset, ..self }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn index_width(&self) -> usize {
        ceil_log2(self.n as u64)
    }

    /// Qubits per invocation: `4 k w + 2 k`.
    pub fn cost(&self) -> u64 {
        let (k, w) = (self.k as u64, self.index_width() as u64);
        4 * k * w + 2 * k
    }

    /// Emits one invocation using rounds `round..round + 4`. The coordinator
    /// must own `index` (width `index_width`) and `target` (width 1).
    pub fn emit(&self, b: &mut ProgramBuilder, index: RegId, target: RegId, round: u32) {
        let co = Party::Coordinator;
        let (n, w, offset) = (self.n, self.index_width(), self.offset);
        let players: Vec<Party> = (1..=self.k).map(Party::player).collect();
        let copies: Vec<RegId> = players.iter().map(|_| b.alloc(co, w, "index_copy")).collect();
        let fan_out = Action::Sequence(
            copies.iter().map(|&c| Action::xor(vec![index], c, |v| v[0])).collect(),
        );
        b.act(co, fan_out.clone());
        for (&p, &c) in players.iter().zip(&copies) {
            b.send(co, p, c, round);
        }
        let load = move |copy: RegId, answer: RegId| {
            move |v: &crate::netmodel::View<'_>| {
                let x = v.input().window(offset, n);
                Action::xor(vec![copy], answer, move |vals| {
                    let i = vals[0] as usize;
                    (i < n && x.get(i)) as u64
                })
            }
        };
        let mut answers = Vec::with_capacity(self.k);
        for (&p, &c) in players.iter().zip(&copies) {
            let a = b.alloc(p, 1, "answer");
            b.local(p, load(c, a));
            b.send(p, co, c, round + 1);
            b.send(p, co, a, round + 1);
            answers.push(a);
        }
        b.act(co, Action::xor(answers.clone(), target, |v| v.iter().all(|&x| x == 1) as u64));
        for ((&p, &c), &a) in players.iter().zip(&copies).zip(&answers) {
            b.send(co, p, c, round + 2);
            b.send(co, p, a, round + 2);
        }
        for ((&p, &c), &a) in players.iter().zip(&copies).zip(&answers).rev() {
            b.local(p, load(c, a));
            b.release(a);
            b.send(p, co, c, round + 3);
        }
        b.act(co, fan_out);
        for &c in copies.iter().rev() {
            b.release(c);
        }
    }
}

pub fn build_query_gadget(n: usize, k: usize) -> Result<QueryGadget> {
    QueryGadget::new(n, k)
}

/// A fragment that prepares the coordinator's index and target with
/// `prepare`, invokes the gadget `repeats` times, and leaves both registers
/// allocated. The index occupies qubits `0..w` and the target qubit `w`.
pub fn gadget_harness(
    gadget: &QueryGadget,
    prepare: impl FnOnce(RegId, RegId) -> Action,
    repeats: usize,
) -> Result<(ProtocolProgram, RegId, RegId)> {
    let topology = Topology::coordinator(gadget.k)?;
    let mut b = ProgramBuilder::new("query-gadget", topology, gadget.n, 0.0);
    let co = Party::Coordinator;
    let index = b.alloc(co, gadget.index_width(), "index");
    let target = b.alloc(co, 1, "target");
    b.act(co, prepare(index, target));
    for r in 0..repeats {
        gadget.emit(&mut b, index, target, 1 + QueryGadget::ROUNDS * r as u32);
    }
    Ok((b.build_fragment()?, index, target))
}
