use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gadget::QueryGadget;
use crate::error::{Error, Result};
use crate::netmodel::{Action, BindingId, ProgramBuilder, ProtocolProgram, RandomSpec, View};
use crate::party::{Party, Topology};
use crate::statevec::Gate;

/// Growth factor of the per-attempt iteration bound.
pub const GROWTH: f64 = 1.2;

/// Iteration budget for Grover search with an unknown number of solutions.
///
/// Attempt `t` runs a uniformly random number of iterations below
/// `attempts[t]` and then measures a candidate. Each attempt reserves
/// `attempts[t] - 1` oracle slots so that communication is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverPlan {
    pub n: usize,
    /// Search space size: the next power of two at or above `n`.
    pub domain: usize,
    pub attempts: Vec<u64>,
    pub epsilon: f64,
    /// Largest miss probability over every nonzero solution count.
    pub worst_failure: f64,
}

impl GroverPlan {
    pub fn new(n: usize, epsilon: f64) -> Result<GroverPlan> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("search needs n >= 2, got {n}")));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1/2)")));
        }
        let domain = n.next_power_of_two();
        let root = (domain as f64).sqrt();
        let per_attempt = ((PI / 4.0) * root).ceil() as u64;
        let slot_cap = 3 * root.ceil() as u64;
        let mut plan = GroverPlan { n, domain, attempts: Vec::new(), epsilon, worst_failure: 1.0 };
        let mut slots = 0u64;
        let mut t = 1i32;
        while plan.worst_failure > epsilon && slots < slot_cap {
            let bound = (GROWTH.powi(t).ceil() as u64).min(per_attempt).max(2);
            let m = bound.min(slot_cap - slots + 1);
            plan.attempts.push(m);
            slots += m - 1;
            plan.worst_failure = plan.worst_case_failure();
            t += 1;
        }
        Ok(plan)
    }

    /// Oracle calls reserved across all attempts.
    pub fn slots(&self) -> u64 {
        self.attempts.iter().map(|m| m - 1).sum()
    }

    /// Probability that an attempt with bound `m` measures a solution when
    /// `solutions` of `domain` indices are marked.
    pub fn attempt_success(m: u64, solutions: usize, domain: usize) -> f64 {
        if solutions == 0 {
            return 0.0;
        }
        if solutions >= domain {
            return 1.0;
        }
        let theta = ((solutions as f64) / (domain as f64)).sqrt().asin();
        let m = m as f64;
        0.5 - (4.0 * m * theta).sin() / (4.0 * m * (2.0 * theta).sin())
    }

    /// Probability that every attempt misses when `solutions` indices are marked.
    pub fn failure(&self, solutions: usize) -> f64 {
        self.attempts
            .iter()
            .map(|&m| 1.0 - GroverPlan::attempt_success(m, solutions, self.domain))
            .product()
    }

    pub fn worst_case_failure(&self) -> f64 {
        (1..=self.n).map(|s| self.failure(s)).fold(0.0, f64::max)
    }
}

/// Number of active iterations in one attempt.
#[derive(Clone, Copy, Debug)]
pub enum Iterations {
    Fixed(u64),
    /// Uniform draw in `0..bound` from shared randomness.
    Shared(BindingId),
}

impl Iterations {
    fn get(&self, v: &View<'_>) -> u64 {
        match *self {
            Iterations::Fixed(j) => j,
            Iterations::Shared(b) => v.get(b),
        }
    }
}

/// Emits one search attempt with `slots` oracle slots starting at `round`.
/// Returns the coordinator's candidate binding and the next free round.
pub fn emit_attempt(
    b: &mut ProgramBuilder,
    gadget: &QueryGadget,
    slots: u64,
    iterations: Iterations,
    mut round: u32,
) -> (BindingId, u32) {
    let co = Party::Coordinator;
    let index = b.alloc(co, gadget.index_width(), "search_index");
    b.act(co, Action::gate_all(index, Gate::h()));
    let y = b.alloc(co, 1, "oracle_phase");
    for slot in 0..slots {
        let prepare = move |v: &View<'_>| {
            if slot < iterations.get(v) {
                Action::Sequence(vec![Action::gate(y, 0, Gate::x()), Action::gate(y, 0, Gate::h())])
            } else {
                Action::gate(y, 0, Gate::h())
            }
        };
        let unprepare = move |v: &View<'_>| {
            if slot < iterations.get(v) {
                Action::Sequence(vec![Action::gate(y, 0, Gate::h()), Action::gate(y, 0, Gate::x())])
            } else {
                Action::gate(y, 0, Gate::h())
            }
        };
        let diffuse = move |v: &View<'_>| {
            if slot < iterations.get(v) {
                diffusion(index)
            } else {
                Action::Identity
            }
        };
        b.local(co, prepare);
        gadget.emit(b, index, y, round);
        round += QueryGadget::ROUNDS;
        b.local(co, unprepare);
        b.local(co, diffuse);
    }
    b.release(y);
    (b.measure(co, index, "candidate"), round)
}

/// Reflection about the uniform superposition.
pub fn diffusion(index: crate::netmodel::RegId) -> Action {
    Action::Sequence(vec![
        Action::gate_all(index, Gate::h()),
        Action::phase(vec![index], |v| v[0] != 0),
        Action::gate_all(index, Gate::h()),
    ])
}

pub type HitFn = Arc<dyn Fn(&View<'_>) -> bool + Send + Sync>;

/// Runs every attempt of `plan` against `gadget`, then checks each
/// candidate classically: the coordinator sends it to every player (round
/// `R`) and each player answers with its bit (round `R + 1`). The returned
/// predicate, evaluated by the coordinator, is 1 iff some candidate lies in
/// the intersection. Also returns the next free round.
pub fn emit_search(
    b: &mut ProgramBuilder,
    gadget: &QueryGadget,
    plan: &GroverPlan,
    first_round: u32,
) -> (HitFn, u32) {
    let co = Party::Coordinator;
    let mut round = first_round;
    let mut candidates = Vec::with_capacity(plan.attempts.len());
    for &m in &plan.attempts {
        let draw = b.shared_random(RandomSpec::Below(m), "iterations");
        let (cand, next) = emit_attempt(b, gadget, m - 1, Iterations::Shared(draw), round);
        candidates.push(cand);
        round = next;
    }
    let (n, w, offset) = (gadget.n(), gadget.index_width(), gadget.offset());
    let mut checks: Vec<Vec<BindingId>> = Vec::new();
    for &cand in &candidates {
        let mut per_player = Vec::new();
        for p in (1..=gadget.k()).map(Party::player) {
            let copy = b.send_classical(co, p, round, w, "candidate", move |v| v.get(cand));
            let bit = b.send_classical(p, co, round + 1, 1, "check", move |v| {
                let i = v.get(copy) as usize;
                (i < n && v.bit(offset + i)) as u64
            });
            per_player.push(bit);
        }
        checks.push(per_player);
    }
    let next = if candidates.is_empty() { round } else { round + 2 };
    let hit: HitFn =
        Arc::new(move |v| checks.iter().any(|attempt| attempt.iter().all(|&c| v.get(c) == 1)));
    (hit, next)
}

/// Closed-form cost of `emit_search` plus the final broadcast.
pub fn search_cost(gadget: &QueryGadget, plan: &GroverPlan) -> u64 {
    let (k, w) = (gadget.k() as u64, gadget.index_width() as u64);
    let t = plan.attempts.len() as u64;
    plan.slots() * gadget.cost() + t * k * (w + 1) + k
}

/// Set-Disjointness by distributed Grover search. Outputs 1 only on a
/// verified common coordinate.
pub fn build_disj_grover(n: usize, k: usize, epsilon: f64) -> Result<ProtocolProgram> {
    let gadget = QueryGadget::new(n, k)?;
    let plan = GroverPlan::new(n, epsilon)?;
    let mut b = ProgramBuilder::new("disj-grover", Topology::coordinator(k)?, n, epsilon);
    let (hit, next) = emit_search(&mut b, &gadget, &plan, 1);
    b.broadcast_output(Party::Coordinator, next, move |v| hit(v));
    b.set_meta("attempts", plan.attempts.clone());
    b.set_meta("oracle_slots", plan.slots());
    b.set_meta("worst_failure", plan.worst_failure);
    b.build()
}

/// Splits the input into blocks of `m*m` coordinates and searches every
/// block in the same rounds. Each block's answer is broadcast; players
/// output the OR.
pub fn build_bounded_round_disj(n: usize, k: usize, m: usize, epsilon: f64) -> Result<ProtocolProgram> {
    let block = m
        .checked_mul(m)
        .filter(|&b| b <= n)
        .ok_or_else(|| Error::InvalidParameter(format!("M^2 = {} exceeds n = {n}", m * m)))?;
    if m < 2 {
        return Err(Error::InvalidParameter("M must be at least 2".into()));
    }
    let plan = GroverPlan::new(block, epsilon)?;
    let blocks = n.div_ceil(block);
    let mut b = ProgramBuilder::new("disj-bounded-round", Topology::coordinator(k)?, n, epsilon);
    let co = Party::Coordinator;
    let mut answers: Vec<Vec<BindingId>> = vec![Vec::new(); k];
    for i in 0..blocks {
        let gadget = QueryGadget::new(block, k)?.at_offset(i * block);
        let (hit, next) = emit_search(&mut b, &gadget, &plan, 1);
        for (j, p) in (1..=k).map(Party::player).enumerate() {
            let h = hit.clone();
            answers[j].push(b.send_classical(co, p, next, 1, "block_answer", move |v| h(v) as u64));
        }
    }
    for (j, p) in (1..=k).map(Party::player).enumerate() {
        let mine = answers[j].clone();
        b.output(p, move |v| mine.iter().any(|&a| v.get(a) == 1));
    }
    b.set_meta("blocks", blocks);
    b.set_meta("block_size", block);
    b.set_meta("attempts", plan.attempts.clone());
    b.build()
}

/// `ceil(n / M^2)` times the cost of one `M^2`-coordinate search.
pub fn bounded_round_cost(n: usize, k: usize, m: usize, epsilon: f64) -> Result<u64> {
    let block = m * m;
    let plan = GroverPlan::new(block, epsilon)?;
    Ok(n.div_ceil(block) as u64 * search_cost(&QueryGadget::new(block, k)?, &plan))
}
