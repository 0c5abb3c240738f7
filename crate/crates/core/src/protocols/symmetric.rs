use std::f64::consts::PI;

use num_bigint::BigUint;

use super::gadget::QueryGadget;
use crate::error::{Error, Result};
use crate::functions::{split_d, SplitTables, SymmetricSpec};
use crate::netmodel::{Action, BindingId, ProgramBuilder, ProtocolProgram, RegId, View};
use crate::party::{Party, Topology};
use crate::statevec::Gate;

/// Phase-register size for counting intersections of weight below `l0 + 1`
/// among `n` coordinates: `ceil(log2(8 sqrt(n (l0 + 1)))) + 2`.
pub fn counting_precision(n: usize, l0: usize) -> usize {
    (8.0 * ((n * (l0 + 1)) as f64).sqrt()).log2().ceil() as usize + 2
}

/// Estimated number of marked indices from a `precision`-bit phase reading.
pub fn decode_count(reading: u64, precision: usize, domain: usize) -> usize {
    let s = (PI * reading as f64 / (1u64 << precision) as f64).sin();
    (domain as f64 * s * s).round() as usize
}

/// Controlled Grover iterate on `index`, controlled by `ctl`. Uses the
/// scratch qubit `y` (left at 0) for phase kickback.
fn emit_controlled_iterate(
    b: &mut ProgramBuilder,
    gadget: &QueryGadget,
    index: RegId,
    y: RegId,
    ctl: RegId,
    round: u32,
) {
    let co = Party::Coordinator;
    let enter = Action::Sequence(vec![
        Action::xor(vec![ctl], y, |v| v[0]),
        Action::gate(y, 0, Gate::h()),
    ]);
    let leave = Action::Sequence(vec![
        Action::gate(y, 0, Gate::h()),
        Action::xor(vec![ctl], y, |v| v[0]),
    ]);
    b.act(co, enter);
    gadget.emit(b, index, y, round);
    b.act(co, leave);
    b.act(
        co,
        Action::Sequence(vec![
            Action::gate_all(index, Gate::h()),
            Action::phase(vec![ctl, index], |v| v[0] == 1 && v[1] != 0),
            Action::gate_all(index, Gate::h()),
        ]),
    );
}

/// Semi-classical phase estimation of the Grover iterate, least
/// significant bit first. Makes `2^precision - 1` gadget calls. Returns the
/// coordinator's bit bindings (bit `s` has weight `2^s`) and the next round.
pub fn emit_counting(
    b: &mut ProgramBuilder,
    gadget: &QueryGadget,
    precision: usize,
    first_round: u32,
) -> (Vec<BindingId>, u32) {
    let co = Party::Coordinator;
    let index = b.alloc(co, gadget.index_width(), "count_index");
    b.act(co, Action::gate_all(index, Gate::h()));
    let y = b.alloc(co, 1, "kickback");
    let mut round = first_round;
    let mut bits: Vec<BindingId> = Vec::with_capacity(precision);
    for s in 0..precision {
        let ctl = b.alloc(co, 1, "phase_bit");
        b.act(co, Action::gate(ctl, 0, Gate::h()));
        for _ in 0..1u64 << (precision - 1 - s) {
            emit_controlled_iterate(b, gadget, index, y, ctl, round);
            round += QueryGadget::ROUNDS;
        }
        let earlier = bits.clone();
        b.local(co, move |v: &View<'_>| {
            let omega: f64 = earlier
                .iter()
                .enumerate()
                .map(|(r, &bit)| v.get(bit) as f64 * 2f64.powi(r as i32 - s as i32 - 1))
                .sum();
            Action::Sequence(vec![
                Action::gate(ctl, 0, Gate::phase(-2.0 * PI * omega)),
                Action::gate(ctl, 0, Gate::h()),
            ])
        });
        bits.push(b.measure(co, ctl, "phase_bit"));
    }
    b.release(y);
    b.measure(co, index, "count_index");
    (bits, round)
}

/// Coordinator-side predicate over the bindings of a finished run.
type Verdict = Box<dyn Fn(&View<'_>) -> bool + Send + Sync>;

fn reading(v: &View<'_>, bits: &[BindingId]) -> u64 {
    bits.iter().enumerate().map(|(s, &b)| v.get(b) << s).sum()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of subsets of `[n]` with fewer than `limit` elements.
pub fn small_subset_count(n: usize, limit: usize) -> BigUint {
    let mut total = BigUint::from(0u32);
    let mut term = BigUint::from(1u32);
    for j in 0..limit.min(n + 1) {
        total += &term;
        term = term * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    total
}

/// Bits needed to name one subset of `[n]` with fewer than `limit` elements.
pub fn zero_set_width(n: usize, limit: usize) -> usize {
    let count = small_subset_count(n, limit);
    if count <= BigUint::from(1u32) {
        0
    } else {
        (count - 1u32).bits() as usize
    }
}

/// Rank of a sorted subset: all smaller sizes first, colex within a size.
pub fn rank_subset(n: usize, set: &[usize]) -> u128 {
    let below: u128 = (0..set.len()).map(|j| binomial(n, j)).sum();
    below + set.iter().enumerate().map(|(i, &pos)| binomial(pos, i + 1)).sum::<u128>()
}

pub fn unrank_subset(n: usize, mut rank: u128) -> Vec<usize> {
    let mut size = 0;
    while rank >= binomial(n, size) {
        rank -= binomial(n, size);
        size += 1;
    }
    let mut set = vec![0; size];
    let mut hi = n;
    for i in (0..size).rev() {
        let mut pos = i;
        while pos + 1 < hi && binomial(pos + 1, i + 1) <= rank {
            pos += 1;
        }
        rank -= binomial(pos, i + 1);
        set[i] = pos;
        hi = pos;
    }
    set
}

/// Zero-reporting step: in round 1 every player sends whether it has fewer
/// than `l1` zeros and, if so, the rank of its zero set (all zeros
/// otherwise). The returned predicate, evaluated by the coordinator, is
/// `D1(|intersection|)`, or 0 if some player has too many zeros.
/// Constant 0 without communication when `l1 = 0`.
pub fn emit_zero_report(
    b: &mut ProgramBuilder,
    split: &SplitTables,
) -> Result<Verdict> {
    let (n, limit) = (b.n(), split.l1);
    if limit == 0 {
        return Ok(Box::new(|_| false));
    }
    let width = zero_set_width(n, limit);
    if width > 64 {
        return Err(Error::InvalidParameter(format!("zero-set payload of {width} bits exceeds 64")));
    }
    let mut reports = Vec::new();
    for p in b.players() {
        let fits = b.send_classical(p, Party::Coordinator, 1, 1, "few_zeros", move |v| {
            (v.input().zero_positions().len() < limit) as u64
        });
        let payload = (width > 0).then(|| {
            b.send_classical(p, Party::Coordinator, 1, width, "zero_set", move |v| {
                let zeros = v.input().zero_positions();
                if zeros.len() < limit {
                    rank_subset(n, &zeros) as u64
                } else {
                    0
                }
            })
        });
        reports.push((fits, payload));
    }
    let d1 = split.d1.clone();
    Ok(Box::new(move |v| {
        let mut union = vec![false; n];
        for &(fits, payload) in &reports {
            if v.get(fits) == 0 {
                return false;
            }
            let rank = payload.map_or(0, |p| v.get(p)) as u128;
            for z in unrank_subset(n, rank) {
                union[z] = true;
            }
        }
        d1[n - union.iter().filter(|&&z| z).count()]
    }))
}

/// Zero-reporting step alone; the coordinator broadcasts `D1(|intersection|)`
/// in round 2. Exact and deterministic.
pub fn build_f1_subprotocol(spec: &SymmetricSpec) -> Result<ProtocolProgram> {
    let split = split_d(spec)?;
    let mut b = ProgramBuilder::new("symmetric-f1", Topology::coordinator(spec.k)?, spec.n, 0.0);
    if split.l1 == 0 {
        for p in b.players() {
            b.output(p, |_| false);
        }
    } else {
        let f1 = emit_zero_report(&mut b, &split)?;
        b.broadcast_output(Party::Coordinator, 2, f1);
    }
    b.set_meta("l1", split.l1);
    b.build()
}

/// Symmetric predicate protocol: counting resolves low intersection
/// weights, zero reports resolve high ones, and the coordinator broadcasts
/// `(f0 or f1) xor negated`.
pub fn build_symmetric(spec: &SymmetricSpec, epsilon: f64) -> Result<ProtocolProgram> {
    let split = split_d(spec)?;
    let (n, k) = (spec.n, spec.k);
    let mut b = ProgramBuilder::new("symmetric", Topology::coordinator(k)?, n, epsilon);
    let f1 = emit_zero_report(&mut b, &split)?;
    let mut last_round = if split.l1 > 0 { 1 } else { 0 };
    let mut f0: Verdict = Box::new(|_| false);
    if split.l0 > 0 {
        let gadget = QueryGadget::new(n, k)?;
        let precision = counting_precision(n, split.l0);
        let domain = 1usize << gadget.index_width();
        let (bits, next) = emit_counting(&mut b, &gadget, precision, 1);
        last_round = next - 1;
        let d0 = split.d0.clone();
        f0 = Box::new(move |v| {
            let m = decode_count(reading(v, &bits), precision, domain);
            m <= n && d0[m]
        });
        b.set_meta("precision", precision);
        b.set_meta("gadget_calls", (1u64 << precision) - 1);
    }
    let negated = split.negated;
    b.broadcast_output(Party::Coordinator, last_round + 1, move |v| (f0(v) || f1(v)) ^ negated);
    b.set_meta("l0", split.l0);
    b.set_meta("l1", split.l1);
    b.set_meta("negated", negated);
    b.build()
}

/// Fragment that runs counting alone on `n` coordinates; the coordinator's
/// estimate is `decode_count` of the returned bits.
pub fn counting_fragment(n: usize, k: usize, precision: usize) -> Result<(ProtocolProgram, Vec<BindingId>)> {
    let gadget = QueryGadget::new(n, k)?;
    let mut b = ProgramBuilder::new("counting", Topology::coordinator(k)?, n, 0.0);
    let (bits, _) = emit_counting(&mut b, &gadget, precision, 1);
    Ok((b.build_fragment()?, bits))
}

/// `2^precision - 1` gadget calls plus the zero reports and the broadcast.
pub fn symmetric_cost(spec: &SymmetricSpec) -> Result<u64> {
    let split = split_d(spec)?;
    let k = spec.k as u64;
    let counting = if split.l0 > 0 {
        let calls = (1u64 << counting_precision(spec.n, split.l0)) - 1;
        calls * QueryGadget::new(spec.n, spec.k)?.cost()
    } else {
        0
    };
    let reports = if split.l1 > 0 { k * (1 + zero_set_width(spec.n, split.l1) as u64) } else { 0 };
    Ok(counting + reports + k)
}
