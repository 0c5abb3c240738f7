//! Turning a k-party oblivious protocol into a two-party one: one player
//! (the pivot) becomes Alice, everyone else including the coordinator is
//! simulated by Bob, and inputs are lifted through an embedding.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::functions::{embedding, EmbeddingMap, Family};
use crate::instances::random_instance;
use crate::netmodel::{
    causal_key, derive_schedule, execute, rehost, ExecOptions, Instruction, ProtocolProgram, RegId,
    Schedule,
};
use crate::party::{Party, Topology};
use crate::protocols::build_for_family;

/// Player with the smallest per-party cost; lowest index on ties.
pub fn select_pivot(schedule: &Schedule) -> Party {
    schedule
        .topology()
        .players()
        .min_by_key(|&p| (schedule.qcc_per_party(p).expect("player of the topology"), p.index()))
        .expect("topology has players")
}

/// Two-block partition of the physical parties: the pivot alone, and all
/// others (coordinator included).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeMap {
    pub pivot: Party,
    pub k: usize,
}

impl MergeMap {
    pub fn new(pivot: Party, k: usize) -> Result<MergeMap> {
        match pivot.index() {
            Some(i) if (1..=k).contains(&i) && k >= 2 => Ok(MergeMap { pivot, k }),
            _ => Err(Error::InvalidMerge(format!("{pivot} is not one of {k} players"))),
        }
    }

    /// The block of a physical party: `P1` for the pivot, `P2` otherwise.
    pub fn block(&self, host: Party) -> Party {
        if host == self.pivot {
            Party::player(1)
        } else {
            Party::player(2)
        }
    }
}

/// Hosts the pivot's roles on `P1` and every other role on `P2`. Sends
/// inside Bob's block become free. Rounds without cross-block traffic are
/// dropped; a coordinator round's uplink and downlink share one label
/// unless some register crosses in both.
pub fn merge_players(program: &ProtocolProgram, map: MergeMap) -> Result<ProtocolProgram> {
    if map.k != program.topology().k {
        return Err(Error::InvalidMerge(format!(
            "merge map for {} players, program has {}",
            map.k,
            program.topology().k
        )));
    }
    let hosts: BTreeMap<Party, Party> =
        program.roles().parties().into_iter().map(|r| (r, map.block(program.host(r)))).collect();
    let topology = Topology::point_to_point(2)?;
    let merged = rehost(program, topology, hosts.clone(), |r, _, _| r);

    // Crossing keys of the original program, in key order, with the
    // registers that cross at each key in the merged program.
    let mut crossings: BTreeMap<(u32, u8), Vec<RegId>> = BTreeMap::new();
    for ins in program.instructions() {
        if let Instruction::Send { from, to, reg, round } = ins {
            if hosts[from] != hosts[to] {
                crossings.entry(causal_key(program, *from, *round)).or_default().push(*reg);
            }
        }
    }
    let mut labels: BTreeMap<(u32, u8), u32> = BTreeMap::new();
    let mut label = 0;
    let mut previous: Option<((u32, u8), &Vec<RegId>)> = None;
    for (key, regs) in &crossings {
        let share = matches!(previous, Some((prev, prev_regs))
            if prev.0 == key.0 && !regs.iter().any(|r| prev_regs.contains(r)));
        if !share {
            label += 1;
        }
        labels.insert(*key, label);
        previous = Some((*key, regs));
    }
    let instructions = program
        .instructions()
        .iter()
        .map(|ins| match ins {
            Instruction::Send { from, to, reg, round } => {
                let label = if hosts[from] != hosts[to] {
                    labels[&causal_key(program, *from, *round)]
                } else {
                    1
                };
                Instruction::Send { from: *from, to: *to, reg: *reg, round: label }
            }
            other => other.clone(),
        })
        .collect();
    let mut out = merged;
    out.instructions = Arc::new(instructions);
    out.name = format!("{}-merged", program.name());
    out.set_meta("pivot", map.pivot.to_string().into());
    crate::netmodel::analyze(&out, true)?;
    Ok(out)
}

/// Merges at `pivot` and lets Bob expand his input into the other players'
/// inputs through `map`. The result takes two inputs.
pub fn reduce_via_embedding(
    program: &ProtocolProgram,
    map: &EmbeddingMap,
    pivot: Party,
    spot_checks: usize,
    seed: u64,
) -> Result<ProtocolProgram> {
    if pivot.index() != Some(map.position) {
        return Err(Error::InvalidEmbedding(format!(
            "embedding places Alice at position {}, pivot is {pivot}",
            map.position
        )));
    }
    map.spot_check(program.n(), spot_checks, seed)?;
    let merged = merge_players(program, MergeMap::new(pivot, program.topology().k)?)?;
    let lift_map = map.clone();
    let lift = Arc::new(move |xs: &[BitString]| lift_map.lift(&xs[0], &xs[1]));
    Ok(merged.with_lifted_inputs(2, lift).with_name(&format!("{}-reduced", program.name())))
}

/// Cost and round comparison between a k-party protocol and its reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub protocol: String,
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub pivot: Party,
    pub qcc_original: u64,
    pub qcc_reduced: u64,
    /// `floor(2 qcc / k)`, the guaranteed ceiling on `qcc_reduced`.
    pub bound_2qcc_over_k: u64,
    pub within_bound: bool,
    /// `qcc / k`, the sharper ceiling some statements give; reported only.
    pub stated_qcc_over_k: f64,
    pub within_stated: bool,
    pub rounds_original: u32,
    pub rounds_reduced: u32,
    pub empirical_error: Option<f64>,
    pub trials: usize,
}

/// Reduces the shipped protocol for `family` at the cheapest pivot and
/// compares costs. With `trials > 0`, also measures the reduced protocol's
/// error on seeded random pairs against the two-party function.
pub fn run_reduction(
    family: &Family,
    n: usize,
    k: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<(ReductionReport, ProtocolProgram)> {
    let program = build_for_family(family, n, k, epsilon, None)?;
    let original = derive_schedule(&program)?;
    let pivot = select_pivot(&original);
    let map = embedding(family, k, pivot.index().expect("pivot is a player"))?;
    let reduced = reduce_via_embedding(&program, &map, pivot, 64, seed)?;
    let after = derive_schedule(&reduced)?;
    let qcc = original.qcc();
    let mut report = ReductionReport {
        protocol: program.name().to_string(),
        family: family.name().to_string(),
        n,
        k,
        pivot,
        qcc_original: qcc,
        qcc_reduced: after.qcc(),
        bound_2qcc_over_k: 2 * qcc / k as u64,
        within_bound: after.qcc() <= 2 * qcc / k as u64,
        stated_qcc_over_k: qcc as f64 / k as f64,
        within_stated: after.qcc() as f64 <= qcc as f64 / k as f64,
        rounds_original: original.rounds(),
        rounds_reduced: after.rounds(),
        empirical_error: None,
        trials,
    };
    if trials > 0 {
        report.empirical_error = Some(empirical_error(&reduced, &map, family, trials, seed)?);
    }
    Ok((report, reduced))
}

/// Fraction of runs on random pairs whose unanimous output differs from the
/// embedded function value; disagreement counts as an error.
pub fn empirical_error(
    reduced: &ProtocolProgram,
    map: &EmbeddingMap,
    family: &Family,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wrong = 0usize;
    for t in 0..trials {
        let pair = random_instance(family, reduced.n(), 2, &mut rng)?;
        let truth = family.eval(&map.lift(&pair[0], &pair[1]))?;
        let run = execute(reduced, &pair, &ExecOptions::seeded(seed.wrapping_add(t as u64)))?;
        wrong += (run.unanimous() != Some(truth)) as usize;
    }
    Ok(wrong as f64 / trials as f64)
}

/// One row of the upper-bound consistency table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub qcc: u64,
    pub qcc_over_k: f64,
    /// `sqrt(n l0) + l1` for symmetric families, absent for Equality.
    pub g: Option<f64>,
    /// `qcc / (k g)`.
    pub normalized: Option<f64>,
    /// `normalized / log2 n`.
    pub per_log_n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    /// Largest `per_log_n` over the rows: the fitted constant `C` with
    /// `qcc <= C k g log2 n` on the grid.
    pub fitted_constant: Option<f64>,
}

/// Evaluates the shipped protocol schedules over `ns x ks` and normalizes
/// their cost by `k` times the family's complexity measure.
pub fn check_lower_bound_consistency(
    family: &Family,
    ns: &[usize],
    ks: &[usize],
    epsilon: f64,
) -> Result<ConsistencyReport> {
    let mut rows = Vec::new();
    for &n in ns {
        for &k in ks {
            let fam = match family {
                Family::Symmetric { spec } if spec.n != n || spec.k != k => continue,
                other => other.clone(),
            };
            let qcc = derive_schedule(&build_for_family(&fam, n, k, epsilon, None)?)?.qcc();
            let g = fam.symmetric_spec(n, k).map(|s| s.g());
            let normalized = g.map(|g| qcc as f64 / (k as f64 * g));
            rows.push(ConsistencyRow {
                family: fam.name().to_string(),
                n,
                k,
                qcc,
                qcc_over_k: qcc as f64 / k as f64,
                g,
                normalized,
                per_log_n: normalized.map(|v| v / (n as f64).log2()),
            });
        }
    }
    let fitted_constant = rows.iter().filter_map(|r| r.per_log_n).reduce(f64::max);
    Ok(ConsistencyReport { rows, fitted_constant })
}
