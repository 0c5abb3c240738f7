//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use oblivq::bits::{parse_inputs, BitString};
use oblivq::functions::{embedding, g, l0, l1, split_d, Family, SymmetricSpec};
use oblivq::instances::{planted_intersection, random_instance};
use oblivq::netmodel::{
    derive_schedule, execute, to_coordinator, to_point_to_point, verify_oblivious, Action,
    BindingId, ExecOptions, ProgramBuilder, ProtocolProgram, Schedule,
};
use oblivq::party::{Party, Topology};
use oblivq::protocols::{
    build_aa_cost_model, build_bounded_round_disj, build_disj_grover, build_equality,
    build_equality_poly, build_f1_subprotocol, build_query_gadget, build_symmetric, gadget_harness,
    AaCostModel, GroverPlan,
};
use oblivq::reduction::run_reduction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

const EPS: f64 = 1.0 / 3.0;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:.0?}"))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Maps `f` over `items` on all available cores, preserving order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Bits needed to index `n` items, by counting.
fn width_for(n: u64) -> u64 {
    let mut w = 0;
    while (1u64 << w) < n {
        w += 1;
    }
    w
}

/// Smallest `l` with `l * l >= target`, by bisection.
fn root_ceiling(target: u64) -> u64 {
    let (mut lo, mut hi) = (0u64, target.max(1));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if mid * mid >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn unanimous(p: &ProtocolProgram, inputs: &[BitString], opts: &ExecOptions) -> Result<Option<bool>, String> {
    Ok(execute(p, inputs, opts).map_err(err)?.unanimous())
}

/// Every protocol the toolkit ships, at size `(n, k)`, with its target function.
fn shipped(n: usize, k: usize) -> Result<Vec<(String, ProtocolProgram, Family)>, String> {
    let threshold = SymmetricSpec::threshold(n, k, 2);
    let high = SymmetricSpec::threshold(n, k, n - 1);
    let disj = build_disj_grover(n, k, EPS).map_err(err)?;
    Ok(vec![
        ("disj-grover".into(), disj.clone(), Family::Disj),
        ("disj-bounded-M2".into(), build_bounded_round_disj(n, k, 2, EPS).map_err(err)?, Family::Disj),
        ("equality".into(), build_equality(n, k, 2).map_err(err)?, Family::Equality),
        ("equality-poly".into(), build_equality_poly(n, k).map_err(err)?, Family::Equality),
        (
            "symmetric-threshold2".into(),
            build_symmetric(&threshold, EPS).map_err(err)?,
            Family::Symmetric { spec: threshold },
        ),
        (
            "symmetric-ip".into(),
            build_symmetric(&SymmetricSpec::inner_product(n, k), EPS).map_err(err)?,
            Family::InnerProduct,
        ),
        ("f1-threshold".into(), build_f1_subprotocol(&high).map_err(err)?, Family::Symmetric { spec: high }),
        ("disj-grover-p2p".into(), to_point_to_point(&disj).map_err(err)?, Family::Disj),
    ])
}

fn ac1_gadget_cost() -> Outcome {
    let start = Instant::now();
    for n in [4u64, 8, 16] {
        for k in [2u64, 3, 4] {
            let gadget = build_query_gadget(n as usize, k as usize).map_err(err)?;
            let (prog, _, _) = gadget_harness(&gadget, |_, _| Action::Identity, 1).map_err(err)?;
            let s = derive_schedule(&prog).map_err(err)?;
            let want = 4 * k * width_for(n) + 2 * k;
            ensure(s.qcc() == want, || format!("n={n} k={k}: qcc {} != {want}", s.qcc()))?;
            ensure(s.rounds() == 4, || format!("n={n} k={k}: {} rounds", s.rounds()))?;
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok("9 cells match 4k*w+2k, 4 rounds each".into())
}

fn ac2_aa_model() -> Outcome {
    let start = Instant::now();
    let mut ns: Vec<u64> = (1..=20).map(|j| 1u64 << j).collect();
    ns.extend([3, 17, 1000, 65_537, 999_999, (1 << 20) - 1]);
    for &n in &ns {
        for k in [2u64, 3, 7, 16, 64] {
            let s = build_aa_cost_model(n as usize, k as usize).map_err(err)?;
            let want = 2 * k * root_ceiling(n) + k;
            ensure(s.qcc() == want, || format!("n={n} k={k}: {} != {want}", s.qcc()))?;
            let doubled = AaCostModel::new(n as usize, k as usize, 2.0).map_err(err)?;
            let want2 = 2 * k * root_ceiling(4 * n) + k;
            ensure(doubled.qcc() == want2, || format!("c=2 n={n} k={k}: {} != {want2}", doubled.qcc()))?;
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 10..=20 {
        let q = build_aa_cost_model(1 << j, 3).map_err(err)?.qcc();
        xs.push(f64::from(j) * std::f64::consts::LN_2);
        ys.push((q as f64).ln());
    }
    let slope = least_squares_slope(&xs, &ys);
    ensure((0.49..=0.51).contains(&slope), || format!("log-log slope {slope:.4} outside [0.49, 0.51]"))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} sizes x 5 k match 2kL+k, slope {slope:.4}", ns.len()))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let len = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / len, ys.iter().sum::<f64>() / len);
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn ac3_disj_correctness() -> Outcome {
    let start = Instant::now();
    let (n, k) = (8, 3);
    let program = build_disj_grover(n, k, EPS).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let cases: Vec<(Vec<BitString>, u64)> = (0..50)
        .map(|_| random_instance(&Family::Disj, n, k, &mut rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?
        .into_iter()
        .flat_map(|x| (0..10u64).map(move |s| (x.clone(), s)))
        .collect();
    let results = par_map(&cases, |(x, seed)| -> Result<(bool, Option<bool>), String> {
        let truth = Family::Disj.eval(x).map_err(err)?;
        Ok((truth, unanimous(&program, x, &ExecOptions::seeded(1000 + seed))?))
    });
    let (mut false_pos, mut misses, mut positives) = (0, 0, 0);
    for r in results {
        let (truth, out) = r?;
        if truth {
            positives += 1;
            misses += (out != Some(true)) as usize;
        } else {
            false_pos += (out != Some(false)) as usize;
        }
    }
    let fn_rate = misses as f64 / positives.max(1) as f64;
    ensure(false_pos == 0, || format!("{false_pos} false positives"))?;
    ensure(fn_rate <= EPS, || format!("false-negative rate {fn_rate:.3}"))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("500 runs, 0 false positives, FN rate {fn_rate:.3} over {positives} intersecting runs"))
}

fn ac4_obliviousness() -> Outcome {
    let mut configs = Vec::new();
    for n in [4, 8] {
        for k in [2, 3, 4] {
            for (name, program, family) in shipped(n, k)? {
                configs.push((n, k, name, program, family));
            }
        }
    }
    let seeds: Vec<u64> = (0..5).collect();
    let reports = par_map(&configs, |(n, k, name, program, family)| -> Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64((*n * 100 + *k) as u64);
        let inputs: Vec<Vec<BitString>> =
            (0..20).map(|_| random_instance(family, *n, *k, &mut rng)).collect::<Result<_, _>>().map_err(err)?;
        let report = verify_oblivious(program, &inputs, &seeds);
        ensure(report.is_oblivious() && report.executions == 100, || {
            format!(
                "{name} n={n} k={k}: {} executions, {} divergent, errors {:?}",
                report.executions, report.divergent_executions, report.errors
            )
        })
    });
    for r in reports {
        r?;
    }
    Ok(format!("{} protocol configurations, 100 (input, seed) pairs each, 0 divergences", configs.len()))
}

fn ac5_reduction() -> Outcome {
    let n = 4;
    let mut details = Vec::new();
    for k in [3usize, 4, 5] {
        for family in [Family::Disj, Family::Equality] {
            let trials = if family == Family::Disj { 200 } else { 0 };
            let (report, reduced) = run_reduction(&family, n, k, EPS, trials, 500 + k as u64).map_err(err)?;
            let tag = format!("{} k={k}", family.name());
            let bound = 2 * report.qcc_original / k as u64;
            ensure(report.qcc_reduced <= bound, || format!("{tag}: {} > {bound}", report.qcc_reduced))?;
            ensure(report.rounds_reduced <= report.rounds_original, || {
                format!("{tag}: rounds {} > {}", report.rounds_reduced, report.rounds_original)
            })?;
            let error = match family {
                Family::Equality => {
                    let map = embedding(&family, k, report.pivot.index().expect("player pivot")).map_err(err)?;
                    exhaustive_equality_error(&reduced, &map, n, 600 + k as u64)?
                }
                _ => report.empirical_error.expect("trials requested"),
            };
            ensure(error <= EPS, || format!("{tag}: error {error:.3}"))?;
            details.push(format!("{tag} {}<={bound} err {error:.3}", report.qcc_reduced));
        }
    }
    Ok(details.join(", "))
}

/// Worst error over 200 random pairs, each averaged over every value of the
/// two 4-bit shared strings.
fn exhaustive_equality_error(
    reduced: &ProtocolProgram,
    map: &oblivq::functions::EmbeddingMap,
    n: usize,
    seed: u64,
) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<Vec<BitString>> =
        (0..200).map(|_| random_instance(&Family::Equality, n, 2, &mut rng)).collect::<Result<_, _>>().map_err(err)?;
    let errors = par_map(&pairs, |pair| -> Result<f64, String> {
        let truth = Family::Equality.eval(&map.lift(&pair[0], &pair[1])).map_err(err)?;
        let mut wrong = 0;
        for r in 0..256u64 {
            let opts = ExecOptions { shared_random: Some(vec![r & 15, r >> 4]), ..ExecOptions::seeded(r) };
            wrong += (unanimous(reduced, pair, &opts)? != Some(truth)) as u32;
        }
        Ok(f64::from(wrong) / 256.0)
    });
    errors.into_iter().try_fold(0.0f64, |worst, e| Ok(worst.max(e?)))
}

fn ac6_double_counting() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for trial in 0..500 {
        let k = rng.random_range(2..=8);
        let mut s = Schedule::new(Topology::point_to_point(k).map_err(err)?, 16);
        let mut total = 0u64;
        for _ in 0..rng.random_range(0..40) {
            let from = rng.random_range(1..=k);
            let to = (from + rng.random_range(1..k) - 1) % k + 1;
            let count = rng.random_range(1..=9u64);
            s.add(rng.random_range(1..=12), Party::player(from), Party::player(to), count).map_err(err)?;
            total += count;
        }
        let per_party: u64 = (1..=k).map(|i| s.qcc_per_party(Party::player(i))).sum::<Result<u64, _>>().map_err(err)?;
        ensure(s.qcc() == total && per_party == 2 * total, || {
            format!("schedule {trial}: qcc {} total {total} per-party sum {per_party}", s.qcc())
        })?;
    }
    within(start, Duration::from_secs(1))?;
    Ok("500 random schedules satisfy sum of per-party costs = 2 qcc".into())
}

/// Three players exchanging registers of 2, 1, 3 and 1 qubits in rounds 1 to 4.
fn fig_program() -> Result<ProtocolProgram, String> {
    let p = Party::player;
    let mut b = ProgramBuilder::new("fig", Topology::point_to_point(3).map_err(err)?, 4, 0.0);
    for (from, to, width, round) in [(1, 2, 2, 1), (1, 3, 1, 2), (2, 3, 3, 3), (3, 1, 1, 4)] {
        let r = b.alloc(p(from), width, "m");
        b.send(p(from), p(to), r, round);
        b.release(r);
    }
    for i in 1..=3 {
        b.output(p(i), |_| false);
    }
    b.build().map_err(err)
}

/// Random point-to-point chain: each step loads the sender's low input bits
/// into a fresh register and ships it; receivers output the parity of what
/// they measured together with their own first bit.
fn random_chain(rng: &mut ChaCha8Rng) -> Result<ProtocolProgram, String> {
    let k = rng.random_range(2..=4);
    let n = 4;
    let mut b = ProgramBuilder::new("chain", Topology::point_to_point(k).map_err(err)?, n, 0.0);
    let mut received: Vec<Vec<BindingId>> = vec![Vec::new(); k];
    for round in 1..=rng.random_range(1..=6u32) {
        let from = rng.random_range(1..=k);
        let to = (from + rng.random_range(1..k) - 1) % k + 1;
        let width = rng.random_range(1..=3usize);
        let reg = b.alloc(Party::player(from), width, "payload");
        b.local(Party::player(from), move |v| Action::load(reg, v.input().word(0) & ((1 << width) - 1)));
        b.send(Party::player(from), Party::player(to), reg, round);
        received[to - 1].push(b.measure(Party::player(to), reg, "payload"));
    }
    for (i, mine) in received.into_iter().enumerate() {
        b.output(Party::player(i + 1), move |v| {
            mine.iter().fold(v.bit(0), |acc, &m| acc ^ (v.get(m).count_ones() % 2 == 1))
        });
    }
    b.build().map_err(err)
}

fn ac7_conversions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut p2p = vec![fig_program()?];
    for _ in 0..50 {
        p2p.push(random_chain(&mut rng)?);
    }
    for program in &p2p {
        let relayed = to_coordinator(program).map_err(err)?;
        let (before, after) = (derive_schedule(program).map_err(err)?, derive_schedule(&relayed).map_err(err)?);
        ensure(after.qcc() == 2 * before.qcc(), || format!("{}: {} != 2*{}", program.name(), after.qcc(), before.qcc()))?;
        let k = program.topology().k;
        for _ in 0..4 {
            let x: Vec<BitString> = (0..k).map(|_| BitString::random(program.n(), &mut rng)).collect();
            let opts = ExecOptions::seeded(rng.random());
            let (a, b) = (execute(program, &x, &opts).map_err(err)?, execute(&relayed, &x, &opts).map_err(err)?);
            ensure(a.outputs == b.outputs, || format!("{}: outputs differ after relaying", program.name()))?;
        }
    }

    let (n, k) = (4, 3);
    let protocols: Vec<_> = shipped(n, k)?.into_iter().filter(|(name, ..)| !name.ends_with("-p2p")).collect();
    let deviations = par_map(&protocols, |(name, program, family)| -> Result<f64, String> {
        let converted = to_point_to_point(program).map_err(err)?;
        let (co, pp) = (derive_schedule(program).map_err(err)?, derive_schedule(&converted).map_err(err)?);
        ensure(pp.qcc() <= co.qcc(), || format!("{name}: qcc {} > {}", pp.qcc(), co.qcc()))?;
        ensure(pp.rounds() <= 2 * co.rounds(), || format!("{name}: rounds {} > 2*{}", pp.rounds(), co.rounds()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(name.len() as u64);
        let x = match family {
            Family::Disj => planted_intersection(n, k, 1, &mut rng).map_err(err)?,
            other => random_instance(other, n, k, &mut rng).map_err(err)?,
        };
        let (mut ones_co, mut ones_pp) = (0u32, 0u32);
        for seed in 0..2000 {
            let opts = ExecOptions::seeded(seed);
            ones_co += (unanimous(program, &x, &opts)? == Some(true)) as u32;
            ones_pp += (unanimous(&converted, &x, &opts)? == Some(true)) as u32;
        }
        let deviation = (f64::from(ones_co) - f64::from(ones_pp)).abs() / 2000.0;
        ensure(deviation < 0.05, || format!("{name}: output frequency deviation {deviation:.4}"))?;
        Ok(deviation)
    });
    let worst = deviations.into_iter().try_fold(0.0f64, |w, d| Ok::<f64, String>(w.max(d?)))?;
    Ok(format!(
        "{} p2p programs double under relaying; {} protocols convert with max deviation {worst:.4}",
        p2p.len(),
        protocols.len()
    ))
}

fn ac8_symmetric_split() -> Outcome {
    let spec = SymmetricSpec::threshold(5, 3, 4);
    ensure(l1(&spec) == 2, || format!("threshold(5,3,4) has l1 = {}", l1(&spec)))?;
    let f1 = build_f1_subprotocol(&spec).map_err(err)?;
    let words: Vec<u64> = (0..1u64 << 15).collect();
    let wrong: usize = par_map(&words, |&w| -> Result<usize, String> {
        let x: Vec<BitString> = (0..3).map(|j| BitString::from_u64(w >> (5 * j) & 31, 5)).collect();
        let truth = spec.eval(&x).map_err(err)?;
        Ok((unanimous(&f1, &x, &ExecOptions::seeded(w))? != Some(truth)) as usize)
    })
    .into_iter()
    .sum::<Result<usize, String>>()?;
    ensure(wrong == 0, || format!("f1 wrong on {wrong} of 32768 inputs"))?;

    let full = SymmetricSpec::threshold(8, 3, 2);
    ensure(l0(&full) == 2, || format!("threshold(8,3,2) has l0 = {}", l0(&full)))?;
    let program = build_symmetric(&full, EPS).map_err(err)?;
    let trials: Vec<u64> = (0..300).collect();
    let errors: usize = par_map(&trials, |&t| -> Result<usize, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(8000 + t);
        let x = planted_intersection(8, 3, (t % 5) as usize, &mut rng).map_err(err)?;
        let truth = full.eval(&x).map_err(err)?;
        Ok((unanimous(&program, &x, &ExecOptions::seeded(t))? != Some(truth)) as usize)
    })
    .into_iter()
    .sum::<Result<usize, String>>()?;
    let rate = errors as f64 / 300.0;
    ensure(rate <= EPS, || format!("symmetric error {rate:.3}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut checked = 0;
    while checked < 200 {
        let n = rng.random_range(2..=12);
        let table: Vec<bool> = normalizable_table(n, &mut rng);
        let spec = SymmetricSpec::new(n, 2, table.clone()).map_err(err)?;
        let split = split_d(&spec).map_err(|e| format!("table {}: {e}", spec.table_string()))?;
        ensure(split.reconstruct() == table, || format!("table {} does not reconstruct", spec.table_string()))?;
        let low_ok = (split.l0 + 1..=n).all(|m| !split.d0[m]);
        let high_ok = (0..=n - split.l1).all(|m| !split.d1[m]);
        ensure(low_ok && high_ok, || format!("table {}: split parts leak into the middle", spec.table_string()))?;
        checked += 1;
    }
    Ok(format!("f1 exact on 32768 inputs; symmetric error {rate:.3}; 200 tables reconstruct"))
}

/// Random table that is constant between its last flip at or below `n/2`
/// and its first flip at or above `n/2`.
fn normalizable_table(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let lo = rng.random_range(0..=n / 2);
    let hi = rng.random_range(n.div_ceil(2)..=n);
    let middle = rng.random_bool(0.5);
    (0..=n).map(|m| if (lo..=hi).contains(&m) { middle } else { rng.random_bool(0.5) }).collect()
}

/// Flip-point parameters straight from their definitions, scanning outward
/// from the middle.
fn brute_force_params(table: &[bool]) -> (usize, usize, f64) {
    let n = table.len() - 1;
    let low = (1..=n / 2).rev().find(|&l| table[l] != table[l - 1]).unwrap_or(0);
    let high = (n.div_ceil(2)..n).find(|&l| table[l] != table[l + 1]).map_or(0, |l| n - l);
    (low, high, ((n * low) as f64).sqrt() + high as f64)
}

fn ac9_flip_points() -> Outcome {
    let n = 8;
    for bits in 0..1u32 << (n + 1) {
        let table: Vec<bool> = (0..=n).map(|m| bits >> m & 1 == 1).collect();
        let spec = SymmetricSpec::new(n, 2, table.clone()).map_err(err)?;
        let (want_l0, want_l1, want_g) = brute_force_params(&table);
        ensure(l0(&spec) == want_l0 && l1(&spec) == want_l1 && (g(&spec) - want_g).abs() < 1e-12, || {
            format!("table {}: got ({}, {}, {}), want ({want_l0}, {want_l1}, {want_g})", spec.table_string(), l0(&spec), l1(&spec), g(&spec))
        })?;
    }
    let disj = SymmetricSpec::disj(n, 3);
    let ip = SymmetricSpec::inner_product(n, 3);
    ensure((l0(&disj), l1(&disj)) == (1, 0), || format!("DISJ gives ({}, {})", l0(&disj), l1(&disj)))?;
    ensure((l0(&ip), l1(&ip)) == (4, 4), || format!("IP gives ({}, {})", l0(&ip), l1(&ip)))?;
    Ok("512 tables match brute force; DISJ (1, 0), IP (4, 4)".into())
}

fn ac10_equality() -> Outcome {
    let n = 4;
    let program = build_equality(n, 2, 2).map_err(err)?;
    let accepts = |x: &[BitString]| -> Result<u32, String> {
        let mut count = 0;
        for r in 0..256u64 {
            let opts = ExecOptions { shared_random: Some(vec![r & 15, r >> 4]), ..ExecOptions::seeded(r) };
            count += (unanimous(&program, x, &opts)? == Some(true)) as u32;
        }
        Ok(count)
    };
    let target = parse_inputs(&["0110", "0111"]).map_err(err)?;
    let hits = accepts(&target)?;
    ensure(hits == 64, || format!("one-bit-differing pair accepted {hits}/256"))?;

    let pairs: Vec<(u64, u64)> = (0..16).flat_map(|a| (0..16).map(move |b| (a, b))).collect();
    let counts = par_map(&pairs, |&(a, b)| accepts(&[BitString::from_u64(a, n), BitString::from_u64(b, n)]));
    let mut cases = 0;
    for (&(a, b), c) in pairs.iter().zip(counts) {
        let c = c?;
        cases += 256;
        let want = if a == b { 256 } else { 64 };
        ensure(c == want, || format!("pair ({a:04b}, {b:04b}) accepted {c}/256, want {want}"))?;
    }
    for k in 2..=8 {
        let q = derive_schedule(&build_equality(n, k, 2).map_err(err)?).map_err(err)?.qcc();
        ensure(q == 3 * k as u64, || format!("k={k}: qcc {q} != {}", 3 * k))?;
    }
    Ok(format!("target pair 64/256; {cases} cases: equal pairs always accept, unequal 1/4; qcc = 3k"))
}

fn ac11_bounded_round() -> Outcome {
    let (n, k, m) = (16, 3, 2);
    let bounded = build_bounded_round_disj(n, k, m, EPS).map_err(err)?;
    let full = build_disj_grover(n, k, EPS).map_err(err)?;
    let (sb, sf) = (derive_schedule(&bounded).map_err(err)?, derive_schedule(&full).map_err(err)?);
    ensure(sb.rounds() < sf.rounds(), || format!("rounds {} not below {}", sb.rounds(), sf.rounds()))?;

    let block = (m * m) as u64;
    let plan = GroverPlan::new(block as usize, EPS).map_err(err)?;
    let (kk, w) = (k as u64, width_for(block));
    let slots: u64 = plan.attempts.iter().map(|&a| a - 1).sum();
    let per_block = slots * (4 * kk * w + 2 * kk) + plan.attempts.len() as u64 * kk * (w + 1) + kk;
    let want = (n as u64).div_ceil(block) * per_block;
    ensure(sb.qcc() == want, || format!("qcc {} != {want}", sb.qcc()))?;

    let trials: Vec<u64> = (0..300).collect();
    let errors: usize = par_map(&trials, |&t| -> Result<usize, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(11_000 + t);
        let x = random_instance(&Family::Disj, n, k, &mut rng).map_err(err)?;
        let truth = Family::Disj.eval(&x).map_err(err)?;
        Ok((unanimous(&bounded, &x, &ExecOptions::seeded(t))? != Some(truth)) as usize)
    })
    .into_iter()
    .sum::<Result<usize, String>>()?;
    let rate = errors as f64 / 300.0;
    ensure(rate <= EPS, || format!("error {rate:.3}"))?;
    Ok(format!("rounds {} < {}; qcc {} = 4 x {per_block}; error {rate:.3}", sb.rounds(), sf.rounds(), sb.qcc()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("AC1", "query gadget cost", ac1_gadget_cost),
        ("AC2", "amplitude amplification cost model", ac2_aa_model),
        ("AC3", "DISJ correctness", ac3_disj_correctness),
        ("AC4", "obliviousness", ac4_obliviousness),
        ("AC5", "player-merge reduction", ac5_reduction),
        ("AC6", "double counting", ac6_double_counting),
        ("AC7", "model conversions", ac7_conversions),
        ("AC8", "symmetric split", ac8_symmetric_split),
        ("AC9", "flip points", ac9_flip_points),
        ("AC10", "equality protocol", ac10_equality),
        ("AC11", "bounded-round split", ac11_bounded_round),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail} ({took:.2?})"),
            Err(reason) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {reason} ({took:.2?})");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
