//! Schedule-only scaling of the search-based protocols. No simulation: the
//! schedules are input-independent, so cost is read off the program text.

use std::f64::consts::PI;

use oblivq::functions::Family;
use oblivq::netmodel::derive_schedule;
use oblivq::protocols::{build_disj_grover, search_cost, GroverPlan, QueryGadget};
use oblivq::reduction::check_lower_bound_consistency;

const EPS: f64 = 1.0 / 3.0;

fn slope(points: &[(f64, f64)]) -> f64 {
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / len;
    let cov: f64 = points.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    cov / var
}

/// Attempt lengths `max(2, min(ceil(1.2^t), ceil(pi/4 sqrt n)))` for `t = 1..`,
/// with the last one cut so the oracle calls total at most `3 ceil(sqrt n)`.
fn attempt_lengths(n: usize, count: usize) -> Vec<u64> {
    let cap = (PI / 4.0 * (n as f64).sqrt()).ceil() as u64;
    let mut budget = 3 * (n as f64).sqrt().ceil() as u64;
    let mut out = Vec::new();
    for t in 1..=count as i32 {
        let m = (1.2f64.powi(t).ceil() as u64).min(cap).max(2).min(budget + 1);
        budget -= m - 1;
        out.push(m);
    }
    out
}

#[test]
fn attempt_lengths_follow_growth_rule() {
    for j in 2..=14 {
        let n = 1usize << j;
        let plan = GroverPlan::new(n, EPS).unwrap();
        assert_eq!(plan.attempts, attempt_lengths(n, plan.attempts.len()), "n = {n}");
        assert!(plan.worst_case_failure() <= EPS);
    }
    assert_eq!(GroverPlan::new(64, EPS).unwrap().attempts, vec![2, 2, 2, 3, 3, 3, 4, 5]);
}

#[test]
fn oracle_calls_grow_as_square_root() {
    let points: Vec<(f64, f64)> = (8..=16)
        .map(|j| {
            let n = 1usize << j;
            (n as f64, GroverPlan::new(n, EPS).unwrap().slots() as f64)
        })
        .collect();
    let s = slope(&points);
    assert!((0.45..=0.55).contains(&s), "oracle-call exponent {s}");
}

#[test]
fn qcc_is_sqrt_n_log_n() {
    // Each oracle call ships O(k log n) qubits, so qcc / (sqrt(n) log n) stays bounded
    // while the plain exponent over small n is inflated by the log factor.
    let k = 3;
    let mut ratios = Vec::new();
    for j in (4..=16).step_by(2) {
        let n = 1usize << j;
        let qcc = search_cost(&QueryGadget::new(n, k).unwrap(), &GroverPlan::new(n, EPS).unwrap());
        ratios.push(qcc as f64 / ((n as f64).sqrt() * j as f64));
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 2.0, "normalized cost spread {lo}..{hi}");

    let small: Vec<(f64, f64)> = [4usize, 16, 64]
        .iter()
        .map(|&n| (n as f64, derive_schedule(&build_disj_grover(n, k, EPS).unwrap()).unwrap().qcc() as f64))
        .collect();
    assert_eq!(small.iter().map(|p| p.1 as u64).collect::<Vec<_>>(), vec![120, 333, 1419]);
    let s = slope(&small);
    assert!((0.85..0.95).contains(&s), "small-n exponent {s}");
}

#[test]
fn consistency_constant_is_uniform_over_grid() {
    let report = check_lower_bound_consistency(&Family::Disj, &[4, 16, 64], &[2, 3, 4], EPS).unwrap();
    let c = report.fitted_constant.unwrap();
    for row in &report.rows {
        let g = row.g.unwrap();
        assert!(row.qcc as f64 <= c * row.k as f64 * g * (row.n as f64).log2() + 1e-9);
    }
    let eq = check_lower_bound_consistency(&Family::Equality, &[4, 64, 1024], &[2, 5], EPS).unwrap();
    assert!(eq.rows.iter().all(|r| r.qcc_over_k == 3.0));
}
