//! Seeded input generators for experiments and tests.

use rand::seq::index::sample;
use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::functions::Family;

/// `k` inputs whose intersection has exactly `weight` coordinates, chosen
/// uniformly; every other coordinate is a uniform non-all-ones column.
pub fn planted_intersection<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    weight: usize,
    rng: &mut R,
) -> Result<Vec<BitString>> {
    if weight > n || k == 0 {
        return Err(Error::InvalidParameter(format!("cannot plant weight {weight} in {n} bits")));
    }
    let common = sample(rng, n, weight).into_vec();
    let mut inputs = vec![BitString::zeros(n); k];
    for i in 0..n {
        if common.contains(&i) {
            inputs.iter_mut().for_each(|x| x.set(i, true));
            continue;
        }
        let all_ones = (1u64 << k.min(63)) - 1;
        let column = loop {
            let c: u64 = rng.random::<u64>() & all_ones;
            if c != all_ones || k > 63 {
                break c;
            }
        };
        for (j, x) in inputs.iter_mut().enumerate() {
            x.set(i, column >> j & 1 == 1);
        }
    }
    Ok(inputs)
}

/// `k` copies of one uniform string, or, when `equal` is false, copies with
/// one uniformly chosen bit of one uniformly chosen party flipped.
pub fn equality_instance<R: Rng + ?Sized>(n: usize, k: usize, equal: bool, rng: &mut R) -> Vec<BitString> {
    let x = BitString::random(n, rng);
    let mut inputs = vec![x; k];
    if !equal {
        let (p, i) = (rng.random_range(0..k), rng.random_range(0..n));
        inputs[p].flip(i);
    }
    inputs
}

/// An instance for `family` with both answers equally likely where the
/// family allows it: half the DISJ instances are disjoint, half the
/// Equality instances are equal, and symmetric families get a uniform
/// intersection weight.
pub fn random_instance<R: Rng + ?Sized>(
    family: &Family,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<BitString>> {
    match family {
        Family::Disj => {
            let weight = if rng.random_bool(0.5) { 0 } else { rng.random_range(1..=n) };
            planted_intersection(n, k, weight, rng)
        }
        Family::Equality => Ok(equality_instance(n, k, rng.random_bool(0.5), rng)),
        Family::InnerProduct | Family::Symmetric { .. } => {
            let weight = rng.random_range(0..=n);
            planted_intersection(n, k, weight, rng)
        }
    }
}
