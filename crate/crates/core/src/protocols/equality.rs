use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::netmodel::{BindingId, ProgramBuilder, ProtocolProgram, RandomSpec};
use crate::party::{Party, Topology};

use super::ceil_log2;

/// Shared random `n`-bit string as 64-bit chunks, low coordinates first.
fn shared_string(b: &mut ProgramBuilder, n: usize, name: &str) -> Vec<BindingId> {
    (0..n.div_ceil(64))
        .map(|c| {
            let width = (n - 64 * c).min(64) as u32;
            b.shared_random(RandomSpec::Bits(width), name)
        })
        .collect()
}

/// Inner-product fingerprint equality test with `repetitions` shared
/// strings. Each player sends one parity bit per string to the
/// coordinator, which accepts iff every string yields equal parities.
///
/// Shared randomness is drawn string by string, each as `ceil(n/64)`
/// chunks. Cost `c k + k` in two rounds. All-equal inputs always pass.
pub fn build_equality(n: usize, k: usize, repetitions: usize) -> Result<ProtocolProgram> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter("equality needs at least one repetition".into()));
    }
    let mut b = ProgramBuilder::new("equality", Topology::coordinator(k)?, n, 0.5f64.powi(repetitions as i32));
    let strings: Vec<Vec<BindingId>> =
        (0..repetitions).map(|l| shared_string(&mut b, n, &format!("r{}", l + 1))).collect();
    let mut parities: Vec<Vec<BindingId>> = Vec::new();
    for p in b.players() {
        let mine = strings
            .iter()
            .map(|chunks| {
                let chunks = chunks.clone();
                b.send_classical(p, Party::Coordinator, 1, 1, "parity", move |v| {
                    let x = v.input();
                    let ones: u32 = chunks
                        .iter()
                        .enumerate()
                        .map(|(c, &r)| (x.word(64 * c) & v.get(r)).count_ones())
                        .sum();
                    (ones % 2) as u64
                })
            })
            .collect();
        parities.push(mine);
    }
    b.broadcast_output(Party::Coordinator, 2, move |v| {
        (0..repetitions).all(|l| parities.iter().all(|pp| v.get(pp[l]) == v.get(parities[0][l])))
    });
    b.set_meta("repetitions", repetitions);
    b.build()
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Smallest prime strictly greater than `3n`.
pub fn fingerprint_prime(n: usize) -> u64 {
    (3 * n as u64 + 1..).find(|&p| is_prime(p)).expect("primes are unbounded")
}

/// `sum_i x_i a^i mod p`.
pub fn poly_fingerprint(x: &BitString, a: u64, p: u64) -> u64 {
    let (mut acc, mut pow) = (0u128, 1u128);
    let (a, p) = (a as u128, p as u128);
    for &bit in x.bits() {
        if bit {
            acc = (acc + pow) % p;
        }
        pow = pow * a % p;
    }
    acc as u64
}

/// Polynomial fingerprint equality test over the field of the smallest
/// prime above `3n`. Each player sends its evaluation at a shared point.
/// Cost `k ceil(log2 P) + k`; false acceptance at most `n / P < 1/3`.
pub fn build_equality_poly(n: usize, k: usize) -> Result<ProtocolProgram> {
    let prime = fingerprint_prime(n);
    let width = ceil_log2(prime);
    let mut b = ProgramBuilder::new("equality-poly", Topology::coordinator(k)?, n, n as f64 / prime as f64);
    let point = b.shared_random(RandomSpec::Below(prime), "point");
    let values: Vec<BindingId> = b
        .players()
        .into_iter()
        .map(|p| {
            b.send_classical(p, Party::Coordinator, 1, width, "fingerprint", move |v| {
                poly_fingerprint(v.input(), v.get(point), prime)
            })
        })
        .collect();
    b.broadcast_output(Party::Coordinator, 2, move |v| {
        values.iter().all(|&f| v.get(f) == v.get(values[0]))
    });
    b.set_meta("prime", prime);
    b.build()
}
