use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Family;
use crate::bits::BitString;
use crate::error::{Error, Result};

type PadFn = Arc<dyn Fn(&BitString, usize) -> Vec<BitString> + Send + Sync>;

/// How Bob's string is expanded into the `k - 1` non-pivot inputs.
#[derive(Clone)]
pub enum Padding {
    /// `(x, 1^n, ..., 1^n)`
    Ones,
    /// `k - 1` copies of `x`
    Copies,
    /// Arbitrary map from `(x, k)` to `k - 1` strings.
    Custom(PadFn),
}

impl fmt::Debug for Padding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Padding::Ones => f.write_str("Ones"),
            Padding::Copies => f.write_str("Copies"),
            Padding::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Plants a two-party instance at position `position` (1-based) of a
/// `k`-party instance: `lift(x1, x2) = [pad(x2) with x1 inserted at position]`.
#[derive(Clone, Debug)]
pub struct EmbeddingMap {
    pub family: Family,
    pub k: usize,
    pub position: usize,
    pub padding: Padding,
}

/// Standard embedding: ones padding for symmetric families, copies for equality.
pub fn embedding(family: &Family, k: usize, position: usize) -> Result<EmbeddingMap> {
    let padding = match family {
        Family::Equality => Padding::Copies,
        _ => Padding::Ones,
    };
    EmbeddingMap::new(family.clone(), k, position, padding)
}

impl EmbeddingMap {
    pub fn new(family: Family, k: usize, position: usize, padding: Padding) -> Result<EmbeddingMap> {
        if k < 2 || position == 0 || position > k {
            return Err(Error::InvalidParameter(format!("position {position} not in 1..={k}")));
        }
        Ok(EmbeddingMap { family, k, position, padding })
    }

    /// The `k - 1` strings standing in for every party except the pivot.
    pub fn pad(&self, x: &BitString) -> Vec<BitString> {
        match &self.padding {
            Padding::Ones => {
                let mut out = vec![x.clone()];
                out.extend((2..self.k).map(|_| BitString::ones(x.len())));
                out
            }
            Padding::Copies => vec![x.clone(); self.k - 1],
            Padding::Custom(f) => f(x, self.k),
        }
    }

    /// Full `k`-party input with `x1` at the pivot position.
    pub fn lift(&self, x1: &BitString, x2: &BitString) -> Vec<BitString> {
        let mut out = self.pad(x2);
        out.insert(self.position - 1, x1.clone());
        out
    }

    /// Checks `f2(x1, x2) == fk(lift(x1, x2))` for one pair.
    pub fn holds_for(&self, x1: &BitString, x2: &BitString) -> Result<bool> {
        let lifted = self.lift(x1, x2);
        if lifted.len() != self.k {
            return Ok(false);
        }
        let pair = [x1.clone(), x2.clone()];
        Ok(self.family.eval(&pair)? == self.family.eval(&lifted)?)
    }

    /// Checks the identity on all `4^n` pairs.
    pub fn check_exhaustive(&self, n: usize) -> Result<bool> {
        for a in 0..1u64 << n {
            for b in 0..1u64 << n {
                if !self.holds_for(&BitString::from_u64(a, n), &BitString::from_u64(b, n))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Checks the identity on `samples` seeded random pairs, plus the
    /// all-equal and all-ones corners.
    pub fn spot_check(&self, n: usize, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = vec![
            (BitString::ones(n), BitString::ones(n)),
            (BitString::zeros(n), BitString::zeros(n)),
        ];
        for _ in 0..samples {
            let x1 = BitString::random(n, &mut rng);
            let x2 = if pairs.len() % 2 == 0 { x1.clone() } else { BitString::random(n, &mut rng) };
            pairs.push((x1, x2));
        }
        for (x1, x2) in &pairs {
            if !self.holds_for(x1, x2)? {
                return Err(Error::InvalidEmbedding(format!(
                    "{} at position {}: fails on ({x1}, {x2})",
                    self.family.name(),
                    self.position
                )));
            }
        }
        Ok(())
    }
}
