use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A party's input. Character `i` of the text form is coordinate `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitString(Vec<bool>);

impl BitString {
    pub const EMPTY: BitString = BitString(Vec::new());

    pub fn from_bits(bits: Vec<bool>) -> BitString {
        BitString(bits)
    }

    pub fn zeros(n: usize) -> BitString {
        BitString(vec![false; n])
    }

    pub fn ones(n: usize) -> BitString {
        BitString(vec![true; n])
    }

    /// Coordinate `i` is bit `i` of `value`.
    pub fn from_u64(value: u64, n: usize) -> BitString {
        BitString((0..n).map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitString {
        BitString((0..n).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Out-of-range coordinates read as 0 (zero padding).
    pub fn get(&self, i: usize) -> bool {
        self.0.get(i).copied().unwrap_or(false)
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn zero_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.0[i]).collect()
    }

    /// Bits `offset..offset + 64` packed little-endian.
    pub fn word(&self, offset: usize) -> u64 {
        (0..64).fold(0u64, |acc, j| acc | ((self.get(offset + j) as u64) << j))
    }

    /// Coordinates `offset..offset + len`, zero-padded past the end.
    pub fn window(&self, offset: usize, len: usize) -> BitString {
        BitString((offset..offset + len).map(|i| self.get(i)).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> BitString {
        BitString(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<BitString> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(BitString)
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;

    fn try_from(s: String) -> Result<BitString> {
        s.parse()
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

/// Parses a list like `["1010", "0011"]` of bit strings.
pub fn parse_inputs(items: &[&str]) -> Result<Vec<BitString>> {
    items.iter().map(|s| s.parse()).collect()
}
