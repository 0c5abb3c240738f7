//! Function families, flip-point arithmetic for symmetric predicates, the
//! low/high split of a predicate table, and embedding maps.

mod embedding;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use embedding::{embedding, EmbeddingMap, Padding};

use crate::bits::BitString;
use crate::error::{Error, Result};

fn check_lengths(inputs: &[BitString]) -> Result<usize> {
    let n = inputs.first().map(|x| x.len()).ok_or_else(|| Error::Input("no inputs".into()))?;
    if let Some(bad) = inputs.iter().find(|x| x.len() != n) {
        return Err(Error::Input(format!("length mismatch: {} vs {n}", bad.len())));
    }
    Ok(n)
}

/// Number of coordinates set in every input.
pub fn intersection_weight(inputs: &[BitString]) -> Result<usize> {
    let n = check_lengths(inputs)?;
    Ok((0..n).filter(|&i| inputs.iter().all(|x| x.get(i))).count())
}

/// 1 iff some coordinate is 1 in all inputs.
pub fn eval_disj(inputs: &[BitString]) -> Result<bool> {
    Ok(intersection_weight(inputs)? > 0)
}

/// Parity of the intersection weight.
pub fn eval_ip(inputs: &[BitString]) -> Result<bool> {
    Ok(intersection_weight(inputs)? % 2 == 1)
}

/// 1 iff all inputs are identical.
pub fn eval_equality(inputs: &[BitString]) -> Result<bool> {
    check_lengths(inputs)?;
    Ok(inputs.windows(2).all(|w| w[0] == w[1]))
}

pub fn eval_symmetric(spec: &SymmetricSpec, inputs: &[BitString]) -> Result<bool> {
    let n = check_lengths(inputs)?;
    if n != spec.n {
        return Err(Error::Input(format!("inputs have {n} bits, predicate expects {}", spec.n)));
    }
    Ok(spec.table[intersection_weight(inputs)?])
}

/// Predicate table `D` over intersection weights `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetricSpec {
    pub n: usize,
    pub k: usize,
    pub table: Vec<bool>,
}

impl SymmetricSpec {
    pub fn new(n: usize, k: usize, table: Vec<bool>) -> Result<SymmetricSpec> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if table.len() != n + 1 {
            return Err(Error::InvalidParameter(format!(
                "table has {} entries, expected {}",
                table.len(),
                n + 1
            )));
        }
        Ok(SymmetricSpec { n, k, table })
    }

    pub fn from_fn(n: usize, k: usize, d: impl Fn(usize) -> bool) -> Result<SymmetricSpec> {
        SymmetricSpec::new(n, k, (0..=n).map(d).collect())
    }

    pub fn disj(n: usize, k: usize) -> SymmetricSpec {
        SymmetricSpec::from_fn(n, k, |m| m > 0).expect("valid table")
    }

    pub fn inner_product(n: usize, k: usize) -> SymmetricSpec {
        SymmetricSpec::from_fn(n, k, |m| m % 2 == 1).expect("valid table")
    }

    /// `D(m) = 1` iff `m >= t`.
    pub fn threshold(n: usize, k: usize, t: usize) -> SymmetricSpec {
        SymmetricSpec::from_fn(n, k, |m| m >= t).expect("valid table")
    }

    pub fn eval(&self, inputs: &[BitString]) -> Result<bool> {
        eval_symmetric(self, inputs)
    }

    pub fn l0(&self) -> usize {
        l0(self)
    }

    pub fn l1(&self) -> usize {
        l1(self)
    }

    pub fn g(&self) -> f64 {
        g(self)
    }

    pub fn table_string(&self) -> String {
        self.table.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// File form: first line `n k`, second line the `n+1` table bits.
impl FromStr for SymmetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<SymmetricSpec> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty spec".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        let [n, k] = nums[..] else {
            return Err(Error::Parse(format!("header `{header}` must be `n k`")));
        };
        let row = lines.next().ok_or_else(|| Error::Parse("missing table line".into()))?;
        let table: BitString = row.parse()?;
        SymmetricSpec::new(n, k, table.bits().to_vec())
    }
}

impl fmt::Display for SymmetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.k)?;
        writeln!(f, "{}", self.table_string())
    }
}

/// Largest `l` with `1 <= l <= n/2` and `D(l) != D(l-1)`, or 0.
pub fn l0(spec: &SymmetricSpec) -> usize {
    let d = &spec.table;
    (1..=spec.n).filter(|&l| 2 * l <= spec.n && d[l] != d[l - 1]).max().unwrap_or(0)
}

/// Largest `n - l` with `n/2 <= l < n` and `D(l) != D(l+1)`, or 0.
pub fn l1(spec: &SymmetricSpec) -> usize {
    let d = &spec.table;
    (0..spec.n).filter(|&l| 2 * l >= spec.n && d[l] != d[l + 1]).map(|l| spec.n - l).max().unwrap_or(0)
}

pub fn g(spec: &SymmetricSpec) -> f64 {
    ((spec.n * l0(spec)) as f64).sqrt() + l1(spec) as f64
}

/// Low-weight and high-weight parts of a predicate table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTables {
    pub d0: Vec<bool>,
    pub d1: Vec<bool>,
    /// The table was constant 1 on the middle interval and got negated.
    pub negated: bool,
    pub l0: usize,
    pub l1: usize,
}

impl SplitTables {
    /// `(D0 or D1) xor negated`, which equals the original table.
    pub fn reconstruct(&self) -> Vec<bool> {
        self.d0.iter().zip(&self.d1).map(|(&a, &b)| (a || b) ^ self.negated).collect()
    }
}

/// Splits `D` into `D0` (weights up to `l0`) and `D1` (weights above
/// `n - l1`), negating first when `D` is 1 on `[l0, n - l1]`.
pub fn split_d(spec: &SymmetricSpec) -> Result<SplitTables> {
    let (lo, hi_dist) = (l0(spec), l1(spec));
    let n = spec.n;
    if lo > n - hi_dist {
        return Err(Error::NotNormalizable(format!("l0 = {lo} exceeds n - l1 = {}", n - hi_dist)));
    }
    let middle = &spec.table[lo..=n - hi_dist];
    if middle.iter().any(|&b| b != middle[0]) {
        return Err(Error::NotNormalizable(format!(
            "table {} changes value between weights {} and {}; for odd n this flip straddles the midpoint",
            spec.table_string(),
            n / 2,
            n.div_ceil(2)
        )));
    }
    let negated = middle[0];
    let d: Vec<bool> = spec.table.iter().map(|&b| b ^ negated).collect();
    let d0 = (0..=n).map(|m| m <= lo && d[m]).collect();
    let d1 = (0..=n).map(|m| m > n - hi_dist && d[m]).collect();
    Ok(SplitTables { d0, d1, negated, l0: lo, l1: hi_dist })
}

/// The function families the toolkit builds protocols for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Disj,
    InnerProduct,
    Equality,
    Symmetric { spec: SymmetricSpec },
}

impl Family {
    /// Parses `disj`, `ip` or `equality`; symmetric families need a table.
    pub fn from_name(name: &str, spec: Option<SymmetricSpec>) -> Result<Family> {
        match (name, spec) {
            ("disj", _) => Ok(Family::Disj),
            ("ip", _) => Ok(Family::InnerProduct),
            ("equality", _) => Ok(Family::Equality),
            ("symmetric", Some(spec)) => Ok(Family::Symmetric { spec }),
            ("symmetric", None) => {
                Err(Error::InvalidParameter("symmetric family needs a spec file".into()))
            }
            (other, _) => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Disj => "disj",
            Family::InnerProduct => "ip",
            Family::Equality => "equality",
            Family::Symmetric { .. } => "symmetric",
        }
    }

    /// Evaluates the family on any number of inputs of a common length.
    pub fn eval(&self, inputs: &[BitString]) -> Result<bool> {
        match self {
            Family::Disj => eval_disj(inputs),
            Family::InnerProduct => eval_ip(inputs),
            Family::Equality => eval_equality(inputs),
            Family::Symmetric { spec } => eval_symmetric(spec, inputs),
        }
    }

    /// Predicate table at size `(n, k)`, if the family is symmetric.
    pub fn symmetric_spec(&self, n: usize, k: usize) -> Option<SymmetricSpec> {
        match self {
            Family::Disj => Some(SymmetricSpec::disj(n, k)),
            Family::InnerProduct => Some(SymmetricSpec::inner_product(n, k)),
            Family::Equality => None,
            Family::Symmetric { spec } => Some(spec.clone()),
        }
    }
}
