use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 26;
pub const NORM_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Below this dimension the support index is never kept.
const SPARSE_MIN_DIM: usize = 64;

fn is_zero(a: Complex64) -> bool {
    a.re == 0.0 && a.im == 0.0
}

/// Dense 2^q amplitude array. Qubit `j` is bit `j` of the basis index.
/// The backing vector may be longer than `2^q`; entries past `2^q` are zero.
///
/// `support`, when present, is a sorted superset of the indices holding a
/// nonzero amplitude. Operations touch only those indices; the arithmetic
/// per amplitude is identical to the full sweep, so both paths produce the
/// same numbers.
#[derive(Clone, Debug)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
    support: Option<Vec<usize>>,
    cap: usize,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        self.num_qubits == other.num_qubits && self.amplitudes() == other.amplitudes()
    }
}

impl StateVector {
    /// |0...0> on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<StateVector> {
        StateVector::with_cap(num_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(num_qubits: usize, cap: usize) -> Result<StateVector> {
        if num_qubits > cap {
            return Err(Error::QubitCapExceeded { required: num_qubits, cap });
        }
        let dim = 1usize << num_qubits;
        let mut amps = vec![ZERO; dim];
        amps[0] = Complex64::new(1.0, 0.0);
        let support = (dim >= SPARSE_MIN_DIM).then(|| vec![0]);
        Ok(StateVector { num_qubits, amps, support, cap })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {dim} is not a power of two")));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        if num_qubits > DEFAULT_QUBIT_CAP {
            return Err(Error::QubitCapExceeded { required: num_qubits, cap: DEFAULT_QUBIT_CAP });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        let mut s = StateVector { num_qubits, amps, support: None, cap: DEFAULT_QUBIT_CAP };
        s.resparsify();
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn qubit_cap(&self) -> usize {
        self.cap
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps[..self.dim()]
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.indices().map(|i| self.amps[i].norm_sqr()).sum::<f64>().sqrt()
    }

    /// Whether operations currently run over the support index.
    pub fn is_sparse(&self) -> bool {
        self.support.is_some()
    }

    /// Drops the support index; every later operation sweeps all amplitudes.
    pub fn force_dense(&mut self) {
        self.support = None;
    }

    /// Basis indices that may hold a nonzero amplitude, ascending.
    fn indices(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.support {
            Some(s) => Box::new(s.iter().copied()),
            None => Box::new(0..self.dim()),
        }
    }

    fn resparsify(&mut self) {
        let dim = self.dim();
        if dim < SPARSE_MIN_DIM {
            self.support = None;
            return;
        }
        let limit = dim / 8;
        let mut support = Vec::new();
        for (i, a) in self.amps[..dim].iter().enumerate() {
            if !is_zero(*a) {
                if support.len() == limit {
                    self.support = None;
                    return;
                }
                support.push(i);
            }
        }
        self.support = Some(support);
    }

    fn set_support(&mut self, mut support: Vec<usize>, sorted: bool) {
        if self.dim() < SPARSE_MIN_DIM || support.len() > self.dim() / 8 {
            self.support = None;
            return;
        }
        if !sorted {
            support.sort_unstable();
        }
        self.support = Some(support);
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: q, qubits: self.num_qubits });
        }
        Ok(())
    }

    pub fn apply_single(&mut self, gate: &Gate, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let dev = gate.unitarity_error();
        if dev > NORM_TOLERANCE {
            return Err(Error::NonUnitary(dev));
        }
        let [[g00, g01], [g10, g11]] = gate.0;
        let bit = 1usize << target;
        match self.support.take() {
            None => {
                for i in 0..self.dim() {
                    if i & bit == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = g00 * a0 + g01 * a1;
                        self.amps[i | bit] = g10 * a0 + g11 * a1;
                    }
                }
            }
            Some(support) => {
                let mut bases: Vec<usize> = support.iter().map(|&i| i & !bit).collect();
                bases.sort_unstable();
                bases.dedup();
                let mut next = Vec::with_capacity(bases.len() * 2);
                for b in bases {
                    let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                    let (n0, n1) = (g00 * a0 + g01 * a1, g10 * a0 + g11 * a1);
                    self.amps[b] = n0;
                    self.amps[b | bit] = n1;
                    if !is_zero(n0) {
                        next.push(b);
                    }
                    if !is_zero(n1) {
                        next.push(b | bit);
                    }
                }
                self.set_support(next, false);
            }
        }
        Ok(())
    }

    /// Moves amplitude `i` to `f(i)`. `f` must be a bijection on basis indices.
    pub(crate) fn apply_permutation(&mut self, f: impl Fn(usize) -> usize) {
        match self.support.take() {
            None => {
                let dim = self.dim();
                let mut out = vec![ZERO; dim];
                for (i, a) in self.amps[..dim].iter().enumerate() {
                    out[f(i)] = *a;
                }
                self.amps[..dim].copy_from_slice(&out);
            }
            Some(support) => {
                let moved: Vec<(usize, Complex64)> =
                    support.iter().map(|&i| (f(i), self.amps[i])).collect();
                for &i in &support {
                    self.amps[i] = ZERO;
                }
                let mut next = Vec::with_capacity(moved.len());
                for (j, a) in moved {
                    self.amps[j] = a;
                    next.push(j);
                }
                self.set_support(next, false);
            }
        }
    }

    /// Negates every amplitude whose index satisfies `pred`.
    pub(crate) fn apply_phase_flip(&mut self, pred: impl Fn(usize) -> bool) {
        let idx: Vec<usize> = match &self.support {
            Some(s) => s.clone(),
            None => (0..self.dim()).collect(),
        };
        for i in idx {
            if pred(i) {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    /// Appends `width` fresh |0> qubits as the new top bits.
    pub fn grow(&mut self, width: usize) -> Result<()> {
        let required = self.num_qubits + width;
        if required > self.cap {
            return Err(Error::QubitCapExceeded { required, cap: self.cap });
        }
        if width == 0 {
            return Ok(());
        }
        self.num_qubits = required;
        if self.amps.len() < self.dim() {
            self.amps.resize(self.dim(), ZERO);
        }
        match self.support.take() {
            Some(s) => self.support = Some(s),
            None => self.resparsify(),
        }
        Ok(())
    }

    /// Probability of each value of `qubits` (bit `j` of the value is `qubits[j]`).
    pub fn marginal(&self, qubits: &[usize]) -> Result<BTreeMap<u64, f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut probs = BTreeMap::new();
        for i in self.indices() {
            let p = self.amps[i].norm_sqr();
            if p > 0.0 {
                *probs.entry(extract(i, qubits)).or_insert(0.0) += p;
            }
        }
        Ok(probs)
    }

    /// Born-rule measurement of `qubits`; the state collapses and is renormalized.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<u64> {
        let probs = self.marginal(qubits)?;
        let total: f64 = probs.values().sum();
        if total.is_nan() || total < 1e-12 {
            return Err(Error::CorruptedState);
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = *probs.keys().next_back().expect("nonempty marginal");
        for (&v, &p) in &probs {
            acc += p;
            if u < acc {
                outcome = v;
                break;
            }
        }
        let scale = 1.0 / probs[&outcome].sqrt();
        let idx: Vec<usize> = self.indices().collect();
        let mut kept = Vec::new();
        for i in idx {
            if extract(i, qubits) == outcome {
                self.amps[i] *= scale;
                kept.push(i);
            } else {
                self.amps[i] = ZERO;
            }
        }
        self.set_support(kept, true);
        Ok(outcome)
    }

    /// Removes `qubits`, which must read `value` on every branch up to `tol`.
    /// Remaining qubits keep their relative order.
    pub fn remove_qubits(&mut self, qubits: &[usize], value: u64, tol: f64) -> Result<()> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qubits.len() {
            return Err(Error::OverlappingRegisters);
        }
        for i in self.indices() {
            if extract(i, qubits) != value && self.amps[i].norm() > tol {
                return Err(Error::DirtyAncilla(format!("qubits {qubits:?}")));
            }
        }
        let w = qubits.len();
        let new_q = self.num_qubits - w;
        let new_dim = 1usize << new_q;
        let target = deposit(0, qubits, value);
        let top = sorted.iter().enumerate().all(|(j, &q)| q == new_q + j);
        let compress = |i: usize| -> usize {
            if top {
                i & (new_dim - 1)
            } else {
                let mut out = 0usize;
                let mut pos = 0;
                for b in 0..self.num_qubits {
                    if sorted.binary_search(&b).is_err() {
                        out |= ((i >> b) & 1) << pos;
                        pos += 1;
                    }
                }
                out
            }
        };
        let keep_mask = deposit(0, qubits, (1u64 << w) - 1);
        match self.support.take() {
            Some(support) => {
                let (kept, dropped): (Vec<usize>, Vec<usize>) =
                    support.into_iter().partition(|&i| i & keep_mask == target);
                let next: Vec<usize> = kept.iter().map(|&i| compress(i)).collect();
                if top && target == 0 {
                    for i in dropped {
                        self.amps[i] = ZERO;
                    }
                } else {
                    let moved: Vec<Complex64> = kept.iter().map(|&i| self.amps[i]).collect();
                    for &i in kept.iter().chain(&dropped) {
                        self.amps[i] = ZERO;
                    }
                    for (&j, a) in next.iter().zip(moved) {
                        self.amps[j] = a;
                    }
                }
                self.num_qubits = new_q;
                self.set_support(next, true);
            }
            None => {
                if top && target == 0 {
                    self.amps[new_dim..1usize << self.num_qubits].fill(ZERO);
                } else {
                    let old_dim = 1usize << self.num_qubits;
                    let mut out = vec![ZERO; new_dim];
                    for (i, a) in self.amps[..old_dim].iter().enumerate() {
                        if i & keep_mask == target {
                            out[compress(i)] = *a;
                        }
                    }
                    self.amps[..new_dim].copy_from_slice(&out);
                    self.amps[new_dim..old_dim].fill(ZERO);
                }
                self.num_qubits = new_q;
                self.resparsify();
            }
        }
        Ok(())
    }
}

/// Value of `qubits` in basis index `i`; bit `j` of the result is `qubits[j]`.
pub fn extract(i: usize, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &q)| acc | (((i >> q) & 1) as u64) << j)
}

/// Writes `value` into `qubits` of basis index `i`.
pub fn deposit(i: usize, qubits: &[usize], value: u64) -> usize {
    qubits.iter().enumerate().fold(i, |acc, (j, &q)| {
        let bit = ((value >> j) & 1) as usize;
        (acc & !(1usize << q)) | (bit << q)
    })
}

/// A single-qubit gate as a row-major 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate(pub [[Complex64; 2]; 2]);

impl Gate {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Gate> {
        let g = Gate(m);
        let dev = g.unitarity_error();
        if dev > NORM_TOLERANCE {
            return Err(Error::NonUnitary(dev));
        }
        Ok(g)
    }

    pub fn identity() -> Gate {
        let (o, z) = (Complex64::new(1.0, 0.0), ZERO);
        Gate([[o, z], [z, o]])
    }

    pub fn h() -> Gate {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Gate([[s, s], [s, -s]])
    }

    pub fn x() -> Gate {
        let (o, z) = (Complex64::new(1.0, 0.0), ZERO);
        Gate([[z, o], [o, z]])
    }

    pub fn z() -> Gate {
        Gate::phase(std::f64::consts::PI)
    }

    /// diag(1, e^{i theta})
    pub fn phase(theta: f64) -> Gate {
        let (o, z) = (Complex64::new(1.0, 0.0), ZERO);
        Gate([[o, z], [z, Complex64::from_polar(1.0, theta)]])
    }

    /// max |(G^dagger G - I)_{rc}|
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.0;
        let mut dev: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let v = m[0][r].conj() * m[0][c] + m[1][r].conj() * m[1][c];
                let expect = if r == c { 1.0 } else { 0.0 };
                dev = dev.max((v - Complex64::new(expect, 0.0)).norm());
            }
        }
        dev
    }
}
