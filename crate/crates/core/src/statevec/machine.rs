use std::collections::HashSet;

use rand::Rng;

use super::state::{deposit, extract, Gate, StateVector, NORM_TOLERANCE};
use crate::error::{Error, Result};
use crate::party::Party;

/// Handle to a live register; stays valid until the register is released.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegHandle(usize);

#[derive(Clone, Debug)]
struct Register {
    name: String,
    owner: Party,
    qubits: Vec<usize>,
}

/// Named, party-owned registers over the qubits of one state.
///
/// Qubit indices of live registers are disjoint and cover `0..q` in
/// allocation order. Releasing a register renumbers the qubits above it.
#[derive(Clone, Debug, Default)]
pub struct RegisterMap {
    slots: Vec<Option<Register>>,
}

impl RegisterMap {
    fn get(&self, h: RegHandle) -> Result<&Register> {
        self.slots
            .get(h.0)
            .and_then(|r| r.as_ref())
            .ok_or_else(|| Error::UnknownRegister(format!("#{}", h.0)))
    }

    fn get_mut(&mut self, h: RegHandle) -> Result<&mut Register> {
        self.slots
            .get_mut(h.0)
            .and_then(|r| r.as_mut())
            .ok_or_else(|| Error::UnknownRegister(format!("#{}", h.0)))
    }

    pub fn live(&self) -> impl Iterator<Item = (RegHandle, &str, Party, &[usize])> {
        self.slots.iter().enumerate().filter_map(|(i, r)| {
            r.as_ref().map(|r| (RegHandle(i), r.name.as_str(), r.owner, r.qubits.as_slice()))
        })
    }

    pub fn find(&self, name: &str) -> Option<RegHandle> {
        self.live().find(|(_, n, _, _)| *n == name).map(|(h, ..)| h)
    }
}

/// A state vector together with its register map.
#[derive(Clone, Debug)]
pub struct Machine {
    state: StateVector,
    regs: RegisterMap,
}

impl Machine {
    pub fn new(cap: usize) -> Result<Machine> {
        Ok(Machine { state: StateVector::with_cap(0, cap)?, regs: RegisterMap::default() })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut StateVector {
        &mut self.state
    }

    pub fn registers(&self) -> &RegisterMap {
        &self.regs
    }

    pub fn alloc(&mut self, name: &str, owner: Party, width: usize) -> Result<RegHandle> {
        let first = self.state.num_qubits();
        self.state.grow(width)?;
        self.regs.slots.push(Some(Register {
            name: name.to_string(),
            owner,
            qubits: (first..first + width).collect(),
        }));
        Ok(RegHandle(self.regs.slots.len() - 1))
    }

    /// Removes a register that reads |0...0> on every branch.
    pub fn release(&mut self, h: RegHandle) -> Result<()> {
        self.remove(h, 0)
    }

    fn remove(&mut self, h: RegHandle, value: u64) -> Result<()> {
        let reg = self.regs.get(h)?.clone();
        self.state
            .remove_qubits(&reg.qubits, value, NORM_TOLERANCE)
            .map_err(|e| match e {
                Error::DirtyAncilla(_) => Error::DirtyAncilla(reg.name.clone()),
                other => other,
            })?;
        self.regs.slots[h.0] = None;
        let mut removed = reg.qubits.clone();
        removed.sort_unstable();
        for r in self.regs.slots.iter_mut().flatten() {
            for q in r.qubits.iter_mut() {
                *q -= removed.partition_point(|&x| x < *q);
            }
        }
        Ok(())
    }

    pub fn owner(&self, h: RegHandle) -> Result<Party> {
        Ok(self.regs.get(h)?.owner)
    }

    pub fn set_owner(&mut self, h: RegHandle, owner: Party) -> Result<()> {
        self.regs.get_mut(h)?.owner = owner;
        Ok(())
    }

    pub fn name(&self, h: RegHandle) -> Result<&str> {
        Ok(self.regs.get(h)?.name.as_str())
    }

    pub fn qubits(&self, h: RegHandle) -> Result<&[usize]> {
        Ok(&self.regs.get(h)?.qubits)
    }

    pub fn width(&self, h: RegHandle) -> Result<usize> {
        Ok(self.regs.get(h)?.qubits.len())
    }

    /// Applies `gate` to qubit `offset` of the register.
    pub fn gate(&mut self, h: RegHandle, offset: usize, gate: &Gate) -> Result<()> {
        let reg = self.regs.get(h)?;
        let q = *reg.qubits.get(offset).ok_or(Error::QubitOutOfRange {
            index: offset,
            qubits: reg.qubits.len(),
        })?;
        self.state.apply_single(gate, q)
    }

    /// Applies `gate` to every qubit of the register.
    pub fn gate_all(&mut self, h: RegHandle, gate: &Gate) -> Result<()> {
        let qubits = self.regs.get(h)?.qubits.clone();
        for q in qubits {
            self.state.apply_single(gate, q)?;
        }
        Ok(())
    }

    fn collect(&self, regs: &[RegHandle]) -> Result<Vec<Vec<usize>>> {
        let lists: Vec<Vec<usize>> =
            regs.iter().map(|&h| self.regs.get(h).map(|r| r.qubits.clone())).collect::<Result<_>>()?;
        let mut seen = HashSet::new();
        for q in lists.iter().flatten() {
            if !seen.insert(*q) {
                return Err(Error::OverlappingRegisters);
            }
        }
        Ok(lists)
    }

    /// `target ^= f(sources)`. Always a bijection since the registers are disjoint.
    pub fn xor(
        &mut self,
        sources: &[RegHandle],
        target: RegHandle,
        f: &dyn Fn(&[u64]) -> u64,
    ) -> Result<()> {
        let mut all = sources.to_vec();
        all.push(target);
        let lists = self.collect(&all)?;
        let (src, tgt) = lists.split_at(sources.len());
        let tgt = &tgt[0];
        let mask = if tgt.len() >= 64 { u64::MAX } else { (1u64 << tgt.len()) - 1 };
        self.state.apply_permutation(|i| {
            let vals: Vec<u64> = src.iter().map(|q| extract(i, q)).collect();
            let cur = extract(i, tgt);
            deposit(i, tgt, cur ^ (f(&vals) & mask))
        });
        Ok(())
    }

    /// Replaces the joint value of `regs` by `f(values)`. `f` must permute
    /// the register subspace; this is checked by enumerating it.
    pub fn classical_map(
        &mut self,
        regs: &[RegHandle],
        f: &dyn Fn(&[u64]) -> Vec<u64>,
    ) -> Result<()> {
        let lists = self.collect(regs)?;
        let widths: Vec<usize> = lists.iter().map(|l| l.len()).collect();
        let total: usize = widths.iter().sum();
        if total > 24 {
            return Err(Error::InvalidParameter(format!(
                "classical map over {total} qubits is too wide to check"
            )));
        }
        let split = |joint: u64| -> Vec<u64> {
            let mut out = Vec::with_capacity(widths.len());
            let mut shift = 0;
            for &w in &widths {
                out.push((joint >> shift) & ((1u64 << w) - 1));
                shift += w;
            }
            out
        };
        let join = |vals: &[u64]| -> Option<u64> {
            let mut joint = 0u64;
            let mut shift = 0;
            for (&v, &w) in vals.iter().zip(&widths) {
                if v >> w != 0 {
                    return None;
                }
                joint |= v << shift;
                shift += w;
            }
            Some(joint)
        };
        let size = 1usize << total;
        let mut table = vec![0u64; size];
        let mut hit = vec![false; size];
        for (joint, slot) in table.iter_mut().enumerate() {
            let out = f(&split(joint as u64));
            if out.len() != widths.len() {
                return Err(Error::NotBijective);
            }
            let image = join(&out).ok_or(Error::NotBijective)?;
            if std::mem::replace(&mut hit[image as usize], true) {
                return Err(Error::NotBijective);
            }
            *slot = image;
        }
        let flat: Vec<usize> = lists.concat();
        self.state.apply_permutation(|i| deposit(i, &flat, table[extract(i, &flat) as usize]));
        Ok(())
    }

    /// Negates amplitudes whose register values satisfy `pred`.
    pub fn phase(&mut self, regs: &[RegHandle], pred: &dyn Fn(&[u64]) -> bool) -> Result<()> {
        let lists = self.collect(regs)?;
        self.state.apply_phase_flip(|i| {
            let vals: Vec<u64> = lists.iter().map(|q| extract(i, q)).collect();
            pred(&vals)
        });
        Ok(())
    }

    /// Measures the register. With `discard` the register is removed afterwards.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        h: RegHandle,
        rng: &mut R,
        discard: bool,
    ) -> Result<u64> {
        let qubits = self.regs.get(h)?.qubits.clone();
        let v = self.state.measure(&qubits, rng)?;
        if discard {
            self.remove(h, v)?;
        }
        Ok(v)
    }

    /// Distribution of the register's value without disturbing the state.
    pub fn distribution(&self, h: RegHandle) -> Result<Vec<(u64, f64)>> {
        let qubits = self.regs.get(h)?.qubits.clone();
        Ok(self.state.marginal(&qubits)?.into_iter().collect())
    }
}
