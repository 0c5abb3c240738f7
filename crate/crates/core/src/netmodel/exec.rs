use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::program::{
    Action, BindingDecl, BindingId, Instruction, ProtocolProgram, RandomSpec, RegId, View,
    Violation,
};
use super::schedule::{CostLedger, Schedule};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::party::{Party, TopologyKind};
use crate::statevec::{Machine, RegHandle, DEFAULT_QUBIT_CAP};

/// Facts about a program that follow from its text alone.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub schedule: Schedule,
    pub peak_qubits: usize,
}

/// Ordering key for the causality check: a register must move forward in
/// `(round, hop)` each time it crosses between hosts.
pub(crate) fn causal_key(program: &ProtocolProgram, from: Party, round: u32) -> (u32, u8) {
    let hop = match program.topology.kind {
        TopologyKind::Coordinator if program.host(from).is_coordinator() => 1,
        _ => 0,
    };
    (round, hop)
}

/// Walks the instruction list without simulating it.
///
/// With `strict`, conditional sends are rejected and ownership, topology,
/// causality and outputs are all checked. Without it only the qubit
/// footprint and conditional-free structure are examined.
pub fn analyze(program: &ProtocolProgram, strict: bool) -> Result<Analysis> {
    let roles = program.roles;
    let mut schedule = Schedule::new(program.topology, program.n);
    let mut live: BTreeMap<RegId, (Party, usize)> = BTreeMap::new();
    let mut last_hop: BTreeMap<RegId, (u32, u8)> = BTreeMap::new();
    let mut outputs: BTreeSet<Party> = BTreeSet::new();
    let (mut qubits, mut peak) = (0usize, 0usize);
    let check_role = |p: Party| -> Result<()> {
        if roles.contains(p) {
            Ok(())
        } else {
            Err(Error::UnknownParty(p.to_string()))
        }
    };
    let reg_name = |r: RegId| program.registers[r.0 as usize].name.clone();

    for ins in program.instructions.iter() {
        match ins {
            Instruction::Alloc { reg, owner, width } => {
                check_role(*owner)?;
                if live.insert(*reg, (*owner, *width)).is_some() {
                    return Err(Error::MalformedProgram(format!("{} allocated twice", reg_name(*reg))));
                }
                qubits += width;
                peak = peak.max(qubits);
            }
            Instruction::Release { reg } => {
                let (_, width) = live
                    .remove(reg)
                    .ok_or_else(|| Error::UnknownRegister(reg_name(*reg)))?;
                qubits -= width;
            }
            Instruction::Local { party, .. } => check_role(*party)?,
            Instruction::Send { from, to, reg, round } => {
                check_role(*from)?;
                check_role(*to)?;
                let entry = live.get_mut(reg).ok_or_else(|| Error::UnknownRegister(reg_name(*reg)))?;
                if strict && entry.0 != *from {
                    return Err(Error::OwnershipViolation { party: *from, register: reg_name(*reg) });
                }
                entry.0 = *to;
                let width = entry.1;
                let (hf, ht) = (program.host(*from), program.host(*to));
                if hf != ht {
                    if *round == 0 {
                        return Err(Error::MalformedProgram("rounds are numbered from 1".into()));
                    }
                    let key = causal_key(program, *from, *round);
                    if let Some(prev) = last_hop.insert(*reg, key) {
                        if prev >= key {
                            return Err(Error::MalformedProgram(format!(
                                "{} crosses hosts at round {} after round {}",
                                reg_name(*reg),
                                round,
                                prev.0
                            )));
                        }
                    }
                    schedule.add(*round, hf, ht, width as u64)?;
                }
            }
            Instruction::GuardedSend { from, to, reg, .. } => {
                if strict {
                    return Err(Error::NotOblivious(format!(
                        "send of {} from {from} to {to} depends on the sender's data",
                        reg_name(*reg)
                    )));
                }
                check_role(*from)?;
                check_role(*to)?;
            }
            Instruction::Measure { party, reg, discard, .. } => {
                check_role(*party)?;
                let (owner, width) =
                    *live.get(reg).ok_or_else(|| Error::UnknownRegister(reg_name(*reg)))?;
                if strict && owner != *party {
                    return Err(Error::OwnershipViolation { party: *party, register: reg_name(*reg) });
                }
                if *discard {
                    live.remove(reg);
                    qubits -= width;
                }
            }
            Instruction::SharedRandom { spec, .. } => match spec {
                RandomSpec::Bits(w) if *w > 64 => {
                    return Err(Error::MalformedProgram(format!("{w}-bit shared random word")))
                }
                RandomSpec::Below(0) => {
                    return Err(Error::MalformedProgram("empty shared random range".into()))
                }
                _ => {}
            },
            Instruction::Output { party, .. } => {
                check_role(*party)?;
                outputs.insert(*party);
            }
        }
    }
    if strict && !program.fragment {
        if let Some(p) = roles.players().find(|p| !outputs.contains(p)) {
            return Err(Error::MissingOutput(p));
        }
    }
    schedule.set_meta("protocol", program.name.clone().into());
    Ok(Analysis { schedule, peak_qubits: peak })
}

/// Static schedule of an oblivious program.
pub fn derive_schedule(program: &ProtocolProgram) -> Result<Schedule> {
    Ok(analyze(program, true)?.schedule)
}

/// Largest number of simultaneously live qubits.
pub fn peak_qubits(program: &ProtocolProgram) -> Result<usize> {
    Ok(analyze(program, false)?.peak_qubits)
}

#[derive(Clone, Debug)]
pub struct ExecOptions {
    pub seed: u64,
    pub qubit_cap: usize,
    /// Values for the shared-randomness draws, in program order. When set,
    /// the draws do not consume the generator.
    pub shared_random: Option<Vec<u64>>,
}

impl Default for ExecOptions {
    fn default() -> ExecOptions {
        ExecOptions { seed: 0, qubit_cap: DEFAULT_QUBIT_CAP, shared_random: None }
    }
}

impl ExecOptions {
    pub fn seeded(seed: u64) -> ExecOptions {
        ExecOptions { seed, ..ExecOptions::default() }
    }
}

/// Result of one run.
#[derive(Clone, Debug)]
pub struct Execution {
    /// Output of each physical player, index 0 is `P1`.
    pub outputs: Vec<bool>,
    /// Output of each player role.
    pub role_outputs: BTreeMap<Party, bool>,
    pub ledger: CostLedger,
    /// Value of every binding that was assigned.
    pub bindings: Vec<Option<u64>>,
    pub machine: Machine,
}

impl Execution {
    /// Common output when all players agree.
    pub fn unanimous(&self) -> Option<bool> {
        let first = *self.outputs.first()?;
        self.outputs.iter().all(|&o| o == first).then_some(first)
    }

    pub fn binding(&self, b: BindingId) -> Option<u64> {
        self.bindings.get(b.0 as usize).copied().flatten()
    }
}

struct Runner<'p> {
    program: &'p ProtocolProgram,
    inputs: Vec<BitString>,
    machine: Machine,
    handles: Vec<Option<RegHandle>>,
    values: Vec<Option<u64>>,
    ledger: CostLedger,
    rng: ChaCha8Rng,
    overrides: Option<std::vec::IntoIter<u64>>,
    role_outputs: BTreeMap<Party, bool>,
}

impl<'p> Runner<'p> {
    fn decls(&self) -> &'p [BindingDecl] {
        &self.program.bindings
    }

    fn handle(&self, reg: RegId) -> Result<RegHandle> {
        self.handles[reg.0 as usize]
            .ok_or_else(|| Error::UnknownRegister(self.program.registers[reg.0 as usize].name.clone()))
    }

    fn view_eval<T>(&self, party: Party, f: impl FnOnce(&View<'_>) -> T) -> Result<T> {
        let input = party.index().map(|i| &self.inputs[i - 1]);
        let view = View {
            party,
            input,
            values: &self.values,
            decls: self.decls(),
            violation: Cell::new(None),
        };
        let out = f(&view);
        match view.violation.get() {
            None => Ok(out),
            Some(Violation::Binding(b)) => Err(Error::BindingNotVisible {
                party,
                binding: self.decls()[b.0 as usize].name.clone(),
            }),
            Some(Violation::NoInput) => {
                Err(Error::MalformedProgram(format!("{party} has no input to read")))
            }
        }
    }

    fn check_owner(&self, party: Party, reg: RegId) -> Result<RegHandle> {
        let h = self.handle(reg)?;
        if self.machine.owner(h)? != party {
            return Err(Error::OwnershipViolation {
                party,
                register: self.machine.name(h)?.to_string(),
            });
        }
        Ok(h)
    }

    fn apply(&mut self, party: Party, action: &Action) -> Result<()> {
        let handles = |r: &Self, regs: &[RegId]| -> Result<Vec<RegHandle>> {
            regs.iter().map(|&reg| r.check_owner(party, reg)).collect()
        };
        match action {
            Action::Identity => Ok(()),
            Action::Gate { reg, qubit, gate } => {
                let h = self.check_owner(party, *reg)?;
                match qubit {
                    Some(q) => self.machine.gate(h, *q, gate),
                    None => self.machine.gate_all(h, gate),
                }
            }
            Action::Xor { sources, target, f } => {
                let src = handles(self, sources)?;
                let tgt = self.check_owner(party, *target)?;
                self.machine.xor(&src, tgt, f.as_ref())
            }
            Action::Map { regs, f } => {
                let hs = handles(self, regs)?;
                self.machine.classical_map(&hs, f.as_ref())
            }
            Action::Phase { regs, pred } => {
                let hs = handles(self, regs)?;
                self.machine.phase(&hs, pred.as_ref())
            }
            Action::Sequence(actions) => actions.iter().try_for_each(|a| self.apply(party, a)),
        }
    }

    fn transmit(&mut self, from: Party, to: Party, reg: RegId, round: u32) -> Result<()> {
        let h = self.check_owner(from, reg)?;
        self.machine.set_owner(h, to)?;
        let (hf, ht) = (self.program.host(from), self.program.host(to));
        if hf != ht {
            self.ledger.record(round, hf, ht, self.machine.width(h)? as u64);
        }
        Ok(())
    }

    fn step(&mut self, ins: &Instruction) -> Result<()> {
        match ins {
            Instruction::Alloc { reg, owner, width } => {
                let name = &self.program.registers[reg.0 as usize].name;
                let h = self.machine.alloc(name, *owner, *width)?;
                self.handles[reg.0 as usize] = Some(h);
            }
            Instruction::Release { reg } => {
                let h = self.handle(*reg)?;
                self.machine.release(h)?;
                self.handles[reg.0 as usize] = None;
            }
            Instruction::Local { party, op } => {
                let action = self.view_eval(*party, |v| op(v))?;
                self.apply(*party, &action)?;
            }
            Instruction::Send { from, to, reg, round } => self.transmit(*from, *to, *reg, *round)?,
            Instruction::GuardedSend { from, to, reg, round, guard } => {
                if self.view_eval(*from, |v| guard(v))? {
                    self.transmit(*from, *to, *reg, *round)?;
                }
            }
            Instruction::Measure { party, reg, binding, discard } => {
                let h = self.check_owner(*party, *reg)?;
                let v = self.machine.measure(h, &mut self.rng, *discard)?;
                if *discard {
                    self.handles[reg.0 as usize] = None;
                }
                self.values[binding.0 as usize] = Some(v);
            }
            Instruction::SharedRandom { spec, binding } => {
                let v = match self.overrides.as_mut() {
                    Some(it) => it.next().ok_or_else(|| {
                        Error::Input("not enough shared-randomness values supplied".into())
                    })?,
                    None => match *spec {
                        RandomSpec::Bits(64) => self.rng.random::<u64>(),
                        RandomSpec::Bits(w) => self.rng.random::<u64>() & ((1u64 << w) - 1),
                        RandomSpec::Below(bound) => self.rng.random_range(0..bound),
                    },
                };
                self.values[binding.0 as usize] = Some(v);
            }
            Instruction::Output { party, f } => {
                let out = self.view_eval(*party, |v| f(v))?;
                self.role_outputs.insert(*party, out);
            }
        }
        Ok(())
    }
}

/// Runs the program on `inputs`. Deterministic given the options.
pub fn execute(
    program: &ProtocolProgram,
    inputs: &[BitString],
    opts: &ExecOptions,
) -> Result<Execution> {
    let analysis = analyze(program, false)?;
    if analysis.peak_qubits > opts.qubit_cap {
        return Err(Error::QubitCapExceeded { required: analysis.peak_qubits, cap: opts.qubit_cap });
    }
    let mut runner = Runner {
        program,
        inputs: program.role_inputs(inputs)?,
        machine: Machine::new(opts.qubit_cap)?,
        handles: vec![None; program.registers.len()],
        values: vec![None; program.bindings.len()],
        ledger: CostLedger::new(),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        overrides: opts.shared_random.clone().map(|v| v.into_iter()),
        role_outputs: BTreeMap::new(),
    };
    for ins in program.instructions.iter() {
        runner.step(ins)?;
    }
    if !program.fragment {
        if let Some(p) = program.roles.players().find(|p| !runner.role_outputs.contains_key(p)) {
            return Err(Error::MissingOutput(p));
        }
    }
    let outputs = program
        .topology
        .players()
        .map(|host| {
            program
                .roles
                .players()
                .filter(|&r| program.host(r) == host)
                .find_map(|r| runner.role_outputs.get(&r).copied())
                .unwrap_or(false)
        })
        .collect();
    Ok(Execution {
        outputs,
        role_outputs: runner.role_outputs,
        ledger: runner.ledger,
        bindings: runner.values,
        machine: runner.machine,
    })
}
