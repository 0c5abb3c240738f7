use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::party::{Party, Topology};
use crate::statevec::Gate;

/// Register declared by an `Alloc` instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegId(pub(crate) u32);

/// Classical value produced by a measurement or a shared-randomness draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingId(pub(crate) u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterDecl {
    pub name: String,
    pub width: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BindingDecl {
    pub name: String,
    /// `None` for shared randomness, visible to every party.
    pub owner: Option<Party>,
}

pub type XorFn = Arc<dyn Fn(&[u64]) -> u64 + Send + Sync>;
pub type MapFn = Arc<dyn Fn(&[u64]) -> Vec<u64> + Send + Sync>;
pub type PredFn = Arc<dyn Fn(&[u64]) -> bool + Send + Sync>;
pub type LocalFn = Arc<dyn Fn(&View<'_>) -> Action + Send + Sync>;
pub type ViewPredFn = Arc<dyn Fn(&View<'_>) -> bool + Send + Sync>;
pub type LiftFn = Arc<dyn Fn(&[BitString]) -> Vec<BitString> + Send + Sync>;

/// A local operation on registers owned by the acting party.
#[derive(Clone)]
pub enum Action {
    Identity,
    /// Gate on one qubit of the register, or on every qubit when `qubit` is `None`.
    Gate { reg: RegId, qubit: Option<usize>, gate: Gate },
    /// `target ^= f(sources)`
    Xor { sources: Vec<RegId>, target: RegId, f: XorFn },
    /// Reversible map on the joint value of `regs`.
    Map { regs: Vec<RegId>, f: MapFn },
    /// Phase -1 on basis states satisfying `pred`.
    Phase { regs: Vec<RegId>, pred: PredFn },
    Sequence(Vec<Action>),
}

impl Action {
    pub fn gate(reg: RegId, qubit: usize, gate: Gate) -> Action {
        Action::Gate { reg, qubit: Some(qubit), gate }
    }

    pub fn gate_all(reg: RegId, gate: Gate) -> Action {
        Action::Gate { reg, qubit: None, gate }
    }

    pub fn xor(
        sources: Vec<RegId>,
        target: RegId,
        f: impl Fn(&[u64]) -> u64 + Send + Sync + 'static,
    ) -> Action {
        Action::Xor { sources, target, f: Arc::new(f) }
    }

    /// `target ^= value`
    pub fn load(target: RegId, value: u64) -> Action {
        Action::xor(vec![], target, move |_| value)
    }

    pub fn map(regs: Vec<RegId>, f: impl Fn(&[u64]) -> Vec<u64> + Send + Sync + 'static) -> Action {
        Action::Map { regs, f: Arc::new(f) }
    }

    pub fn phase(regs: Vec<RegId>, pred: impl Fn(&[u64]) -> bool + Send + Sync + 'static) -> Action {
        Action::Phase { regs, pred: Arc::new(pred) }
    }

    /// Registers the action touches.
    pub fn registers(&self) -> Vec<RegId> {
        match self {
            Action::Identity => vec![],
            Action::Gate { reg, .. } => vec![*reg],
            Action::Xor { sources, target, .. } => {
                let mut v = sources.clone();
                v.push(*target);
                v
            }
            Action::Map { regs, .. } | Action::Phase { regs, .. } => regs.clone(),
            Action::Sequence(actions) => actions.iter().flat_map(|a| a.registers()).collect(),
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Identity => f.write_str("Identity"),
            Action::Gate { reg, qubit, .. } => write!(f, "Gate({reg:?}, {qubit:?})"),
            Action::Xor { sources, target, .. } => write!(f, "Xor({sources:?} -> {target:?})"),
            Action::Map { regs, .. } => write!(f, "Map({regs:?})"),
            Action::Phase { regs, .. } => write!(f, "Phase({regs:?})"),
            Action::Sequence(v) => f.debug_list().entries(v).finish(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomSpec {
    /// Uniform `width`-bit value, `width <= 64`.
    Bits(u32),
    /// Uniform value in `0..bound`.
    Below(u64),
}

#[derive(Clone)]
pub enum Instruction {
    Alloc { reg: RegId, owner: Party, width: usize },
    Release { reg: RegId },
    Local { party: Party, op: LocalFn },
    Send { from: Party, to: Party, reg: RegId, round: u32 },
    /// A send performed only when `guard` holds for the sender. Such a
    /// program is not oblivious; it exists to exercise the detectors.
    GuardedSend { from: Party, to: Party, reg: RegId, round: u32, guard: ViewPredFn },
    Measure { party: Party, reg: RegId, binding: BindingId, discard: bool },
    SharedRandom { spec: RandomSpec, binding: BindingId },
    Output { party: Party, f: ViewPredFn },
}

impl fmt::Debug for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Alloc { reg, owner, width } => write!(f, "Alloc({reg:?}, {owner}, {width})"),
            Instruction::Release { reg } => write!(f, "Release({reg:?})"),
            Instruction::Local { party, .. } => write!(f, "Local({party})"),
            Instruction::Send { from, to, reg, round } => {
                write!(f, "Send({from} -> {to}, {reg:?}, r{round})")
            }
            Instruction::GuardedSend { from, to, reg, round, .. } => {
                write!(f, "GuardedSend({from} -> {to}, {reg:?}, r{round})")
            }
            Instruction::Measure { party, reg, binding, discard } => {
                write!(f, "Measure({party}, {reg:?} -> {binding:?}, discard={discard})")
            }
            Instruction::SharedRandom { spec, binding } => {
                write!(f, "SharedRandom({spec:?} -> {binding:?})")
            }
            Instruction::Output { party, .. } => write!(f, "Output({party})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Violation {
    Binding(BindingId),
    NoInput,
}

/// What a party may read when building an action or an output: its own
/// input and the bindings visible to it.
pub struct View<'a> {
    pub(crate) party: Party,
    pub(crate) input: Option<&'a BitString>,
    pub(crate) values: &'a [Option<u64>],
    pub(crate) decls: &'a [BindingDecl],
    pub(crate) violation: Cell<Option<Violation>>,
}

impl<'a> View<'a> {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn input(&self) -> &BitString {
        match self.input {
            Some(x) => x,
            None => {
                self.violation.set(Some(Violation::NoInput));
                static EMPTY: BitString = BitString::EMPTY;
                &EMPTY
            }
        }
    }

    /// Coordinate `i` of the party's input; 0 past the end.
    pub fn bit(&self, i: usize) -> bool {
        self.input().get(i)
    }

    /// Value of a binding. Reading one the party cannot see is recorded and
    /// turned into an error by the executor.
    pub fn get(&self, b: BindingId) -> u64 {
        let decl = &self.decls[b.0 as usize];
        let visible = decl.owner.is_none_or(|o| o == self.party);
        match (visible, self.values[b.0 as usize]) {
            (true, Some(v)) => v,
            _ => {
                self.violation.set(Some(Violation::Binding(b)));
                0
            }
        }
    }
}

/// How the caller's inputs become the per-role inputs.
#[derive(Clone)]
pub enum InputMap {
    /// One input per player role.
    Roles,
    /// `arity` inputs expanded by `lift` into one input per player role.
    Lifted { arity: usize, lift: LiftFn },
}

/// An input-independent instruction list with its topology and hosting.
///
/// Roles are the parties the instructions mention. Each role runs on a
/// physical party of `topology`; sends between roles on the same host are
/// free and invisible to the ledger.
#[derive(Clone)]
pub struct ProtocolProgram {
    pub(crate) name: String,
    pub(crate) topology: Topology,
    pub(crate) roles: Topology,
    pub(crate) n: usize,
    pub(crate) epsilon: f64,
    pub(crate) registers: Arc<Vec<RegisterDecl>>,
    pub(crate) bindings: Arc<Vec<BindingDecl>>,
    pub(crate) instructions: Arc<Vec<Instruction>>,
    pub(crate) hosts: BTreeMap<Party, Party>,
    pub(crate) input_map: InputMap,
    pub(crate) fragment: bool,
    pub(crate) meta: BTreeMap<String, Value>,
}

impl fmt::Debug for ProtocolProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolProgram")
            .field("name", &self.name)
            .field("topology", &self.topology)
            .field("roles", &self.roles)
            .field("n", &self.n)
            .field("instructions", &self.instructions.len())
            .finish()
    }
}

impl ProtocolProgram {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Physical topology: the parties that hold inputs and exchange qubits.
    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Logical roles the instructions are written for.
    pub fn roles(&self) -> Topology {
        self.roles
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn registers(&self) -> &[RegisterDecl] {
        &self.registers
    }

    pub fn bindings(&self) -> &[BindingDecl] {
        &self.bindings
    }

    pub fn is_fragment(&self) -> bool {
        self.fragment
    }

    /// Physical party running `role`.
    pub fn host(&self, role: Party) -> Party {
        self.hosts.get(&role).copied().unwrap_or(role)
    }

    pub fn hosts(&self) -> &BTreeMap<Party, Party> {
        &self.hosts
    }

    /// Number of inputs `execute` expects.
    pub fn input_arity(&self) -> usize {
        match &self.input_map {
            InputMap::Roles => self.roles.k,
            InputMap::Lifted { arity, .. } => *arity,
        }
    }

    pub fn input_map(&self) -> &InputMap {
        &self.input_map
    }

    pub fn meta(&self) -> &BTreeMap<String, Value> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    pub fn with_name(mut self, name: &str) -> ProtocolProgram {
        self.name = name.to_string();
        self
    }

    /// Replaces the input mapping; the caller supplies `arity` inputs.
    pub fn with_lifted_inputs(mut self, arity: usize, lift: LiftFn) -> ProtocolProgram {
        self.input_map = InputMap::Lifted { arity, lift };
        self
    }

    pub(crate) fn role_inputs(&self, inputs: &[BitString]) -> Result<Vec<BitString>> {
        if inputs.len() != self.input_arity() {
            return Err(Error::Input(format!(
                "expected {} inputs, got {}",
                self.input_arity(),
                inputs.len()
            )));
        }
        if let Some(bad) = inputs.iter().find(|x| x.len() != self.n) {
            return Err(Error::Input(format!("input {bad} does not have {} bits", self.n)));
        }
        let lifted = match &self.input_map {
            InputMap::Roles => inputs.to_vec(),
            InputMap::Lifted { lift, .. } => lift(inputs),
        };
        if lifted.len() != self.roles.k || lifted.iter().any(|x| x.len() != self.n) {
            return Err(Error::Input("input lifting produced the wrong shape".into()));
        }
        Ok(lifted)
    }
}

/// Incremental construction of a [`ProtocolProgram`].
pub struct ProgramBuilder {
    name: String,
    topology: Topology,
    n: usize,
    epsilon: f64,
    registers: Vec<RegisterDecl>,
    bindings: Vec<BindingDecl>,
    instructions: Vec<Instruction>,
    meta: BTreeMap<String, Value>,
}

impl ProgramBuilder {
    pub fn new(name: &str, topology: Topology, n: usize, epsilon: f64) -> ProgramBuilder {
        ProgramBuilder {
            name: name.to_string(),
            topology,
            n,
            epsilon,
            registers: Vec::new(),
            bindings: Vec::new(),
            instructions: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.topology.k
    }

    pub fn players(&self) -> Vec<Party> {
        self.topology.players().collect()
    }

    pub fn alloc(&mut self, owner: Party, width: usize, name: &str) -> RegId {
        let reg = RegId(self.registers.len() as u32);
        self.registers.push(RegisterDecl { name: name.to_string(), width });
        self.instructions.push(Instruction::Alloc { reg, owner, width });
        reg
    }

    pub fn release(&mut self, reg: RegId) {
        self.instructions.push(Instruction::Release { reg });
    }

    pub fn local(&mut self, party: Party, op: impl Fn(&View<'_>) -> Action + Send + Sync + 'static) {
        self.instructions.push(Instruction::Local { party, op: Arc::new(op) });
    }

    /// A local action that reads nothing.
    pub fn act(&mut self, party: Party, action: Action) {
        self.local(party, move |_| action.clone());
    }

    pub fn send(&mut self, from: Party, to: Party, reg: RegId, round: u32) {
        self.instructions.push(Instruction::Send { from, to, reg, round });
    }

    pub fn guarded_send(
        &mut self,
        from: Party,
        to: Party,
        reg: RegId,
        round: u32,
        guard: impl Fn(&View<'_>) -> bool + Send + Sync + 'static,
    ) {
        self.instructions.push(Instruction::GuardedSend { from, to, reg, round, guard: Arc::new(guard) });
    }

    fn binding(&mut self, name: &str, owner: Option<Party>) -> BindingId {
        let b = BindingId(self.bindings.len() as u32);
        self.bindings.push(BindingDecl { name: name.to_string(), owner });
        b
    }

    /// Measures and removes the register; the outcome is visible to `party` only.
    pub fn measure(&mut self, party: Party, reg: RegId, name: &str) -> BindingId {
        let binding = self.binding(name, Some(party));
        self.instructions.push(Instruction::Measure { party, reg, binding, discard: true });
        binding
    }

    /// Measures and keeps the collapsed register.
    pub fn measure_keep(&mut self, party: Party, reg: RegId, name: &str) -> BindingId {
        let binding = self.binding(name, Some(party));
        self.instructions.push(Instruction::Measure { party, reg, binding, discard: false });
        binding
    }

    pub fn shared_random(&mut self, spec: RandomSpec, name: &str) -> BindingId {
        let binding = self.binding(name, None);
        self.instructions.push(Instruction::SharedRandom { spec, binding });
        binding
    }

    pub fn output(&mut self, party: Party, f: impl Fn(&View<'_>) -> bool + Send + Sync + 'static) {
        self.instructions.push(Instruction::Output { party, f: Arc::new(f) });
    }

    /// Sends a classical `width`-bit value as basis-state qubits; the
    /// receiver measures it into the returned binding.
    pub fn send_classical(
        &mut self,
        from: Party,
        to: Party,
        round: u32,
        width: usize,
        name: &str,
        value: impl Fn(&View<'_>) -> u64 + Send + Sync + 'static,
    ) -> BindingId {
        let reg = self.alloc(from, width, name);
        self.local(from, move |v| Action::load(reg, value(v)));
        self.send(from, to, reg, round);
        self.measure(to, reg, name)
    }

    /// `from` sends the one-bit answer to every other player, and every
    /// player outputs it.
    pub fn broadcast_output(
        &mut self,
        from: Party,
        round: u32,
        answer: impl Fn(&View<'_>) -> bool + Send + Sync + 'static,
    ) {
        let answer = Arc::new(answer);
        for p in self.players() {
            if p == from {
                let a = answer.clone();
                self.output(p, move |v| a(v));
            } else {
                let a = answer.clone();
                let b = self.send_classical(from, p, round, 1, "answer", move |v| a(v) as u64);
                self.output(p, move |v| v.get(b) == 1);
            }
        }
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    fn assemble(self, fragment: bool) -> ProtocolProgram {
        ProtocolProgram {
            name: self.name,
            topology: self.topology,
            roles: self.topology,
            n: self.n,
            epsilon: self.epsilon,
            registers: Arc::new(self.registers),
            bindings: Arc::new(self.bindings),
            instructions: Arc::new(self.instructions),
            hosts: BTreeMap::new(),
            input_map: InputMap::Roles,
            fragment,
            meta: self.meta,
        }
    }

    /// Validates ownership, topology and outputs.
    pub fn build(self) -> Result<ProtocolProgram> {
        let program = self.assemble(false);
        super::exec::analyze(&program, true)?;
        Ok(program)
    }

    /// Like `build`, without requiring every player to output.
    pub fn build_fragment(self) -> Result<ProtocolProgram> {
        let program = self.assemble(true);
        super::exec::analyze(&program, true)?;
        Ok(program)
    }

    /// Builds without static validation; used for non-oblivious fixtures.
    pub fn build_unchecked(self) -> ProtocolProgram {
        self.assemble(false)
    }
}
