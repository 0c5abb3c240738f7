use thiserror::Error;

use crate::party::Party;

/// Errors raised by the simulator, the network model and the protocol builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gate is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("qubit {index} out of range for a {qubits}-qubit state")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("qubit cap exceeded: {required} qubits required, cap is {cap}")]
    QubitCapExceeded { required: usize, cap: usize },

    #[error("invalid amplitude vector: {0}")]
    InvalidState(String),

    #[error("classical map is not a bijection on the register subspace")]
    NotBijective,

    #[error("register lists overlap")]
    OverlappingRegisters,

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("register `{0}` is not in |0...0> and cannot be released")]
    DirtyAncilla(String),

    #[error("measurement marginal vanished; the state is corrupted")]
    CorruptedState,

    #[error("{party} does not own register `{register}`")]
    OwnershipViolation { party: Party, register: String },

    #[error("binding `{binding}` is not visible to {party}")]
    BindingNotVisible { party: Party, binding: String },

    #[error("{0} never binds an output")]
    MissingOutput(Party),

    #[error("malformed program: {0}")]
    MalformedProgram(String),

    #[error("program is not oblivious: {0}")]
    NotOblivious(String),

    #[error("wrong topology: {0}")]
    WrongTopology(String),

    #[error("unknown party `{0}`")]
    UnknownParty(String),

    #[error("bad inputs: {0}")]
    Input(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("predicate table cannot be split: {0}")]
    NotNormalizable(String),

    #[error("embedding identity fails: {0}")]
    InvalidEmbedding(String),

    #[error("invalid merge map: {0}")]
    InvalidMerge(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
