//! Error types shared across the crate.

use thiserror::Error;

/// Failure to parse a rational amount from a string.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse {input:?} as a rational amount: {reason}")]
pub struct ParseMoneyError {
    pub input: String,
    pub reason: &'static str,
}

impl ParseMoneyError {
    pub(crate) fn new(input: &str, reason: &'static str) -> Self {
        ParseMoneyError {
            input: input.to_string(),
            reason,
        }
    }
}

/// Errors raised when evaluating a mechanism or computing utilities.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MechError {
    #[error("bidder index {index} out of range for {len} bids")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("mechanism {name:?} expects exactly {expected} bids, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },

    #[error("bid {bid} is not in the declared grid of mechanism {name:?}")]
    OutOfGrid { name: String, bid: String },

    #[error("setting is malformed: {0}")]
    MalformedSetting(String),

    #[error("coalition identity mismatch: {0}")]
    IdentityMismatch(String),
}

/// Errors raised when loading or validating a tabulated mechanism file.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("non-total table: expected {expected} rows over values^n, found {found}")]
    NonTotal { expected: usize, found: usize },

    #[error("duplicate table row for profile {0:?}")]
    DuplicateRow(Vec<usize>),

    #[error("profile index {index} out of range for {values} grid values")]
    BadProfileIndex { index: usize, values: usize },

    #[error("row for profile {profile:?} has wrong width: {field} has {got} entries, expected {expected}")]
    BadRowWidth {
        profile: Vec<usize>,
        field: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("grid values must be strictly ascending and distinct")]
    UnsortedValues,

    #[error("table generation failed after {retries} retries: {reason}")]
    GenerationFailed { retries: usize, reason: String },
}

/// Errors raised by side-contract construction and verification.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ContractError {
    #[error("contract references bidder {index}, but the setting has {len} real bidders")]
    BadBidder { index: usize, len: usize },

    #[error("passive contract carries miner actions (omissions or fake bids)")]
    PassiveWithMinerActions,

    #[error("baseline setting is not honest: bid {index} differs from its true value")]
    DishonestBaseline { index: usize },

    #[error("new_bids key {index} is not a coalition member")]
    NewBidOutsideCoalition { index: usize },

    #[error(transparent)]
    Mech(#[from] MechError),
}

/// Errors raised by circuit construction and evaluation.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("circuit expects {expected} input bits, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("gate {gate} references wire {reference}, which is not earlier in the list")]
    ForwardReference { gate: usize, reference: usize },

    #[error("gate {gate} reads input {input}, but the circuit declares {inputs} inputs")]
    BadInput {
        gate: usize,
        input: usize,
        inputs: usize,
    },

    #[error("output references wire {reference}, but only {wires} wires exist")]
    BadOutput { reference: usize, wires: usize },

    #[error("gate {gate} op {op:?} takes {expected} operands, got {got}")]
    BadOperandCount {
        gate: usize,
        op: String,
        expected: usize,
        got: usize,
    },

    #[error("decoded value index {index} is outside the {len} declared values")]
    ValueIndexOutOfRange { index: usize, len: usize },

    #[error("auction circuits are malformed: {0}")]
    Malformed(String),

    #[error("tautology check limited to 20 inputs, circuit has {0}")]
    TooManyInputs(usize),
}

/// Errors raised by the reduction pipeline that indicate a bug or a violated
/// precondition, as opposed to an expected diagnostic failure.
#[derive(Debug, Clone, Error)]
pub enum ReductionError {
    #[error("input witness does not verify: {0}")]
    InputDoesNotVerify(String),

    #[error(
        "internal consistency violation in {stage}: {detail} (this contradicts a proven property)"
    )]
    InternalConsistency { stage: String, detail: String },

    #[error(transparent)]
    Contract(#[from] ContractError),

    #[error(transparent)]
    Mech(#[from] MechError),
}
