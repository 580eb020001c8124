//! Exact analysis of transaction fee mechanisms under miner-user collusion.
//!
//! The crate provides:
//!
//! - exact rational utility accounting for bidders and the miner
//!   ([`money`], [`mechanism`], [`utility`]);
//! - grid checkers for the standard auction axioms: individual rationality,
//!   burn-balance, anonymity, consistent tie-breaking, prefix confirmation,
//!   and truthfulness ([`axioms`], [`lemma_checks`]);
//! - a zoo of concrete mechanisms, plus tabulated mechanisms with a JSON
//!   format and a seeded random generator ([`zoo`], [`tabulated`]);
//! - exhaustive side-contract search in passive- and active-miner models,
//!   producing verified witnesses ([`search`], [`contract`]);
//! - a certified reduction turning any beneficial collusion into one of the
//!   miner and at most two bidders ([`reduce`]);
//! - circuit-represented auctions, the order-2 robustness decision problem,
//!   and its reduction from Boolean tautology ([`circuit`]);
//! - the acceptance battery behind `tfm suite` ([`suite`]).
//!
//! All amounts are arbitrary-precision rationals; nothing in the crate
//! rounds. Searches and checkers are deterministic: identical inputs produce
//! identical witnesses and reports at any worker count.

pub mod axioms;
pub mod circuit;
pub mod contract;
pub mod error;
pub mod lemma_checks;
pub mod mechanism;
pub mod money;
pub mod reduce;
pub mod report;
pub mod search;
pub mod suite;
pub mod tabulated;
pub mod utility;
pub mod zoo;

pub use contract::{MinerModel, SideContract, Witness};
pub use error::{ContractError, MechError, ReductionError};
pub use mechanism::{BidVector, Domain, MechRef, Mechanism, Outcome, Setting};
pub use money::{Money, SignedMoney};
pub use search::{find_c_sc, is_c_scp_on_grid, ScpVerdict, SearchLimits, SearchOutcome};
