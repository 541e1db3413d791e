//! Dynamic-consistency checking for conditional simple temporal networks.
//!
//! The crate decides three properties of a network: ε-dynamic consistency for a given
//! reaction time, plain dynamic consistency, and dynamic consistency with instantaneous
//! reaction (π-DC). Every positive answer comes with an execution strategy that has
//! been re-checked by the brute-force validators in [`strategy`].

pub mod corpus;
pub mod dc;
pub mod hytn;
pub mod label;
pub mod network;
pub mod pidc;
pub mod pstree;
pub mod scenario;
pub mod strategy;

pub use dc::{build_eps_hytn, check_dc, check_eps_dc, eps_hat, DcError, DcOutcome};
pub use hytn::{solve_hytn, stn_consistency, Hyperarc, Hytn, HytnError, HytnOutcome, Schedule};
pub use label::{label_logic, parse_label, Label, LabelError};
pub use network::{
    difference_set, expand, restrict, wd_check, Cstn, ModelError, Stn, ValidationReport,
    WdViolation,
};
pub use pidc::{check_pi_dc, relax_cstn, PiDcError, PiDcOutcome};
pub use pstree::{
    check_coherence, check_pi_dc_exhaustive, check_pi_dc_on_tree, construct_pi_hytn,
    enumerate_c_ps_trees, ExhaustiveOutcome, PsTree, PsTreeError,
};
pub use scenario::{PartialScenario, Scenario};
pub use strategy::{
    history, pi_history, validate_es, validate_pi_es, ExecStrategy, Mode, PiExecStrategy, Time,
};
