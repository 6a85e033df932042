//! Weak oracles for convex bodies and the reductions between them.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: analytic bodies with exact membership, support and projection.
//! - [`oracles`]: MEM/SEP/OPT/VIOL/VAL handles with error injection and query ledgers.
//! - [`subgrad`]: finite-difference gradients and the classical approximate subgradient.
//! - [`jordan`]: statevector simulation of Jordan's gradient algorithm.
//! - [`sep_from_mem`]: separation from membership through the height function.
//! - [`polarity`]: polar-body adapters between MEM/VAL and SEP/VIOL.
//! - [`opt_engine`]: a central-cut ellipsoid method turning SEP into OPT.
//! - [`hardness`]: lower-bound instances, games and adversary-matrix checks.
//! - [`report`]: JSON/CSV reports used by the command-line front end.
//! - [`cli`]: argument parsing and dispatch for the `convex-oracles` binary.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod hardness;
pub mod jordan;
pub mod opt_engine;
pub mod oracles;
pub mod polarity;
pub mod report;
pub mod sep_from_mem;
pub mod subgrad;

mod lp;

pub use error::{Error, Result};
pub use geometry::{BodySpec, ConvexBody, Hyperplane, Vector};
pub use oracles::{
    BoundaryPolicy, MemAnswer, MembershipOracle, OptAnswer, OptimizationOracle, Oracle,
    OracleAnswer, OracleHandle, OracleKind, QueryLedger, SepAnswer, SeparationOracle, ValAnswer,
    ValidityOracle, ViolAnswer, ViolationOracle,
};
