//! Sum-MSE minimization for an uplink MIMO system aided by a reconfigurable
//! surface whose elements switch between a passive reflection mode and a
//! BS-connected receive mode.
//!
//! The crate provides:
//! * [`model`] — effective channel assembly, the MMSE receiver, and the exact
//!   and approximate scalar objectives;
//! * [`channel`] — seeded channel realizations (path loss, shadowing, Rician
//!   mixing, array responses);
//! * [`subsolvers`] — projections, a box-QP solver, a ball-constrained
//!   trace-inverse solver, the MM phase step, and the PSD/NSD split;
//! * [`pdd`] — the penalized block-coordinate double loop over
//!   (phases, selection, auxiliary) with adaptive dual/penalty updates;
//! * [`greedy`] — greedy element selection with rank-one inverse updates,
//!   alternated with MM phase optimization;
//! * [`baselines`] — reference schemes and ground-truth oracles (exhaustive
//!   search, single-user closed forms).

pub mod baselines;
pub mod channel;
pub mod error;
pub mod greedy;
pub mod linalg;
pub mod model;
pub mod pdd;
pub mod subsolvers;

pub use error::{Error, Result};
pub use model::{ChannelSet, ModeSelection, PhaseVector, Receiver, SystemDims};
