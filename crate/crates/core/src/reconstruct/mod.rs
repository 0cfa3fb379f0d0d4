//! The one-point algorithm, its stationary-law oracle, the i.i.d.-location
//! variant and the inductive whole-window loop.

pub mod chain;
pub mod iid;
pub mod params;
pub mod point;
pub mod whole;

pub use chain::{exact_chain_mu, ChainOptions, ChainSolution, StationaryDistribution, StopChain};
pub use iid::{reconstruct_point_iid, IidEstimate};
pub use params::{derive_params, parse_delta, ReconstructionParams, ThresholdProfile};
pub use point::{reconstruct_point, ColorScore, PointEstimate};
pub use whole::{reconstruct_whole, ObservationSource, WholeOutcome, WholeStep};
