//! Coded distributed matrix multiplication for matrices with bounded entries.
//!
//! `AᵀB` is split into small coded products so that any `τ` of `K` workers
//! suffice to reconstruct it. Bounded entries let useful and interfering
//! block products share a coefficient as separate base-`s` digits, which
//! lowers `τ` to anywhere between `m·n` and `p·m·n + p - 1` depending on how
//! much numeric headroom the caller can spend (the `p'` parameter).
//!
//! The pipeline is [`encoding::encode_all`] → [`sim::worker_task`] on each
//! worker → [`decoding::decode`]; [`sim::run_job`] runs all three on a
//! simulated straggler-prone cluster.

pub mod cli;
pub mod decoding;
pub mod encoding;
pub mod error;
pub mod io;
pub mod matrix;
pub mod numeric;
pub mod scalar;
pub mod sim;

pub use decoding::{decode, extract_digit, interpolate, DecodeOptions, DecodeReport, WorkerResult};
pub use encoding::{
    encode_all, encode_share, exponent_plan, recovery_threshold, DigitLayout, ExponentPlan, SchemeParams, Side,
};
pub use error::{Error, Result};
pub use matrix::{assemble, conservative_bound, frobenius_rel_error, partition, Matrix, PartitionedMatrix};
pub use numeric::{EvaluationPoints, PointKind};
pub use scalar::ScalarKind;
pub use sim::{run_job, CostModel, JobOptions, StragglerMode, StragglerModel};
