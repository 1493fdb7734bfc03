//! Configuration, orchestration, sweeps and artifact emission.

pub mod artifacts;
pub mod checks;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod plotdata;
pub mod sweep;

pub use artifacts::{load_frame, load_snapshot, run_single, RunOutcome};
pub use config::{output_root, parse_overrides, RunConfig, OUTPUT_ENV};
pub use pipeline::{compute, RunResults, Verdict, VerdictItem};
pub use plotdata::emit_plotdata;
pub use sweep::{run_sweep, SweepOutcome, SweepRow};
