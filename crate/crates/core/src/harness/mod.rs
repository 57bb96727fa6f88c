//! Configuration, seeded random streams, experiment drivers and result
//! tables behind the `ccs-radar` CLI.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod physical;
pub mod rng;
pub mod table;

pub use config::{BoundsConfig, CodeFamily, CodeSpec, ExperimentConfig, ExperimentKind, PathConfig, SceneConfig};
pub use experiments::{
    run_interleaver_study, run_near_far, run_pslr_sweep, run_suppression_sweep, run_tail_bound_check,
    NearFarReport,
};
pub use table::{Cell, ResultTable};
