//! Experiment configuration, the round loop, metrics and sweeps.

mod config;
mod engine;
mod metrics;
mod run;
mod sweep;
mod table;

pub use config::{DatasetConfig, DropoutPolicy, ExperimentConfig, SamplingMode, Strategy, UpdateKind};
pub use engine::{ClientTrace, Engine, RoundTrace, StalenessPoint};
pub use metrics::{
    moving_average, read_metrics_csv, summarize_run, write_metrics_csv, RoundMetrics, RunSummary, ACCURACY_WINDOW,
};
pub use run::{run_experiment, run_to_dir, write_run_outputs, RunOutput, SummaryFile};
pub use sweep::{expand_grid, parse_grid, run_sweep, Grid, SweepPoint};
pub use table::{probability_table, theory_table};
