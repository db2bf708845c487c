//! Ensemble sweeps over the transition parameter, their statistics, and the
//! CSV/JSON/SVG artifacts built from them.

mod export;
mod ipr_ratio;
mod plots;
mod sweep;
mod udist;

pub use export::{
    csv_rows, export_results, read_csv, read_json, write_csv, write_ipr_ratio_csv, write_json, write_udist_csv, CsvRow,
    OutputFormat, CSV_HEADER,
};
pub use ipr_ratio::{ipr_ratio_experiment, ratio_envelope, IprRatioPoint, IprRatioReport, ENVELOPE_BASIS};
pub use plots::{emit_plots, entropy_figure, ipr_figure, u_figure};
pub use sweep::{
    logspace, parse_lambda_grid, run_sweep, task_stream_index, FailedTask, Manifest, Measure, MeasureStat,
    RealizationSummary, SweepConfig, SweepPoint, SweepResult, TaskSeed, TheoryCurve, MAX_FAILURE_FRACTION,
};
pub use udist::{histogram_u, theory_cells, u_distribution, UDistribution, U_BINS, U_MAX};
