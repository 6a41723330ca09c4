//! Configuration files, result serialization and the subcommands behind
//! the `fmradar` binary.

mod commands;
mod config;
mod format;

pub use commands::{
    cmd_fig10, cmd_simulate, cmd_sweep, cmd_table1, config_from_snapshot, load_run_config, read_manifest,
    simulate, Outcome, RunManifest, CONFIDENT_ITERATIONS, CONFIG_FILE, MANIFEST_FILE,
};
pub use config::{load_kv, parse_kv, render_kv, KeyValues, RunConfig, SIMULATE_REQUIRED};
pub use format::{
    detection_record, error_curve_csv, profile_csv, pseudospectrum_csv, quotient_csv, resolution_csv, table1_csv,
    table1_rows, write_file, Table1Row,
};
