//! CSV and metadata files of a sweep.

use std::fs;
use std::path::Path;

use irs_core::sparsity::delta_upper_bound;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::harness::{aggregate, Aggregate, ExperimentSpec, HarnessError, SweepOutput};

pub const RECORDS_FILE: &str = "records.csv";
pub const METADATA_FILE: &str = "metadata.json";
pub const BISECTION_TRACE_FILE: &str = "debug/bisection_trace.csv";
pub const ALTOPT_TRACE_FILE: &str = "debug/altopt_trace.csv";

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    config: ConfigFile,
    delta_grid: &'a [f64],
    delta_upper_bound: f64,
    deltas_above_bound: Vec<f64>,
    n_realizations: usize,
    master_seed: u64,
    schemes: Vec<&'static str>,
    records: usize,
    failures: Vec<(&'static str, usize)>,
    notes: [&'static str; 5],
}

const NOTES: [&str; 5] = [
    "no_irs: transmit powers are optimized by max-min power control on the direct links, not fixed at p_max",
    "fig_a averages the linear max-min SINR; records.csv also carries dB values",
    "fig_d averages per-realization EE (sum rate / consumed power), not a ratio of averages",
    "mrs draws a uniform module subset with the proposed scheme's cardinality at the same (realization, delta)",
    "failed records (non-empty failure column) are excluded from every average",
];

/// Writes `records.csv`, `fig_a.csv` .. `fig_d.csv`, `metadata.json` and,
/// when traces were collected, the two debug CSVs under `debug/`.
pub fn write_outputs(spec: &ExperimentSpec, out: &SweepOutput) -> Result<Aggregate, HarnessError> {
    let dir = &spec.output_dir;
    fs::create_dir_all(dir)?;
    write_csv(&dir.join(RECORDS_FILE), &out.records)?;
    let agg = aggregate(&out.records)?;
    for (fig, rows) in &agg.figures {
        write_csv(&dir.join(fig.file_name()), rows)?;
    }
    if spec.debug {
        write_csv(&dir.join(BISECTION_TRACE_FILE), &out.bisection)?;
        write_csv(&dir.join(ALTOPT_TRACE_FILE), &out.altopt)?;
    }
    let meta = Metadata {
        config: ConfigFile::from_network(&spec.config),
        delta_grid: &spec.delta_grid,
        delta_upper_bound: delta_upper_bound(&spec.config),
        deltas_above_bound: spec.deltas_above_bound(),
        n_realizations: spec.n_realizations,
        master_seed: spec.master_seed,
        schemes: spec.schemes.iter().map(|s| s.as_str()).collect(),
        records: out.records.len(),
        failures: agg.failures.iter().map(|(s, c)| (s.as_str(), *c)).collect(),
        notes: NOTES,
    };
    fs::write(dir.join(METADATA_FILE), serde_json::to_string_pretty(&meta)?)?;
    Ok(agg)
}
