//! Figure-data CSV files.

use std::fs::File;
use std::path::Path;

use fracpoly::dinkelbach::DinkelbachTrace;
use fracpoly::eeapp::GridPoint;
use serde::Serialize;

use crate::CliError;

pub const TRACE_HEADER: &str = "k,lambda,F,ratio,bound,rank_ratio,certified,inner_iterations";
pub const GRID_HEADER: &str = "K,M,EE,feasible";

#[derive(Serialize)]
struct TraceRow {
    k: usize,
    lambda: f64,
    #[serde(rename = "F")]
    f: f64,
    ratio: f64,
    bound: f64,
    rank_ratio: f64,
    certified: bool,
    inner_iterations: usize,
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let file = File::create(path).map_err(io)?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e.into(),
        })?;
    }
    w.flush().map_err(io)
}

pub fn emit_trace_csv(path: &Path, trace: &DinkelbachTrace) -> Result<(), CliError> {
    write_rows(
        path,
        trace.records.iter().map(|r| TraceRow {
            k: r.k,
            lambda: r.lambda,
            f: r.f_value,
            ratio: r.ratio,
            bound: r.bound,
            rank_ratio: r.rank_ratio,
            certified: r.certified,
            inner_iterations: r.inner_iterations,
        }),
    )
}

pub fn emit_grid_csv(path: &Path, points: &[GridPoint]) -> Result<(), CliError> {
    write_rows(path, points)
}
