use std::fs::File;
use std::path::Path;

use indexmap::IndexMap;

use super::HarnessError;
use crate::numfmt::g17;

/// Column header of trace files, in order.
pub const TRACE_HEADER: [&str; 9] = [
    "solver",
    "rep",
    "iter",
    "wall_time_s",
    "objective",
    "optimality_gap",
    "test_accuracy",
    "grad_norm",
    "rows_touched",
];

/// One benchmark sample.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Training seconds since the run started, excluding measurement.
    pub wall_time_s: f64,
    pub objective: f64,
    /// `objective − F*`.
    pub optimality_gap: f64,
    pub test_accuracy: Option<f64>,
    pub grad_norm: f64,
    /// Cumulative Hessian-vector rows.
    pub rows_touched: usize,
}

/// Solver name → one trace per repetition, in insertion order.
pub type Traces = IndexMap<String, Vec<Vec<TraceRecord>>>;

/// Writes every trace into one CSV with `solver,rep` leading columns.
pub fn write_trace_csv(traces: &Traces, path: &Path) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for (solver, reps) in traces {
        for (rep, trace) in reps.iter().enumerate() {
            for r in trace {
                w.write_record([
                    solver.clone(),
                    rep.to_string(),
                    r.iter.to_string(),
                    g17(r.wall_time_s),
                    g17(r.objective),
                    g17(r.optimality_gap),
                    r.test_accuracy.map(g17).unwrap_or_default(),
                    g17(r.grad_norm),
                    r.rows_touched.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// Reads a file produced by [`write_trace_csv`]. The header must match
/// exactly.
pub fn read_trace_csv(path: &Path) -> Result<Traces, HarnessError> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(file);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| HarnessError::Csv("empty file, expected a header".into()))?
        .map_err(csv_err)?;
    if header.iter().ne(TRACE_HEADER) {
        return Err(HarnessError::Csv(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut traces = Traces::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != TRACE_HEADER.len() {
            return Err(HarnessError::Csv(format!(
                "line {line}: expected {} fields, found {}",
                TRACE_HEADER.len(),
                rec.len()
            )));
        }
        let field = |i: usize| &rec[i];
        let real = |i: usize| {
            field(i).parse::<f64>().map_err(|_| {
                HarnessError::Csv(format!(
                    "line {line}: bad {} {:?}",
                    TRACE_HEADER[i],
                    field(i)
                ))
            })
        };
        let count = |i: usize| {
            field(i).parse::<usize>().map_err(|_| {
                HarnessError::Csv(format!(
                    "line {line}: bad {} {:?}",
                    TRACE_HEADER[i],
                    field(i)
                ))
            })
        };
        let rep = count(1)?;
        let record = TraceRecord {
            iter: count(2)?,
            wall_time_s: real(3)?,
            objective: real(4)?,
            optimality_gap: real(5)?,
            test_accuracy: if field(6).is_empty() {
                None
            } else {
                Some(real(6)?)
            },
            grad_norm: real(7)?,
            rows_touched: count(8)?,
        };
        let reps = traces.entry(field(0).to_string()).or_default();
        if reps.len() <= rep {
            reps.resize_with(rep + 1, Vec::new);
        }
        reps[rep].push(record);
    }
    Ok(traces)
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Csv(e.to_string())
}
