//! Deterministic output serialization.
//!
//! Fixed column/key order and fixed float formatting (17 significant
//! digits, `{:.16e}`) make every output byte a function of the inputs.
//! CSV writes absent values as empty fields and infinities as `inf`; JSON
//! serializes non-finite floats as `null`.

use crate::aggregate::AggregateResult;
use crate::engine::{SweepRow, SweepTable};
use crate::error::HarnessError;
use clipopt_core::theory::BoundReport;
use clipopt_core::trace::{write_trace_csv, Trace};
use serde::Serialize;
use std::io::{self, BufRead, Write};
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// JSON with fixed float formatting
// ---------------------------------------------------------------------------

struct Float17Formatter;

impl serde_json::ser::Formatter for Float17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any payload as JSON with 17-significant-digit floats and
/// struct-declaration key order.
pub fn to_json_vec<T: Serialize>(value: &T) -> Result<Vec<u8>, HarnessError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Float17Formatter);
    value.serialize(&mut ser).map_err(|e| HarnessError::io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

// ---------------------------------------------------------------------------
// Aggregate CSV
// ---------------------------------------------------------------------------

const AGGREGATE_HEADER: &str =
    "epoch,fgap_median,fgap_p5,fgap_p95,dist_median,dist_p5,dist_p95";

pub fn write_aggregate_csv<W: Write>(agg: &AggregateResult, w: &mut W) -> io::Result<()> {
    writeln!(w, "{AGGREGATE_HEADER}")?;
    for (i, &epoch) in agg.epochs.iter().enumerate() {
        let f = &agg.fgap[i];
        let d = &agg.dist[i];
        writeln!(
            w,
            "{epoch},{},{},{},{},{},{}",
            fmt_f64(f.median),
            fmt_f64(f.p5),
            fmt_f64(f.p95),
            fmt_f64(d.median),
            fmt_f64(d.p5),
            fmt_f64(d.p95),
        )?;
    }
    Ok(())
}

/// One parsed row of the aggregate CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCsvRow {
    pub epoch: u64,
    pub fgap: crate::aggregate::PercentileSummary,
    pub dist: crate::aggregate::PercentileSummary,
}

pub fn parse_aggregate_csv<R: BufRead>(r: R) -> io::Result<Vec<AggregateCsvRow>> {
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == AGGREGATE_HEADER => {}
        other => {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad aggregate header: {other:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "expected 7 fields"));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
        };
        rows.push(AggregateCsvRow {
            epoch: f[0]
                .parse()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{e}")))?,
            fgap: crate::aggregate::PercentileSummary {
                median: num(f[1])?,
                p5: num(f[2])?,
                p95: num(f[3])?,
            },
            dist: crate::aggregate::PercentileSummary {
                median: num(f[4])?,
                p5: num(f[5])?,
                p95: num(f[6])?,
            },
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Epoch-to-accuracy CSV
// ---------------------------------------------------------------------------

const EPOCHS_HEADER: &str = "eps,median_epochs,p5,p95,reached,diverged,trials";

pub fn write_epoch_to_eps_csv<W: Write>(agg: &AggregateResult, w: &mut W) -> io::Result<()> {
    writeln!(w, "{EPOCHS_HEADER}")?;
    for s in &agg.epoch_to_eps {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_f64(s.eps),
            fmt_opt_f64(s.median),
            fmt_opt_u64(s.p5),
            fmt_opt_u64(s.p95),
            s.reached,
            agg.diverged_trials,
            agg.trials,
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweep CSV
// ---------------------------------------------------------------------------

const SWEEP_HEADER: &str = "alpha0,eps,median_epochs,p5,p95,reached,diverged,trials";

pub fn write_sweep_csv<W: Write>(table: &SweepTable, w: &mut W) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.alpha0),
            fmt_f64(r.eps),
            fmt_opt_f64(r.median_epochs),
            fmt_opt_u64(r.p5),
            fmt_opt_u64(r.p95),
            r.reached,
            r.diverged,
            r.trials,
        )?;
    }
    Ok(())
}

pub fn parse_sweep_csv<R: BufRead>(r: R) -> io::Result<SweepTable> {
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == SWEEP_HEADER => {}
        other => {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad sweep header: {other:?}"),
            ))
        }
    }
    let mut table = SweepTable::default();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "expected 8 fields"));
        }
        let bad = |e: String| io::Error::new(io::ErrorKind::InvalidData, e);
        let num =
            |s: &str| s.parse::<f64>().map_err(|e| bad(e.to_string()));
        let opt_num = |s: &str| -> io::Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        let opt_int = |s: &str| -> io::Result<Option<u64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<u64>().map(Some).map_err(|e| bad(e.to_string()))
            }
        };
        let int = |s: &str| s.parse::<u32>().map_err(|e| bad(e.to_string()));
        table.rows.push(SweepRow {
            alpha0: num(f[0])?,
            eps: num(f[1])?,
            median_epochs: opt_num(f[2])?,
            p5: opt_int(f[3])?,
            p95: opt_int(f[4])?,
            reached: int(f[5])?,
            diverged: int(f[6])?,
            trials: int(f[7])?,
        });
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// File-level emit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

pub enum EmitPayload<'a> {
    Aggregate(&'a AggregateResult),
    Sweep(&'a SweepTable),
    Report(&'a BoundReport),
    Trace(&'a Trace),
}

/// Writes a payload to `path` in the requested format. Serialization is
/// deterministic; I/O failures carry the path.
pub fn emit(payload: &EmitPayload, path: &Path, format: EmitFormat) -> Result<(), HarnessError> {
    let bytes: Vec<u8> = match (payload, format) {
        (EmitPayload::Aggregate(agg), EmitFormat::Csv) => {
            let mut buf = Vec::new();
            write_aggregate_csv(agg, &mut buf).map_err(|e| HarnessError::io_at(path, e))?;
            buf
        }
        (EmitPayload::Aggregate(agg), EmitFormat::Json) => to_json_vec(agg)?,
        (EmitPayload::Sweep(table), EmitFormat::Csv) => {
            let mut buf = Vec::new();
            write_sweep_csv(table, &mut buf).map_err(|e| HarnessError::io_at(path, e))?;
            buf
        }
        (EmitPayload::Sweep(table), EmitFormat::Json) => to_json_vec(table)?,
        (EmitPayload::Report(report), EmitFormat::Json) => to_json_vec(report)?,
        (EmitPayload::Report(_), EmitFormat::Csv) => {
            return Err(HarnessError::config("bound reports are emitted as JSON"));
        }
        (EmitPayload::Trace(trace), EmitFormat::Csv) => {
            let mut buf = Vec::new();
            write_trace_csv(trace, &mut buf).map_err(|e| HarnessError::io_at(path, e))?;
            buf
        }
        (EmitPayload::Trace(trace), EmitFormat::Json) => to_json_vec(trace)?,
    };
    std::fs::write(path, bytes).map_err(|e| HarnessError::io_at(path, e))
}
