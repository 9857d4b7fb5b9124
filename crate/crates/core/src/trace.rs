//! Per-iteration trajectory records and their CSV form.

use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, Write};

/// Metrics of one recorded iteration. `dist` is absent when the instance
/// carries no optimum metadata, `dnorm` when no search direction exists at
/// the final iterate, and the diagnostic channel (`wk`, `vk`,
/// `moreau_grad_sq`) is populated only at the configured stride.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    pub fgap: f64,
    pub dist: Option<f64>,
    pub dnorm: Option<f64>,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub batch: u64,
    pub wk: Option<f64>,
    pub vk: Option<f64>,
    pub moreau_grad_sq: Option<f64>,
    pub diverged: bool,
}

/// Ordered per-iteration records of one trajectory. `k` is strictly
/// increasing and nothing follows the first diverged record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record, enforcing the ordering and truncation invariants.
    pub fn push(&mut self, record: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(!last.diverged, "trace already ended in divergence");
            assert!(record.k > last.k, "iteration counter must strictly increase");
        }
        self.records.push(record);
    }

    pub fn diverged(&self) -> bool {
        self.records.last().is_some_and(|r| r.diverged)
    }

    pub fn last_k(&self) -> Option<u64> {
        self.records.last().map(|r| r.k)
    }

    /// Record at iteration `k`, if recorded.
    pub fn at(&self, k: u64) -> Option<&TraceRecord> {
        self.records.binary_search_by_key(&k, |r| r.k).ok().map(|i| &self.records[i])
    }
}

/// Smallest epoch count `q >= 1` with function gap at iteration `m * q`
/// at most `eps`; `None` when the trace never reaches that accuracy.
pub fn epoch_to_eps(trace: &Trace, eps: f64, m: usize) -> Option<u64> {
    debug_assert!(m >= 1);
    for r in &trace.records {
        if r.k == 0 || r.k % m as u64 != 0 {
            continue;
        }
        if r.fgap <= eps {
            return Some(r.k / m as u64);
        }
    }
    None
}

const CSV_HEADER: &str = "k,fgap,dist,dnorm,alpha,gamma,batch,Wk,Vk,moreau_gradsq,diverged";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Writes a trace in the fixed column order, floats with 17 significant
/// digits, absent values as empty fields.
pub fn write_trace_csv<W: Write>(trace: &Trace, w: &mut W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            fmt(r.fgap),
            fmt_opt(r.dist),
            fmt_opt(r.dnorm),
            fmt(r.alpha),
            fmt_opt(r.gamma),
            r.batch,
            fmt_opt(r.wk),
            fmt_opt(r.vk),
            fmt_opt(r.moreau_grad_sq),
            u8::from(r.diverged),
        )?;
    }
    Ok(())
}

fn parse_f64(field: &str) -> io::Result<f64> {
    field
        .parse::<f64>()
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("bad float {field:?}: {e}")))
}

fn parse_opt(field: &str) -> io::Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(field).map(Some)
    }
}

/// Parses the CSV form back into a trace.
pub fn read_trace_csv<R: BufRead>(r: R) -> io::Result<Trace> {
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        other => {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad trace header: {other:?}"),
            ))
        }
    }
    let mut trace = Trace::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("expected 11 fields, got {}", fields.len()),
            ));
        }
        trace.push(TraceRecord {
            k: fields[0]
                .parse()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("bad k: {e}")))?,
            fgap: parse_f64(fields[1])?,
            dist: parse_opt(fields[2])?,
            dnorm: parse_opt(fields[3])?,
            alpha: parse_f64(fields[4])?,
            gamma: parse_opt(fields[5])?,
            batch: fields[6]
                .parse()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("bad batch: {e}")))?,
            wk: parse_opt(fields[7])?,
            vk: parse_opt(fields[8])?,
            moreau_grad_sq: parse_opt(fields[9])?,
            diverged: fields[10] == "1",
        });
    }
    Ok(trace)
}
