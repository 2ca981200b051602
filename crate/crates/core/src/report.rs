//! CSV readers and writers for run records, series, sweeps, network
//! properties and correlations.
//!
//! Floats are written with fixed precision so that equal results always
//! produce byte-identical files.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::engine::{Opinion, Protocol, RunResult, SeriesRecord};
use crate::experiment::{
    ConvergencePoint, PropertySweep, StructureCorrelation, StructurePoint, SweepResult,
};
use crate::metrics::CorrelationReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
}

pub type ReportResult<T> = std::result::Result<T, ReportError>;

pub const RUN_HEADER: [&str; 6] = [
    "seed",
    "protocol",
    "converged",
    "cycles",
    "encounters",
    "final_opinion",
];
pub const SERIES_HEADER: [&str; 5] = [
    "cycle",
    "count_opinion0",
    "count_opinion1",
    "mean_mem_diff",
    "var_mem_diff",
];
pub const SWEEP_HEADER: [&str; 16] = [
    "cell_id",
    "protocol",
    "layers",
    "topology",
    "k",
    "d",
    "zeta",
    "runs",
    "convergence_ratio",
    "enc_mean",
    "enc_sd",
    "enc_min",
    "enc_q1",
    "enc_median",
    "enc_q3",
    "enc_max",
];
pub const PROPERTY_HEADER: [&str; 6] = [
    "config_id",
    "instance",
    "edges",
    "clustering_coefficient",
    "avg_path_length",
    "reachable_fraction",
];
pub const CORRELATION_HEADER: [&str; 7] =
    ["family", "x", "y", "rho", "p_value", "ci_low", "ci_high"];

fn opt<T: ToString>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One row of a run-record file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub seed: u64,
    pub protocol: Protocol,
    pub converged: bool,
    pub cycles: usize,
    pub encounters: u64,
    pub final_opinion: Option<Opinion>,
}

impl From<&RunResult> for RunRecord {
    fn from(r: &RunResult) -> Self {
        RunRecord {
            seed: r.seed,
            protocol: r.protocol,
            converged: r.converged,
            cycles: r.cycles_used,
            encounters: r.encounters,
            final_opinion: r.final_opinion,
        }
    }
}

pub fn write_run_records<'a, W: Write>(
    out: W,
    runs: impl IntoIterator<Item = &'a RunResult>,
) -> ReportResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_HEADER)?;
    for run in runs {
        let r = RunRecord::from(run);
        w.write_record([
            r.seed.to_string(),
            r.protocol.to_string(),
            r.converged.to_string(),
            r.cycles.to_string(),
            r.encounters.to_string(),
            opt(r.final_opinion),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_run_records<R: Read>(input: R) -> ReportResult<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |reason: &str| ReportError::Row {
            row: i + 1,
            reason: reason.to_string(),
        };
        if row.len() != RUN_HEADER.len() {
            return Err(bad("expected 6 columns"));
        }
        let final_opinion = match &row[5] {
            "" => None,
            s => Some(
                s.parse::<usize>()
                    .ok()
                    .and_then(Opinion::from_index)
                    .ok_or_else(|| bad("final_opinion must be 0, 1 or empty"))?,
            ),
        };
        records.push(RunRecord {
            seed: row[0].parse().map_err(|_| bad("bad seed"))?,
            protocol: row[1].parse().map_err(|_| bad("bad protocol"))?,
            converged: row[2].parse().map_err(|_| bad("bad converged flag"))?,
            cycles: row[3].parse().map_err(|_| bad("bad cycles"))?,
            encounters: row[4].parse().map_err(|_| bad("bad encounters"))?,
            final_opinion,
        });
    }
    Ok(records)
}

pub fn write_series<W: Write>(out: W, series: &[SeriesRecord]) -> ReportResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for rec in series {
        w.write_record([
            rec.cycle.to_string(),
            rec.count_opinion0.to_string(),
            rec.count_opinion1.to_string(),
            format!("{:.6}", rec.mean_mem_diff),
            format!("{:.6}", rec.var_mem_diff),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes one row per completed cell; failed cells are skipped.
pub fn write_sweep<W: Write>(out: W, sweep: &SweepResult) -> ReportResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for outcome in &sweep.cells {
        let Ok(stats) = outcome.stats() else { continue };
        let cell = &outcome.cell;
        let zeta: Vec<String> = match cell.protocol {
            Protocol::Permeability => Vec::new(),
            Protocol::Switching => cell.zeta.iter().map(|z| format!("{z:.4}")).collect(),
        };
        let q = stats.encounter_quantiles;
        w.write_record([
            cell.id.to_string(),
            cell.protocol.to_string(),
            cell.stack.len().to_string(),
            cell.config_id(),
            opt(cell.k()),
            opt(cell.d()),
            zeta.join(";"),
            stats.run_count.to_string(),
            format!("{:.6}", stats.convergence_ratio),
            format!("{:.3}", stats.encounters_mean),
            format!("{:.3}", stats.encounters_sd),
            format!("{:.2}", q.min),
            format!("{:.2}", q.q1),
            format!("{:.2}", q.median),
            format!("{:.2}", q.q3),
            format!("{:.2}", q.max),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `(topology, convergence_ratio)` pairs from a sweep file.
pub fn read_sweep_points<R: Read>(input: R) -> ReportResult<Vec<ConvergencePoint>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(topo), Some(ratio)) = (col("topology"), col("convergence_ratio")) else {
        return Err(ReportError::Row {
            row: 0,
            reason: "missing topology or convergence_ratio column".into(),
        });
    };
    let mut points = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let value =
            row.get(ratio)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| ReportError::Row {
                    row: i + 1,
                    reason: "bad convergence_ratio".into(),
                })?;
        points.push(ConvergencePoint {
            config_id: row.get(topo).unwrap_or_default().to_string(),
            ratio: value,
        });
    }
    Ok(points)
}

pub fn write_properties<W: Write>(out: W, sweep: &PropertySweep) -> ReportResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROPERTY_HEADER)?;
    for config in &sweep.configs {
        let Ok(instances) = &config.instances else {
            continue;
        };
        for (i, p) in instances.iter().enumerate() {
            w.write_record([
                config.config_id.clone(),
                i.to_string(),
                p.edge_count.to_string(),
                format!("{:.6}", p.clustering_coefficient),
                format!("{:.6}", p.avg_path_length),
                format!("{:.6}", p.reachable_pair_fraction),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a property file and averages path length and clustering per
/// configuration.
pub fn read_property_points<R: Read>(input: R) -> ReportResult<Vec<StructurePoint>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut sums: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let num = |idx: usize, name: &str| -> ReportResult<f64> {
            row.get(idx)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| ReportError::Row {
                    row: i + 1,
                    reason: format!("bad {name}"),
                })
        };
        let cc = num(3, "clustering_coefficient")?;
        let apl = num(4, "avg_path_length")?;
        let entry = sums
            .entry(row.get(0).unwrap_or_default().to_string())
            .or_default();
        entry.0 += apl;
        entry.1 += cc;
        entry.2 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(config_id, (apl, cc, n))| StructurePoint {
            config_id,
            avg_path_length: apl / n as f64,
            clustering_coefficient: cc / n as f64,
        })
        .collect())
}

fn correlation_row(family: &str, x: &str, y: &str, r: &CorrelationReport) -> [String; 7] {
    [
        family.to_string(),
        x.to_string(),
        y.to_string(),
        format!("{:.6}", r.rho),
        format!("{:.6e}", r.p_value),
        format!("{:.6}", r.ci_low),
        format!("{:.6}", r.ci_high),
    ]
}

pub fn write_correlation<W: Write>(
    out: W,
    family: &str,
    corr: &StructureCorrelation,
) -> ReportResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CORRELATION_HEADER)?;
    w.write_record(correlation_row(
        family,
        "CR",
        "APL",
        &corr.ratio_vs_path_length,
    ))?;
    w.write_record(correlation_row(
        family,
        "CR",
        "CC",
        &corr.ratio_vs_clustering,
    ))?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
