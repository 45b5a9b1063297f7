//! Run traces (CSV), run summaries (JSON) and plot data.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DualityGap, InfeasibilityVerdict};
use crate::dual::CorralStats;
use crate::error::Result;
use crate::smoothing::StageRecord;

/// One trace row. `g0` and `q` are only filled where the unsmoothed dual was
/// evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub stage: usize,
    pub gamma: f64,
    pub epsilon: Option<f64>,
    pub g_gamma: f64,
    pub g0: Option<f64>,
    pub grad_norm: f64,
    pub step: f64,
    pub mu: f64,
    pub vertex_frac: f64,
    pub q: Option<f64>,
    pub wall_ms: f64,
}

pub const TRACE_HEADER: [&str; 12] = [
    "iter",
    "stage",
    "gamma",
    "epsilon",
    "g_gamma",
    "g0",
    "grad_norm",
    "step",
    "mu",
    "vertex_frac",
    "q",
    "wall_ms",
];

pub fn write_trace<W: Write>(w: W, rows: &[TraceRow]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(TRACE_HEADER)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    IterationLimit,
    Stalled,
    Infeasible,
}

/// Everything a `solve` run reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub lambda: Vec<f64>,
    pub gamma: f64,
    pub g_gamma: f64,
    pub g0: f64,
    pub g0_zero: f64,
    pub q: f64,
    pub iterations: usize,
    pub corral: CorralStats,
    pub infeasibility: InfeasibilityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<DualityGap>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
}

pub fn write_summary<W: Write>(w: W, s: &RunSummary) -> Result<()> {
    serde_json::to_writer_pretty(w, s)?;
    Ok(())
}

/// One plotted point; `series` is `q_vs_iter`, `mu_vs_gamma` or
/// `vertex_frac_vs_gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

/// Q against iteration, and mean `μ` and vertex fraction per distinct `γ`
/// (averaged over the iterations run at that `γ`).
pub fn plot_data(rows: &[TraceRow]) -> Vec<PlotPoint> {
    let mut out: Vec<PlotPoint> = rows
        .iter()
        .filter_map(|r| {
            r.q.map(|q| PlotPoint {
                series: "q_vs_iter".into(),
                x: r.iter as f64,
                y: q,
            })
        })
        .collect();
    let mut groups: Vec<(f64, f64, f64, usize)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|g| g.0 == r.gamma) {
            Some(g) => {
                g.1 += r.mu;
                g.2 += r.vertex_frac;
                g.3 += 1;
            }
            None => groups.push((r.gamma, r.mu, r.vertex_frac, 1)),
        }
    }
    for &(gamma, mu, _, n) in &groups {
        out.push(PlotPoint {
            series: "mu_vs_gamma".into(),
            x: gamma,
            y: mu / n as f64,
        });
    }
    for &(gamma, _, vf, n) in &groups {
        out.push(PlotPoint {
            series: "vertex_frac_vs_gamma".into(),
            x: gamma,
            y: vf / n as f64,
        });
    }
    out
}

pub fn write_plot_data<W: Write>(w: W, points: &[PlotPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for p in points {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize, gamma: f64, mu: f64, q: Option<f64>) -> TraceRow {
        TraceRow {
            iter,
            stage: 1,
            gamma,
            epsilon: Some(0.1),
            g_gamma: -1.0 / 3.0,
            g0: q.map(|_| -0.1),
            grad_norm: 1e-300,
            step: 0.1 + 0.2,
            mu,
            vertex_frac: 0.5,
            q,
            wall_ms: 1.25,
        }
    }

    #[test]
    fn trace_round_trip() {
        let rows = vec![row(1, 0.5, 0.2, None), row(2, 0.05, 0.1, Some(0.7))];
        let mut buf = Vec::new();
        write_trace(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iter,stage,gamma,epsilon,g_gamma,g0,grad_norm,step,mu,vertex_frac,q,wall_ms\n"));
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[0].step.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn plot_groups_by_gamma() {
        let rows = vec![row(1, 1.0, 0.4, None), row(2, 1.0, 0.2, Some(0.5)), row(3, 0.1, 0.0, Some(0.9))];
        let pts = plot_data(&rows);
        let mu: Vec<_> = pts.iter().filter(|p| p.series == "mu_vs_gamma").collect();
        assert_eq!(mu.len(), 2);
        assert!((mu[0].y - 0.3).abs() < 1e-15);
        assert_eq!(pts.iter().filter(|p| p.series == "q_vs_iter").count(), 2);
    }
}
