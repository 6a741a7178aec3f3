use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{density_stats, occlusion_map};
use crate::cloud::LabelledCloud;
use crate::error::{Error, Result};

/// The clouds of one stand: its source, a control sample and named scans.
pub struct StandRuns<'a> {
    pub name: String,
    pub source: &'a LabelledCloud,
    pub control: &'a LabelledCloud,
    pub scans: Vec<(String, &'a LabelledCloud)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportColumn {
    pub cloud: String,
    pub points: usize,
    pub occluded_pct: f64,
    pub mean_density: f64,
    pub stddev_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBlock {
    pub stand: String,
    /// Control first, then scans in the order given.
    pub columns: Vec<ReportColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub voxel_edge: f64,
    pub match_radius: f64,
    pub blocks: Vec<ReportBlock>,
}

fn column(name: &str, source: &LabelledCloud, cloud: &LabelledCloud, voxel_edge: f64, match_radius: f64) -> Result<ReportColumn> {
    let d = density_stats(cloud, voxel_edge)?;
    let occ = occlusion_map(source, cloud, match_radius)?;
    Ok(ReportColumn {
        cloud: name.to_owned(),
        points: cloud.len(),
        occluded_pct: 100.0 * occ.occluded_fraction,
        mean_density: d.mean_density,
        stddev_density: d.stddev_density,
    })
}

/// Point count, occluded percentage and voxel density statistics for the
/// control and every scan of every stand.
pub fn summary_report(stands: &[StandRuns], voxel_edge: f64, match_radius: f64) -> Result<Report> {
    let blocks = stands
        .iter()
        .map(|s| {
            let mut columns = vec![column("Control", s.source, s.control, voxel_edge, match_radius)?];
            for (name, scan) in &s.scans {
                columns.push(column(name, s.source, scan, voxel_edge, match_radius)?);
            }
            Ok(ReportBlock {
                stand: s.name.clone(),
                columns,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        voxel_edge,
        match_radius,
        blocks,
    })
}

const ROWS: [&str; 4] = ["Number of points", "% of points occluded", "Average density pts/m3", "Stddev density pts/m3"];

fn cell(c: &ReportColumn, row: usize) -> String {
    match row {
        0 => c.points.to_string(),
        1 => format!("{:.1}", c.occluded_pct),
        2 => format!("{:.1}", c.mean_density),
        _ => format!("{:.1}", c.stddev_density),
    }
}

impl Report {
    /// One row per (stand, cloud).
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            "stand",
            "cloud",
            "points",
            "occluded_pct",
            "mean_density",
            "stddev_density",
            "voxel_edge_m",
            "match_radius_m",
        ])
        .expect("in-memory write");
        for b in &self.blocks {
            for c in &b.columns {
                w.write_record([
                    b.stand.clone(),
                    c.cloud.clone(),
                    c.points.to_string(),
                    c.occluded_pct.to_string(),
                    c.mean_density.to_string(),
                    c.stddev_density.to_string(),
                    self.voxel_edge.to_string(),
                    self.match_radius.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Aligned plain-text table: one block per stand, metrics as rows and
    /// clouds as columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "voxel edge {} m, match radius {} m", self.voxel_edge, self.match_radius);
        for b in &self.blocks {
            let mut grid: Vec<Vec<String>> = vec![std::iter::once(b.stand.clone())
                .chain(b.columns.iter().map(|c| c.cloud.clone()))
                .collect()];
            for (r, label) in ROWS.iter().enumerate() {
                grid.push(
                    std::iter::once(label.to_string())
                        .chain(b.columns.iter().map(|c| cell(c, r)))
                        .collect(),
                );
            }
            let widths: Vec<usize> = (0..grid[0].len())
                .map(|k| grid.iter().map(|row| row[k].len()).max().unwrap_or(0))
                .collect();
            out.push('\n');
            for row in &grid {
                let mut line = format!("{:<w$}", row[0], w = widths[0]);
                for (k, v) in row.iter().enumerate().skip(1) {
                    let _ = write!(line, "  {:>w$}", v, w = widths[k]);
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
        }
        out
    }

    /// Write `<stem>.csv` and `<stem>.txt`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        std::fs::write(&csv_path, self.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
        let txt_path = stem.with_extension("txt");
        std::fs::write(&txt_path, self.to_text()).map_err(|e| Error::io(&txt_path, e))
    }
}
