//! Metrics rows: the comma-separated evaluation series emitted by training.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

pub const METRICS_HEADER: &str = "episode,mean_user_reward,mean_uav_reward,processed_Mbits,\
energy_violations,boundary_violations,collision_violations,wallclock_s";

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("metrics file has no header")]
    MissingHeader,
    #[error("unexpected header `{0}`")]
    BadHeader(String),
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
}

/// One evaluation point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRow {
    /// Training episodes completed when this evaluation ran.
    pub episode: usize,
    /// Mean per-episode reward of a user agent.
    pub mean_user_reward: f64,
    /// Mean per-episode reward of a UAV agent.
    pub mean_uav_reward: f64,
    /// Mean per-episode processed data, feasibility-capped, in megabits.
    pub processed_mbits: f64,
    /// Energy-budget violations across the evaluation episodes.
    pub energy_violations: u64,
    /// Out-of-area violations across the evaluation episodes.
    pub boundary_violations: u64,
    /// Separation violations across the evaluation episodes.
    pub collision_violations: u64,
    /// Wall-clock seconds since the run started (measured, so two otherwise
    /// identical runs differ only in this column).
    pub wallclock_s: f64,
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.episode,
            self.mean_user_reward,
            self.mean_uav_reward,
            self.processed_mbits,
            self.energy_violations,
            self.boundary_violations,
            self.collision_violations,
            self.wallclock_s
        )
    }

    pub fn parse(line: &str, row: usize) -> Result<MetricsRow, MetricsError> {
        let bad = |reason: &str| MetricsError::BadRow { row, reason: reason.to_string() };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(bad(&format!("expected 8 columns, got {}", fields.len())));
        }
        Ok(MetricsRow {
            episode: fields[0].parse().map_err(|_| bad("bad episode"))?,
            mean_user_reward: fields[1].parse().map_err(|_| bad("bad user reward"))?,
            mean_uav_reward: fields[2].parse().map_err(|_| bad("bad uav reward"))?,
            processed_mbits: fields[3].parse().map_err(|_| bad("bad processed"))?,
            energy_violations: fields[4].parse().map_err(|_| bad("bad energy count"))?,
            boundary_violations: fields[5].parse().map_err(|_| bad("bad boundary count"))?,
            collision_violations: fields[6].parse().map_err(|_| bad("bad collision count"))?,
            wallclock_s: fields[7].parse().map_err(|_| bad("bad wallclock"))?,
        })
    }
}

/// Streaming writer: header on creation, one flush per appended row.
pub struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<MetricsWriter, MetricsError> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{METRICS_HEADER}")?;
        out.flush()?;
        Ok(MetricsWriter { out })
    }

    pub fn append(&mut self, row: &MetricsRow) -> Result<(), MetricsError> {
        writeln!(self.out, "{}", row.to_csv())?;
        self.out.flush()?;
        Ok(())
    }
}

/// Writes a whole series at once.
pub fn emit_metrics(series: &[MetricsRow], path: &Path) -> Result<(), MetricsError> {
    let mut w = MetricsWriter::create(path)?;
    for row in series {
        w.append(row)?;
    }
    Ok(())
}

/// Parses a metrics file back into rows.
pub fn parse_metrics(path: &Path) -> Result<Vec<MetricsRow>, MetricsError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or(MetricsError::MissingHeader)?;
    if header != METRICS_HEADER {
        return Err(MetricsError::BadHeader(header.to_string()));
    }
    lines.enumerate().map(|(i, l)| MetricsRow::parse(l, i + 1)).collect()
}
