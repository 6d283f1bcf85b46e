//! Sampled scalar signals, equilibrium shift and delay embedding.
//!
//! A delay vector stacks `2ν` consecutive samples of one observable,
//! `ξ_k = (φ_k, φ_{k+1}, …, φ_{k+2ν-1})`; its successor is the same window
//! advanced by one sample.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on the time step when checking uniform sampling.
pub const UNIFORM_STEP_RTOL: f64 = 1e-6;
/// Fraction of each trajectory pooled into the equilibrium estimate.
pub const TAIL_FRACTION: f64 = 0.1;
/// Minimum trajectory length for estimating the equilibrium from the tail.
pub const MIN_TAIL_SOURCE: usize = 100;
/// Embedding half-dimension below which a warning is emitted.
pub const RECOMMENDED_MIN_NU: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSet {
    pub trajectories: Vec<Vec<f64>>,
    pub period: f64,
    pub labels: Vec<String>,
}

impl SignalSet {
    pub fn new(trajectories: Vec<Vec<f64>>, period: f64) -> Result<Self> {
        let labels = (1..=trajectories.len()).map(|i| format!("v{i}")).collect();
        Self::with_labels(trajectories, period, labels)
    }

    pub fn with_labels(trajectories: Vec<Vec<f64>>, period: f64, labels: Vec<String>) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Data(format!("sampling period must be positive, got {period}")));
        }
        if labels.len() != trajectories.len() {
            return Err(Error::DimensionMismatch {
                expected: trajectories.len(),
                got: labels.len(),
            });
        }
        for (p, traj) in trajectories.iter().enumerate() {
            if let Some(k) = traj.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("trajectory {p}: non-finite sample at index {k}")));
            }
        }
        Ok(Self {
            trajectories,
            period,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Concatenates the trajectories of several sets sharing one period.
    pub fn merge(sets: Vec<SignalSet>) -> Result<Self> {
        let mut iter = sets.into_iter();
        let mut out = iter.next().ok_or_else(|| Error::Data("no signals to merge".into()))?;
        for set in iter {
            if (set.period - out.period).abs() > UNIFORM_STEP_RTOL * out.period {
                return Err(Error::Data(format!(
                    "sampling periods differ: {} vs {}",
                    out.period, set.period
                )));
            }
            out.trajectories.extend(set.trajectories);
            out.labels.extend(set.labels);
        }
        Ok(out)
    }

    /// Writes the set as `t,v1,...,vP`; all trajectories must share a length.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let len = self.trajectories.first().map_or(0, Vec::len);
        if self.trajectories.iter().any(|t| t.len() != len) {
            return Err(Error::Data("CSV export needs equal-length trajectories".into()));
        }
        let io = |e| Error::Io {
            path: "<csv>".into(),
            source: e,
        };
        writeln!(out, "# period = {:e}", self.period).map_err(io)?;
        let mut header = String::from("t");
        for label in &self.labels {
            header.push(',');
            header.push_str(label);
        }
        writeln!(out, "{header}").map_err(io)?;
        for k in 0..len {
            let mut row = format!("{:e}", k as f64 * self.period);
            for traj in &self.trajectories {
                row.push_str(&format!(",{:e}", traj[k]));
            }
            writeln!(out, "{row}").map_err(io)?;
        }
        Ok(())
    }
}

/// Column layout of a signal CSV file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsvLayout {
    /// Sampling period used when the file has no time column.
    pub period: Option<f64>,
}

pub fn load_signals(path: &Path, layout: CsvLayout) -> Result<SignalSet> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_signals(&text, layout)
}

/// Parses signal CSV text. See [`load_signals`].
pub fn parse_signals(text: &str, layout: CsvLayout) -> Result<SignalSet> {
    let mut header_period = None;
    for line in text.lines() {
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            if let Some(p) = parse_period_comment(comment) {
                header_period = Some(p);
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("row {}: {e}", row + 1)))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }

    let first_is_header = records[0].iter().any(|cell| cell.parse::<f64>().is_err());
    let (names, body) = if first_is_header {
        let names: Vec<String> = records[0].iter().map(str::to_string).collect();
        (Some(names), &records[1..])
    } else {
        (None, &records[..])
    };
    if body.is_empty() {
        return Err(Error::Data("no data rows after header".into()));
    }

    let ncols = body[0].len();
    let mut columns = vec![Vec::with_capacity(body.len()); ncols];
    for (row, rec) in body.iter().enumerate() {
        for (col, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "non-numeric cell {cell:?} at data row {}, column {}",
                    row + 1,
                    col + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!("non-finite cell at data row {}", row + 1)));
            }
            columns[col].push(v);
        }
    }

    let time_col = names
        .as_ref()
        .and_then(|n| n.first())
        .is_some_and(|n| n.eq_ignore_ascii_case("t") || n.eq_ignore_ascii_case("time"));

    let configured = layout.period.or(header_period);
    let (period, value_cols, labels) = if time_col {
        let period = uniform_step(&columns[0])?;
        if let Some(p) = configured {
            if (p - period).abs() > UNIFORM_STEP_RTOL * period {
                return Err(Error::Config(format!(
                    "configured period {p} disagrees with time column step {period}"
                )));
            }
        }
        let labels = names.unwrap()[1..].to_vec();
        (period, columns.split_off(1), labels)
    } else {
        let period = configured.ok_or(Error::MissingPeriod)?;
        let labels = names.unwrap_or_else(|| (1..=ncols).map(|i| format!("v{i}")).collect());
        (period, columns, labels)
    };
    if value_cols.is_empty() {
        return Err(Error::Data("no value columns".into()));
    }
    SignalSet::with_labels(value_cols, period, labels)
}

fn parse_period_comment(comment: &str) -> Option<f64> {
    let (key, value) = comment.split_once(['=', ':'])?;
    if key.trim().eq_ignore_ascii_case("period") {
        value.trim().parse().ok()
    } else {
        None
    }
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::MissingPeriod);
    }
    let step = times[1] - times[0];
    if !(step > 0.0) {
        return Err(Error::NonUniformSampling {
            row: 2,
            step,
            expected: step,
        });
    }
    for (k, w) in times.windows(2).enumerate() {
        let d = w[1] - w[0];
        if (d - step).abs() > UNIFORM_STEP_RTOL * step {
            return Err(Error::NonUniformSampling {
                row: k + 2,
                step: d,
                expected: step,
            });
        }
    }
    Ok(step)
}

/// Subtracts the equilibrium value from every sample.
///
/// Without an explicit offset the equilibrium is taken as the mean of the
/// final 10% of samples, pooled over all trajectories. Returns the shifted
/// signals and the offset used.
pub fn shift_to_fixed_point(signals: &SignalSet, offset: Option<f64>) -> Result<(SignalSet, f64)> {
    let offset = match offset {
        Some(c) => c,
        None => tail_mean(signals)?,
    };
    let trajectories = signals
        .trajectories
        .iter()
        .map(|t| t.iter().map(|v| v - offset).collect())
        .collect();
    Ok((
        SignalSet {
            trajectories,
            period: signals.period,
            labels: signals.labels.clone(),
        },
        offset,
    ))
}

fn tail_mean(signals: &SignalSet) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, traj) in signals.trajectories.iter().enumerate() {
        if traj.len() < MIN_TAIL_SOURCE {
            return Err(Error::TrajectoryTooShort {
                index: p,
                len: traj.len(),
                needed: MIN_TAIL_SOURCE - 1,
            });
        }
        let tail = ((traj.len() as f64 * TAIL_FRACTION).ceil() as usize).max(1);
        sum += traj[traj.len() - tail..].iter().sum::<f64>();
        count += tail;
    }
    if count == 0 {
        return Err(Error::Data("no trajectories".into()));
    }
    Ok(sum / count as f64)
}

/// One-step training pairs built from delay vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayDataset {
    pub nu: usize,
    pub states: Vec<Vec<f64>>,
    pub successors: Vec<Vec<f64>>,
    /// Index of the source trajectory of each pair.
    pub source: Vec<usize>,
    /// Number of pairs contributed by each trajectory (`M_p - 2ν`).
    pub counts: Vec<usize>,
    /// Sample count `M_p` of each source trajectory.
    pub lengths: Vec<usize>,
}

impl DelayDataset {
    pub fn dim(&self) -> usize {
        2 * self.nu
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn build_delay_dataset(signals: &SignalSet, nu: usize) -> Result<DelayDataset> {
    if nu == 0 {
        return Err(Error::Config("nu must be at least 1".into()));
    }
    if nu < RECOMMENDED_MIN_NU {
        log::warn!("nu = {nu} is below {RECOMMENDED_MIN_NU}; embedding of a 2-D manifold is not guaranteed");
    }
    let dim = 2 * nu;
    let mut ds = DelayDataset {
        nu,
        states: Vec::new(),
        successors: Vec::new(),
        source: Vec::new(),
        counts: Vec::new(),
        lengths: Vec::new(),
    };
    for (p, traj) in signals.trajectories.iter().enumerate() {
        if traj.len() <= dim {
            return Err(Error::TrajectoryTooShort {
                index: p,
                len: traj.len(),
                needed: dim,
            });
        }
        let count = traj.len() - dim;
        for k in 0..count {
            ds.states.push(traj[k..k + dim].to_vec());
            ds.successors.push(traj[k + 1..k + 1 + dim].to_vec());
            ds.source.push(p);
        }
        ds.counts.push(count);
        ds.lengths.push(traj.len());
    }
    Ok(ds)
}
