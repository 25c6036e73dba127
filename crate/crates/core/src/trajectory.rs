//! Trajectory container and the preprocessing pipeline applied to raw
//! demonstrations.
//!
//! Samples are stored row-major in a flat buffer. Time is implicit: sample `t`
//! sits at `t * duration / (T - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DURATION: f64 = 1.0;

/// A uniformly time-indexed sequence of 2-D or 3-D points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryRepr", into = "TrajectoryRepr")]
pub struct Trajectory {
    dims: usize,
    duration: f64,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRepr {
    dims: usize,
    #[serde(default = "default_duration")]
    duration: f64,
    samples: Vec<Vec<f64>>,
}

fn default_duration() -> f64 {
    DEFAULT_DURATION
}

impl TryFrom<TrajectoryRepr> for Trajectory {
    type Error = Error;

    fn try_from(repr: TrajectoryRepr) -> Result<Self> {
        let traj = Trajectory::from_rows(&repr.samples)?.with_duration(repr.duration)?;
        if traj.dims != repr.dims {
            return Err(Error::DimensionMismatch {
                expected: repr.dims,
                actual: traj.dims,
            });
        }
        Ok(traj)
    }
}

impl From<Trajectory> for TrajectoryRepr {
    fn from(t: Trajectory) -> Self {
        TrajectoryRepr {
            dims: t.dims,
            duration: t.duration,
            samples: t.rows(),
        }
    }
}

impl Trajectory {
    /// Builds a trajectory from a flat row-major buffer.
    pub fn new(data: Vec<f64>, dims: usize) -> Result<Self> {
        if !(2..=3).contains(&dims) {
            return Err(Error::InvalidTrajectory(format!(
                "dimension must be 2 or 3, got {dims}"
            )));
        }
        if data.len() % dims != 0 {
            return Err(Error::InvalidTrajectory(format!(
                "buffer length {} is not a multiple of {dims}",
                data.len()
            )));
        }
        let len = data.len() / dims;
        if len < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 2 samples, got {len}"
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                sample: idx / dims,
                coord: idx % dims,
            });
        }
        Ok(Trajectory {
            dims,
            duration: DEFAULT_DURATION,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map(|r| r.as_ref().len()).unwrap_or(2);
        let mut data = Vec::with_capacity(rows.len() * dims);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Trajectory::new(data, dims)
    }

    pub fn with_duration(mut self, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidTrajectory(format!(
                "duration must be positive and finite, got {duration}"
            )));
        }
        self.duration = duration;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dims
    }

    /// Always false: a valid trajectory has at least two samples.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Time step between consecutive samples.
    pub fn step(&self) -> f64 {
        self.duration / (self.len() - 1) as f64
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dims)
    }

    pub fn first(&self) -> &[f64] {
        self.point(0)
    }

    pub fn last(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Coordinate `d` of every sample.
    pub fn column(&self, d: usize) -> Vec<f64> {
        self.points().map(|p| p[d]).collect()
    }

    pub fn translated(&self, offset: &[f64]) -> Trajectory {
        assert_eq!(offset.len(), self.dims);
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| v + offset[i % self.dims])
            .collect();
        Trajectory { data, ..*self }
    }

    pub fn scaled(&self, factor: f64) -> Trajectory {
        Trajectory {
            data: self.data.iter().map(|v| v * factor).collect(),
            ..*self
        }
    }

    /// Lower and upper corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dims];
        let mut hi = vec![f64::NEG_INFINITY; self.dims];
        for p in self.points() {
            for d in 0..self.dims {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        distance(&lo, &hi)
    }

    /// Root-mean-square pointwise distance to another trajectory of equal length.
    pub fn rms_distance(&self, other: &Trajectory) -> f64 {
        assert_eq!(self.len(), other.len());
        let sum: f64 = self
            .points()
            .zip(other.points())
            .map(|(a, b)| distance_squared(a, b))
            .sum();
        (sum / self.len() as f64).sqrt()
    }

    pub fn max_distance(&self, other: &Trajectory) -> f64 {
        assert_eq!(self.len(), other.len());
        self.points()
            .zip(other.points())
            .map(|(a, b)| distance(a, b))
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                actual: p.len(),
            });
        }
        if let Some(coord) = p.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: 0, coord });
        }
        Ok(())
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_squared(a, b).sqrt()
}

pub fn distance_squared(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Which endpoints of a reproduction are pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Initial,
    Final,
    Both,
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "initial" | "init" | "start" => Ok(ConstraintKind::Initial),
            "final" | "goal" | "end" => Ok(ConstraintKind::Final),
            "both" => Ok(ConstraintKind::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown constraint kind {other:?} (valid: initial, final, both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstraint {
    kind: ConstraintKind,
    initial_point: Option<Vec<f64>>,
    final_point: Option<Vec<f64>>,
}

impl BoundaryConstraint {
    pub fn initial(point: Vec<f64>) -> Self {
        BoundaryConstraint {
            kind: ConstraintKind::Initial,
            initial_point: Some(point),
            final_point: None,
        }
    }

    pub fn goal(point: Vec<f64>) -> Self {
        BoundaryConstraint {
            kind: ConstraintKind::Final,
            initial_point: None,
            final_point: Some(point),
        }
    }

    pub fn both(initial: Vec<f64>, goal: Vec<f64>) -> Self {
        BoundaryConstraint {
            kind: ConstraintKind::Both,
            initial_point: Some(initial),
            final_point: Some(goal),
        }
    }

    /// The demonstration's own endpoints.
    pub fn from_demo(demo: &Trajectory) -> Self {
        BoundaryConstraint::both(demo.first().to_vec(), demo.last().to_vec())
    }

    /// Moves the `kind` endpoint to `point` and keeps the other endpoint at
    /// the demonstration's value. `Both` is not a single point of interest
    /// and is rejected.
    pub fn displaced(demo: &Trajectory, kind: ConstraintKind, point: &[f64]) -> Result<Self> {
        demo.check_point(point)?;
        match kind {
            ConstraintKind::Initial => Ok(BoundaryConstraint::both(
                point.to_vec(),
                demo.last().to_vec(),
            )),
            ConstraintKind::Final => Ok(BoundaryConstraint::both(
                demo.first().to_vec(),
                point.to_vec(),
            )),
            ConstraintKind::Both => Err(Error::InvalidArgument(
                "a point of interest is either the initial or the final point".into(),
            )),
        }
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn initial_point(&self) -> Option<&[f64]> {
        self.initial_point.as_deref()
    }

    pub fn final_point(&self) -> Option<&[f64]> {
        self.final_point.as_deref()
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        let shift = |p: &Vec<f64>| p.iter().zip(offset).map(|(a, b)| a + b).collect();
        BoundaryConstraint {
            kind: self.kind,
            initial_point: self.initial_point.as_ref().map(shift),
            final_point: self.final_point.as_ref().map(shift),
        }
    }

    /// Checks the kind/point invariants against a demonstration.
    pub fn validate(&self, demo: &Trajectory) -> Result<()> {
        let need_initial = matches!(self.kind, ConstraintKind::Initial | ConstraintKind::Both);
        let need_final = matches!(self.kind, ConstraintKind::Final | ConstraintKind::Both);
        if need_initial && self.initial_point.is_none() {
            return Err(Error::InvalidArgument("constraint is missing the initial point".into()));
        }
        if need_final && self.final_point.is_none() {
            return Err(Error::InvalidArgument("constraint is missing the final point".into()));
        }
        for p in self.initial_point.iter().chain(self.final_point.iter()) {
            demo.check_point(p)?;
        }
        Ok(())
    }

    /// `(sample index, point)` pairs pinned by this constraint.
    pub(crate) fn pinned(&self, len: usize) -> Vec<(usize, &[f64])> {
        let mut out = Vec::with_capacity(2);
        if matches!(self.kind, ConstraintKind::Initial | ConstraintKind::Both) {
            out.push((0, self.initial_point.as_deref().expect("validated")));
        }
        if matches!(self.kind, ConstraintKind::Final | ConstraintKind::Both) {
            out.push((len - 1, self.final_point.as_deref().expect("validated")));
        }
        out
    }
}

/// Resamples to `target_len` samples at uniform index positions using linear
/// interpolation. Endpoints are copied exactly.
pub fn resample_uniform(traj: &Trajectory, target_len: usize) -> Result<Trajectory> {
    if target_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "target length must be at least 2, got {target_len}"
        )));
    }
    let len = traj.len();
    let dims = traj.dims;
    let mut data = Vec::with_capacity(target_len * dims);
    for k in 0..target_len {
        if k == target_len - 1 {
            data.extend_from_slice(traj.last());
            continue;
        }
        let pos = (k * (len - 1)) as f64 / (target_len - 1) as f64;
        let lo = (pos.floor() as usize).min(len - 1);
        let frac = pos - lo as f64;
        let a = traj.point(lo);
        if frac == 0.0 {
            data.extend_from_slice(a);
        } else {
            let b = traj.point(lo + 1);
            data.extend(a.iter().zip(b).map(|(x, y)| x + frac * (y - x)));
        }
    }
    Ok(Trajectory {
        dims,
        duration: traj.duration,
        data,
    })
}

/// Centered moving average. Near the ends the window shrinks symmetrically,
/// so the first and last samples are left untouched.
pub fn smooth_moving_average(traj: &Trajectory, window: usize) -> Result<Trajectory> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "window must be odd and positive, got {window}"
        )));
    }
    if window > traj.len() {
        return Err(Error::InvalidArgument(format!(
            "window {window} exceeds trajectory length {}",
            traj.len()
        )));
    }
    let len = traj.len();
    let dims = traj.dims;
    let half = window / 2;
    let mut data = Vec::with_capacity(traj.data.len());
    for i in 0..len {
        let w = half.min(i).min(len - 1 - i);
        let count = (2 * w + 1) as f64;
        for d in 0..dims {
            let sum: f64 = (i - w..=i + w).map(|j| traj.data[j * dims + d]).sum();
            data.push(sum / count);
        }
    }
    Ok(Trajectory {
        dims,
        duration: traj.duration,
        data,
    })
}

pub fn arc_length(traj: &Trajectory) -> f64 {
    traj.points()
        .zip(traj.points().skip(1))
        .map(|(a, b)| distance(a, b))
        .sum()
}

/// Cumulative arc length at each sample, starting at 0.
pub fn cumulative_arc_length(traj: &Trajectory) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(traj.len());
    out.push(0.0);
    for (a, b) in traj.points().zip(traj.points().skip(1)) {
        acc += distance(a, b);
        out.push(acc);
    }
    out
}

/// Point at arc length `s` along the polyline, given its cumulative lengths.
pub(crate) fn point_at_arc_length(traj: &Trajectory, cumulative: &[f64], s: f64) -> Vec<f64> {
    let total = *cumulative.last().expect("non-empty");
    if s <= 0.0 || total == 0.0 {
        return traj.first().to_vec();
    }
    if s >= total {
        return traj.last().to_vec();
    }
    let seg = cumulative.partition_point(|&c| c <= s).saturating_sub(1);
    let seg = seg.min(traj.len() - 2);
    let span = cumulative[seg + 1] - cumulative[seg];
    let frac = if span > 0.0 {
        (s - cumulative[seg]) / span
    } else {
        0.0
    };
    let a = traj.point(seg);
    let b = traj.point(seg + 1);
    a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect()
}

/// Resamples to `target_len` points equally spaced in arc length.
pub fn resample_arc_length(traj: &Trajectory, target_len: usize) -> Result<Trajectory> {
    if target_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "target length must be at least 2, got {target_len}"
        )));
    }
    let cumulative = cumulative_arc_length(traj);
    let total = *cumulative.last().expect("non-empty");
    let mut data = Vec::with_capacity(target_len * traj.dims);
    for k in 0..target_len {
        if k == target_len - 1 {
            data.extend_from_slice(traj.last());
        } else {
            let s = total * k as f64 / (target_len - 1) as f64;
            data.extend(point_at_arc_length(traj, &cumulative, s));
        }
    }
    Ok(Trajectory {
        dims: traj.dims,
        duration: traj.duration,
        data,
    })
}

/// Settings of the ingestion pipeline: smoothing followed by resampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub smooth_window: usize,
    pub target_len: usize,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            smooth_window: 5,
            target_len: 100,
        }
    }
}

impl Preprocess {
    pub fn apply(&self, traj: &Trajectory) -> Result<Trajectory> {
        let window = self.smooth_window.min(largest_odd_at_most(traj.len()));
        let smoothed = smooth_moving_average(traj, window)?;
        resample_uniform(&smoothed, self.target_len)
    }
}

fn largest_odd_at_most(n: usize) -> usize {
    if n % 2 == 1 {
        n
    } else {
        n - 1
    }
}
