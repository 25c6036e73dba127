use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::trajectory::{
    arc_length, distance, distance_squared, resample_arc_length, resample_uniform, Trajectory,
};

/// Brings two curves to a common length by uniform-index resampling of the
/// shorter one.
fn aligned<'a>(a: &'a Trajectory, b: &'a Trajectory) -> Result<(Cow<'a, Trajectory>, Cow<'a, Trajectory>)> {
    let n = a.len().max(b.len());
    let fit = |t: &'a Trajectory| -> Result<Cow<'a, Trajectory>> {
        if t.len() == n {
            Ok(Cow::Borrowed(t))
        } else {
            Ok(Cow::Owned(resample_uniform(t, n)?))
        }
    };
    Ok((fit(a)?, fit(b)?))
}

pub fn sum_squared_error(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let (a, b) = aligned(a, b)?;
    Ok(a.points().zip(b.points()).map(|(p, q)| distance_squared(p, q)).sum())
}

pub fn total_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let (a, b) = aligned(a, b)?;
    Ok(a.points().zip(b.points()).map(|(p, q)| distance(p, q)).sum())
}

fn triangle_area(p: &[f64], q: &[f64], r: &[f64]) -> f64 {
    let u: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = r.iter().zip(p).map(|(a, b)| a - b).collect();
    let cross_sq = if u.len() == 2 {
        (u[0] * v[1] - u[1] * v[0]).powi(2)
    } else {
        (u[1] * v[2] - u[2] * v[1]).powi(2)
            + (u[2] * v[0] - u[0] * v[2]).powi(2)
            + (u[0] * v[1] - u[1] * v[0]).powi(2)
    };
    0.5 * cross_sq.sqrt()
}

/// Area of the quadrilateral `(a0, a1, b1, b0)`, averaged over its two
/// diagonal splits so the value does not depend on argument order.
fn quad_area(a0: &[f64], a1: &[f64], b1: &[f64], b0: &[f64]) -> f64 {
    let split_a = triangle_area(a0, a1, b1) + triangle_area(a0, b1, b0);
    let split_b = triangle_area(a0, a1, b0) + triangle_area(a1, b1, b0);
    0.5 * (split_a + split_b)
}

fn quad_sweep(a: &Trajectory, b: &Trajectory) -> f64 {
    (0..a.len() - 1)
        .map(|t| quad_area(a.point(t), a.point(t + 1), b.point(t + 1), b.point(t)))
        .sum()
}

/// Swept error area: quadrilaterals between corresponding index pairs.
pub fn swept_error_area(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let (a, b) = aligned(a, b)?;
    Ok(quad_sweep(&a, &b))
}

/// Area between the curves: the quadrilateral sweep after both curves are
/// resampled at equal arc-length spacing.
pub fn area_between(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let n = a.len().max(b.len());
    let a = resample_arc_length(a, n)?;
    let b = resample_arc_length(b, n)?;
    Ok(quad_sweep(&a, &b))
}

pub fn curve_length_difference(a: &Trajectory, b: &Trajectory) -> f64 {
    (arc_length(a) - arc_length(b)).abs()
}

/// Menger curvature of each consecutive sample triple (`len - 2` values).
/// Degenerate triples (repeated points) have zero curvature.
pub fn menger_curvature(t: &Trajectory) -> Vec<f64> {
    (1..t.len() - 1)
        .map(|i| {
            let (p, q, r) = (t.point(i - 1), t.point(i), t.point(i + 1));
            let denom = distance(p, q) * distance(q, r) * distance(p, r);
            if denom > 0.0 {
                4.0 * triangle_area(p, q, r) / denom
            } else {
                0.0
            }
        })
        .collect()
}

pub fn curvature_comparison(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::InvalidArgument(
            "curvature comparison needs at least 3 samples".into(),
        ));
    }
    let (a, b) = aligned(a, b)?;
    let (ka, kb) = (menger_curvature(&a), menger_curvature(&b));
    Ok(ka.iter().zip(&kb).map(|(x, y)| (x - y).abs()).sum())
}

/// Mean pointwise distance over the trailing `fraction` of indices (at least
/// one sample).
pub fn endpoint_convergence(a: &Trajectory, b: &Trajectory, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "endpoint fraction must be in (0, 1], got {fraction}"
        )));
    }
    let (a, b) = aligned(a, b)?;
    let n = a.len();
    let tail = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
    let sum: f64 = (n - tail..n).map(|t| distance(a.point(t), b.point(t))).sum();
    Ok(sum / tail as f64)
}
