use crate::error::Result;
use crate::trajectory::{cumulative_arc_length, distance, point_at_arc_length, Trajectory};

/// Discrete Fréchet distance (coupling dynamic program).
pub fn discrete_frechet(a: &Trajectory, b: &Trajectory) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut ca = vec![0.0f64; n * m];
    for i in 0..n {
        for j in 0..m {
            let d = distance(a.point(i), b.point(j));
            let prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => ca[j - 1],
                (_, 0) => ca[(i - 1) * m],
                _ => ca[(i - 1) * m + j]
                    .min(ca[(i - 1) * m + j - 1])
                    .min(ca[i * m + j - 1]),
            };
            ca[i * m + j] = d.max(prev);
        }
    }
    ca[n * m - 1]
}

/// Dynamic time warping with Euclidean ground cost and the symmetric unit
/// step pattern; returns the accumulated cost of the optimal alignment.
pub fn dtw(a: &Trajectory, b: &Trajectory) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![0.0f64; n * m];
    for i in 0..n {
        for j in 0..m {
            let d = distance(a.point(i), b.point(j));
            let prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => acc[j - 1],
                (_, 0) => acc[(i - 1) * m],
                _ => acc[(i - 1) * m + j]
                    .min(acc[(i - 1) * m + j - 1])
                    .min(acc[i * m + j - 1]),
            };
            acc[i * m + j] = d + prev;
        }
    }
    acc[n * m - 1]
}

fn directed_hausdorff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.points()
        .map(|p| b.points().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between the sample sets.
pub fn hausdorff(a: &Trajectory, b: &Trajectory) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Partial curve mapping.
///
/// The shorter curve (by arc length) is laid onto the longer one starting at
/// an arc-length offset; the cost is the summed distance between points at
/// equal arc length from the respective starts, sampled at
/// `max(len_a, len_b)` positions. The smallest cost over `offsets` evenly
/// spaced offsets in `[0, L_long − L_short]` is returned.
pub fn partial_curve_mapping(a: &Trajectory, b: &Trajectory, offsets: usize) -> Result<f64> {
    let ca = cumulative_arc_length(a);
    let cb = cumulative_arc_length(b);
    let (la, lb) = (*ca.last().unwrap(), *cb.last().unwrap());
    let (short, cs, ls, long, cl, ll) = if la <= lb {
        (a, &ca, la, b, &cb, lb)
    } else {
        (b, &cb, lb, a, &ca, la)
    };
    let samples = a.len().max(b.len());
    let slack = ll - ls;
    let offsets = if slack > 0.0 { offsets.max(2) } else { 1 };
    let shorter: Vec<Vec<f64>> = (0..samples)
        .map(|k| point_at_arc_length(short, cs, ls * k as f64 / (samples - 1) as f64))
        .collect();
    let mut best = f64::INFINITY;
    for o in 0..offsets {
        let start = if offsets == 1 {
            0.0
        } else {
            slack * o as f64 / (offsets - 1) as f64
        };
        let cost: f64 = shorter
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let s = start + ls * k as f64 / (samples - 1) as f64;
                distance(p, &point_at_arc_length(long, cl, s))
            })
            .sum();
        best = best.min(cost);
    }
    Ok(best)
}
