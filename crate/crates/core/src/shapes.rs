//! Synthetic demonstrations bundled so that the engine and the bias study run
//! without external data. All shapes span roughly the unit square.

use std::f64::consts::{PI, TAU};

use crate::trajectory::Trajectory;

/// Names of the shapes in [`bundled_corpus`].
pub const BUNDLED: [&str; 6] = ["line", "s_curve", "l_shape", "loop", "zigzag", "spiral"];

fn sample(n: usize, f: impl Fn(f64) -> [f64; 2]) -> Trajectory {
    assert!(n >= 2);
    let rows: Vec<[f64; 2]> = (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect();
    Trajectory::from_rows(&rows).expect("analytic shapes are finite")
}

fn polyline(n: usize, corners: &[[f64; 2]]) -> Trajectory {
    let segments = (corners.len() - 1) as f64;
    sample(n, |t| {
        let pos = t * segments;
        let i = (pos.floor() as usize).min(corners.len() - 2);
        let frac = pos - i as f64;
        let (a, b) = (corners[i], corners[i + 1]);
        [a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])]
    })
}

pub fn line(n: usize) -> Trajectory {
    sample(n, |t| [t, 0.5 * t])
}

/// One full sine period traversed upward, the letter S.
pub fn s_curve(n: usize) -> Trajectory {
    sample(n, |t| [0.5 - 0.35 * (TAU * t).sin(), t])
}

pub fn l_shape(n: usize) -> Trajectory {
    polyline(n, &[[0.0, 1.0], [0.0, 0.0], [0.6, 0.0]])
}

/// A stroke with a single closed loop in the middle.
pub fn loop_shape(n: usize) -> Trajectory {
    sample(n, |t| [t - 0.35 * (TAU * t).sin(), 0.35 * (1.0 - (TAU * t).cos())])
}

pub fn zigzag(n: usize) -> Trajectory {
    polyline(n, &[[0.0, 0.0], [0.25, 0.3], [0.5, 0.0], [0.75, 0.3], [1.0, 0.0]])
}

pub fn spiral(n: usize) -> Trajectory {
    sample(n, |t| {
        let r = 0.5 * (1.0 - 0.8 * t);
        let theta = 3.0 * PI * t;
        [r * theta.cos(), r * theta.sin()]
    })
}

/// Cursive handwriting stroke with three tight loops.
pub fn writing(n: usize) -> Trajectory {
    sample(n, |t| {
        let a = 3.0 * TAU * t;
        [t - 0.12 * a.sin(), 0.15 * (1.0 - a.cos()) + 0.2 * t]
    })
}

/// 3-D helix, one and a half turns.
pub fn helix(n: usize) -> Trajectory {
    let rows: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let a = 3.0 * PI * t;
            [0.4 * a.cos(), 0.4 * a.sin(), t]
        })
        .collect();
    Trajectory::from_rows(&rows).expect("analytic shapes are finite")
}

/// Looks up a bundled shape (including `writing` and `helix`) by name.
pub fn by_name(name: &str, n: usize) -> Option<Trajectory> {
    Some(match name {
        "line" => line(n),
        "s_curve" | "sshape" | "s" => s_curve(n),
        "l_shape" | "lshape" => l_shape(n),
        "loop" => loop_shape(n),
        "zigzag" => zigzag(n),
        "spiral" => spiral(n),
        "writing" => writing(n),
        "helix" => helix(n),
        _ => return None,
    })
}

/// The six bundled shapes used by the offline bias study, 100 samples each.
pub fn bundled_corpus() -> Vec<(String, Trajectory)> {
    BUNDLED
        .iter()
        .map(|name| (name.to_string(), by_name(name, 100).expect("bundled")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_complete_and_sized() {
        let corpus = bundled_corpus();
        assert_eq!(corpus.len(), 6);
        for (name, t) in &corpus {
            assert_eq!(t.len(), 100, "{name}");
            assert!(t.bbox_diagonal() > 0.5, "{name}");
        }
        assert!(by_name("writing", 50).is_some());
        assert!(by_name("nope", 50).is_none());
    }

    #[test]
    fn polyline_hits_corners() {
        let l = l_shape(101);
        assert_eq!(l.point(50), &[0.0, 0.0]);
        assert_eq!(l.last(), &[0.6, 0.0]);
    }
}
