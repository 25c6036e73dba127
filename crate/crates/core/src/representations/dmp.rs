use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmpConfig {
    /// Spring constant `K`. Damping is always `2√K`.
    pub stiffness: f64,
    /// Decay rate of the canonical system.
    pub alpha_s: f64,
    pub num_basis: usize,
    /// Temporal scale; `None` uses the demonstration's duration.
    pub tau: Option<f64>,
}

impl Default for DmpConfig {
    fn default() -> Self {
        DmpConfig {
            stiffness: 100.0,
            alpha_s: 4.6054,
            num_basis: 50,
            tau: None,
        }
    }
}

/// A fitted dynamic movement primitive.
///
/// Transformation system:
/// `τ v̇ = K(g − x) − D v − K(g − x₀) s + K f(s)`, `τ ẋ = v`,
/// driven by the phase `τ ṡ = −α_s s`, with
/// `f(s) = Σ wᵢ ψᵢ(s) s / Σ ψᵢ(s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DmpModel {
    demo: Trajectory,
    stiffness: f64,
    damping: f64,
    alpha_s: f64,
    tau: f64,
    centers: Vec<f64>,
    widths: Vec<f64>,
    /// `num_basis x dims`, row-major.
    weights: Vec<f64>,
    initial_velocity: Vec<f64>,
    residual: f64,
}

impl DmpModel {
    pub fn fit(demo: Trajectory, config: &DmpConfig) -> Result<Self> {
        let DmpConfig {
            stiffness,
            alpha_s,
            num_basis,
            tau,
        } = *config;
        let tau = tau.unwrap_or(demo.duration());
        for (name, v) in [("stiffness", stiffness), ("alpha_s", alpha_s), ("tau", tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if num_basis == 0 {
            return Err(Error::InvalidArgument("num_basis must be at least 1".into()));
        }
        let len = demo.len();
        if len < 3 {
            return Err(Error::InvalidTrajectory("a DMP fit needs at least 3 samples".into()));
        }
        if len < num_basis {
            log::warn!("fitting {num_basis} basis functions to only {len} samples");
        }
        let damping = 2.0 * stiffness.sqrt();
        let (centers, widths) = basis(num_basis, alpha_s);
        let dims = demo.dims();
        let h = demo.step();
        let x0 = demo.first().to_vec();
        let goal = demo.last().to_vec();

        // Forward differences make explicit Euler reproduce the demo exactly
        // when the forcing term is exact. Samples T-2 and T-1 do not influence
        // the integrated positions and are left out of the regression.
        let vel: Vec<Vec<f64>> = (0..len - 1)
            .map(|k| (0..dims).map(|d| (demo.point(k + 1)[d] - demo.point(k)[d]) / h).collect())
            .collect();
        let n_targets = len - 2;
        let phases: Vec<f64> = (0..n_targets).map(|k| phase(alpha_s, tau, k as f64 * h)).collect();
        let mut targets = vec![0.0; n_targets * dims];
        for k in 0..n_targets {
            let x = demo.point(k);
            let s = phases[k];
            for d in 0..dims {
                let acc = (vel[k + 1][d] - vel[k][d]) / h;
                targets[k * dims + d] = (tau * tau * acc + damping * tau * vel[k][d]) / stiffness
                    - (goal[d] - x[d])
                    + (goal[d] - x0[d]) * s;
            }
        }

        let mut weights = vec![0.0; num_basis * dims];
        for i in 0..num_basis {
            let mut denom = 0.0;
            let mut numer = vec![0.0; dims];
            for (k, &s) in phases.iter().enumerate() {
                let psi = gaussian(s, centers[i], widths[i]);
                denom += s * s * psi;
                for d in 0..dims {
                    numer[d] += s * psi * targets[k * dims + d];
                }
            }
            if denom > f64::MIN_POSITIVE {
                for d in 0..dims {
                    weights[i * dims + d] = numer[d] / denom;
                }
            }
        }

        let mut model = DmpModel {
            stiffness,
            damping,
            alpha_s,
            tau,
            centers,
            widths,
            weights,
            initial_velocity: vel[0].iter().map(|v| v * tau).collect(),
            residual: 0.0,
            demo,
        };
        model.residual = phases
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let f = model.forcing(s);
                (0..dims).map(|d| (targets[k * dims + d] - f[d]).powi(2)).sum::<f64>()
            })
            .sum();
        if model.demo.bbox_diagonal() == 0.0 {
            log::warn!("demonstration has zero displacement; forcing weights are zero");
        }
        Ok(model)
    }

    pub fn demo(&self) -> &Trajectory {
        &self.demo
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Forcing weights, one row of `dims` values per basis function.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of squared residuals between the forcing targets and the fitted
    /// basis expansion.
    pub fn regression_residual(&self) -> f64 {
        self.residual
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        phase(self.alpha_s, self.tau, t)
    }

    pub fn forcing(&self, s: f64) -> Vec<f64> {
        let dims = self.demo.dims();
        let mut out = vec![0.0; dims];
        let mut total = 0.0;
        for (i, (&c, &w)) in self.centers.iter().zip(&self.widths).enumerate() {
            let psi = gaussian(s, c, w);
            total += psi;
            for d in 0..dims {
                out[d] += self.weights[i * dims + d] * psi;
            }
        }
        if total > f64::MIN_POSITIVE {
            for v in &mut out {
                *v *= s / total;
            }
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
        }
        out
    }

    /// Integrates the transformation system with explicit Euler at the demo's
    /// sample step. A missing start or goal falls back to the demo's value.
    pub fn reproduce(&self, constraint: &BoundaryConstraint) -> Result<Trajectory> {
        constraint.validate(&self.demo)?;
        let dims = self.demo.dims();
        let x0: Vec<f64> = match constraint.kind() {
            ConstraintKind::Final => self.demo.first().to_vec(),
            _ => constraint.initial_point().expect("validated").to_vec(),
        };
        let goal: Vec<f64> = match constraint.kind() {
            ConstraintKind::Initial => self.demo.last().to_vec(),
            _ => constraint.final_point().expect("validated").to_vec(),
        };
        let len = self.demo.len();
        let h = self.demo.step();
        let (k, dmp_d, tau) = (self.stiffness, self.damping, self.tau);
        let mut x = x0.clone();
        let mut v = self.initial_velocity.clone();
        let mut data = Vec::with_capacity(len * dims);
        data.extend_from_slice(&x);
        for step in 0..len - 1 {
            let s = self.phase_at(step as f64 * h);
            let f = self.forcing(s);
            for d in 0..dims {
                let accel = (k * (goal[d] - x[d]) - dmp_d * v[d] - k * (goal[d] - x0[d]) * s
                    + k * f[d])
                    / tau;
                x[d] += h * v[d] / tau;
                v[d] += h * accel;
            }
            if x.iter().chain(&v).any(|c| !c.is_finite()) {
                return Err(Error::Unstable(format!(
                    "state diverged at step {step}; step size {h:.3e} is too large for K = {k}"
                )));
            }
            data.extend_from_slice(&x);
        }
        Trajectory::new(data, dims)?.with_duration(self.demo.duration())
    }
}

fn phase(alpha_s: f64, tau: f64, t: f64) -> f64 {
    (-alpha_s * t / tau).exp()
}

fn gaussian(s: f64, center: f64, width: f64) -> f64 {
    (-width * (s - center).powi(2)).exp()
}

/// Centers spaced uniformly in time along the phase; widths chosen so that
/// neighbouring kernels cross at half activation.
fn basis(num_basis: usize, alpha_s: f64) -> (Vec<f64>, Vec<f64>) {
    if num_basis == 1 {
        return (vec![1.0], vec![1.0]);
    }
    let centers: Vec<f64> = (0..num_basis)
        .map(|i| (-alpha_s * i as f64 / (num_basis - 1) as f64).exp())
        .collect();
    let widths = (0..num_basis)
        .map(|i| {
            let gap = if i + 1 < num_basis {
                centers[i] - centers[i + 1]
            } else {
                centers[i - 1] - centers[i]
            };
            4.0 * std::f64::consts::LN_2 / (gap * gap)
        })
        .collect();
    (centers, widths)
}
