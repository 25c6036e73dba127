//! Region classifiers: map any point of the generalization space to the
//! representation expected to reproduce best there.
//!
//! Inputs are rescaled by the grid's center and half-widths so both
//! classifiers see the grid as the cube `[-1, 1]^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::representations::RepresentationId;
use crate::trajectory::distance_squared;

use super::map::SimilarityMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn { k: usize },
    Csvc { c: f64, gamma: f64 },
}

impl Default for ClassifierKind {
    fn default() -> Self {
        ClassifierKind::Knn { k: 5 }
    }
}

impl ClassifierKind {
    pub fn default_csvc() -> Self {
        ClassifierKind::Csvc { c: 10.0, gamma: 5.0 }
    }
}

/// One trained binary machine of the one-vs-one ensemble. Positive decision
/// values vote for `positive`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BinarySvc {
    positive: RepresentationId,
    negative: RepresentationId,
    support: Vec<usize>,
    /// `α_i y_i` for each support vector.
    coef: Vec<f64>,
    rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionModel {
    pub kind: ClassifierKind,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub training_points: Vec<Vec<f64>>,
    pub training_labels: Vec<RepresentationId>,
    machines: Vec<BinarySvc>,
}

impl RegionModel {
    pub fn labels(&self) -> Vec<RepresentationId> {
        let mut l = self.training_labels.clone();
        l.sort();
        l.dedup();
        l
    }

    fn normalize(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.center.iter().zip(&self.scale))
            .map(|(x, (c, s))| (x - c) / s)
            .collect()
    }

    fn normalized_training(&self) -> Vec<Vec<f64>> {
        self.training_points.iter().map(|p| self.normalize(p)).collect()
    }

    /// Label for `point`. Points outside the training grid are extrapolated.
    pub fn predict(&self, point: &[f64]) -> Result<RepresentationId> {
        if point.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                actual: point.len(),
            });
        }
        let labels = self.labels();
        if labels.len() == 1 {
            return Ok(labels[0]);
        }
        let x = self.normalize(point);
        Ok(match self.kind {
            ClassifierKind::Knn { k } => self.predict_knn(&x, k),
            ClassifierKind::Csvc { gamma, .. } => self.predict_svc(&x, gamma, &labels),
        })
    }

    fn predict_knn(&self, x: &[f64], k: usize) -> RepresentationId {
        let train = self.normalized_training();
        let mut order: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, p)| (distance_squared(p, x).sqrt(), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        // (label, votes, inverse-distance weight)
        let mut tally: Vec<(RepresentationId, usize, f64)> = Vec::new();
        for &(d, i) in order.iter().take(k.max(1)) {
            let label = self.training_labels[i];
            let w = if d > 0.0 { 1.0 / d } else { f64::INFINITY };
            match tally.iter_mut().find(|t| t.0 == label) {
                Some(t) => {
                    t.1 += 1;
                    t.2 += w;
                }
                None => tally.push((label, 1, w)),
            }
        }
        tally.sort_by_key(|t| t.0);
        let mut best = tally[0];
        for &t in &tally[1..] {
            if t.1 > best.1 || (t.1 == best.1 && t.2 > best.2) {
                best = t;
            }
        }
        best.0
    }

    fn predict_svc(&self, x: &[f64], gamma: f64, labels: &[RepresentationId]) -> RepresentationId {
        let train = self.normalized_training();
        let mut votes = vec![0usize; labels.len()];
        for m in &self.machines {
            let f: f64 = m
                .support
                .iter()
                .zip(&m.coef)
                .map(|(&i, &c)| c * rbf(&train[i], x, gamma))
                .sum::<f64>()
                - m.rho;
            let winner = if f > 0.0 { m.positive } else { m.negative };
            votes[labels.iter().position(|l| *l == winner).expect("known label")] += 1;
        }
        let mut best = 0;
        for i in 1..labels.len() {
            if votes[i] > votes[best] {
                best = i;
            }
        }
        labels[best]
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * distance_squared(a, b)).exp()
}

/// Training points for the SVM kernel matrix are capped at this count.
const SVC_MAX_POINTS: usize = 5000;

/// Trains a classifier on the map's per-point best labels. Points where every
/// representation failed are left out.
pub fn fit_region_classifier(map: &SimilarityMap, kind: ClassifierKind) -> Result<RegionModel> {
    let (points, labels): (Vec<Vec<f64>>, Vec<RepresentationId>) = map
        .grid
        .points()
        .iter()
        .zip(&map.best_label)
        .zip(&map.failed)
        .filter(|(_, failed)| !**failed)
        .map(|((p, l), _)| (p.clone(), *l))
        .unzip();
    fit_points(points, labels, map.grid.center().to_vec(), map.grid.extent().to_vec(), kind)
}

/// Trains on arbitrary labeled points, rescaled by `center` and `scale`.
pub fn fit_points(
    points: Vec<Vec<f64>>,
    labels: Vec<RepresentationId>,
    center: Vec<f64>,
    scale: Vec<f64>,
    kind: ClassifierKind,
) -> Result<RegionModel> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("no labeled points to train on".into()));
    }
    if points.len() != labels.len() {
        return Err(Error::InvalidArgument("points and labels differ in length".into()));
    }
    if scale.iter().any(|s| !(*s > 0.0)) || scale.len() != center.len() {
        return Err(Error::InvalidArgument("classifier scale must be positive per dimension".into()));
    }
    match kind {
        ClassifierKind::Knn { k } if k == 0 => {
            return Err(Error::InvalidArgument("k must be at least 1".into()))
        }
        ClassifierKind::Csvc { c, gamma } if !(c > 0.0 && gamma > 0.0) => {
            return Err(Error::InvalidArgument("C and gamma must be positive".into()))
        }
        ClassifierKind::Csvc { .. } if points.len() > SVC_MAX_POINTS => {
            return Err(Error::InvalidArgument(format!(
                "C-SVC training is limited to {SVC_MAX_POINTS} points; use knn for larger grids"
            )))
        }
        _ => {}
    }
    let mut model = RegionModel {
        kind,
        center,
        scale,
        training_points: points,
        training_labels: labels,
        machines: Vec::new(),
    };
    if let ClassifierKind::Csvc { c, gamma } = kind {
        let x = model.normalized_training();
        let classes = model.labels();
        for a in 0..classes.len() {
            for b in a + 1..classes.len() {
                let idx: Vec<usize> = (0..x.len())
                    .filter(|&i| model.training_labels[i] == classes[a] || model.training_labels[i] == classes[b])
                    .collect();
                let y: Vec<f64> = idx
                    .iter()
                    .map(|&i| if model.training_labels[i] == classes[a] { 1.0 } else { -1.0 })
                    .collect();
                let sub: Vec<&[f64]> = idx.iter().map(|&i| x[i].as_slice()).collect();
                let (alpha, rho) = smo(&sub, &y, c, gamma);
                let (support, coef) = idx
                    .iter()
                    .zip(alpha.iter().zip(&y))
                    .filter(|(_, (a, _))| **a > 0.0)
                    .map(|(&i, (a, yi))| (i, a * yi))
                    .unzip();
                model.machines.push(BinarySvc {
                    positive: classes[a],
                    negative: classes[b],
                    support,
                    coef,
                    rho,
                });
            }
        }
    }
    Ok(model)
}

/// Sequential minimal optimization for the C-SVC dual with maximal violating
/// pair selection. Returns the multipliers and the offset `ρ`.
fn smo(x: &[&[f64]], y: &[f64], c: f64, gamma: f64) -> (Vec<f64>, f64) {
    const EPS: f64 = 1e-3;
    const TAU: f64 = 1e-12;
    let n = x.len();
    let max_iter = 10_000_000usize.min(100 * n.max(1000));
    let q: Vec<f64> = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            y[i] * y[j] * rbf(x[i], x[j], gamma)
        })
        .collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    for _ in 0..max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < EPS {
            break;
        }
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qii, qjj, qij) = (q[i * n + i], q[j * n + j], q[i * n + j]);
        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }

    let (mut ub, mut lb, mut free_sum, mut free_count) =
        (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        0.5 * (ub + lb)
    };
    (alpha, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::grid::build_meshgrid;
    use RepresentationId::{Dmp, Ja, Lte};

    fn half_planes(kind: ClassifierKind) -> (RegionModel, Vec<Vec<f64>>) {
        let grid = build_meshgrid(&[0.0, 0.0], &[1.0, 1.0], 9).unwrap();
        let labels = grid.points().iter().map(|p| if p[0] < 0.0 { Ja } else { Lte }).collect();
        let model = fit_points(grid.points().to_vec(), labels, vec![0.0, 0.0], vec![1.0, 1.0], kind).unwrap();
        (model, grid.points().to_vec())
    }

    #[test]
    fn knn1_reproduces_training_labels() {
        let grid = build_meshgrid(&[0.0, 0.0], &[1.0, 1.0], 5).unwrap();
        let labels: Vec<_> = (0..25).map(|i| [Ja, Lte, Dmp][(i * 7) % 3]).collect();
        let model = fit_points(grid.points().to_vec(), labels.clone(), vec![0.0; 2], vec![1.0; 2], ClassifierKind::Knn { k: 1 }).unwrap();
        for (p, l) in grid.points().iter().zip(&labels) {
            assert_eq!(model.predict(p).unwrap(), *l);
        }
    }

    #[test]
    fn half_plane_labels_are_recovered() {
        for kind in [ClassifierKind::default(), ClassifierKind::default_csvc()] {
            let (model, points) = half_planes(kind);
            assert_eq!(model.predict(&[-0.8, 0.3]).unwrap(), Ja, "{kind:?}");
            assert_eq!(model.predict(&[0.7, -0.6]).unwrap(), Lte, "{kind:?}");
            let agree = points
                .iter()
                .filter(|p| model.predict(p).unwrap() == if p[0] < 0.0 { Ja } else { Lte })
                .count();
            assert!(agree >= 75, "{kind:?}: {agree}/81");
        }
    }

    #[test]
    fn svc_separates_three_classes() {
        let grid = build_meshgrid(&[0.0, 0.0], &[1.0, 1.0], 9).unwrap();
        let label = |p: &[f64]| if p[0] < -0.3 { Ja } else if p[1] > 0.0 { Lte } else { Dmp };
        let labels = grid.points().iter().map(|p| label(p)).collect();
        let model = fit_points(grid.points().to_vec(), labels, vec![0.0; 2], vec![1.0; 2], ClassifierKind::default_csvc()).unwrap();
        for q in [[-0.9, 0.0], [0.6, 0.7], [0.6, -0.7]] {
            assert_eq!(model.predict(&q).unwrap(), label(&q));
        }
    }

    #[test]
    fn single_class_is_constant() {
        let points = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        for kind in [ClassifierKind::default(), ClassifierKind::default_csvc()] {
            let model = fit_points(points.clone(), vec![Dmp, Dmp], vec![0.0; 2], vec![1.0; 2], kind).unwrap();
            assert_eq!(model.predict(&[5.0, -3.0]).unwrap(), Dmp);
        }
    }

    #[test]
    fn equidistant_tie_goes_to_precedence() {
        let points = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let model = fit_points(points, vec![Lte, Ja], vec![0.0; 2], vec![1.0; 2], ClassifierKind::Knn { k: 2 }).unwrap();
        assert_eq!(model.predict(&[0.0, 0.0]).unwrap(), Ja);
    }

    #[test]
    fn validation() {
        let p = vec![vec![0.0, 0.0]];
        assert!(fit_points(vec![], vec![], vec![0.0; 2], vec![1.0; 2], ClassifierKind::default()).is_err());
        assert!(fit_points(p.clone(), vec![Ja], vec![0.0; 2], vec![1.0; 2], ClassifierKind::Knn { k: 0 }).is_err());
        let model = fit_points(p, vec![Ja], vec![0.0; 2], vec![1.0; 2], ClassifierKind::default()).unwrap();
        assert!(model.predict(&[0.0]).is_err());
    }
}
