use samlfd::engine::{
    best_reproduction, evaluate_grid, EvalOptions, GridSpec, NormalizationScope, Session, SessionConfig,
    SimilarityMap,
};
use samlfd::metrics::MetricId;
use samlfd::representations::RepresentationId;
use samlfd::shapes;
use samlfd::trajectory::ConstraintKind;

fn small(metric: MetricId, resolution: usize) -> SessionConfig {
    SessionConfig {
        metric,
        grid: GridSpec { resolution, ..GridSpec::default() },
        ..SessionConfig::default()
    }
}

#[test]
fn l_shape_frechet_lte_reaches_best_score_in_most_cells() {
    let s = Session::compute(shapes::l_shape(100), small(MetricId::Frechet, 9), None).unwrap();
    let lte = s.map.scores_of(RepresentationId::Lte).unwrap();
    let hits = lte.iter().zip(&s.map.best_score).filter(|(a, b)| a == b).count();
    assert!(hits * 2 > s.map.grid.len(), "{hits} of {}", s.map.grid.len());
}

#[test]
fn s_curve_curvature_prefers_lte_for_most_starts() {
    let demo = shapes::s_curve(100);
    let diag = demo.bbox_diagonal();
    let mut lte = 0;
    let mut total = 0;
    for r in [0.05, 0.1, 0.2] {
        for k in 0..8 {
            let a = k as f64 * std::f64::consts::TAU / 8.0;
            let p = [demo.first()[0] + r * diag * a.cos(), demo.first()[1] + r * diag * a.sin()];
            let res = best_reproduction(
                &demo,
                &p,
                ConstraintKind::Initial,
                &RepresentationId::ALL,
                MetricId::CurvatureComparison,
                &EvalOptions::default(),
            )
            .unwrap();
            total += 1;
            lte += (res.representation == RepresentationId::Lte) as usize;
        }
    }
    assert!(lte * 2 > total, "LTE won {lte} of {total}");
}

#[test]
fn winner_matches_map_at_grid_points() {
    let s = Session::compute(shapes::zigzag(60), small(MetricId::Dtw, 5), Some(1)).unwrap();
    for (i, p) in s.map.grid.points().iter().enumerate().step_by(3) {
        assert_eq!(s.reproduce(p).unwrap().representation, s.map.best_label[i]);
    }
}

#[test]
fn representation_order_does_not_matter() {
    let demo = shapes::loop_shape(60);
    let mut a = small(MetricId::Hausdorff, 5);
    a.representations = vec![RepresentationId::Dmp, RepresentationId::Ja, RepresentationId::Lte];
    let mut b = a.clone();
    b.representations = vec![RepresentationId::Lte, RepresentationId::Dmp, RepresentationId::Ja];
    let sa = Session::compute(demo.clone(), a, Some(1)).unwrap();
    let sb = Session::compute(demo, b, Some(1)).unwrap();
    assert_eq!(sa.map, sb.map);
    assert_eq!(sa.id, sb.id);
}

#[test]
fn adding_a_dominated_representation_keeps_labels() {
    // DMP's raw distances are replaced by something worse than every other
    // cell, so joint normalization must not change the winners.
    let demo = shapes::s_curve(60);
    let grid = GridSpec { resolution: 5, ..GridSpec::default() }.build(&demo, ConstraintKind::Initial).unwrap();
    let opts = EvalOptions { workers: Some(1), ..EvalOptions::default() };
    let two = [RepresentationId::Ja, RepresentationId::Lte];
    let base = evaluate_grid(&demo, &grid, &two, MetricId::Sse, ConstraintKind::Initial, &opts).unwrap();
    let worst = base.raw.iter().flatten().flatten().cloned().fold(0.0, f64::max);
    let mut raw = base.raw.clone();
    raw.push(vec![Some(worst * 10.0 + 1.0); grid.len()]);
    let three = SimilarityMap::from_raw(
        grid,
        MetricId::Sse,
        ConstraintKind::Initial,
        NormalizationScope::Joint,
        vec![RepresentationId::Ja, RepresentationId::Lte, RepresentationId::Dmp],
        raw,
        Vec::new(),
    )
    .unwrap();
    assert_eq!(base.best_label, three.best_label);
}

#[test]
fn per_representation_normalization_ranges_each_map() {
    let mut cfg = small(MetricId::Dtw, 5);
    cfg.normalization = NormalizationScope::PerRepresentation;
    let s = Session::compute(shapes::s_curve(60), cfg, Some(1)).unwrap();
    for scores in &s.map.scores {
        let hi = scores.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(hi, 1.0);
    }
}

#[test]
fn goal_displacement_centers_grid_on_goal() {
    let demo = shapes::s_curve(50);
    let mut cfg = small(MetricId::Frechet, 5);
    cfg.constraint_kind = ConstraintKind::Final;
    let s = Session::compute(demo.clone(), cfg, Some(1)).unwrap();
    assert_eq!(s.map.grid.center(), demo.last());
    let goal = &s.map.grid.points()[6];
    let res = s.reproduce(goal).unwrap();
    assert_eq!(res.trajectory.first(), demo.first());
    let miss = samlfd::trajectory::distance(res.trajectory.last(), goal);
    assert!(miss < 0.01 * demo.bbox_diagonal(), "{} misses by {miss}", res.representation);
}

#[test]
fn session_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = Session::compute(shapes::l_shape(40), small(MetricId::Area, 3), Some(1)).unwrap();
    let path = dir.path().join("s.json");
    samlfd::io::save_session(&path, &s).unwrap();
    let back = samlfd::io::load_session(&path).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.to_json(), s.to_json());
    for p in s.map.grid.points() {
        assert_eq!(back.predict(p).unwrap(), s.predict(p).unwrap());
    }
}

#[test]
fn invalid_grid_is_rejected() {
    let err = Session::compute(shapes::line(20), small(MetricId::Dtw, 1), None).unwrap_err();
    assert!(err.is_validation());
}
