use std::path::Path;
use std::process::{Command, Output};

fn samlfd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_samlfd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn reproduce_reports_winner_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = samlfd(&["reproduce", "--shape", "s_curve", "--init", "0.05,0.05", "--metric", "dtw", "--out", "r.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("winner: "));
    assert!(out.contains("raw distance: "));
    let t = samlfd::io::load_trajectory(&dir.path().join("r.json")).unwrap();
    assert_eq!(t.len(), 100);
}

#[test]
fn restricted_representations_pick_the_only_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = samlfd(&["reproduce", "--shape", "l_shape", "--goal", "1.1,0.2", "--reps", "lte"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("winner: lte"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["reproduce", "--shape", "s_curve"],
        vec!["reproduce", "--shape", "s_curve", "--init", "0,0", "--metric", "cosine"],
        vec!["reproduce", "--shape", "nope", "--init", "0,0"],
        vec!["region", "--shape", "s_curve", "--resolution", "1"],
        vec!["region", "--shape", "s_curve", "--robust", "1.5"],
        vec!["bias-study", "--bundled", "--metrics", "cosine"],
        vec!["frobnicate"],
    ] {
        let o = samlfd(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn missing_demo_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = samlfd(&["reproduce", "--demo", "absent.csv", "--init", "0,0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.csv"));
}

#[test]
fn region_writes_session_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let o = samlfd(
        &["region", "--shape", "zigzag", "--metric", "hausdorff", "--resolution", "5", "--robust", "1.0", "--heatmap", "map.png"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("robust at 1: "));
    let s = samlfd::io::load_session(&dir.path().join("session.json")).unwrap();
    assert_eq!(s.map.grid.len(), 25);
    let img = image::open(dir.path().join("map.png")).unwrap();
    assert_eq!((img.width(), img.height()), (5 * 24, 5 * 24));
}

#[test]
fn region_accepts_csvc_and_per_representation() {
    let dir = tempfile::tempdir().unwrap();
    let o = samlfd(
        &["region", "--shape", "s_curve", "--resolution", "3", "--classifier", "csvc", "--normalization", "per-representation", "--workers", "2"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bias_study_writes_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = samlfd(&["bias-study", "--bundled", "--metrics", "dtw,curvature", "--csv", "t.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("DTW,") && rows[1].ends_with(",JA"));
    assert!(rows[2].starts_with("Curvature Comparison,") && rows[2].ends_with(",LTE"));
}

#[test]
fn bias_study_over_csv_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("lasa");
    std::fs::create_dir(&corpus).unwrap();
    for name in ["s_curve", "l_shape"] {
        let t = samlfd::shapes::by_name(name, 100).unwrap();
        let mut text = String::from("x,y\n");
        for p in t.points() {
            text.push_str(&format!("{},{}\n", p[0], p[1]));
        }
        std::fs::write(corpus.join(format!("{name}.csv")), text).unwrap();
    }
    let o = samlfd(&["bias-study", "--corpus", "lasa", "--metrics", "sse", "--resolution", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("| SSE |"));
}
