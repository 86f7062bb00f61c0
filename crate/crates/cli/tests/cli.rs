use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spdc_cli::GridFile;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_spdc");

fn run(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.arg("--out").arg(dir);
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::create_dir_all(dir).unwrap();
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.args(args).output().expect("binary runs")
}

fn ok(dir: &Path, config: Option<&str>, args: &[&str]) {
    let out = run(dir, config, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn grid(path: PathBuf) -> GridFile {
    GridFile::load_csv(&path).unwrap()
}

fn argmax(g: &GridFile) -> (f64, f64) {
    let k = (0..g.values.len()).max_by(|&a, &b| g.values[a].total_cmp(&g.values[b]).then(b.cmp(&a))).unwrap();
    (g.grid.x(k % g.grid.nx), g.grid.y(k / g.grid.nx))
}

fn summary(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join("hom_scan_summary.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            (k.to_string(), v.trim_matches('"').to_string())
        })
        .collect()
}

fn lookup(s: &[(String, String)], key: &str) -> String {
    s.iter().find(|(k, _)| k == key).unwrap().1.clone()
}

#[test]
fn lg01_magnitude_and_phase() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), None, &["modes", "eval", "--lg", "0,1"]);
    let mag = grid(tmp.path().join("mode_magnitude.csv"));
    let (nx, ny) = (mag.grid.nx, mag.grid.ny);
    assert_eq!(mag.values[(ny / 2) * nx + nx / 2], 0.0);
    let phase = grid(tmp.path().join("mode_phase.csv"));
    // accumulate wrapped phase steps around a square loop about the centre
    let (c, r) = (nx / 2, 20);
    let mut loop_pts = Vec::new();
    for i in c - r..c + r {
        loop_pts.push((i, c - r));
    }
    for j in c - r..c + r {
        loop_pts.push((c + r, j));
    }
    for i in (c - r + 1..=c + r).rev() {
        loop_pts.push((i, c + r));
    }
    for j in (c - r + 1..=c + r).rev() {
        loop_pts.push((c - r, j));
    }
    let mut winding = 0.0;
    for w in 0..loop_pts.len() {
        let (a, b) = (loop_pts[w], loop_pts[(w + 1) % loop_pts.len()]);
        let mut d = phase.values[b.1 * nx + b.0] - phase.values[a.1 * nx + a.0];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        winding += d;
    }
    assert!((winding - 2.0 * PI).abs() < 1e-9, "{winding}");
}

#[test]
fn converted_hg01_matches_lg01() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ok(a.path(), None, &["modes", "eval", "--lg", "0,1", "--z-m", "3.0"]);
    ok(b.path(), None, &["modes", "eval", "--converted", "0,1", "--z-m", "3.0"]);
    let (ga, gb) = (grid(a.path().join("mode_magnitude.csv")), grid(b.path().join("mode_magnitude.csv")));
    let peak = ga.values.iter().copied().fold(0.0, f64::max);
    for (x, y) in ga.values.iter().zip(&gb.values) {
        assert!((x - y).abs() < 1e-6 * peak);
    }
}

#[test]
fn unbalanced_maps_follow_pump_shape() {
    let mut ring = Vec::new();
    for l in [0, 1, 2] {
        let tmp = TempDir::new().unwrap();
        ok(tmp.path(), Some(&format!("[pump]\nl = {l}\n")), &["biphoton", "map"]);
        let g = grid(tmp.path().join("biphoton_map.csv"));
        let (nx, ny) = (g.grid.nx, g.grid.ny);
        let centre = g.values[(ny / 2) * nx + nx / 2];
        let (x, y) = argmax(&g);
        ring.push(x.hypot(y));
        if l == 0 {
            assert_eq!(centre, 1.0);
        } else {
            assert_eq!(centre, 0.0);
        }
    }
    assert!(ring[0] < ring[1] && ring[1] < ring[2], "{ring:?}");
}

#[test]
fn hom_scan_lobes_and_displacement() {
    let base = "[beamsplitter]\nt = 0.7071067811865476\nr = 0.7071067811865476\n";
    for (l, lobes) in [(1, "2"), (2, "4")] {
        let tmp = TempDir::new().unwrap();
        ok(tmp.path(), Some(&format!("{base}[pump]\nl = {l}\n")), &["hom", "scan"]);
        assert_eq!(lookup(&summary(tmp.path()), "lobes"), lobes);
    }
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ok(a.path(), Some(base), &["hom", "scan"]);
    ok(b.path(), Some(&format!("{base}[d2]\nx_mm = 1.0\ny_mm = 1.0\n")), &["hom", "scan"]);
    let ga = grid(a.path().join("hom_scan.csv"));
    let gb = grid(b.path().join("hom_scan.csv"));
    let (xa, ya) = argmax(&ga);
    let (xb, yb) = argmax(&gb);
    let step = ga.grid.x(1) - ga.grid.x(0);
    // the two lobes are equal, so either may hold the maximum
    assert!((xb + 1e-3 - xa).abs() < 0.5 * step);
    assert!(((yb + 1e-3).abs() - ya.abs()).abs() < 0.5 * step);
}

#[test]
fn decompose_table_obeys_selection_rule() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), None, &["decompose"]);
    let text = fs::read_to_string(tmp.path().join("coefficients.csv")).unwrap();
    let raw_norm: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# raw_norm: "))
        .unwrap()
        .parse()
        .unwrap();
    let rows = spdc_cli::commands::read_table(&tmp.path().join("coefficients.csv")).unwrap();
    let mut total = 0.0;
    for r in &rows {
        let (ls, li): (i32, i32) = (r[0].parse().unwrap(), r[2].parse().unwrap());
        assert_eq!(ls + li, 1);
        let abs2: f64 = r[6].parse().unwrap();
        total += abs2;
        // independent radial quadrature of the closed-form profiles
        if r[..4] == ["1", "0", "0", "0"] || r[..4] == ["0", "0", "1", "0"] {
            let raw = (abs2 * raw_norm).sqrt();
            let oracle = 0.022448 * 8.0 * PI * PI;
            assert!((raw / oracle - 1.0).abs() < 5e-5, "{raw} vs {oracle}");
        }
    }
    assert!((total - 1.0).abs() < 1e-12);
    let spectrum = spdc_cli::commands::read_table(&tmp.path().join("spectrum.csv")).unwrap();
    let p: f64 = spectrum.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn thin_crystal_validation_reports() {
    let tmp = TempDir::new().unwrap();
    let cfg = "[pump]\nwavelength_nm = 351.0\n[crystal]\nlength_mm = 1.0\n";
    ok(tmp.path(), Some(cfg), &["validate", "thin-crystal", "--z-rayleigh", "10"]);
    let rows = spdc_cli::commands::read_table(&tmp.path().join("thin_crystal.csv")).unwrap();
    let eps: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["4", "16", "64", "100"]);
    assert!(eps.windows(2).all(|w| w[0] < w[1]), "{eps:?}");
    assert!(eps[3] < 0.02);

    let short = "[pump]\nwavelength_nm = 351.0\n[crystal]\nlength_mm = 1e-6\n";
    ok(tmp.path(), Some(short), &["validate", "thin-crystal", "--orders", "100"]);
    let rows = spdc_cli::commands::read_table(&tmp.path().join("thin_crystal.csv")).unwrap();
    assert!(rows[0][3].parse::<f64>().unwrap() < 1e-8);
}

#[test]
fn witness_verdicts() {
    for l in [1, 2] {
        let tmp = TempDir::new().unwrap();
        ok(tmp.path(), Some(&format!("[pump]\nl = {l}\n")), &["witness", "--delta", "0.3,0", "--delta", "0,0"]);
        let text = fs::read_to_string(tmp.path().join("witness.csv")).unwrap();
        assert!(text.contains("# verdict: entangled_consistent"), "{text}");
        let rows = spdc_cli::commands::read_table(&tmp.path().join("witness.csv")).unwrap();
        assert_eq!(rows.len(), 2);
    }
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), Some("[pump]\nl = 0\n"), &["witness"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let bad = run(tmp.path(), Some("[pump]\nwaist_mm = 0\n"), &["hom", "scan"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("pump.waist_mm"));
    let unknown = run(tmp.path(), Some("[crystal]\nlenght_mm = 1\n"), &["hom", "scan"]);
    assert_eq!(unknown.status.code(), Some(2));

    let blocker = tmp.path().join("not-a-dir");
    fs::write(&blocker, "").unwrap();
    let io = Command::new(BIN).arg("--out").arg(blocker.join("sub")).args(["hom", "scan"]).output().unwrap();
    assert_eq!(io.status.code(), Some(4));

    let missing = Command::new(BIN).args(["--config", "/nonexistent/run.toml", "hom", "scan"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn pgm_output() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), Some("[output]\nformats = [\"csv\", \"pgm\"]\n[scan]\nnx = 31\nny = 21\n"), &["hom", "scan"]);
    let pgm = fs::read_to_string(tmp.path().join("hom_scan.pgm")).unwrap();
    let body: Vec<&str> = pgm.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "P2");
    assert_eq!(body[1], "31 21");
    assert_eq!(body[2], "65535");
    assert_eq!(body.len(), 3 + 21);
    assert!(tmp.path().join("hom_scan.csv").exists());
}
