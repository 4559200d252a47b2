use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heis-sio"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("HEIS_SIO_THREADS").output().unwrap()
}

fn config(dir: &Path, graph: &str, extra: &str) -> String {
    let path = dir.join("cfg.toml");
    let text = format!(
        "seed = 3\nout = \"{}\"\n\n[graph]\n{graph}\ndomain = [-1.0, 1.0, -0.25, 0.25]\nn_y = 20\nn_t = 200\n\n[t1]\neps = [0.5, 0.25]\n{extra}",
        dir.join("out").display()
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_core_passes() {
    let out = run(&["verify", "core"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("associativity") && text.contains("0 failed"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(run(&["verify", "nosuch"]).status.code(), Some(2));
}

#[test]
fn missing_config_is_a_usage_error() {
    assert_eq!(run(&["t1"]).status.code(), Some(2));
}

#[test]
fn eps_below_resolution_names_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "name = \"zero\"", "");
    let text = fs::read_to_string(&cfg).unwrap().replace("eps = [0.5, 0.25]", "eps = [0.5, 0.01]");
    fs::write(&cfg, text).unwrap();
    let out = run(&["t1", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("t1.eps") && err.contains("resolution guard"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn t1_is_stable_on_zero_and_bump_graphs() {
    for graph in ["name = \"zero\"", "name = \"bump\"\nparams = [0.5, 0.15]"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path(), graph, "");
        assert_eq!(run(&["t1", "--config", &cfg]).status.code(), Some(0));
        let s = json(&dir.path().join("out/summary.json"));
        assert_eq!(s["stable"], true, "{graph}: {s}");
        let csv = fs::read_to_string(dir.path().join("out/t1_report.csv")).unwrap();
        assert!(csv.starts_with("operator,kernel,cube,j,eps,"));
    }
}

#[test]
fn ab_riesz_sweep_cancels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "name = \"zero\"", "\n[ab]\nkernels = [\"riesz\"]\nthetas = [0.0, 0.3, 1.0, 2.5]\nradii = [[0.5, 2.0], [0.01, 100.0]]\nquad_n = 300\nprofile = [1.0, 2.0]\n");
    assert_eq!(run(&["ab", "--config", &cfg]).status.code(), Some(0));
    let s = json(&dir.path().join("out/summary.json"));
    assert!(s["max_relative"].as_f64().unwrap() <= 1e-10, "{s}");
}

#[test]
fn curves_of_constant_function_are_exact_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "name = \"constant\"\nparams = [0.75]", "\n[curves]\nstarts = [[0.0, 0.1]]\ns_range = [-1.0, 1.0]\nstep = 0.01\nblowup_bound = 1e6\n");
    assert_eq!(run(&["curves", "--config", &cfg]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/curves.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[2] - (0.1 + 0.75 * f[1])).abs() <= 1e-12, "{line}");
        assert_eq!(f[4], 0.0);
        rows += 1;
    }
    assert_eq!(rows, 201);
}

#[test]
fn cubes_on_zero_graph_pass_every_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "name = \"zero\"", "");
    assert_eq!(run(&["cubes", "--config", &cfg]).status.code(), Some(0));
    let s = json(&dir.path().join("out/cubes.json"));
    for k in ["c0_partition", "c1_nesting", "c2_diameter", "c3_inner_ball", "mass_band"] {
        assert_eq!(s["verdicts"][k], true, "{k}");
    }
    assert_ne!(s["verdicts"]["thin_boundary"], false);
}

#[test]
fn potential_writes_lattice_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "name = \"zero\"", "");
    let text = fs::read_to_string(&cfg).unwrap();
    fs::write(&cfg, text + "\n[potential]\ndensity = 1.0\nh_fd = 1e-3\nradii = [1.5]\npoints_per_radius = 8\nplateau = [1.2, 1.2, 0.4]\nouter = [2.4, 2.4, 0.8]\npairing_n = 16\nlattice_origin = [1.5, 0.0, 0.0]\nlattice_spacing = [0.1, 0.1, 0.1]\nlattice_dims = [2, 3, 4]\n").unwrap();
    assert_eq!(run(&["potential", "--config", &cfg, "--out", dir.path().join("alt").to_str().unwrap()]).status.code(), Some(0));
    let s = json(&dir.path().join("alt/summary.json"));
    assert_eq!(s["lattice_points"], 24);
    assert!(s["pairing"].as_f64().unwrap() < 0.0);
    let bytes = fs::read(dir.path().join("alt/potential.hpt1")).unwrap();
    let (lat, values) = heis_sio::removability::read_hpt1(&bytes[..]).unwrap();
    assert_eq!((lat.dims, values.len()), ([2, 3, 4], 24));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "name = \"zero\"", "");
    let a = run(&["verify", "all", "--config", &cfg]);
    let b = run(&["verify", "all", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}
