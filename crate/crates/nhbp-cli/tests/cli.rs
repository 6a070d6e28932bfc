use std::path::Path;
use std::process::{Command, Output};

fn nhbp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhbp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn nhbp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

#[test]
fn spectrum_of_the_two_cell_toy() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "toy.toml", "[model]\nt1 = 1.0\nt2 = 1.0\ngamma = 3.0\n[numeric]\nn_cells = 2\n");
    let o = nhbp(&["spectrum", "-c", &cfg], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // hand 4×4: λ² = −3/4 ± i, so λ = ±1/2 ± i
    let csv = std::fs::read_to_string(d.path().join("out/spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re_E,im_E,abs_E,kind,boundary_weight"));
    let got: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(got.len(), 4);
    for w in [(-0.5, -1.0), (-0.5, 1.0), (0.5, -1.0), (0.5, 1.0)] {
        assert!(got.iter().any(|g| (g.0 - w.0).abs() < 1e-10 && (g.1 - w.1).abs() < 1e-10), "{w:?} not in {got:?}");
    }
    assert_eq!(stdout(&o).lines().filter(|l| l.trim_start().starts_with("E =")).count(), 4);
}

#[test]
fn hermitian_gbz_is_the_unit_circle() {
    let d = tempfile::tempdir().unwrap();
    let o = nhbp(&["gbz", "--set", "model.t1=0.6", "--set", "model.delta_onsite=0.2"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("max |β| deviation from 1:")).unwrap();
    assert!(line.ends_with("(< 1e-6)"), "{line}");
    let csv = std::fs::read_to_string(d.path().join("out/gbz.csv")).unwrap();
    assert!(csv.starts_with("phi,re_beta,im_beta,abs_beta\n"));
}

#[test]
fn validation_errors_exit_2_and_list_every_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "bad.toml",
        "[model]\nt1 = 1.0\ngama = 3.0\n[numeric]\nn_cells = 1\nthreshold = 0.0\n",
    );
    let o = nhbp(&["spectrum", "-c", &cfg], d.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for field in ["model.gama", "numeric.n_cells", "numeric.threshold"] {
        assert!(err.contains(field), "{field} missing from:\n{err}");
    }
    let o = nhbp(&["reproduce", "fig9"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown recipe"));
    let o = nhbp(&["spectrum", "-o", "/proc/nhbp-not-writable"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = nhbp(&["spectrum", "--bogus-flag"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let d = tempfile::tempdir().unwrap();
    // all couplings zero: the characteristic polynomial vanishes identically
    let o = nhbp(&["gbz", "--set", "model.t1=0", "--set", "model.t2=0"], d.path());
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).starts_with("numerical failure"));
}

#[test]
fn help_documents_config_keys() {
    let d = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["sweep", "--help"][..]] {
        let h = stdout(&nhbp(args, d.path()));
        for key in ["[model]", "delta_stagger", "n_p", "winding_gauge", "[diagram]", "out_dir"] {
            assert!(h.contains(key), "{key} missing from {args:?}");
        }
    }
}

#[test]
fn manifest_reruns_to_identical_csv() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "s.toml",
        "[model]\ngamma = 3.0\n[numeric]\nn_cells = 12\nn_p = 60\nn_phi = 128\npbc_grid = 32\n\
         [sweep]\nstart = 0.3\nstop = 2.1\nn_points = 7\n[output]\nout_dir = \"a\"\nformats = [\"csv\", \"json\", \"svg\"]\n",
    );
    let o = nhbp(&["sweep", "-c", &cfg], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("a/sweep.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["command"], "sweep");
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, ["sweep.csv", "sweep.json", "sweep.svg", "sweep.manifest.json"]);

    let o = nhbp(&["sweep", "-c", "a/sweep.manifest.json", "-o", "b", "--workers", "2"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = std::fs::read(d.path().join("a/sweep.csv")).unwrap();
    let b = std::fs::read(d.path().join("b/sweep.csv")).unwrap();
    assert!(a == b, "rerun differs");
    assert!(!a.contains(&b'\r'));
    let svg = std::fs::read_to_string(d.path().join("a/sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));

    // a manifest only replays the command that wrote it
    let o = nhbp(&["gbz", "-c", "a/sweep.manifest.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_phase_diagram_recipe_with_overrides() {
    let d = tempfile::tempdir().unwrap();
    let o = nhbp(
        &["reproduce", "fig4b", "-o", "pd", "--set", "diagram.n_gamma=9", "--set", "diagram.n_t1=7"],
        d.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["fig4b.csv", "fig4b.svg", "fig4b.json", "fig4b.manifest.json"] {
        assert!(d.path().join("pd").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(d.path().join("pd/fig4b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9 * 7);
    assert!(csv.lines().skip(1).all(|l| ["0", "2", "4", "6"].contains(&l.rsplit(',').next().unwrap())));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("pd/fig4b.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["recipe"], "fig4b");
    assert_eq!(m["config"]["diagram"]["n_gamma"], 9);
}

#[test]
fn reproduce_lists_all_recipes() {
    let d = tempfile::tempdir().unwrap();
    let out = stdout(&nhbp(&["reproduce", "--list"], d.path()));
    for r in ["fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b"] {
        assert!(out.lines().any(|l| l.starts_with(r)), "{r}");
    }
    let shown = stdout(&nhbp(&["reproduce", "fig2a", "--show"], d.path()));
    assert!(shown.contains("n_p = 3500"));
}

#[test]
fn invariants_at_fig3a_couplings() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "i.toml",
        "[model]\nvariant = \"chern_x_obc\"\nt1 = 1.0\ngamma = 3.0\ndelta_onsite = 1.0\ndelta_stagger = 1.0\n\
         [numeric]\ntransverse_k = 0.3\n[loop]\nenabled = true\ncenter_x = 3.141592653589793\ncenter_y = 0.8690\n\
         radius_x = 0.05\nradius_y = 0.05\n",
    );
    let o = nhbp(&["invariants", "-c", &cfg], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("pbc_eps: 4 ["), "{out}");
    assert!(out.contains("gap_closings: 6 ky"), "{out}");
    let j: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/invariants.json")).unwrap()).unwrap();
    assert_eq!(j["pbc_eps"].as_array().unwrap().len(), 4);
    assert_eq!(j["gap_closings"].as_array().unwrap().len(), 6);
    let nu = j["vorticity"]["nu_12"].as_f64().unwrap();
    assert!((nu.abs() - 0.5).abs() < 1e-3, "{nu}");
}

#[test]
fn sweep_output_independent_of_worker_count() {
    let d = tempfile::tempdir().unwrap();
    let base = ["sweep", "--set", "model.gamma=1.0", "--set", "numeric.n_cells=10", "--set", "numeric.n_p=40",
        "--set", "sweep.n_points=5", "--set", "numeric.pbc_grid=16", "--set", "numeric.n_phi=128"];
    let mut a = base.to_vec();
    a.extend(["-o", "w1", "--workers", "1"]);
    let mut b = base.to_vec();
    b.extend(["-o", "w3", "--workers", "3"]);
    assert_eq!(nhbp(&a, d.path()).status.code(), Some(0));
    assert_eq!(nhbp(&b, d.path()).status.code(), Some(0));
    assert_eq!(
        std::fs::read(d.path().join("w1/sweep.csv")).unwrap(),
        std::fs::read(d.path().join("w3/sweep.csv")).unwrap()
    );
}
