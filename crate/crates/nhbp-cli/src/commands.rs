//! One function per subcommand. Each prints its summary lines, writes the
//! requested files and returns the JSON summary that goes into the manifest.

use crate::config::{LoopSpec, RunConfig};
use crate::output::{self, num, Long, Plot, Series, Style};
use nhbp::gbz::{gbz_contour, non_bloch_winding_with};
use nhbp::invariants::{
    edge_ratios, gbz_radius, obc_gap_closings, pbc_ep_locations, vorticity_two_band,
};
use nhbp::model::{d_chern_x, d_chern_y, d_ssh};
use nhbp::phase_diagram::{
    detect_jumps, linspace, phase_diagram_obc, phase_diagram_pbc, sweep, DiagramKind, Jump,
    SweepOptions, SweepParameter,
};
use nhbp::realspace::{biorthogonal_spectrum, build_obc, classify_modes, default_window};
use nhbp::scalar::{c, re};
use nhbp::{Error, Variant};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Validation(Vec<String>),
    /// Exit 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_validation(&e) {
            CliError::Validation(vec![e.to_string()])
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(vec![format!("output: {e}")])
    }
}

pub fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::VariantMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::MissingTransverseMomentum(_)
            | Error::UnexpectedTransverseMomentum(_)
            | Error::TooFewCells(_)
            | Error::AnalyticRegime(_)
            | Error::QuantizationGrid { .. }
            | Error::TooFewSamples { .. }
    )
}

/// Result of a command: manifest summary plus the files written.
pub struct Done {
    pub summary: Value,
    pub files: Vec<PathBuf>,
    /// Reported after the files are written; exit 3.
    pub numerical_failure: Option<String>,
}

struct Files<'a> {
    cfg: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl<'a> Files<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        output::ensure_dir(&cfg.output.out_dir)?;
        Ok(Files { cfg, written: Vec::new() })
    }

    fn path(&self, ext: &str) -> PathBuf {
        self.cfg.output.out_dir.join(format!("{}.{ext}", self.cfg.stem()))
    }

    fn csv(&mut self, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if self.cfg.output.csv {
            let p = self.path("csv");
            output::write_csv(&p, header, rows)?;
            self.written.push(p);
        }
        Ok(())
    }

    fn json(&mut self, v: &Value) -> Result<(), CliError> {
        if self.cfg.output.json {
            let p = self.path("json");
            output::write_json(&p, v)?;
            self.written.push(p);
        }
        Ok(())
    }

    fn svg(&mut self, body: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.cfg.output.svg {
            let p = self.path("svg");
            std::fs::write(&p, body())?;
            self.written.push(p);
        }
        Ok(())
    }
}

pub fn run(cfg: &RunConfig) -> Result<Done, CliError> {
    match cfg.command.as_str() {
        "spectrum" => spectrum(cfg),
        "gbz" => gbz(cfg),
        "invariants" => invariants(cfg),
        "sweep" => run_sweep(cfg),
        "phase-diagram" => phase_diagram(cfg),
        other => Err(CliError::Validation(vec![format!("unknown command {other}")])),
    }
}

fn spectrum(cfg: &RunConfig) -> Result<Done, CliError> {
    let n = cfg.numeric;
    let h = build_obc(&cfg.spec, n.n_cells, n.transverse_k, n.termination)?;
    let b = biorthogonal_spectrum(&h)?;
    let labels = classify_modes(&b, n.window_cells.unwrap_or_else(|| default_window(n.n_cells)), n.threshold);
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, z) = (b.eigenvalues[i], b.eigenvalues[j]);
        a.re.total_cmp(&z.re).then(a.im.total_cmp(&z.im))
    });
    println!(
        "spectrum: {} with {} cells ({}), {} eigenvalues",
        cfg.spec.variant,
        n.n_cells,
        n.termination.name(),
        b.len()
    );
    let mut rows = Vec::new();
    let mut modes = Vec::new();
    for &i in &order {
        let (e, l) = (b.eigenvalues[i], labels[i]);
        println!(
            "  E = {:+.12} {:+.12}i  |E| = {:.12}  {}  boundary_weight = {:.4}",
            e.re,
            e.im,
            e.norm(),
            l.kind.name(),
            l.boundary_weight
        );
        rows.push(vec![num(e.re), num(e.im), num(e.norm()), l.kind.name().to_string(), num(l.boundary_weight)]);
        let mut m = json!({"re": e.re, "im": e.im, "abs": e.norm(), "kind": l.kind.name(), "boundary_weight": l.boundary_weight});
        if cfg.output.eigenvectors {
            let pairs = |v: Vec<nhbp::Complex64>| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
            m["right"] = json!(pairs(b.right_vector(i)));
            m["left"] = json!(pairs(b.left_vector(i)));
        }
        modes.push(m);
    }
    println!("pairing residual: {:.3e}", b.pairing_residual);
    let edges = labels.iter().filter(|l| l.kind.is_edge()).count();
    let summary = json!({
        "n_eigenvalues": b.len(),
        "n_edge_modes": edges,
        "pairing_residual": b.pairing_residual,
    });
    let mut f = Files::new(cfg)?;
    f.csv(&["re_E", "im_E", "abs_E", "kind", "boundary_weight"], &rows)?;
    f.json(&json!({"modes": modes, "summary": summary}))?;
    f.svg(|| {
        output::render(&Plot {
            title: format!("{} OBC spectrum, N = {}", cfg.spec.variant, n.n_cells),
            x_label: "Re E".into(),
            y_label: "Im E".into(),
            series: vec![Series {
                label: "eigenvalues".into(),
                color: "#1f77b4",
                style: Style::Dots,
                points: b.eigenvalues.iter().map(|e| (e.re, e.im)).collect(),
            }],
        })
    })?;
    Ok(Done { summary, files: f.written, numerical_failure: None })
}

fn closed_form_radius(cfg: &RunConfig) -> Option<f64> {
    let ok = matches!(cfg.spec.variant, Variant::Ssh1d | Variant::ChernXObc) && cfg.spec.t3 == 0.0;
    ok.then(|| gbz_radius(&cfg.spec, cfg.numeric.transverse_k.unwrap_or(0.0)).ok()).flatten()
}

fn gbz(cfg: &RunConfig) -> Result<Done, CliError> {
    let n = cfg.numeric;
    let contour = gbz_contour(&cfg.spec, n.transverse_k, n.n_phi)?;
    let dev = contour.max_deviation_from(1.0);
    let mean = contour.mean_radius();
    let rel_std = contour.radius_std() / mean;
    let gamma = closed_form_radius(cfg);
    println!("gbz: {} admitted points from {} phases", contour.len(), n.n_phi);
    println!("mean |β| = {mean:.12}, std/mean = {rel_std:.3e}");
    if let Some(g) = gamma {
        println!("closed-form Γ = {g:.12}, |mean - Γ| = {:.3e}", (mean - g).abs());
    }
    let mark = if dev < 1e-6 { " (< 1e-6)" } else { "" };
    println!("max |β| deviation from 1: {dev:.3e}{mark}");
    let winding = non_bloch_winding_with(&cfg.spec, &contour, n.transverse_k, n.gauge);
    let (nu, failure) = match &winding {
        Ok(w) => {
            println!(
                "nu_tot ({}) = {:.6} (bands {:.6}, {:.6}; imaginary part {:.3e})",
                n.gauge.name(),
                w.nu_total,
                w.per_band[0],
                w.per_band[1],
                w.imaginary_part
            );
            (json!({"nu_tot": w.nu_total, "per_band": w.per_band, "imaginary_part": w.imaginary_part, "gauge": n.gauge.name()}), None)
        }
        Err(e) => {
            println!("nu_tot: failed ({e})");
            (Value::Null, Some(format!("winding: {e}")))
        }
    };
    let summary = json!({
        "points": contour.len(),
        "mean_abs_beta": mean,
        "std_over_mean": rel_std,
        "closed_form_gamma": gamma,
        "max_deviation_from_unit_circle": dev,
        "winding": nu,
    });
    let rows: Vec<Vec<String>> = contour
        .points
        .iter()
        .map(|p| vec![num(p.phi), num(p.beta.re), num(p.beta.im), num(p.beta.norm())])
        .collect();
    let mut f = Files::new(cfg)?;
    f.csv(&["phi", "re_beta", "im_beta", "abs_beta"], &rows)?;
    f.json(&summary)?;
    f.svg(|| {
        output::render(&Plot {
            title: "generalized Brillouin zone".into(),
            x_label: "Re β".into(),
            y_label: "Im β".into(),
            series: vec![Series {
                label: "β".into(),
                color: "#1f77b4",
                style: Style::Dots,
                points: contour.points.iter().map(|p| (p.beta.re, p.beta.im)).collect(),
            }],
        })
    })?;
    Ok(Done { summary, files: f.written, numerical_failure: failure })
}

fn loop_energy_sq(cfg: &RunConfig, l: &LoopSpec, t: f64) -> nhbp::Result<nhbp::Complex64> {
    let x = l.center.0 + l.radius.0 * t.cos();
    let y = l.center.1 + l.radius.1 * t.sin();
    let d = match cfg.spec.variant {
        Variant::Ssh1d => d_ssh(&cfg.spec, c(x, y))?,
        Variant::ChernXObc => d_chern_x(&cfg.spec, re(x), y)?,
        Variant::ChernYObcA | Variant::ChernYObcB => d_chern_y(&cfg.spec, x, re(y))?,
    };
    Ok(d.square())
}

fn invariants(cfg: &RunConfig) -> Result<Done, CliError> {
    let mut summary = serde_json::Map::new();
    let mut failures = Vec::new();
    let k = cfg.numeric.transverse_k;
    let needs_k = cfg.spec.variant.is_2d() && k.is_none();
    let mut item = |name: &str, r: nhbp::Result<Value>, show: &dyn Fn(&Value) -> String| match r {
        Ok(v) => {
            println!("{name}: {}", show(&v));
            summary.insert(name.into(), v);
        }
        Err(e) if is_validation(&e) => {
            println!("{name}: n/a ({e})");
            summary.insert(name.into(), json!({"not_applicable": e.to_string()}));
        }
        Err(e) => {
            println!("{name}: failed ({e})");
            failures.push(format!("{name}: {e}"));
            summary.insert(name.into(), json!({"error": e.to_string()}));
        }
    };
    let ky = k.unwrap_or(0.0);
    let slice_ok = if needs_k { Err(Error::MissingTransverseMomentum(cfg.spec.variant.name())) } else { Ok(()) };
    item(
        "gamma",
        slice_ok.clone().and_then(|_| gbz_radius(&cfg.spec, ky)).map(|g| json!(g)),
        &|v| format!("{:.12}", v.as_f64().unwrap_or(f64::NAN)),
    );
    item(
        "edge_ratios",
        slice_ok.and_then(|_| edge_ratios(&cfg.spec, ky)).map(|r| {
            json!({
                "r_r": r.r_r,
                "r_l": r.r_l,
                "product_abs": r.product_abs,
                "localization": format!("{:?}", r.localization()).to_lowercase(),
            })
        }),
        &|v| format!("|r_L* r_R| = {:.12} ({})", v["product_abs"].as_f64().unwrap_or(f64::NAN), v["localization"].as_str().unwrap_or("")),
    );
    item(
        "pbc_eps",
        pbc_ep_locations(&cfg.spec).map(|e| json!(e.iter().map(|(a, b)| [*a, *b]).collect::<Vec<_>>())),
        &|v| {
            let a = v.as_array().cloned().unwrap_or_default();
            let list: Vec<String> = a.iter().map(|p| format!("({:.9}, {:.9})", p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN))).collect();
            format!("{} [{}]", a.len(), list.join(", "))
        },
    );
    item(
        "gap_closings",
        obc_gap_closings(&cfg.spec).map(|k| json!(k)),
        &|v| {
            let a = v.as_array().cloned().unwrap_or_default();
            let list: Vec<String> = a.iter().map(|x| format!("{:.9}", x.as_f64().unwrap_or(f64::NAN))).collect();
            format!("{} ky [{}]", a.len(), list.join(", "))
        },
    );
    if let Some(l) = &cfg.loop_spec {
        let first_err = std::cell::RefCell::new(None);
        let r = vorticity_two_band(
            |t| {
                loop_energy_sq(cfg, l, t).unwrap_or_else(|e| {
                    first_err.borrow_mut().get_or_insert(e);
                    c(f64::NAN, f64::NAN)
                })
            },
            l.n_samples,
        );
        let r = match first_err.into_inner() {
            Some(e) => Err(e),
            None => r,
        };
        item(
            "vorticity",
            r.map(|v| json!({"nu_12": v.nu_12, "samples": v.unwrapped_phase.len()})),
            &|v| format!("nu_12 = {:.9} ({} samples)", v["nu_12"].as_f64().unwrap_or(f64::NAN), v["samples"]),
        );
    }
    let summary = Value::Object(summary);
    let mut f = Files::new(cfg)?;
    f.json(&summary)?;
    let failure = (!failures.is_empty()).then(|| failures.join("; "));
    Ok(Done { summary, files: f.written, numerical_failure: failure })
}

fn fmt_jumps(j: &[Jump<f64>]) -> String {
    if j.is_empty() {
        return "none".into();
    }
    j.iter().map(|j| format!("{:.6} ({:+.3})", j.location, j.size)).collect::<Vec<_>>().join(", ")
}

fn run_sweep(cfg: &RunConfig) -> Result<Done, CliError> {
    let n = cfg.numeric;
    let mut opts = SweepOptions::new(n.n_cells, n.n_p, n.n_phi);
    opts.pbc_grid = n.pbc_grid;
    opts.transverse_k = n.transverse_k;
    opts.obc_termination = n.termination;
    opts.window_cells = n.window_cells;
    opts.threshold = n.threshold;
    opts.workers = n.workers;
    opts.numeric_p = n.numeric_p;
    let r = sweep(&cfg.spec, &cfg.axis, &opts)?;
    let right_only = n.gauge == nhbp::gbz::WindingGauge::RightOnly;
    let nu_of = |p: &nhbp::phase_diagram::SweepPoint<f64>| if right_only { p.nu_tot_right_only } else { p.nu_tot };

    let mut long = Long::default();
    for p in &r.points {
        let x = p.value;
        long.push_opt(x, "p", p.p);
        long.push_opt(x, "nu_tot", nu_of(p));
        long.push_opt(x, "nu_tot_biorthogonal", p.nu_tot);
        long.push_opt(x, "nu_tot_right_only", p.nu_tot_right_only);
        long.push_opt(x, "nu_imaginary", p.nu_imaginary);
        for m in &p.obc_modes {
            let q = if m.kind.is_edge() { "edge_abs_E" } else { "obc_abs_E" };
            long.push(x, q, m.abs_energy);
            long.push(x, "boundary_weight", m.boundary_weight);
        }
        for e in &p.pbc_abs_energies {
            long.push(x, "pbc_abs_E", *e);
        }
        if let Some(f) = &p.ep_flags {
            long.push(x, "pbc_min_abs_E", f.pbc_min_abs_energy);
            long.push_opt(x, "pbc_ep_nearby", f.pbc_ep_nearby.map(|b| f64::from(u8::from(b))));
            long.push(x, "obc_gap_closed", f64::from(u8::from(f.obc_gap_closed)));
        }
    }
    let values = r.values();
    let nu_series: Vec<Option<f64>> = r.points.iter().map(nu_of).collect();
    let pj = detect_jumps(&values, &r.p_series());
    let nj = detect_jumps(&values, &nu_series);
    let failures: Vec<Value> = r
        .points
        .iter()
        .flat_map(|p| p.failures.iter().map(move |f| json!({"value": p.value, "quantity": f.quantity, "message": f.message})))
        .collect();
    let pname = match cfg.axis.parameter {
        SweepParameter::TransverseK => cfg.spec.variant.transverse_name().unwrap_or("k"),
        p => p.name(),
    };
    println!(
        "sweep: {} points of {pname} in [{}, {}], N_OBC = {}, N_P = {}",
        values.len(),
        cfg.axis.start,
        cfg.axis.stop,
        n.n_cells,
        n.n_p
    );
    println!("P jumps: {}", fmt_jumps(&pj));
    println!("nu_tot ({}) jumps: {}", n.gauge.name(), fmt_jumps(&nj));
    println!("failed points: {}", r.failed_points());
    let summary = json!({
        "p_jumps": pj,
        "nu_jumps": nj,
        "failed_points": r.failed_points(),
        "failures": failures,
    });
    let mut f = Files::new(cfg)?;
    f.csv(&["param", "quantity", "value"], &long.rows)?;
    f.json(&serde_json::to_value(&r).map_err(|e| CliError::Numerical(e.to_string()))?)?;
    f.svg(|| {
        let pick = |q: &str| -> Vec<(f64, f64)> {
            long.rows
                .iter()
                .filter(|row| row[1] == q)
                .map(|row| (row[0].parse().unwrap_or(f64::NAN), row[2].parse().unwrap_or(f64::NAN)))
                .collect()
        };
        let step = |s: &[Option<f64>]| -> Vec<(f64, f64)> {
            values.iter().zip(s).map(|(x, y)| (*x, y.unwrap_or(f64::NAN))).collect()
        };
        output::render(&Plot {
            title: format!("{} {}", cfg.stem(), cfg.spec.variant),
            x_label: pname.into(),
            y_label: "|E|, P, nu_tot".into(),
            series: vec![
                Series { label: "PBC".into(), color: "#9a9a9a", style: Style::Dots, points: pick("pbc_abs_E") },
                Series { label: "OBC bulk".into(), color: "#1f4fd8", style: Style::Dots, points: pick("obc_abs_E") },
                Series { label: "edge".into(), color: "#2ca02c", style: Style::Dots, points: pick("edge_abs_E") },
                Series { label: "P".into(), color: "#d62728", style: Style::Dashed, points: step(&r.p_series()) },
                Series { label: "nu_tot".into(), color: "#17becf", style: Style::Line, points: step(&nu_series) },
            ],
        })
    })?;
    Ok(Done { summary, files: f.written, numerical_failure: None })
}

fn phase_diagram(cfg: &RunConfig) -> Result<Done, CliError> {
    let d = &cfg.diagram;
    let gammas = linspace(d.gamma.0, d.gamma.1, d.gamma.2);
    let t1s = linspace(d.t1.0, d.t1.1, d.t1.2);
    let (ds, dd) = (cfg.spec.delta_stagger, cfg.spec.delta_onsite);
    let grid = match d.kind {
        DiagramKind::PbcEp => phase_diagram_pbc(ds, dd, &gammas, &t1s)?,
        DiagramKind::ObcGapClosings => phase_diagram_obc(ds, dd, &gammas, &t1s)?,
    };
    let name = match d.kind {
        DiagramKind::PbcEp => "pbc_ep",
        DiagramKind::ObcGapClosings => "obc_gap_closings",
    };
    let mut rows = Vec::new();
    for (i, g) in gammas.iter().enumerate() {
        for (j, t) in t1s.iter().enumerate() {
            rows.push(vec![num(*g), num(*t), grid.labels[i][j].to_string()]);
        }
    }
    let counts: Vec<(u8, usize)> = grid
        .allowed()
        .iter()
        .map(|&l| (l, grid.labels.iter().flatten().filter(|x| **x == l).count()))
        .collect();
    println!("phase diagram ({name}): {} x {} cells (gamma x t1)", gammas.len(), t1s.len());
    for (l, n) in &counts {
        println!("  label {l}: {n} cells");
    }
    let summary = json!({
        "kind": name,
        "counts": counts.iter().map(|(l, n)| (l.to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
        "boundary_cells": grid.boundary_cells().len(),
    });
    let mut f = Files::new(cfg)?;
    f.csv(&["gamma", "t1", "label"], &rows)?;
    f.json(&serde_json::to_value(&grid).map_err(|e| CliError::Numerical(e.to_string()))?)?;
    f.svg(|| output::heatmap(&format!("{} ({name})", cfg.stem()), "t1", "gamma", &t1s, &gammas, &grid.labels))?;
    Ok(Done { summary, files: f.written, numerical_failure: None })
}
