//! TOML config → validated `RunConfig`. Every problem is collected so one run
//! reports all bad fields at once.

use crate::schema;
use nhbp::gbz::WindingGauge;
use nhbp::phase_diagram::{DiagramKind, SweepAxis, SweepParameter};
use nhbp::realspace::Termination;
use nhbp::{ModelSpec, Variant};
use std::path::PathBuf;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Numeric {
    pub n_cells: usize,
    pub n_p: usize,
    pub n_phi: usize,
    pub transverse_k: Option<f64>,
    pub termination: Termination,
    pub pbc_grid: usize,
    pub window_cells: Option<usize>,
    pub threshold: f64,
    pub numeric_p: bool,
    pub gauge: WindingGauge,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub kind: DiagramKind,
    pub gamma: (f64, f64, usize),
    pub t1: (f64, f64, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopSpec {
    pub center: (f64, f64),
    pub radius: (f64, f64),
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub out_dir: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
    pub eigenvectors: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub recipe: Option<String>,
    pub spec: ModelSpec,
    pub numeric: Numeric,
    pub axis: SweepAxis<f64>,
    pub diagram: Diagram,
    pub loop_spec: Option<LoopSpec>,
    pub output: Output,
    /// Fully resolved table (defaults filled), echoed into the manifest.
    pub resolved: Table,
}

impl RunConfig {
    /// File stem for outputs: the recipe name or the command.
    pub fn stem(&self) -> String {
        self.recipe.clone().unwrap_or_else(|| self.command.clone())
    }
}

pub fn parse_toml(text: &str) -> Result<Table, Vec<String>> {
    text.parse::<Table>().map_err(|e| vec![format!("config: {}", e.message())])
}

/// Manifests carry the resolved table under `config`.
pub fn parse_manifest(text: &str) -> Result<(String, Table), Vec<String>> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| vec![format!("manifest: {e}")])?;
    let command = v["command"].as_str().ok_or_else(|| vec!["manifest: missing command".to_string()])?;
    let table: Table = serde_json::from_value(v["config"].clone()).map_err(|e| vec![format!("manifest config: {e}")])?;
    Ok((command.to_string(), table))
}

/// Unknown sections, unknown keys and type mismatches.
pub fn check(table: &Table) -> Vec<String> {
    let mut errs = Vec::new();
    for (sec, body) in table {
        let Some(body) = body.as_table() else {
            errs.push(format!("{sec}: expected a [section]"));
            continue;
        };
        if !schema::sections().contains(&sec.as_str()) {
            errs.push(format!("unknown section [{sec}]"));
            continue;
        }
        for (k, v) in body {
            match schema::lookup(sec, k) {
                None => errs.push(format!("unknown key {sec}.{k}")),
                Some(key) => errs.extend(schema::type_error(key, v)),
            }
        }
    }
    errs
}

/// `section.key=value`; the value is read as a TOML literal, falling back to
/// a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("--set {assignment}: expected section.key=value"))?;
    let (sec, k) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| format!("--set {assignment}: expected section.key=value"))?;
    if schema::lookup(sec, k).is_none() {
        return Err(format!("unknown key {sec}.{k}"));
    }
    let raw = raw.trim();
    let v = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => Value::String(raw.to_string()),
    };
    table
        .entry(sec.to_string())
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .ok_or_else(|| format!("{sec}: expected a [section]"))?
        .insert(k.to_string(), v);
    Ok(())
}

pub fn with_defaults(table: &Table) -> Table {
    let mut out = table.clone();
    for key in schema::KEYS {
        let Some(d) = key.default else { continue };
        let sec = out
            .entry(key.section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        if let Some(sec) = sec.as_table_mut() {
            if !sec.contains_key(key.name) {
                let v = format!("v = {d}").parse::<Table>().expect("schema default")["v"].clone();
                sec.insert(key.name.to_string(), v);
            }
        }
    }
    out
}

struct Reader<'a> {
    t: &'a Table,
    errs: Vec<String>,
}

impl Reader<'_> {
    fn get(&self, sec: &str, k: &str) -> Option<&Value> {
        self.t.get(sec)?.as_table()?.get(k)
    }

    fn float(&self, sec: &str, k: &str) -> Option<f64> {
        match self.get(sec, k)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    fn f(&self, sec: &str, k: &str) -> f64 {
        self.float(sec, k).unwrap_or(f64::NAN)
    }

    fn int(&self, sec: &str, k: &str) -> Option<usize> {
        self.get(sec, k)?.as_integer().map(|i| i as usize)
    }

    fn n(&mut self, sec: &str, k: &str, min: usize) -> usize {
        let v = self.int(sec, k).unwrap_or(0);
        if v < min {
            self.errs.push(format!("{sec}.{k}: must be at least {min}, got {v}"));
        }
        v
    }

    fn s(&self, sec: &str, k: &str) -> &str {
        self.get(sec, k).and_then(Value::as_str).unwrap_or("")
    }

    fn b(&self, sec: &str, k: &str) -> bool {
        self.get(sec, k).and_then(Value::as_bool).unwrap_or(false)
    }

    fn positive(&mut self, sec: &str, k: &str) -> f64 {
        let v = self.f(sec, k);
        if !(v > 0.0) {
            self.errs.push(format!("{sec}.{k}: must be positive, got {v}"));
        }
        v
    }
}

pub fn resolve(command: &str, recipe: Option<&str>, table: &Table) -> Result<RunConfig, Vec<String>> {
    let early = check(table);
    if !schema::COMMANDS.contains(&command) {
        return Err(vec![format!("unknown command {command}")]);
    }
    // keep reading past schema errors so every bad field is reported, but
    // drop follow-up complaints about a key that already failed its type check
    let resolved = with_defaults(table);
    let mut r = Reader { t: &resolved, errs: Vec::new() };

    let variant = Variant::parse(r.s("model", "variant")).unwrap_or(Variant::Ssh1d);
    let two_d = variant.is_2d();
    let t2 = r.float("model", "t2");
    let stagger = r.float("model", "delta_stagger");
    if two_d && t2.is_some_and(|x| x != 0.0) {
        r.errs.push("model.t2: only ssh1d has t2".into());
    }
    if !two_d && stagger.is_some_and(|x| x != 0.0) {
        r.errs.push("model.delta_stagger: ssh1d has no transverse hopping".into());
    }
    let (t1, t3, g, dd) = (r.f("model", "t1"), r.f("model", "t3"), r.f("model", "gamma"), r.f("model", "delta_onsite"));
    let spec = if two_d {
        ModelSpec::chern(variant, t1, t3, g, dd, stagger.unwrap_or(1.0))
    } else {
        ModelSpec::ssh(t1, t2.unwrap_or(1.0), t3, g, dd)
    };

    let threshold = r.positive("numeric", "threshold");
    if threshold > 1.0 {
        r.errs.push(format!("numeric.threshold: must not exceed 1, got {threshold}"));
    }
    let window_cells = r.int("numeric", "window_cells");
    if window_cells == Some(0) {
        r.errs.push("numeric.window_cells: must be at least 1".into());
    }
    let workers = r.int("numeric", "workers");
    if workers == Some(0) {
        r.errs.push("numeric.workers: must be at least 1".into());
    }
    let numeric = Numeric {
        n_cells: r.n("numeric", "n_cells", nhbp::realspace::MIN_CELLS),
        n_p: r.n("numeric", "n_p", nhbp::realspace::MIN_CELLS),
        n_phi: r.n("numeric", "n_phi", nhbp::gbz::MIN_WINDING_POINTS),
        transverse_k: r.float("numeric", "transverse_k"),
        termination: Termination::parse(r.s("numeric", "termination")).unwrap_or(Termination::FullCells),
        pbc_grid: r.n("numeric", "pbc_grid", 2),
        window_cells,
        threshold,
        numeric_p: r.b("numeric", "numeric_p"),
        gauge: WindingGauge::parse(r.s("numeric", "winding_gauge")).unwrap_or(WindingGauge::Biorthogonal),
        workers,
    };

    let parameter = SweepParameter::parse(r.s("sweep", "parameter")).unwrap_or(SweepParameter::T1);
    let n_points = r.n("sweep", "n_points", 2);
    let axis = SweepAxis {
        parameter,
        start: r.f("sweep", "start"),
        stop: r.f("sweep", "stop"),
        n_points,
    };
    let needs_k = match command {
        "spectrum" | "gbz" => two_d,
        "sweep" => two_d && parameter != SweepParameter::TransverseK,
        _ => false,
    };
    if needs_k && numeric.transverse_k.is_none() {
        r.errs.push(format!(
            "numeric.transverse_k: required for {} ({})",
            variant.name(),
            variant.transverse_name().unwrap_or("k")
        ));
    }
    if !two_d && numeric.transverse_k.is_some() {
        r.errs.push("numeric.transverse_k: ssh1d takes no transverse momentum".into());
    }
    if command == "sweep" {
        if parameter == SweepParameter::TransverseK && !two_d {
            r.errs.push("sweep.parameter: transverse_k needs a 2d variant".into());
        }
        if let Err(e) = axis.validate() {
            r.errs.push(format!("sweep: {e}"));
        }
    }

    let n_gamma = r.n("diagram", "n_gamma", 1);
    let n_t1 = r.n("diagram", "n_t1", 1);
    let diagram = Diagram {
        kind: if r.s("diagram", "kind") == "pbc_ep" { DiagramKind::PbcEp } else { DiagramKind::ObcGapClosings },
        gamma: (r.f("diagram", "gamma_start"), r.f("diagram", "gamma_stop"), n_gamma),
        t1: (r.f("diagram", "t1_start"), r.f("diagram", "t1_stop"), n_t1),
    };
    if command == "phase-diagram" && (variant != Variant::ChernXObc || t3 != 0.0) {
        r.errs.push("phase-diagram: needs variant chern_x_obc with t3 = 0".into());
    }

    let loop_spec = if r.b("loop", "enabled") {
        Some(LoopSpec {
            center: (r.f("loop", "center_x"), r.f("loop", "center_y")),
            radius: (r.positive("loop", "radius_x"), r.positive("loop", "radius_y")),
            n_samples: r.n("loop", "n_samples", nhbp::invariants::MIN_LOOP_SAMPLES),
        })
    } else {
        None
    };

    let formats: Vec<&str> = r
        .get("output", "formats")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let output = Output {
        out_dir: PathBuf::from(r.s("output", "out_dir")),
        csv: formats.contains(&"csv"),
        json: formats.contains(&"json"),
        svg: formats.contains(&"svg"),
        eigenvectors: r.b("output", "eigenvectors"),
    };
    if output.out_dir.as_os_str().is_empty() {
        r.errs.push("output.out_dir: must not be empty".into());
    }
    if let Err(e) = spec.validate() {
        r.errs.push(format!("model: {e}"));
    }

    let mut errs = early.clone();
    errs.extend(
        r.errs
            .into_iter()
            .filter(|m| !early.iter().any(|e| e.split(':').next() == m.split(':').next())),
    );
    if !errs.is_empty() {
        return Err(errs);
    }
    let recipe = recipe.map(str::to_string).or_else(|| {
        resolved
            .get("recipe")
            .and_then(|t| t.get("name"))
            .and_then(Value::as_str)
            .map(str::to_string)
    });
    Ok(RunConfig {
        command: command.to_string(),
        recipe,
        spec,
        numeric,
        axis,
        diagram,
        loop_spec,
        output,
        resolved,
    })
}
