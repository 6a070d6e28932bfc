//! Every config key the CLI understands. Parsing, validation, defaults and
//! the `--help` key table are all driven from `KEYS`.

use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Text,
    Choice(&'static [&'static str]),
    /// Array of strings drawn from the list.
    Set(&'static [&'static str]),
}

impl Kind {
    fn describe(self) -> String {
        match self {
            Kind::Float => "float".into(),
            Kind::Int => "integer".into(),
            Kind::Bool => "bool".into(),
            Kind::Text => "string".into(),
            Kind::Choice(c) => c.join("|"),
            Kind::Set(c) => format!("[{}]", c.join(",")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub section: &'static str,
    pub name: &'static str,
    pub kind: Kind,
    /// TOML literal; None means unset unless given.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

impl Key {
    pub fn path(&self) -> String {
        format!("{}.{}", self.section, self.name)
    }
}

pub const VARIANTS: &[&str] = &["ssh1d", "chern_x_obc", "chern_y_obc_a", "chern_y_obc_b"];
pub const COMMANDS: &[&str] = &["spectrum", "gbz", "invariants", "sweep", "phase-diagram"];

const fn key(
    section: &'static str,
    name: &'static str,
    kind: Kind,
    default: Option<&'static str>,
    help: &'static str,
) -> Key {
    Key { section, name, kind, default, help }
}

pub const KEYS: &[Key] = &[
    key("model", "variant", Kind::Choice(VARIANTS), Some("\"ssh1d\""), "model family"),
    key("model", "t1", Kind::Float, Some("1.0"), "intracell hopping"),
    key("model", "t2", Kind::Float, None, "intercell hopping (ssh1d only; default 1)"),
    key("model", "t3", Kind::Float, Some("0.0"), "next-nearest-cell hopping"),
    key("model", "gamma", Kind::Float, Some("0.0"), "non-reciprocity"),
    key("model", "delta_onsite", Kind::Float, Some("0.0"), "onsite sublattice splitting"),
    key("model", "delta_stagger", Kind::Float, None, "transverse hopping (2d variants only; default 1)"),
    key("numeric", "n_cells", Kind::Int, Some("40"), "unit cells of the open chain (N_OBC)"),
    key("numeric", "n_p", Kind::Int, Some("200"), "unit cells used for the polarization (N_P)"),
    key("numeric", "n_phi", Kind::Int, Some("512"), "phase samples on the GBZ contour"),
    key("numeric", "transverse_k", Kind::Float, None, "fixed ky (chern_x_obc) or kx (chern_y_*)"),
    key("numeric", "termination", Kind::Choice(&["full_cells", "broken_cell"]), Some("\"full_cells\""), "open-chain ends for spectra"),
    key("numeric", "pbc_grid", Kind::Int, Some("512"), "momentum samples of the periodic spectrum"),
    key("numeric", "window_cells", Kind::Int, None, "edge window of the classifier (default max(3, N/20))"),
    key("numeric", "threshold", Kind::Float, Some("0.5"), "edge weight threshold of the classifier"),
    key("numeric", "numeric_p", Kind::Bool, Some("false"), "diagonalize for P even when closed forms exist"),
    key("numeric", "winding_gauge", Kind::Choice(&["biorthogonal", "right_only"]), Some("\"biorthogonal\""), "eigenvector pairing for nu_tot"),
    key("numeric", "workers", Kind::Int, None, "sweep threads (default: available parallelism)"),
    key("sweep", "parameter", Kind::Choice(&["t1", "gamma", "transverse_k"]), Some("\"t1\""), "swept coupling"),
    key("sweep", "start", Kind::Float, Some("0.0125"), "first grid value"),
    key("sweep", "stop", Kind::Float, Some("2.9875"), "last grid value"),
    key("sweep", "n_points", Kind::Int, Some("120"), "grid points"),
    key("diagram", "kind", Kind::Choice(&["pbc_ep", "obc_gap_closings"]), Some("\"obc_gap_closings\""), "label rule"),
    key("diagram", "gamma_start", Kind::Float, Some("0.0"), "first gamma"),
    key("diagram", "gamma_stop", Kind::Float, Some("6.0"), "last gamma"),
    key("diagram", "n_gamma", Kind::Int, Some("64"), "gamma grid points"),
    key("diagram", "t1_start", Kind::Float, Some("0.05"), "first t1"),
    key("diagram", "t1_stop", Kind::Float, Some("3.0"), "last t1"),
    key("diagram", "n_t1", Kind::Int, Some("64"), "t1 grid points"),
    key("loop", "enabled", Kind::Bool, Some("false"), "report vorticity on the loop below"),
    key("loop", "center_x", Kind::Float, Some("0.0"), "kx (2d) or Re k (ssh1d) of the loop centre"),
    key("loop", "center_y", Kind::Float, Some("0.0"), "ky (2d) or Im k (ssh1d) of the loop centre"),
    key("loop", "radius_x", Kind::Float, Some("0.1"), "semi-axis along center_x"),
    key("loop", "radius_y", Kind::Float, Some("0.1"), "semi-axis along center_y"),
    key("loop", "n_samples", Kind::Int, Some("256"), "initial samples (doubled as needed)"),
    key("output", "out_dir", Kind::Text, Some("\"out\""), "directory for all files"),
    key("output", "formats", Kind::Set(&["csv", "json", "svg"]), Some("[\"csv\", \"json\"]"), "files to write besides the manifest"),
    key("output", "eigenvectors", Kind::Bool, Some("false"), "include eigenvectors in spectrum JSON"),
    key("recipe", "name", Kind::Text, None, "recipe label, used as the file stem"),
    key("recipe", "command", Kind::Choice(COMMANDS), None, "command a recipe runs"),
    key("recipe", "caption", Kind::Text, None, "free text"),
];

pub fn lookup(section: &str, name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.section == section && k.name == name)
}

pub fn sections() -> Vec<&'static str> {
    let mut out: Vec<&str> = Vec::new();
    for k in KEYS {
        if !out.contains(&k.section) {
            out.push(k.section);
        }
    }
    out
}

/// Checks one value against its key; `None` when it fits.
pub fn type_error(key: &Key, v: &toml::Value) -> Option<String> {
    let ok = match (key.kind, v) {
        (Kind::Float, toml::Value::Float(x)) => x.is_finite(),
        (Kind::Float, toml::Value::Integer(_)) => true,
        (Kind::Int, toml::Value::Integer(i)) => *i >= 0,
        (Kind::Bool, toml::Value::Boolean(_)) => true,
        (Kind::Text, toml::Value::String(_)) => true,
        (Kind::Choice(c), toml::Value::String(s)) => c.contains(&s.as_str()),
        (Kind::Set(c), toml::Value::Array(a)) => a
            .iter()
            .all(|x| x.as_str().is_some_and(|s| c.contains(&s))),
        _ => false,
    };
    (!ok).then(|| format!("{}: expected {}, got {v}", key.path(), key.kind.describe()))
}

/// The key table appended to `--help`.
pub fn help_table() -> String {
    let mut s = String::from("Config keys (TOML sections; override with --set section.key=value):\n");
    for sec in sections() {
        let _ = writeln!(s, "  [{sec}]");
        for k in KEYS.iter().filter(|k| k.section == sec) {
            let def = k.default.map(|d| format!(" (default {d})")).unwrap_or_default();
            let _ = writeln!(s, "    {:<14} {:<40} {}{def}", k.name, k.kind.describe(), k.help);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_unique_and_defaults_typecheck() {
        for (i, a) in KEYS.iter().enumerate() {
            assert!(KEYS[i + 1..].iter().all(|b| b.path() != a.path()), "{}", a.path());
            if let Some(d) = a.default {
                let v: toml::Value = toml::from_str::<toml::Table>(&format!("v = {d}")).unwrap()["v"].clone();
                assert_eq!(type_error(a, &v), None, "{}", a.path());
            }
        }
    }

    #[test]
    fn help_lists_every_key() {
        let h = help_table();
        for k in KEYS {
            assert!(h.contains(k.name), "{}", k.path());
        }
    }

    #[test]
    fn type_errors() {
        let k = lookup("numeric", "n_cells").unwrap();
        assert!(type_error(k, &toml::Value::Integer(-1)).is_some());
        assert!(type_error(k, &toml::Value::Float(3.0)).is_some());
        let v = lookup("model", "variant").unwrap();
        assert!(type_error(v, &toml::Value::String("ssh".into())).is_some());
    }
}
