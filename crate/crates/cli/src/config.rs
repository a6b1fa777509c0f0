//! Run configuration: a TOML file with `--set section.key=value` overrides.
//!
//! Everything is parsed and validated before any computation starts, so a bad
//! configuration never leaves partial output behind.

use std::path::{Path, PathBuf};

use pdmsusy::{LadderConfig, MassProfile, Tolerances};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSection,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub transform: TransformSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    /// `constant`, `quadratic`, `cosine`, `linear` or `tabulated`.
    pub name: String,
    pub m0: Option<f64>,
    /// CSV with columns `x,m` (tabulated only).
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub delta_e: f64,
    pub a: Option<f64>,
    pub hbar: f64,
    /// Anchor of `∫√m`.
    pub anchor: Option<f64>,
    /// Number of ladder states and oracle levels.
    pub levels: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            delta_e: 1.0,
            a: None,
            hbar: 1.0,
            anchor: None,
            levels: 6,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Widen until the highest requested state has decayed at the ends.
    pub auto: bool,
    pub n_points: usize,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    /// Offset from a singular domain end.
    pub epsilon: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            auto: true,
            n_points: 4001,
            x_min: None,
            x_max: None,
            epsilon: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    NonConfluent,
    Confluent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// `(√2 L⁺)ⁿ ψ₀` as produced by the ladder.
    Raw,
    Normalized,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformSection {
    pub order: u8,
    pub mode: Mode,
    /// Ladder indices of the seeds (`u₁`, `u₂`).
    pub seeds: Vec<usize>,
    pub scaling: Scaling,
    /// CSV `x,u,...` on the run grid; replaces the first seed.
    pub seed_file: Option<PathBuf>,
    pub seed_column: usize,
    pub seed_energy: Option<f64>,
    pub d: Option<f64>,
    pub d_values: Vec<f64>,
    /// Anchor of `∫u₁²`; defaults to the origin when the grid covers it.
    pub anchor: Option<f64>,
}

impl Default for TransformSection {
    fn default() -> Self {
        Self {
            order: 1,
            mode: Mode::NonConfluent,
            seeds: vec![1, 2],
            scaling: Scaling::Raw,
            seed_file: None,
            seed_column: 1,
            seed_energy: None,
            d: None,
            d_values: Vec::new(),
            anchor: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub commutator: Option<f64>,
    pub intertwining: Option<f64>,
    pub factorization: Option<f64>,
    pub oracle: Option<f64>,
    pub order_deviation: Option<f64>,
    pub sequential: Option<f64>,
    pub confluent_identity: Option<f64>,
    pub wronskian: Option<f64>,
    pub elliptic: Option<f64>,
    pub seed: Option<f64>,
    pub mask_radius: Option<usize>,
}

/// A configuration resolved into library objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: RunConfig,
    pub profile: MassProfile,
    pub ladder: LadderConfig,
    pub tolerances: Tolerances,
    pub mask_radius: usize,
    pub seed_file: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Reads `path`, applies `overrides` and validates the result.
pub fn load(path: &Path, overrides: &[String]) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let raw: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve(raw, base)
}

/// `section.key=value`; the value is read as TOML and falls back to a string.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{item}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key `{key}` is malformed")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_owned()));
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override `{key}`: `{p}` is not a section")))?;
    }
    cur.insert(last.to_string(), parsed);
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

fn build_profile(p: &ProfileSection, base: &Path) -> Result<MassProfile, CliError> {
    let m0 = || {
        p.m0
            .ok_or_else(|| config_err(format!("profile `{}` needs m0", p.name)))
    };
    let profile = match p.name.as_str() {
        "constant" => MassProfile::constant(m0()?),
        "quadratic" => MassProfile::quadratic(m0()?),
        "cosine" => MassProfile::cosine(m0()?),
        "linear" => Ok(MassProfile::linear()),
        "tabulated" => {
            let path = p
                .path
                .as_ref()
                .ok_or_else(|| config_err("profile `tabulated` needs path"))?;
            MassProfile::from_csv(base.join(path))
        }
        other => return Err(config_err(format!("unknown profile `{other}`"))),
    };
    profile.map_err(|e| config_err(e.to_string()))
}

fn resolve(raw: RunConfig, base: &Path) -> Result<Resolved, CliError> {
    let profile = build_profile(&raw.profile, base)?;
    let s = &raw.system;
    positive("system.delta_e", s.delta_e)?;
    positive("system.hbar", s.hbar)?;
    if let Some(a) = s.a {
        positive("system.a", a)?;
    }
    if s.levels == 0 {
        return Err(config_err("system.levels must be at least 1"));
    }
    let g = &raw.grid;
    if g.n_points < pdmsusy::numerics::MIN_POINTS {
        return Err(config_err(format!(
            "grid.n_points must be at least {}",
            pdmsusy::numerics::MIN_POINTS
        )));
    }
    if 4 * s.levels >= g.n_points {
        return Err(config_err(format!(
            "system.levels = {} needs 4 * levels < grid.n_points = {}",
            s.levels, g.n_points
        )));
    }
    if !g.auto {
        match (g.x_min, g.x_max) {
            (Some(a), Some(b)) if a < b && a.is_finite() && b.is_finite() => {}
            (Some(_), Some(_)) => return Err(config_err("grid.x_min must be below grid.x_max")),
            _ => return Err(config_err("grid.auto = false needs x_min and x_max")),
        }
    } else if g.x_min.is_some() || g.x_max.is_some() {
        return Err(config_err("grid.x_min/x_max require grid.auto = false"));
    }
    positive("grid.epsilon", g.epsilon)?;

    let t = &raw.transform;
    if !(t.order == 1 || t.order == 2) {
        return Err(config_err(format!("transform.order must be 1 or 2, got {}", t.order)));
    }
    let needed = if t.order == 2 && t.mode == Mode::NonConfluent { 2 } else { 1 };
    if t.seeds.len() < needed {
        return Err(config_err(format!("transform.seeds needs {needed} entries")));
    }
    if needed == 2 && t.seeds[0] == t.seeds[1] && t.seed_file.is_none() {
        return Err(config_err("non-confluent seeds must differ; use mode = \"confluent\""));
    }
    for d in t.d.iter().chain(&t.d_values) {
        if !(0.0..=1.0).contains(d) {
            return Err(config_err(format!("confluent d must lie in [0, 1], got {d}")));
        }
    }
    if t.order == 2 && t.mode == Mode::Confluent && t.d.is_none() && t.d_values.is_empty() {
        return Err(config_err("confluent transform needs transform.d or transform.d_values"));
    }
    let seed_file = match &t.seed_file {
        Some(p) => {
            if t.seed_energy.is_none() {
                return Err(config_err("transform.seed_file needs transform.seed_energy"));
            }
            if t.seed_column == 0 {
                return Err(config_err("transform.seed_column 0 is the x column"));
            }
            let full = base.join(p);
            if !full.is_file() {
                return Err(config_err(format!("seed file {} not found", full.display())));
            }
            Some(full)
        }
        None => None,
    };

    let mut ladder = LadderConfig::new(s.delta_e).with_hbar(s.hbar);
    if let Some(a) = s.a {
        ladder = ladder.with_a(a);
    }
    if let Some(x) = s.anchor {
        ladder = ladder.with_anchor(x);
    }

    let mut tol = Tolerances::for_profile(&profile);
    let o = &raw.tolerances;
    let set = |slot: &mut f64, v: Option<f64>, name: &str| -> Result<(), CliError> {
        if let Some(v) = v {
            positive(&format!("tolerances.{name}"), v)?;
            *slot = v;
        }
        Ok(())
    };
    set(&mut tol.commutator, o.commutator, "commutator")?;
    set(&mut tol.intertwining, o.intertwining, "intertwining")?;
    set(&mut tol.factorization, o.factorization, "factorization")?;
    set(&mut tol.oracle, o.oracle, "oracle")?;
    set(&mut tol.order_deviation, o.order_deviation, "order_deviation")?;
    set(&mut tol.sequential, o.sequential, "sequential")?;
    set(&mut tol.confluent_identity, o.confluent_identity, "confluent_identity")?;
    set(&mut tol.wronskian, o.wronskian, "wronskian")?;
    set(&mut tol.elliptic, o.elliptic, "elliptic")?;
    set(&mut tol.seed, o.seed, "seed")?;
    let mask_radius = o.mask_radius.unwrap_or(pdmsusy::susy::DEFAULT_MASK_RADIUS);

    Ok(Resolved {
        raw,
        profile,
        ladder,
        tolerances: tol,
        mask_radius,
        seed_file,
    })
}
