//! Flat `section.key = value` run configuration.
//!
//! Lines are `section.key = value`; `#` starts a comment. Values are
//! numbers, bare words, or bracketed lists such as `[1, 0]` and
//! `[[0, 0, 1], [0, 0, 0, 1]]`. Unknown keys are errors.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cone::{dual_cone_from_flux, DualCone, DEFAULT_RESOLUTION};
use crate::flux::{Flux, ShockPair};
use crate::grid::Grid;
use crate::profile::{make_graph, make_planar, BumpShape, Front, PerturbationSpec, ShockProfile};
use crate::solver::{BoundaryKind, FluxFrame, NumericalFlux, SchemeConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// 1-based line, or 0 for errors not tied to a line.
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}: {}", self.line, self.key, self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Debug, PartialEq)]
pub enum FluxSpec {
    Burgers(usize),
    /// Coefficients of each component, lowest degree first.
    Poly(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrontSpec {
    Planar { normal: Vec<f64>, offset: f64 },
    AbsScaled { slope: f64 },
    /// CSV file with `y,psi` rows on a uniform `y` grid.
    PwlFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationConfig {
    pub shape: Option<BumpShape>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub counts: Vec<usize>,
    pub dx: f64,
    /// Lower corner; centred on the origin when absent.
    pub lo: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub horizon: f64,
    pub snapshot_every: f64,
    pub threshold: f64,
    pub eta: f64,
    pub rho: f64,
    pub t0: f64,
    pub u_ref: f64,
    pub layer_relax: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub flux: FluxSpec,
    pub u_minus: f64,
    pub u_plus: f64,
    pub cone_resolution: f64,
    pub cone_samples: usize,
    pub front: FrontSpec,
    pub perturbation: PerturbationConfig,
    pub grid: GridConfig,
    pub scheme: SchemeConfig,
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            flux: FluxSpec::Burgers(2),
            u_minus: 1.0,
            u_plus: -1.0,
            cone_resolution: DEFAULT_RESOLUTION,
            cone_samples: 4096,
            front: FrontSpec::Planar {
                normal: vec![1.0, 0.0],
                offset: 0.0,
            },
            perturbation: PerturbationConfig {
                shape: None,
                center: vec![-2.5, -4.0],
                radius: 1.5,
                amplitude: -0.5,
            },
            grid: GridConfig {
                counts: vec![128, 256],
                dx: 0.1,
                lo: None,
            },
            scheme: SchemeConfig::default_for(2),
            experiment: ExperimentConfig {
                horizon: 40.0,
                snapshot_every: 2.0,
                threshold: 1e-3,
                eta: 0.05,
                rho: 0.1,
                t0: 10.0,
                u_ref: 0.0,
                layer_relax: 0.5,
            },
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

const KEYS: &[&str] = &[
    "flux.kind",
    "flux.dim",
    "flux.poly",
    "pair.u_minus",
    "pair.u_plus",
    "cone.resolution",
    "cone.samples",
    "profile.front",
    "profile.normal",
    "profile.offset",
    "profile.slope",
    "profile.file",
    "perturbation.shape",
    "perturbation.center",
    "perturbation.radius",
    "perturbation.amplitude",
    "grid.counts",
    "grid.dx",
    "grid.lo",
    "scheme.flux",
    "scheme.cfl",
    "scheme.boundary",
    "scheme.frame",
    "experiment.horizon",
    "experiment.snapshot_every",
    "experiment.threshold",
    "experiment.eta",
    "experiment.rho",
    "experiment.t0",
    "experiment.u_ref",
    "experiment.layer_relax",
    "output.dir",
    "run.seed",
];

/// A parsed value: a scalar word or a (possibly nested) list.
#[derive(Clone, Debug, PartialEq)]
enum Value {
    Word(String),
    List(Vec<Value>),
}

fn parse_value(s: &str) -> Result<Value, String> {
    let s = s.trim();
    if !s.starts_with('[') {
        if s.is_empty() {
            return Err("empty value".into());
        }
        return Ok(Value::Word(s.to_string()));
    }
    let (v, rest) = parse_list(s)?;
    if !rest.trim().is_empty() {
        return Err(format!("unexpected `{}` after list", rest.trim()));
    }
    Ok(v)
}

fn parse_list(s: &str) -> Result<(Value, &str), String> {
    let mut rest = s.strip_prefix('[').ok_or("expected `[`")?.trim_start();
    let mut items = Vec::new();
    if let Some(r) = rest.strip_prefix(']') {
        return Ok((Value::List(items), r));
    }
    loop {
        if rest.starts_with('[') {
            let (v, r) = parse_list(rest)?;
            items.push(v);
            rest = r.trim_start();
        } else {
            let end = rest.find([',', ']']).ok_or("unterminated list")?;
            let word = rest[..end].trim();
            if word.is_empty() {
                return Err("empty list item".into());
            }
            items.push(Value::Word(word.to_string()));
            rest = &rest[end..];
        }
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix(']') {
            return Ok((Value::List(items), r));
        } else {
            return Err("expected `,` or `]`".into());
        }
    }
}

fn number<T: FromStr>(v: &Value) -> Result<T, String> {
    match v {
        Value::Word(w) => w.parse().map_err(|_| format!("`{w}` is not a valid number")),
        Value::List(_) => Err("expected a number, found a list".into()),
    }
}

fn finite(v: &Value) -> Result<f64, String> {
    let x: f64 = number(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("value must be finite".into())
    }
}

fn word(v: &Value) -> Result<&str, String> {
    match v {
        Value::Word(w) => Ok(w),
        Value::List(_) => Err("expected a word, found a list".into()),
    }
}

fn list<T>(v: &Value, item: impl Fn(&Value) -> Result<T, String>) -> Result<Vec<T>, String> {
    match v {
        Value::List(items) => items.iter().map(item).collect(),
        Value::Word(_) => Err("expected a list `[...]`".into()),
    }
}

fn keyword<T: FromStr<Err = String>>(v: &Value) -> Result<T, String> {
    word(v)?.parse()
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut entries: Vec<(usize, String, Value)> = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError {
                line,
                key: content.to_string(),
                message: "expected `section.key = value`".into(),
            });
            continue;
        };
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            errors.push(ConfigError {
                line,
                key,
                message: "unknown key".into(),
            });
            continue;
        }
        if let Some((first, _, _)) = entries.iter().find(|(_, k, _)| *k == key) {
            errors.push(ConfigError {
                line,
                key,
                message: format!("duplicate key (first set on line {first})"),
            });
            continue;
        }
        match parse_value(value) {
            Ok(v) => entries.push((line, key, v)),
            Err(message) => errors.push(ConfigError { line, key, message }),
        }
    }
    let mut cfg = RunConfig::default();
    let mut line_of = std::collections::HashMap::new();
    let mut flux_kind = None;
    let mut flux_dim = None;
    let mut flux_poly = None;
    let mut front_kind = None;
    let mut normal = None;
    let mut offset = None;
    let mut slope = None;
    let mut file = None;
    for (line, key, v) in &entries {
        line_of.insert(key.clone(), *line);
        let r: Result<(), String> = (|| {
            match key.as_str() {
                "flux.kind" => flux_kind = Some(word(v)?.to_string()),
                "flux.dim" => flux_dim = Some(number::<usize>(v)?),
                "flux.poly" => flux_poly = Some(list(v, |row| list(row, finite))?),
                "pair.u_minus" => cfg.u_minus = finite(v)?,
                "pair.u_plus" => cfg.u_plus = finite(v)?,
                "cone.resolution" => cfg.cone_resolution = finite(v)?,
                "cone.samples" => cfg.cone_samples = number(v)?,
                "profile.front" => front_kind = Some(word(v)?.to_string()),
                "profile.normal" => normal = Some(list(v, finite)?),
                "profile.offset" => offset = Some(finite(v)?),
                "profile.slope" => slope = Some(finite(v)?),
                "profile.file" => file = Some(PathBuf::from(word(v)?)),
                "perturbation.shape" => {
                    cfg.perturbation.shape = match word(v)? {
                        "none" => None,
                        "cosine" => Some(BumpShape::Cosine),
                        "indicator" => Some(BumpShape::Indicator),
                        other => return Err(format!("unknown shape `{other}` (expected none, cosine, indicator)")),
                    }
                }
                "perturbation.center" => cfg.perturbation.center = list(v, finite)?,
                "perturbation.radius" => cfg.perturbation.radius = finite(v)?,
                "perturbation.amplitude" => cfg.perturbation.amplitude = finite(v)?,
                "grid.counts" => cfg.grid.counts = list(v, number::<usize>)?,
                "grid.dx" => cfg.grid.dx = finite(v)?,
                "grid.lo" => cfg.grid.lo = Some(list(v, finite)?),
                "scheme.flux" => cfg.scheme.flux = keyword::<NumericalFlux>(v)?,
                "scheme.cfl" => cfg.scheme.cfl = finite(v)?,
                "scheme.boundary" => cfg.scheme.boundary = keyword::<BoundaryKind>(v)?,
                "scheme.frame" => cfg.scheme.frame = keyword::<FluxFrame>(v)?,
                "experiment.horizon" => cfg.experiment.horizon = finite(v)?,
                "experiment.snapshot_every" => cfg.experiment.snapshot_every = finite(v)?,
                "experiment.threshold" => cfg.experiment.threshold = finite(v)?,
                "experiment.eta" => cfg.experiment.eta = finite(v)?,
                "experiment.rho" => cfg.experiment.rho = finite(v)?,
                "experiment.t0" => cfg.experiment.t0 = finite(v)?,
                "experiment.u_ref" => cfg.experiment.u_ref = finite(v)?,
                "experiment.layer_relax" => cfg.experiment.layer_relax = finite(v)?,
                "output.dir" => cfg.output_dir = PathBuf::from(word(v)?),
                "run.seed" => cfg.seed = number(v)?,
                _ => unreachable!("key list and match arms agree"),
            }
            Ok(())
        })();
        if let Err(message) = r {
            errors.push(ConfigError {
                line: *line,
                key: key.clone(),
                message,
            });
        }
    }
    let at = |key: &str| line_of.get(key).copied().unwrap_or(0);
    let mut err = |key: &str, message: String| {
        errors.push(ConfigError {
            line: at(key),
            key: key.to_string(),
            message,
        })
    };

    match flux_kind.as_deref() {
        None | Some("burgers") => {
            if flux_poly.is_some() {
                err("flux.poly", "only used with flux.kind = poly".into());
            }
            cfg.flux = FluxSpec::Burgers(flux_dim.unwrap_or(cfg.grid.counts.len()));
        }
        Some("poly") => {
            if flux_dim.is_some() {
                err("flux.dim", "implied by flux.poly for flux.kind = poly".into());
            }
            match flux_poly.take() {
                Some(p) => cfg.flux = FluxSpec::Poly(p),
                None => err("flux.poly", "required for flux.kind = poly".into()),
            }
        }
        Some(other) => err("flux.kind", format!("unknown flux kind `{other}` (expected burgers, poly)")),
    }
    let d = match &cfg.flux {
        FluxSpec::Burgers(d) => *d,
        FluxSpec::Poly(p) => p.len(),
    };
    if !line_of.contains_key("scheme.cfl") {
        cfg.scheme.cfl = SchemeConfig::default_for(d).cfl;
    }

    let unused = |keys: &[&str], errs: &mut Vec<(String, String)>| {
        for k in keys {
            if line_of.contains_key(*k) {
                errs.push((k.to_string(), "not used by this front kind".into()));
            }
        }
    };
    let mut front_errs = Vec::new();
    match front_kind.as_deref() {
        None | Some("planar") => {
            unused(&["profile.slope", "profile.file"], &mut front_errs);
            let mut n = normal.unwrap_or_else(|| {
                let mut e = vec![0.0; d];
                e[0] = 1.0;
                e
            });
            if n.len() != d {
                front_errs.push(("profile.normal".into(), format!("needs {d} components")));
                n.resize(d, 0.0);
            }
            cfg.front = FrontSpec::Planar {
                normal: n,
                offset: offset.unwrap_or(0.0),
            };
        }
        Some("abs_scaled") => {
            unused(&["profile.normal", "profile.offset", "profile.file"], &mut front_errs);
            match slope {
                Some(s) => cfg.front = FrontSpec::AbsScaled { slope: s },
                None => front_errs.push(("profile.slope".into(), "required for profile.front = abs_scaled".into())),
            }
        }
        Some("pwl_file") => {
            unused(&["profile.normal", "profile.offset", "profile.slope"], &mut front_errs);
            match file.take() {
                Some(f) => cfg.front = FrontSpec::PwlFile(f),
                None => front_errs.push(("profile.file".into(), "required for profile.front = pwl_file".into())),
            }
        }
        Some(other) => front_errs.push((
            "profile.front".into(),
            format!("unknown front `{other}` (expected planar, abs_scaled, pwl_file)"),
        )),
    }
    for (k, m) in front_errs {
        err(&k, m);
    }

    // validation through the module constructors
    match cfg.build_flux() {
        Ok(flux) => {
            if let Err(e) = ShockPair::new(flux, cfg.u_minus, cfg.u_plus) {
                let key = if line_of.contains_key("pair.u_minus") { "pair.u_minus" } else { "pair.u_plus" };
                err(key, e.to_string());
            }
        }
        Err(e) => err("flux.poly", e),
    }
    if let Err(e) = cfg.build_grid() {
        err("grid.counts", e);
    } else if cfg.grid.counts.len() != d {
        err("grid.counts", format!("grid has {} axes but the flux has {d} components", cfg.grid.counts.len()));
    }
    if let Err(e) = cfg.scheme.validate() {
        err("scheme.cfl", e.to_string());
    }
    if !(cfg.cone_resolution > 0.0) {
        err("cone.resolution", "must be positive".into());
    }
    if cfg.cone_samples < 8 {
        err("cone.samples", "needs at least 8 samples".into());
    }
    if cfg.perturbation.shape.is_some() {
        if cfg.perturbation.center.len() != d {
            err("perturbation.center", format!("needs {d} components"));
        }
        if !(cfg.perturbation.radius > 0.0) {
            err("perturbation.radius", "must be positive".into());
        }
    }
    for (key, v) in [
        ("experiment.horizon", cfg.experiment.horizon),
        ("experiment.snapshot_every", cfg.experiment.snapshot_every),
        ("experiment.threshold", cfg.experiment.threshold),
        ("experiment.t0", cfg.experiment.t0),
    ] {
        if !(v > 0.0) {
            err(key, "must be positive".into());
        }
    }
    for (key, v) in [
        ("experiment.eta", cfg.experiment.eta),
        ("experiment.rho", cfg.experiment.rho),
        ("experiment.layer_relax", cfg.experiment.layer_relax),
    ] {
        if v < 0.0 {
            err(key, "must be non-negative".into());
        }
    }

    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(ConfigErrors(errors))
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        match &self.flux {
            FluxSpec::Burgers(d) => *d,
            FluxSpec::Poly(p) => p.len(),
        }
    }

    pub fn build_flux(&self) -> Result<Flux, String> {
        match &self.flux {
            FluxSpec::Burgers(d) if (1..=8).contains(d) => Ok(Flux::burgers(*d)),
            FluxSpec::Burgers(d) => Err(format!("unsupported Burgers dimension {d}")),
            FluxSpec::Poly(p) => Flux::from_coeffs(p.clone()).map_err(|e| e.to_string()),
        }
    }

    pub fn build_pair(&self) -> Result<ShockPair, String> {
        ShockPair::new(self.build_flux()?, self.u_minus, self.u_plus).map_err(|e| e.to_string())
    }

    pub fn build_grid(&self) -> Result<Grid, String> {
        let g = match &self.grid.lo {
            Some(lo) => Grid::new(self.grid.counts.clone(), lo.clone(), self.grid.dx),
            None => Grid::centered(self.grid.counts.clone(), self.grid.dx),
        };
        g.map_err(|e| e.to_string())
    }

    pub fn build_dual(&self, pair: &ShockPair) -> Result<DualCone, String> {
        dual_cone_from_flux(pair, self.cone_samples).map_err(|e| e.to_string())
    }

    pub fn build_profile(&self, pair: &ShockPair, dual: &DualCone) -> Result<ShockProfile, String> {
        match &self.front {
            FrontSpec::Planar { normal, offset } => make_planar(pair, dual, normal, *offset).map_err(|e| e.to_string()),
            FrontSpec::AbsScaled { slope } => {
                make_graph(pair, dual, Front::AbsScaled { slope: *slope }).map_err(|e| e.to_string())
            }
            FrontSpec::PwlFile(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let pwl = super::read_front_csv(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                make_graph(pair, dual, Front::Sampled(pwl)).map_err(|e| e.to_string())
            }
        }
    }

    pub fn build_perturbation(&self) -> PerturbationSpec {
        match self.perturbation.shape {
            None => PerturbationSpec::default(),
            Some(shape) => PerturbationSpec::single(
                shape,
                self.perturbation.center.clone(),
                self.perturbation.radius,
                self.perturbation.amplitude,
            ),
        }
    }

    /// Canonical text form; `parse_config(&c.to_text())` gives back `c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        match &self.flux {
            FluxSpec::Burgers(d) => {
                kv("flux.kind", "burgers".into());
                kv("flux.dim", d.to_string());
            }
            FluxSpec::Poly(p) => {
                kv("flux.kind", "poly".into());
                let rows: Vec<String> = p.iter().map(|r| fmt_list(r)).collect();
                kv("flux.poly", format!("[{}]", rows.join(", ")));
            }
        }
        kv("pair.u_minus", format!("{:?}", self.u_minus));
        kv("pair.u_plus", format!("{:?}", self.u_plus));
        kv("cone.resolution", format!("{:?}", self.cone_resolution));
        kv("cone.samples", self.cone_samples.to_string());
        match &self.front {
            FrontSpec::Planar { normal, offset } => {
                kv("profile.front", "planar".into());
                kv("profile.normal", fmt_list(normal));
                kv("profile.offset", format!("{offset:?}"));
            }
            FrontSpec::AbsScaled { slope } => {
                kv("profile.front", "abs_scaled".into());
                kv("profile.slope", format!("{slope:?}"));
            }
            FrontSpec::PwlFile(p) => {
                kv("profile.front", "pwl_file".into());
                kv("profile.file", p.display().to_string());
            }
        }
        let shape = match self.perturbation.shape {
            None => "none",
            Some(BumpShape::Cosine) => "cosine",
            Some(BumpShape::Indicator) => "indicator",
        };
        kv("perturbation.shape", shape.into());
        kv("perturbation.center", fmt_list(&self.perturbation.center));
        kv("perturbation.radius", format!("{:?}", self.perturbation.radius));
        kv("perturbation.amplitude", format!("{:?}", self.perturbation.amplitude));
        let counts: Vec<String> = self.grid.counts.iter().map(|c| c.to_string()).collect();
        kv("grid.counts", format!("[{}]", counts.join(", ")));
        kv("grid.dx", format!("{:?}", self.grid.dx));
        if let Some(lo) = &self.grid.lo {
            kv("grid.lo", fmt_list(lo));
        }
        kv("scheme.flux", self.scheme.flux.to_string());
        kv("scheme.cfl", format!("{:?}", self.scheme.cfl));
        kv("scheme.boundary", self.scheme.boundary.to_string());
        kv("scheme.frame", self.scheme.frame.to_string());
        let e = &self.experiment;
        kv("experiment.horizon", format!("{:?}", e.horizon));
        kv("experiment.snapshot_every", format!("{:?}", e.snapshot_every));
        kv("experiment.threshold", format!("{:?}", e.threshold));
        kv("experiment.eta", format!("{:?}", e.eta));
        kv("experiment.rho", format!("{:?}", e.rho));
        kv("experiment.t0", format!("{:?}", e.t0));
        kv("experiment.u_ref", format!("{:?}", e.u_ref));
        kv("experiment.layer_relax", format!("{:?}", e.layer_relax));
        kv("output.dir", self.output_dir.display().to_string());
        kv("run.seed", self.seed.to_string());
        s
    }
}

/// Applies `section.key=value` overrides on top of `text`, replacing any
/// existing line for the same key.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String, ConfigErrors> {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut errors = Vec::new();
    for o in overrides {
        let Some((k, v)) = o.split_once('=') else {
            errors.push(ConfigError {
                line: 0,
                key: o.clone(),
                message: "override must look like section.key=value".into(),
            });
            continue;
        };
        let k = k.trim();
        let new_line = format!("{k} = {}", v.trim());
        let existing = lines.iter().position(|l| {
            l.split('#')
                .next()
                .and_then(|c| c.split_once('='))
                .is_some_and(|(lk, _)| lk.trim() == k)
        });
        match existing {
            Some(i) => lines[i] = new_line,
            None => lines.push(new_line),
        }
    }
    if errors.is_empty() {
        Ok(lines.join("\n") + "\n")
    } else {
        Err(ConfigErrors(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# planar Burgers shock
pair.u_minus = 1
pair.u_plus = -1
profile.normal = [1, 0]
perturbation.shape = cosine
";

    #[test]
    fn minimal_config_uses_documented_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.flux, FluxSpec::Burgers(2));
        assert_eq!(c.grid.counts, vec![128, 256]);
        assert_eq!(c.scheme, SchemeConfig::default_for(2));
        assert_eq!(c.experiment.horizon, 40.0);
        assert_eq!(c.perturbation.shape, Some(BumpShape::Cosine));
    }

    #[test]
    fn wrong_order_is_reported_with_its_line() {
        let e = parse_config("pair.u_minus = -1\npair.u_plus = 1\n").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].line, 1);
        assert_eq!(e.0[0].key, "pair.u_minus");
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let e = parse_config("pair.u_minsu = 1\ngrid.dx = abc\njunk\n").unwrap_err();
        let lines: Vec<usize> = e.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![1, 2, 3]);
        assert!(e.0[0].message.contains("unknown key"));
    }

    #[test]
    fn nested_lists() {
        let c = parse_config(
            "flux.kind = poly\nflux.poly = [[0, 0, 1], [0, 0, 0, 1]]\npair.u_minus = 1\npair.u_plus = -1\n",
        )
        .unwrap();
        assert_eq!(c.flux, FluxSpec::Poly(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0]]));
        assert!(parse_value("[1, [2]").is_err());
        assert!(parse_value("[1,,2]").is_err());
    }

    #[test]
    fn emit_round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let mut p = RunConfig {
            flux: FluxSpec::Poly(vec![vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 0.0, 1.0]]),
            front: FrontSpec::AbsScaled { slope: 0.25 },
            ..RunConfig::default()
        };
        p.grid.lo = Some(vec![-1.0, -2.0]);
        assert_eq!(parse_config(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn overrides_replace_lines() {
        let t = apply_overrides(MINIMAL, &["pair.u_plus=-0.5".into(), "grid.dx=0.2".into()]).unwrap();
        let c = parse_config(&t).unwrap();
        assert_eq!(c.u_plus, -0.5);
        assert_eq!(c.grid.dx, 0.2);
        assert!(apply_overrides(MINIMAL, &["nonsense".into()]).is_err());
    }
}
