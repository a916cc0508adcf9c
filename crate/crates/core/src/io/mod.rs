//! Run configuration, snapshots and front files.

mod config;
mod snapshot;

pub use config::{
    apply_overrides, parse_config, ConfigError, ConfigErrors, ExperimentConfig, FluxSpec, FrontSpec, GridConfig,
    PerturbationConfig, RunConfig,
};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SnapshotError, MAGIC};

use crate::profile::Pwl;

/// Reads a front graph for `d = 2` from `y,psi` rows. A header line is
/// allowed; the `y` values must be equally spaced and increasing.
pub fn read_front_csv(text: &str) -> Result<Pwl, String> {
    let mut ys = Vec::new();
    let mut psi = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected two columns `y,psi`", i + 1));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(y), Ok(p)) if y.is_finite() && p.is_finite() => {
                ys.push(y);
                psi.push(p);
            }
            _ if ys.is_empty() && i == 0 => continue,
            _ => return Err(format!("line {}: `{line}` is not a pair of numbers", i + 1)),
        }
    }
    if ys.len() < 2 {
        return Err("a front file needs at least two samples".into());
    }
    let step = (ys[ys.len() - 1] - ys[0]) / (ys.len() - 1) as f64;
    if !(step > 0.0) {
        return Err("y values must increase".into());
    }
    for (k, y) in ys.iter().enumerate() {
        if (y - (ys[0] + k as f64 * step)).abs() > 1e-9 * step.max(1.0) {
            return Err(format!("y values are not equally spaced (sample {k})"));
        }
    }
    let n = ys.len();
    Pwl::new(vec![ys[0]], step, vec![n], psi).ok_or_else(|| "could not build the front".to_string())
}
