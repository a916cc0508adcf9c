use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use shocklab_core::cone::{admissible_cone, ConeShape};
use shocklab_core::experiments::{
    dispersion_experiment, normalization_residuals, overhead_experiment, stability_experiment, support_experiment,
    DispersionParams, OverheadParams, StabilityParams, SupportParams,
};
use shocklab_core::io::{apply_overrides, parse_config, write_snapshot, FluxSpec, RunConfig};
use shocklab_core::profile::UncPolicy;
use shocklab_core::solver::{BoundaryKind, FluxFrame, RunOptions};
use shocklab_core::{Boundary, Check, Field, Pwl, ShockProfile, Solver, Verdict};

#[derive(Parser)]
#[command(name = "shocklab", version, about = "Shock-wave stability experiments for scalar conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration in `section.key = value` form.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key; may be repeated.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Print the admissible cone, its dual and the frame direction as CSV.
    Cone,
    /// Build the shock profile and write its front.
    Profile,
    /// Evolve the perturbed shock and record the probe series.
    Simulate,
    /// Lyapunov curves and convergence to a shifted shock.
    Stability,
    /// Absorption of a perturbation above u- or below u+.
    Overhead,
    /// Sup-norm decay of a perturbation of a constant state.
    Dispersion,
    /// Finite propagation speed of the support of a difference.
    Support,
    /// Residual check of the Burgers change of variables.
    NormalizeCheck,
}

/// Failures before any pipeline runs map to exit code 2, the rest to 1.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn run_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Run(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("shocklab: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("shocklab: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SHOCKLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("SHOCKLAB_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let text = apply_overrides(&text, &cli.overrides).map_err(|e| anyhow::anyhow!("{e}"))?;
    parse_config(&text).map_err(|e| anyhow::anyhow!("invalid configuration:\n{e}"))
}

struct Inputs {
    cfg: RunConfig,
    profile: ShockProfile,
}

fn build_inputs(cfg: RunConfig) -> Result<Inputs> {
    let pair = cfg.build_pair().map_err(anyhow::Error::msg)?;
    let dual = cfg.build_dual(&pair).map_err(anyhow::Error::msg)?;
    let profile = cfg.build_profile(&pair, &dual).map_err(anyhow::Error::msg)?;
    Ok(Inputs { cfg, profile })
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    configure_threads().map_err(usage)?;
    let cfg = load_config(cli).map_err(usage)?;
    if let Command::Cone = cli.command {
        return cone(&cfg).map_err(usage);
    }
    if let Command::NormalizeCheck = cli.command {
        let FluxSpec::Burgers(d) = cfg.flux else {
            return Err(usage(anyhow::anyhow!("normalize-check needs flux.kind = burgers")));
        };
        let report = normalization_residuals(d, cfg.experiment.u_ref, 0.04, 4, 1.7);
        let mut csv = String::from("step,residual,control\n");
        for i in 0..report.steps.len() {
            let _ = writeln!(csv, "{},{},{}", report.steps[i], report.residuals[i], report.control[i]);
        }
        let out = Output::create(&cfg).map_err(usage)?;
        out.csv("residuals", &csv).map_err(run_err)?;
        return out.verdict(report.verdict, &cfg).map_err(run_err);
    }
    let grid = cfg.build_grid().map_err(anyhow::Error::msg).map_err(usage)?;
    let phi = cfg.build_perturbation();
    let out = Output::create(&cfg).map_err(usage)?;
    match cli.command {
        Command::Cone | Command::NormalizeCheck => unreachable!("handled above"),
        Command::Profile => {
            let Inputs { cfg, profile } = build_inputs(cfg).map_err(usage)?;
            out.csv("front", &front_csv(&sampled_front(&profile))).map_err(run_err)?;
            out.snapshot("profile", &profile.cell_averages(&grid), 0.0).map_err(run_err)?;
            let policy = UncPolicy::default();
            let mut verdict = Verdict::new("profile");
            verdict.push(Check {
                name: "uniformly_non_characteristic".into(),
                pass: profile.is_unc(),
                measured: profile.rho(),
                limit: policy.rho_max,
            });
            out.verdict(verdict, &cfg).map_err(run_err)
        }
        Command::Simulate => {
            let Inputs { cfg, profile } = build_inputs(cfg).map_err(usage)?;
            simulate(&cfg, &profile, &grid, &phi, &out).map_err(run_err)
        }
        Command::Stability => {
            let Inputs { cfg, profile } = build_inputs(cfg).map_err(usage)?;
            let e = &cfg.experiment;
            let params = StabilityParams {
                horizon: e.horizon,
                snapshot_every: e.snapshot_every,
                layer_relax: e.layer_relax,
                ..StabilityParams::default()
            };
            let report = stability_experiment(&profile, &phi, &grid, &cfg.scheme, &params, None).map_err(run_err)?;
            out.csv("stability", &report.to_csv()).map_err(run_err)?;
            out.csv("limit_front", &front_csv(&report.limit_front)).map_err(run_err)?;
            out.snapshot("final", &report.final_field, params.horizon).map_err(run_err)?;
            out.verdict(report.verdict, &cfg).map_err(run_err)
        }
        Command::Overhead => {
            let Inputs { cfg, profile } = build_inputs(cfg).map_err(usage)?;
            let e = &cfg.experiment;
            let params = OverheadParams {
                horizon: e.horizon,
                eta: e.eta,
                rho: Some(e.rho),
                ..OverheadParams::default()
            };
            let report = overhead_experiment(&profile, &phi, &grid, &cfg.scheme, &params).map_err(run_err)?;
            out.csv("overhead", &report.to_csv()).map_err(run_err)?;
            out.snapshot("final", &report.final_field, params.horizon).map_err(run_err)?;
            out.verdict(report.verdict, &cfg).map_err(run_err)
        }
        Command::Dispersion => {
            let flux = cfg.build_flux().map_err(anyhow::Error::msg).map_err(usage)?;
            let e = &cfg.experiment;
            let params = DispersionParams {
                u_ref: e.u_ref,
                t0: e.t0,
                horizon: e.horizon,
                ..DispersionParams::default()
            };
            let report = dispersion_experiment(&flux, &phi, &grid, &cfg.scheme, &params).map_err(run_err)?;
            out.csv("dispersion", &report.to_csv()).map_err(run_err)?;
            out.snapshot("final_m", &report.single.final_field, params.horizon).map_err(run_err)?;
            out.snapshot("final_2m", &report.doubled.final_field, params.horizon).map_err(run_err)?;
            out.verdict(report.verdict, &cfg).map_err(run_err)
        }
        Command::Support => {
            let flux = cfg.build_flux().map_err(anyhow::Error::msg).map_err(usage)?;
            if phi.is_zero() {
                return Err(usage(anyhow::anyhow!("support needs perturbation.shape")));
            }
            let base = cfg.u_minus;
            let b1 = Field::constant(&grid, base);
            let b2 = Field::from_fn(&grid, |x| base + phi.eval(x));
            let e = &cfg.experiment;
            let params = SupportParams {
                horizon: e.horizon,
                snapshot_every: e.snapshot_every,
                threshold: e.threshold,
                ..SupportParams::default()
            };
            let report = support_experiment(&b1, &b2, &flux, &cfg.scheme, &Boundary::Constant(base), &params)
                .map_err(run_err)?;
            let mut csv = String::from("t,excess,margin\n");
            for (t, excess, margin) in &report.snapshots {
                let _ = writeln!(csv, "{t},{excess},{margin}");
            }
            out.csv("support", &csv).map_err(run_err)?;
            out.snapshot("final_b1", &report.final_fields.0, params.horizon).map_err(run_err)?;
            out.snapshot("final_b2", &report.final_fields.1, params.horizon).map_err(run_err)?;
            out.verdict(report.verdict, &cfg).map_err(run_err)
        }
    }
}

fn cone(cfg: &RunConfig) -> Result<bool> {
    let pair = cfg.build_pair().map_err(anyhow::Error::msg)?;
    let cone = admissible_cone(&pair, cfg.cone_resolution)?;
    let dual = cfg.build_dual(&pair).map_err(anyhow::Error::msg)?;
    let row = |kind: &str, v: &[f64]| {
        let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        println!("{kind},{}", parts.join(","));
    };
    match cone.shape() {
        ConeShape::Sector { lo, hi } => row("sector", &[*lo, *hi]),
        ConeShape::Trivial => bail!("the admissible cone is trivial"),
        ConeShape::Polyhedral { .. } => {}
    }
    for r in cone.extreme_rays() {
        row("primal_ray", &r);
    }
    for r in dual.dual_rays() {
        row("dual_ray", r);
    }
    row("w", dual.w());
    Ok(true)
}

fn simulate(
    cfg: &RunConfig,
    profile: &ShockProfile,
    grid: &shocklab_core::Grid,
    phi: &shocklab_core::PerturbationSpec,
    out: &Output,
) -> Result<bool> {
    let pair = profile.pair();
    let base = profile.cell_averages(grid);
    let initial = base.zip_map(&Field::from_fn(grid, |x| phi.eval(x)), |a, b| a + b)?;
    let (flux, boundary) = match (cfg.scheme.frame, cfg.scheme.boundary) {
        (_, BoundaryKind::Outflow) => (frame_flux(cfg, profile), Boundary::Outflow),
        (FluxFrame::Reduced, BoundaryKind::DirichletProfile) => {
            (pair.reduced().clone(), shocklab_core::experiments::steady_boundary(profile))
        }
        (FluxFrame::Original, BoundaryKind::DirichletProfile) => {
            let p = profile.clone();
            (pair.flux().clone(), Boundary::dirichlet(move |t, x| p.eval_moving(t, x)))
        }
    };
    let (lo, hi) = initial.range();
    let range = (lo.min(pair.u_plus()), hi.max(pair.u_minus()));
    let solver = Solver::new(flux, &cfg.scheme, range)?;
    let opts = RunOptions {
        snapshot_every: Some(cfg.experiment.snapshot_every),
        comparisons: vec![("base".into(), base)],
        ..RunOptions::new(cfg.experiment.horizon)
    };
    let mass0 = initial.mass();
    let traj = solver.run(initial, &boundary, &opts)?;
    out.csv("trajectory", &traj.to_csv())?;
    for (k, (t, field)) in traj.snapshots.iter().enumerate() {
        out.snapshot(&format!("snap_{k:04}"), field, *t)?;
    }
    if let Some((t, field)) = traj.snapshots.last() {
        out.snapshot("final", field, *t)?;
    }
    let sup = traj.rows.iter().map(|r| r.sup).fold(f64::NEG_INFINITY, f64::max);
    let inf = traj.rows.iter().map(|r| r.inf).fold(f64::INFINITY, f64::min);
    let balance = traj
        .rows
        .iter()
        .map(|r| (r.mass + r.outflux - mass0).abs())
        .fold(0.0, f64::max);
    let slack = 1e-12 * (1.0 + range.0.abs().max(range.1.abs()));
    let mut verdict = Verdict::new("simulate");
    verdict.push(Check::at_most("max_principle_upper", sup - range.1, slack));
    verdict.push(Check::at_least("max_principle_lower", inf - range.0, -slack));
    verdict.push(Check::at_most("mass_balance", balance, 1e-9 * (1.0 + mass0.abs())));
    verdict.note("final_time", traj.final_time());
    out.verdict(verdict, cfg)
}

fn frame_flux(cfg: &RunConfig, profile: &ShockProfile) -> shocklab_core::Flux {
    match cfg.scheme.frame {
        FluxFrame::Reduced => profile.pair().reduced().clone(),
        FluxFrame::Original => profile.pair().flux().clone(),
    }
}

/// The front sampled on `[-extent, extent]^(d-1)`.
fn sampled_front(profile: &ShockProfile) -> Pwl {
    let h = profile.dual().dim() - 1;
    let per_axis = if h == 1 { 1025 } else { 129 };
    let e = profile.extent();
    let step = 2.0 * e / (per_axis - 1) as f64;
    Pwl::from_fn(vec![-e; h], step, vec![per_axis; h], |y| profile.psi(y)).expect("valid sampling layout")
}

fn front_csv(front: &Pwl) -> String {
    let h = front.h_dim();
    let mut s = if h == 1 {
        String::from("y,psi\n")
    } else {
        let cols: Vec<String> = (1..=h).map(|i| format!("y{i}")).collect();
        format!("{},psi\n", cols.join(","))
    };
    for (i, v) in front.values().iter().enumerate() {
        for c in front.point(i) {
            let _ = write!(s, "{c},");
        }
        let _ = writeln!(s, "{v}");
    }
    s
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn create(cfg: &RunConfig) -> Result<Self> {
        let dir = cfg.output_dir.clone();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn csv(&self, name: &str, text: &str) -> Result<()> {
        write(&self.path(&format!("{name}.csv")), text)
    }

    fn snapshot(&self, name: &str, field: &Field, t: f64) -> Result<()> {
        let path = self.path(&format!("{name}.shkw"));
        write_snapshot(field, t, &path).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `verdict.txt` and the effective config, echoes the verdict and
    /// reports whether every check passed.
    fn verdict(&self, mut verdict: Verdict, cfg: &RunConfig) -> Result<bool> {
        verdict.note("seed", cfg.seed);
        write(&self.path("config.txt"), &cfg.to_text())?;
        let text = verdict.to_text();
        write(&self.path("verdict.txt"), &text)?;
        print!("{text}");
        Ok(verdict.all_pass())
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
