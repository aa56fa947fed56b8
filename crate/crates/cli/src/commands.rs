use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use diffmix_core::acceptance::{mixing_table, run_suite, CheckResult, Suite};
use diffmix_core::flows::{burgers_flow, heat_propagate, linflow_direct, linflow_rep};
use diffmix_core::grid::make_grid;
use diffmix_core::io::{field_table, parse_field, write_atomic, Table};
use diffmix_core::mixing::{gaussian_kick, run_mixing, Integrator, Perturbation, RGConfig};
use diffmix_core::norms::{all_norms, l2_norm, linf_norm};
use diffmix_core::profiles::{bbar, bbar_n, burgers_selfsimilar, f_star, phi_star, BurgersParams};
use diffmix_core::renorm::{coercivity_sweep, default_corpus};
use diffmix_core::spectra::{
    dispersion_coefficients, eigencurves, solve_wavetrain, stability_report, xi_grid, RDSystem, WaveTrain,
};
use diffmix_core::{Error, Field};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or parameter values; nothing was computed.
    Config(String),
    /// The computation itself failed.
    Runtime(String),
    /// The acceptance suite ran and at least one check failed.
    Failed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Failed(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Failed(n) => write!(f, "{n} acceptance check(s) failed"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

/// Parameter errors raised while assembling inputs count as configuration errors.
fn setup<T>(r: diffmix_core::Result<T>) -> Res<T> {
    r.map_err(|e| match e {
        Error::Parameter(_) | Error::InvalidGrid(_) => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
pub fn stdout(text: &str) -> Res<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn print_json(v: &impl Serialize) -> Res<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    stdout(&format!("{s}\n"))
}

fn emit(table: &Table, out: &str) -> Res<()> {
    if out == "-" {
        stdout(&table.to_csv()?)
    } else {
        Ok(table.write(Path::new(out))?)
    }
}

fn burgers_params(cfg: &RunConfig) -> Res<BurgersParams> {
    let p = match (cfg.has("A"), cfg.has("phi-d")) {
        (true, true) => return Err(CliError::Config("give either --A or --phi-d, not both".into())),
        (true, false) => BurgersParams::from_amplitude(cfg.float("A")?),
        (false, true) => BurgersParams::from_phase_offset(cfg.float("phi-d")?),
        (false, false) => BurgersParams::from_amplitude(1.0),
    };
    setup(p)
}

pub fn run(cfg: &RunConfig) -> Res<()> {
    match cfg.command.as_str() {
        "profiles" => profiles(cfg),
        "norms" => norms(cfg),
        "flows" => flows(cfg),
        "coercivity" => coercivity(cfg),
        "rg-mix" => rg_mix(cfg),
        "spectra" => spectra(cfg),
        "report" => report(cfg),
        other => Err(CliError::Config(format!("unknown subcommand {other}"))),
    }
}

fn profiles(cfg: &RunConfig) -> Res<()> {
    let mut p = burgers_params(cfg)?;
    p = if cfg.has("delta") {
        setup(p.select_t0(cfg.float("delta")?))?
    } else {
        setup(p.with_t0(cfg.float("T0")?))?
    };
    let grid = setup(make_grid(cfg.float("X")?, cfg.int("N")? as usize))?;
    let t = cfg.float("t")?;
    let field = match cfg.text("kind")? {
        "fstar" => f_star(&p, &grid),
        "selfsimilar" => setup(burgers_selfsimilar(&p, t, &grid))?,
        "bbar" => setup(bbar(&p, t, &grid))?,
        "bbar-n" => setup(bbar_n(&p, cfg.float("L")?, cfg.int("n")? as u32, t, &grid))?,
        _ => setup(phi_star(&p, t, &grid))?,
    };
    emit(&field_table(&field).comment(cfg.echo()), cfg.text("out")?)
}

fn norms(cfg: &RunConfig) -> Res<()> {
    let path = PathBuf::from(cfg.text("input")?);
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let f = parse_field(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    print_json(&all_norms(&f))
}

fn flows(cfg: &RunConfig) -> Res<()> {
    let p = burgers_params(cfg)?;
    let grid = setup(make_grid(cfg.float("X")?, cfg.int("N")? as usize))?;
    let t = cfg.float("t")?;
    if !(t >= 1.0) {
        return Err(CliError::Config(format!("--t={t} must be >= 1 (flows start at t = 1)")));
    }
    let dt = cfg.float("dt")?;
    let mode = cfg.text("mode")?;
    let b0 = f_star(&p, &grid);
    let g = Field::from_fn(&grid, |x| -x / 2.0 * (-x * x / 4.0).exp());
    let mut diag = json!({ "mode": mode, "t": t });
    let field = match mode {
        "burgers" => {
            let r = burgers_flow(&b0, t)?;
            diag["mass_before"] = json!(r.mass_before);
            diag["mass_after"] = json!(r.mass_after);
            diag["mass_drift"] = json!(r.mass_drift());
            diag["tail_flag"] = json!(r.tail_flag);
            r.field
        }
        "heat" => heat_propagate(&b0, t - 1.0).with_time(t),
        "lin-rep" => linflow_rep(&b0, &g, t)?,
        _ => {
            if !(dt > 0.0) {
                return Err(CliError::Config(format!("--dt={dt} must be > 0")));
            }
            linflow_direct(&b0, &g, t, dt)?
        }
    };
    diag["l2"] = json!(l2_norm(&field));
    diag["linf"] = json!(linf_norm(&field));
    diag["out"] = json!(cfg.text("out")?);
    emit(&field_table(&field).comment(cfg.echo()), cfg.text("out")?)?;
    print_json(&diag)
}

fn coercivity(cfg: &RunConfig) -> Res<()> {
    let phis = cfg.floats("phi-d")?;
    let scales = cfg.floats("L")?;
    if let Some(l) = scales.iter().find(|l| !(**l >= 2.0)) {
        return Err(CliError::Config(format!("--L={l}: every scale must be >= 2")));
    }
    if let Some(p) = phis.iter().find(|p| !(**p > 0.0)) {
        return Err(CliError::Config(format!("--phi-d={p}: phase offsets must be > 0")));
    }
    let corpus = default_corpus(cfg.int("seed")?);
    let table = setup(coercivity_sweep(&phis, &scales, &corpus))?;
    let mut t = Table::new(&["phi_d", "L", "g_id", "ratio", "kappa"]).comment(cfg.echo());
    for r in &table.rows {
        t.push([
            r.phi_d.to_string(),
            r.scale.to_string(),
            r.g_id.clone(),
            r.ratio.to_string(),
            r.kappa.to_string(),
        ]);
    }
    emit(&t, cfg.text("out")?)?;
    let summary: Vec<_> = phis
        .iter()
        .map(|&phi| {
            let slopes: Vec<_> = table
                .slopes
                .iter()
                .filter(|s| s.phi_d == phi)
                .map(|s| json!({ "g_id": s.g_id, "slope": s.fit.slope, "residual": s.fit.residual, "in_slope_test": s.in_slope_test }))
                .collect();
            json!({ "phi_d": phi, "sup_kappa": table.sup_kappa(phi), "kappa_spread": table.kappa_spread(phi), "slopes": slopes })
        })
        .collect();
    print_json(&summary)
}

fn rg_config(cfg: &RunConfig) -> Res<RGConfig> {
    let eps0 = cfg.float("eps0")?;
    let perturbation = match cfg.text("perturbation")? {
        "cubic_flux" => Perturbation::CubicFlux { eps0 },
        "quadratic_gradient" => Perturbation::QuadraticGradient { eps0 },
        _ => Perturbation::None,
    };
    let delta = cfg.float("delta")?;
    let params = setup(BurgersParams::from_phase_offset(cfg.float("phi-d")?).and_then(|p| p.select_t0(delta)))?;
    let rg = RGConfig {
        scale: cfg.float("L")?,
        n_max: cfg.int("n-max")? as u32,
        params,
        perturbation,
        rho_star: cfg.float("rho-star")?,
        sigma: cfg.float("sigma")?,
        dt: cfg.float("dt")?,
        integrator: if cfg.text("integrator")? == "rk4" {
            Integrator::IfRk4
        } else {
            Integrator::IfRk2
        },
        half_width: cfg.float("X")?,
        nodes: cfg.int("N")? as usize,
        fit_window: (cfg.int("fit-lo")? as u32, cfg.int("fit-hi")? as u32),
    };
    setup(rg.validate())?;
    Ok(rg)
}

fn rg_mix(cfg: &RunConfig) -> Res<()> {
    let rg = rg_config(cfg)?;
    let grid = setup(rg.grid())?;
    let amp = cfg.float("w-amp")?;
    let w = match cfg.text("w")? {
        "corpus-mix" => {
            let corpus = default_corpus(cfg.int("seed")?);
            corpus
                .last()
                .map(|m| m.sample(&grid).scale(amp))
                .unwrap_or_else(|| Field::zeros(&grid))
        }
        _ => gaussian_kick(&grid, amp),
    };
    let r = run_mixing(&rg, &w)?;
    emit(&mixing_table(&rg, &r).comment(cfg.echo()), cfg.text("out")?)?;
    print_json(&json!({
        "fitted_exponent": r.rho_fit.slope,
        "residual": r.rho_fit.residual,
        "distance_exponent": r.distance_fit.slope,
        "final_rho": r.final_rho,
        "mass_drift": r.mass_drift,
        "tail_flag": r.tail_flag,
        "rho_criterion": r.rho_criterion(rg.sigma),
    }))
}

fn spectra(cfg: &RunConfig) -> Res<()> {
    let sys = setup(RDSystem::lambda_omega(cfg.float("q")?, cfg.float("omega0")?))?;
    let k = cfg.float("k")?;
    let modes = cfg.int("M")? as usize;
    let points = cfg.int("xi-points")? as usize;
    if !(k > 0.0 && k < 1.0) {
        return Err(CliError::Config(format!("--k={k} must lie in (0,1)")));
    }
    if modes < 4 || points < 5 {
        return Err(CliError::Config("need --M >= 4 and --xi-points >= 5".into()));
    }
    let guess = setup(WaveTrain::from_guess(&sys, k, modes))?;
    let wt = solve_wavetrain(&sys, k, &guess)?;
    let curves = eigencurves(&wt, &sys, &xi_grid(k, points))?;
    let mut t = Table::new(&["xi", "j", "re", "im"]).comment(cfg.echo());
    for (x, j, re, im) in curves.rows() {
        t.push([x, j as f64, re, im]);
    }
    emit(&t, cfg.text("out")?)?;
    let disp = dispersion_coefficients(&sys, k, cfg.float("h")?, modes)?;
    print_json(&json!({
        "omega": wt.omega,
        "newton_residual": wt.residual,
        "ambiguities": curves.ambiguities.len(),
        "stability": stability_report(&curves),
        "dispersion": disp,
    }))
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Serialize)]
struct ManifestCheck<'a> {
    id: u32,
    name: &'a str,
    value: f64,
    threshold: &'a str,
    pass: bool,
}

fn report(cfg: &RunConfig) -> Res<()> {
    let suite: Suite = setup(cfg.text("suite")?.parse())?;
    let seed = cfg.int("seed")?;
    let dir = PathBuf::from(cfg.text("out-dir")?);
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let started = unix_now();
    let results: Vec<CheckResult> = run_suite(suite, seed);
    let finished = unix_now();
    for r in &results {
        for (name, table) in &r.artifacts {
            table.write(&dir.join(name))?;
        }
        stdout(&format!("{}\n", r.line()))?;
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    let manifest = json!({
        "tool": "diffmix",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.values,
        "started_unix": started,
        "finished_unix": finished,
        "checks": results
            .iter()
            .map(|r| ManifestCheck { id: r.id, name: &r.name, value: r.value, threshold: &r.threshold, pass: r.pass })
            .collect::<Vec<_>>(),
        "passed": results.len() - failed,
        "failed": failed,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(&dir.join("manifest.json"), &text)?;
    let mut plain = format!("diffmix {} report\n{}\n", env!("CARGO_PKG_VERSION"), cfg.echo());
    for r in &results {
        plain.push_str(&format!(
            "criterion {:>2} {:<34} {} value={:e} ({})\n",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.value,
            r.threshold
        ));
    }
    write_atomic(&dir.join("manifest.txt"), &plain)?;
    stdout(&format!(
        "{} of {} checks passed; artifacts in {}\n",
        results.len() - failed,
        results.len(),
        dir.display()
    ))?;
    if failed > 0 {
        Err(CliError::Failed(failed))
    } else {
        Ok(())
    }
}
