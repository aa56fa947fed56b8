//! Run configuration: per-subcommand parameter schemas, `key = value`
//! config files with `[section]` headers, and flag-over-file precedence.

use std::collections::BTreeMap;
use std::fmt;

use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Float,
    Int,
    Text,
    FloatList,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn p(key: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Param {
    Param {
        key,
        kind,
        default,
        help,
    }
}

use Kind::*;

const PROFILES: &[Param] = &[
    p(
        "kind",
        Choice(&["fstar", "selfsimilar", "bbar", "bbar-n", "phi-star"]),
        Some("fstar"),
        "profile to emit",
    ),
    p("A", Float, None, "amplitude A (exclusive with --phi-d)"),
    p("phi-d", Float, None, "phase offset log(1+A)"),
    p("T0", Float, Some("1"), "time shift of bbar"),
    p("delta", Float, None, "select T0 = (phi_d/delta)^2"),
    p("t", Float, Some("1"), "time"),
    p("n", Int, Some("0"), "iterate index for bbar-n"),
    p("L", Float, Some("2"), "scale for bbar-n"),
    p("X", Float, Some("40"), "half width of the box"),
    p("N", Int, Some("1024"), "number of nodes"),
    p("out", Text, Some("-"), "output CSV ('-' for stdout)"),
];

const NORMS: &[Param] = &[p("input", Text, None, "field CSV to read")];

const FLOWS: &[Param] = &[
    p("profile", Choice(&["fA"]), Some("fA"), "initial b0"),
    p("A", Float, None, "amplitude A (exclusive with --phi-d)"),
    p("phi-d", Float, None, "phase offset log(1+A)"),
    p("t", Float, Some("4"), "final time (the flow starts at t = 1)"),
    p(
        "mode",
        Choice(&["burgers", "heat", "lin-rep", "lin-direct"]),
        Some("burgers"),
        "which flow",
    ),
    p("dt", Float, Some("1e-3"), "step of lin-direct"),
    p("X", Float, Some("40"), "half width of the box"),
    p("N", Int, Some("1024"), "number of nodes"),
    p("out", Text, Some("flow.csv"), "output field CSV"),
];

const COERCIVITY: &[Param] = &[
    p("phi-d", FloatList, Some("0.5,2,5"), "phase offsets"),
    p("L", FloatList, Some("2,4,8,16"), "scales"),
    p("corpus", Choice(&["default"]), Some("default"), "perturbation corpus"),
    p("seed", Int, Some("0"), "seed of the random corpus member"),
    p("out", Text, Some("coercivity.csv"), "output table"),
];

const RG_MIX: &[Param] = &[
    p("phi-d", Float, Some("2"), "phase offset"),
    p("delta", Float, Some("0.05"), "smallness; T0 = (phi_d/delta)^2"),
    p("L", Float, Some("2"), "renormalization scale (>= 2)"),
    p("n-max", Int, Some("14"), "number of RG steps"),
    p(
        "perturbation",
        Choice(&["none", "cubic_flux", "quadratic_gradient"]),
        Some("none"),
        "irrelevant term",
    ),
    p("eps0", Float, Some("0.1"), "initial perturbation coefficient"),
    p("sigma", Float, Some("0.2"), "rate loss in the decay target"),
    p("rho-star", Float, Some("1"), "budget for the initial distance"),
    p(
        "w",
        Choice(&["gauss-dx", "corpus-mix"]),
        Some("gauss-dx"),
        "mean-zero initial perturbation",
    ),
    p("w-amp", Float, Some("0.1"), "amplitude of w"),
    p("seed", Int, Some("0"), "seed for w = corpus-mix"),
    p("dt", Float, Some("2e-3"), "time step"),
    p(
        "integrator",
        Choice(&["rk2", "rk4"]),
        Some("rk2"),
        "integrating-factor scheme",
    ),
    p("X", Float, Some("512"), "half width of the box"),
    p("N", Int, Some("8192"), "number of nodes"),
    p("fit-lo", Int, Some("4"), "first iterate of the decay fit"),
    p("fit-hi", Int, Some("12"), "last iterate of the decay fit"),
    p("out", Text, Some("run.csv"), "output series"),
];

const SPECTRA: &[Param] = &[
    p(
        "system",
        Choice(&["lambda-omega"]),
        Some("lambda-omega"),
        "reaction-diffusion preset",
    ),
    p("q", Float, Some("1"), "frequency slope of the preset"),
    p("omega0", Float, Some("1"), "base frequency of the preset"),
    p("k", Float, Some("0.2"), "wavenumber"),
    p("M", Int, Some("32"), "Fourier modes per component"),
    p("xi-points", Int, Some("65"), "Bloch wavenumbers on [-k/2, k/2]"),
    p("h", Float, Some("1e-3"), "finite-difference step in k"),
    p("out", Text, Some("curves.csv"), "output eigencurves"),
];

const REPORT: &[Param] = &[
    p("suite", Choice(&["core", "extended"]), Some("core"), "acceptance suite"),
    p("seed", Int, Some("0"), "corpus seed"),
    p("out-dir", Text, Some("report"), "directory for artifacts and manifest"),
];

pub const COMMANDS: &[(&str, &str, &[Param])] = &[
    ("profiles", "emit a Burgers profile as CSV", PROFILES),
    ("norms", "print all norms of a field CSV as JSON", NORMS),
    ("flows", "run a Burgers, heat or linearized flow", FLOWS),
    (
        "coercivity",
        "sweep the mean-zero contraction over the corpus",
        COERCIVITY,
    ),
    ("rg-mix", "renormalization-group mixing run", RG_MIX),
    ("spectra", "wave-train Bloch spectra and dispersion", SPECTRA),
    ("report", "run the acceptance suite", REPORT),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<diffmix_core::Error> for ConfigError {
    fn from(e: diffmix_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn schema(command: &str) -> Option<&'static [Param]> {
    COMMANDS.iter().find(|c| c.0 == command).map(|c| c.2)
}

pub fn cli() -> Command {
    let mut cmd = Command::new("diffmix")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Diffusive mixing of large phase offsets: profiles, flows, RG iteration and spectra")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("key = value file; [section] headers name subcommands"),
        );
    for (name, about, params) in COMMANDS {
        let mut sub = Command::new(*name).about(*about);
        for prm in *params {
            let mut help = prm.help.to_string();
            if let Some(d) = prm.default {
                help.push_str(&format!(" [default: {d}]"));
            }
            sub = sub.arg(
                Arg::new(prm.key)
                    .long(prm.key)
                    .value_name("VALUE")
                    .allow_hyphen_values(true)
                    .help(help),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// `section -> key -> value`; keys before any header live in section `""`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>, ConfigError> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            if schema(&section).is_none() {
                return Err(ConfigError(format!("line {}: unknown section [{section}]", i + 1)));
            }
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().trim_matches('"').to_string();
        out.entry(section.clone()).or_default().insert(key, value);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

fn check_kind(prm: &Param, value: &str) -> Result<(), ConfigError> {
    let bad = |what: &str| Err(ConfigError(format!("--{}: expected {what}, got `{value}`", prm.key)));
    match prm.kind {
        Float => value.parse::<f64>().map(|_| ()).or_else(|_| bad("a number")),
        Int => value
            .parse::<u64>()
            .map(|_| ())
            .or_else(|_| bad("a non-negative integer")),
        Text => Ok(()),
        FloatList => {
            if value.split(',').all(|v| v.trim().parse::<f64>().is_ok()) {
                Ok(())
            } else {
                bad("a comma-separated list of numbers")
            }
        }
        Choice(opts) => {
            if opts.contains(&value) {
                Ok(())
            } else {
                bad(&format!("one of {}", opts.join("|")))
            }
        }
    }
}

/// Resolves flags over file values over defaults, rejecting unknown keys.
pub fn resolve(
    command: &str,
    flags: &ArgMatches,
    file: Option<&BTreeMap<String, BTreeMap<String, String>>>,
) -> Result<RunConfig, ConfigError> {
    let params = schema(command).ok_or_else(|| ConfigError(format!("unknown subcommand {command}")))?;
    let mut values = BTreeMap::new();
    if let Some(file) = file {
        for (section, kv) in file {
            let sch = if section.is_empty() {
                params
            } else {
                schema(section).unwrap_or(&[])
            };
            for key in kv.keys() {
                if !sch.iter().any(|p| p.key == key) {
                    let sec = if section.is_empty() { command } else { section };
                    return Err(ConfigError(format!("unknown key `{key}` for {sec}")));
                }
            }
        }
        for section in ["", command] {
            if let Some(kv) = file.get(section) {
                values.extend(kv.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
        }
    }
    for prm in params {
        if flags.value_source(prm.key) == Some(ValueSource::CommandLine) {
            if let Some(v) = flags.get_one::<String>(prm.key) {
                values.insert(prm.key.to_string(), v.clone());
            }
        }
        if !values.contains_key(prm.key) {
            if let Some(d) = prm.default {
                values.insert(prm.key.to_string(), d.to_string());
            }
        }
        if let Some(v) = values.get(prm.key) {
            check_kind(prm, v)?;
        }
    }
    Ok(RunConfig {
        command: command.to_string(),
        values,
    })
}

impl RunConfig {
    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn text(&self, key: &str) -> Result<&str, ConfigError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ConfigError(format!("missing --{key}")))
    }

    pub fn float(&self, key: &str) -> Result<f64, ConfigError> {
        self.text(key)?
            .parse()
            .map_err(|_| ConfigError(format!("--{key} must be a number")))
    }

    pub fn int(&self, key: &str) -> Result<u64, ConfigError> {
        self.text(key)?
            .parse()
            .map_err(|_| ConfigError(format!("--{key} must be a non-negative integer")))
    }

    pub fn floats(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.text(key)?
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("--{key} must list numbers")))
            })
            .collect()
    }

    /// `key=value` pairs in key order, for CSV headers and manifests.
    pub fn echo(&self) -> String {
        let mut parts = vec![format!("command={}", self.command)];
        parts.extend(self.values.iter().map(|(k, v)| format!("{k}={v}")));
        parts.join(",")
    }
}
