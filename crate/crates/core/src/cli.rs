//! Command-line driver.
//!
//! Every command resolves a [`RunConfig`] (config file first, flags on top),
//! validates it, hashes it and writes its artifacts plus `manifest.json` into
//! the output directory. Exit codes: 0 success, 1 failed verification or I/O,
//! 2 invalid input, 3 vertex budget exceeded, 4 numeric certification failure.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::blocks::block_eigen;
use crate::dpp::{self, SampleConfig};
use crate::error::{Error, Result};
use crate::operator::{self, radial_norm_check, EIGEN_RESIDUAL_TOL};
use crate::polynomials::{make_quadrature, support_radius, QuadratureRule, DEFAULT_QUAD_NODES};
use crate::symbol::{parse_alpha, RadialSymbol, SymbolFunction};
use crate::transform::{convolve_with_bound, hat_numeric, hat_polynomial_exact, DEFAULT_TAIL_TOLERANCE};
use crate::tree::{ball_size, enumerate_ball, vertex_budget, DEFAULT_VERTEX_BUDGET, VERTEX_BUDGET_ENV};

pub const DEFAULT_NMAX: usize = 16;
pub const DEFAULT_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// φ̂(0..=nmax) for a symbol φ
    Transform,
    /// α ⊛ β for two radial symbols
    Convolve,
    /// Eigenvalues of T on a ball
    Spectrum,
    /// Full vs radial norm on a ball, plus truncated norm estimates
    Norms,
    /// Draw DPP samples
    Sample,
    /// Draw DPP samples and check inclusion probabilities
    Verify,
    /// Count-variance table for an indicator symbol
    Rigidity,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Transform => "transform",
            CommandKind::Convolve => "convolve",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Norms => "norms",
            CommandKind::Sample => "sample",
            CommandKind::Verify => "verify",
            CommandKind::Rigidity => "rigidity",
        }
    }
}

/// Run configuration as read from a JSON file or flags. Every field is optional
/// here; [`RunConfig::resolve`] checks what each command needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    /// Branching number κ ≥ 1
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<u32>,
    /// Ball radius R
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    /// Comma-separated radii (norms, rigidity)
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<usize>>,
    /// Symbol spec: poly:c0,c1,.. | const:v | indicator:(a,b) | step:(a,b)=v;.. | step:a=F
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    /// File holding a symbol spec
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_file: Option<PathBuf>,
    /// Radial symbol as a comma-separated list of rationals
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    /// Radial symbol JSON file ({"kappa", "exact", "values"})
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_file: Option<PathBuf>,
    /// Second operand of `convolve` (defaults to the first)
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    /// Highest transform coefficient
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    /// Number of DPP samples
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Root seed
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Gauss-Legendre nodes for quadrature against Π_κ
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<usize>,
    /// Output directory
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config file: {e}")))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overridden_by(self, flags: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: flags.$f.or(self.$f)),* } };
        }
        pick!(
            command, kappa, radius, radii, phi, phi_file, alpha, symbol_file, beta, nmax, samples, seed,
            quad_nodes, out
        )
    }

    /// Validates every field the command uses and loads referenced files.
    pub fn resolve(&self) -> Result<Resolved> {
        let command = self
            .command
            .ok_or_else(|| Error::InvalidArgument("no command given".into()))?;
        let kappa = self.kappa.ok_or_else(|| missing("kappa"))?;
        if kappa == 0 {
            return Err(Error::InvalidArgument("kappa must be at least 1".into()));
        }
        let quad_nodes = self.quad_nodes.unwrap_or(DEFAULT_QUAD_NODES);
        if quad_nodes < 2 {
            return Err(Error::InvalidArgument("quad_nodes must be at least 2".into()));
        }

        let phi_text = match (&self.phi, &self.phi_file) {
            (Some(_), Some(_)) => return Err(Error::InvalidArgument("give phi or phi_file, not both".into())),
            (Some(p), None) => Some(p.trim().to_string()),
            (None, Some(path)) => Some(read(path)?.trim().to_string()),
            (None, None) => None,
        };
        let phi = phi_text
            .as_deref()
            .map(|t| SymbolFunction::parse(t, kappa))
            .transpose()?;
        let alpha = match (&self.alpha, &self.symbol_file) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("give alpha or symbol_file, not both".into()))
            }
            (Some(a), None) => Some(parse_alpha(a, kappa)?),
            (None, Some(path)) => {
                let v: Value = serde_json::from_str(&read(path)?)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                let s = RadialSymbol::from_json(&v)?;
                if s.kappa() != kappa {
                    return Err(Error::KappaMismatch(s.kappa(), kappa));
                }
                Some(s)
            }
            (None, None) => None,
        };
        let beta = self.beta.as_deref().map(|b| parse_alpha(b, kappa)).transpose()?;

        let needs_radius = matches!(
            command,
            CommandKind::Spectrum | CommandKind::Sample | CommandKind::Verify
        ) || (command == CommandKind::Norms && self.radii.is_none());
        if needs_radius && self.radius.is_none() {
            return Err(missing("radius"));
        }
        let radii = match command {
            CommandKind::Rigidity => {
                let r = self.radii.clone().or_else(|| self.radius.map(|r| (2..=r).collect()));
                let r = r.ok_or_else(|| missing("radii"))?;
                if r.is_empty() || r.iter().any(|&x| x < 2) {
                    return Err(Error::InvalidArgument("rigidity radii must all be at least 2".into()));
                }
                r
            }
            _ => self.radii.clone().unwrap_or_default(),
        };
        let budget = vertex_budget()?;
        for r in self.radius.iter().chain(&radii) {
            let size = ball_size(kappa, *r)?;
            if size > budget as u128 {
                return Err(Error::BudgetExceeded { requested: size, budget });
            }
        }

        match command {
            CommandKind::Transform | CommandKind::Sample | CommandKind::Verify | CommandKind::Rigidity
                if phi.is_none() =>
            {
                return Err(missing("phi"))
            }
            CommandKind::Convolve if alpha.is_none() => return Err(missing("alpha")),
            CommandKind::Spectrum | CommandKind::Norms if phi.is_none() == alpha.is_none() => {
                return Err(Error::InvalidArgument("give exactly one of phi and alpha".into()))
            }
            _ => {}
        }
        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        if matches!(command, CommandKind::Sample | CommandKind::Verify) && samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if command == CommandKind::Verify && samples < dpp::MIN_VERIFY_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "verify needs at least {} samples",
                dpp::MIN_VERIFY_SAMPLES
            )));
        }

        let hashed = json!({
            "command": command.name(),
            "kappa": kappa,
            "radius": self.radius,
            "radii": radii,
            "phi": phi_text,
            "alpha": alpha.as_ref().map(RadialSymbol::to_json),
            "beta": beta.as_ref().map(RadialSymbol::to_json),
            "nmax": self.nmax.unwrap_or(DEFAULT_NMAX),
            "samples": samples,
            "seed": self.seed.unwrap_or(0),
            "quad_nodes": quad_nodes,
        });
        let config_hash = sha256_hex(hashed.to_string().as_bytes());

        Ok(Resolved {
            command,
            kappa,
            radius: self.radius.unwrap_or(0),
            radii,
            phi,
            alpha,
            beta,
            nmax: self.nmax.unwrap_or(DEFAULT_NMAX),
            samples,
            seed: self.seed.unwrap_or(0),
            quad_nodes,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            hashed,
            config_hash,
        })
    }
}

fn missing(field: &str) -> Error {
    Error::InvalidArgument(format!("missing required field `{field}`"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated configuration. The hash covers everything that influences
/// artifact contents; the output directory is left out.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: CommandKind,
    pub kappa: u32,
    pub radius: usize,
    pub radii: Vec<usize>,
    pub phi: Option<SymbolFunction>,
    pub alpha: Option<RadialSymbol>,
    pub beta: Option<RadialSymbol>,
    pub nmax: usize,
    pub samples: usize,
    pub seed: u64,
    pub quad_nodes: usize,
    pub out: PathBuf,
    pub hashed: Value,
    pub config_hash: String,
}

impl Resolved {
    pub fn short_hash(&self) -> &str {
        &self.config_hash[..12]
    }

    fn rule(&self) -> Result<QuadratureRule> {
        make_quadrature(self.kappa, self.quad_nodes)
    }

    /// α for commands that accept either φ or α; polynomials transform exactly.
    fn radial_symbol(&self, n_max: usize) -> Result<RadialSymbol> {
        if let Some(a) = &self.alpha {
            return Ok(a.clone());
        }
        match self.phi.as_ref().expect("checked in resolve") {
            SymbolFunction::Polynomial(c) => hat_polynomial_exact(c, self.kappa),
            phi => hat_numeric(phi, self.kappa, n_max, &self.rule()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub config_hash: String,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
    pub passed: bool,
}

struct Artifacts<'a> {
    cfg: &'a Resolved,
    written: Vec<PathBuf>,
}

impl Artifacts<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.cfg.out.join(name);
        let file = fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    fn json(&mut self, name: &str, mut value: Value) -> Result<()> {
        value["config_hash"] = json!(self.cfg.config_hash);
        let mut w = self.create(name)?;
        let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w, "{text}")?;
        w.flush()?;
        Ok(())
    }
}

/// Executes a resolved configuration and writes its artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let cfg = config.resolve()?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::Io(format!("{}: {e}", cfg.out.display())))?;
    let mut art = Artifacts {
        cfg: &cfg,
        written: Vec::new(),
    };
    let (summary, passed) = match cfg.command {
        CommandKind::Transform => run_transform(&mut art)?,
        CommandKind::Convolve => run_convolve(&mut art)?,
        CommandKind::Spectrum => run_spectrum(&mut art)?,
        CommandKind::Norms => run_norms(&mut art)?,
        CommandKind::Sample => run_sample(&mut art, false)?,
        CommandKind::Verify => run_sample(&mut art, true)?,
        CommandKind::Rigidity => run_rigidity(&mut art)?,
    };
    let artifact_names: Vec<String> = art
        .written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "config": cfg.hashed,
        "artifacts": artifact_names,
        "passed": passed,
        "tolerances": {
            "eigen_residual": EIGEN_RESIDUAL_TOL,
            "tail": DEFAULT_TAIL_TOLERANCE,
            "eigen_range_error": dpp::EIGEN_RANGE_ERROR,
            "eigen_range_certificate": dpp::EIGEN_RANGE_CERT,
            "diagonal_floor": dpp::DIAGONAL_FLOOR,
            "sigma_width": dpp::SIGMA_WIDTH,
        },
        "vertex_budget": vertex_budget()?,
        "timestamp_unix": timestamp,
    });
    art.json("manifest.json", manifest)?;
    Ok(RunOutcome {
        config_hash: cfg.config_hash.clone(),
        artifacts: art.written,
        summary,
        passed,
    })
}

fn run_transform(art: &mut Artifacts) -> Result<(String, bool)> {
    let cfg = art.cfg;
    let n = cfg.nmax;
    let alpha = cfg.radial_symbol(n)?;
    let values: Vec<Value> = match alpha.exact_values() {
        Some(v) => (0..=n)
            .map(|i| json!(v.get(i).map_or_else(|| "0".to_string(), ToString::to_string)))
            .collect(),
        None => (0..=n).map(|i| json!(alpha.get(i))).collect(),
    };
    let summary = values
        .iter()
        .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
        .collect::<Vec<_>>()
        .join(", ");
    art.json(
        "transform.json",
        json!({
            "kappa": cfg.kappa,
            "exact": alpha.is_exact(),
            "values": values,
            "tail_energy": alpha.tail_energy(),
        }),
    )?;
    Ok((format!("alpha = ({summary})"), true))
}

fn run_convolve(art: &mut Artifacts) -> Result<(String, bool)> {
    let cfg = art.cfg;
    let a = cfg.alpha.as_ref().expect("checked in resolve");
    let b = cfg.beta.as_ref().unwrap_or(a);
    let (c, bound) = convolve_with_bound(a, b)?;
    let mut value = c.to_json();
    value["truncation_bound"] = json!(bound);
    art.json("convolve.json", value.clone())?;
    Ok((format!("alpha * beta = {}", value["values"]), true))
}

fn run_spectrum(art: &mut Artifacts) -> Result<(String, bool)> {
    let cfg = art.cfg;
    let ball = enumerate_ball(cfg.kappa, cfg.radius)?;
    let alpha = cfg.radial_symbol(2 * cfg.radius)?;
    let mut values = block_eigen(&alpha, &ball)?.values;
    values.sort_by(f64::total_cmp);
    let mut w = art.create("spectrum.csv")?;
    writeln!(w, "# config_hash={}", cfg.config_hash)?;
    writeln!(w, "eigenvalue")?;
    for v in &values {
        writeln!(w, "{v:.17e}")?;
    }
    w.flush()?;
    let (min, max) = (values[0], values[values.len() - 1]);
    art.json(
        "spectrum.json",
        json!({
            "kappa": cfg.kappa,
            "radius": cfg.radius,
            "dim": values.len(),
            "min_eigenvalue": min,
            "max_eigenvalue": max,
            "support_radius": support_radius(cfg.kappa),
        }),
    )?;
    Ok((format!("{} eigenvalues in [{min:.12}, {max:.12}]", values.len()), true))
}

fn run_norms(art: &mut Artifacts) -> Result<(String, bool)> {
    let cfg = art.cfg;
    let max_r = cfg.radii.iter().copied().chain(Some(cfg.radius)).max().unwrap_or(0);
    let alpha = cfg.radial_symbol(2 * max_r)?;
    let mut value = json!({ "kappa": cfg.kappa });
    let mut summary = Vec::new();
    if !cfg.radii.is_empty() {
        let est = operator::operator_norm_estimate(&alpha, &cfg.radii)?;
        for (r, n) in &est {
            summary.push(format!("||T_{r}|| = {n:.12}"));
        }
        value["estimates"] = json!(est.iter().map(|(r, n)| json!({"radius": r, "norm": n})).collect::<Vec<_>>());
    }
    if cfg.radii.is_empty() || cfg.hashed["radius"].is_number() {
        let rep = radial_norm_check(&alpha, cfg.radius)?;
        summary.push(format!(
            "R = {}: full norm {:.15}, radial norm {:.15}, gap {:.3e}",
            cfg.radius, rep.full_norm, rep.radial_norm, rep.gap
        ));
        value["radius"] = json!(cfg.radius);
        value["full_norm"] = json!(rep.full_norm);
        value["radial_norm"] = json!(rep.radial_norm);
        value["gap"] = json!(rep.gap);
        value["truncation_bound"] = json!(rep.truncation_bound);
    }
    art.json("norms.json", value)?;
    Ok((summary.join("\n"), true))
}

/// Name of the JSON-lines sample file for a configuration.
pub fn samples_file_name(config_hash: &str) -> String {
    format!("samples-{}.jsonl", &config_hash[..12])
}

fn run_sample(art: &mut Artifacts, verify: bool) -> Result<(String, bool)> {
    let cfg = art.cfg;
    let ball = enumerate_ball(cfg.kappa, cfg.radius)?;
    let phi = cfg.phi.as_ref().expect("checked in resolve");
    let kernel = dpp::validate_kernel_on(phi, &ball, &cfg.rule()?)?;
    let samples = dpp::sample(
        &kernel,
        &SampleConfig::new(cfg.seed, cfg.samples),
    );
    let mut w = art.create(&samples_file_name(&cfg.config_hash))?;
    dpp::write_jsonl(&mut w, &samples)?;
    w.flush()?;
    let mean = samples.iter().map(|s| s.len() as f64).sum::<f64>() / samples.len() as f64;
    let kernel_json = json!({
        "kappa": cfg.kappa,
        "radius": cfg.radius,
        "dim": kernel.dim(),
        "certified": kernel.is_certified(),
        "min_eigenvalue": kernel.min_eigenvalue(),
        "max_eigenvalue": kernel.max_eigenvalue(),
        "expected_cardinality": kernel.expected_cardinality(),
        "cardinality_variance": kernel.cardinality_variance(),
        "empirical_mean_cardinality": mean,
    });
    art.json("kernel.json", kernel_json)?;
    if !verify {
        return Ok((
            format!(
                "{} samples, mean size {mean:.3} (expected {:.3})",
                samples.len(),
                kernel.expected_cardinality()
            ),
            true,
        ));
    }
    let sets = dpp::standard_test_sets(&ball, 2);
    let report = dpp::verify_correlations(&kernel, &samples, &sets)?;
    let mut w = art.create("correlations.csv")?;
    report.write_csv(&mut w, &cfg.config_hash)?;
    w.flush()?;
    let failures = report.failures().count();
    art.json(
        "verify.json",
        json!({
            "n_samples": report.n_samples,
            "events": report.rows.len(),
            "failures": failures,
            "max_z": report.max_z(),
            "pass": report.pass,
        }),
    )?;
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    Ok((
        format!(
            "{verdict}: {} inclusion events, {failures} outside {}σ, max |z| {:.2}",
            report.rows.len(),
            dpp::SIGMA_WIDTH,
            report.max_z()
        ),
        report.pass,
    ))
}

fn run_rigidity(art: &mut Artifacts) -> Result<(String, bool)> {
    let cfg = art.cfg;
    let interval = match cfg.phi.as_ref().expect("checked in resolve") {
        SymbolFunction::Step(p) if p.len() == 1 && p[0].value == 1.0 => (p[0].lo, p[0].hi),
        SymbolFunction::Polynomial(c) if c.len() == 1 && c[0] == num_rational::BigRational::from_integer(1.into()) => {
            let c = support_radius(cfg.kappa);
            (-c, c)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "rigidity needs an indicator symbol (indicator:(a,b) or step:a=F)".into(),
            ))
        }
    };
    let rows = dpp::rigidity_probe(cfg.kappa, interval, &cfg.radii, &cfg.rule()?)?;
    let mut w = art.create("rigidity.csv")?;
    dpp::write_rigidity_csv(&mut w, &rows, &cfg.config_hash)?;
    w.flush()?;
    let lines: Vec<String> = rows
        .iter()
        .map(|r| format!("R = {:2}: Var #(xi in B_{}) = {:.6}", r.radius, r.region_radius, r.variance))
        .collect();
    Ok((lines.join("\n"), true))
}

#[derive(Debug, Parser)]
#[command(name = "cayley-toeplitz", version, about = "Radial Toeplitz operators on Cayley trees")]
struct Cli {
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and its hash, then exit
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// φ̂(0..=nmax) for a symbol φ
    Transform(RunConfig),
    /// α ⊛ β for two radial symbols
    Convolve(RunConfig),
    /// Eigenvalues of T on a ball
    Spectrum(RunConfig),
    /// Full vs radial norm on a ball, plus truncated norm estimates
    Norms(RunConfig),
    /// Draw DPP samples
    Sample(RunConfig),
    /// Draw DPP samples and check inclusion probabilities
    Verify(RunConfig),
    /// Count-variance table for an indicator symbol
    Rigidity(RunConfig),
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BudgetExceeded { .. } | Error::Overflow(_) => 3,
        Error::Certification(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (kind, flags) = match cli.command {
        CliCommand::Transform(f) => (CommandKind::Transform, f),
        CliCommand::Convolve(f) => (CommandKind::Convolve, f),
        CliCommand::Spectrum(f) => (CommandKind::Spectrum, f),
        CliCommand::Norms(f) => (CommandKind::Norms, f),
        CliCommand::Sample(f) => (CommandKind::Sample, f),
        CliCommand::Verify(f) => (CommandKind::Verify, f),
        CliCommand::Rigidity(f) => (CommandKind::Rigidity, f),
    };
    let result = (|| {
        let base = match &cli.config {
            Some(path) => RunConfig::from_json_str(&read(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(c) = base.command {
            if c != kind {
                return Err(Error::InvalidArgument(format!(
                    "config file is for `{}`, not `{}`",
                    c.name(),
                    kind.name()
                )));
            }
        }
        let config = base.overridden_by(RunConfig {
            command: Some(kind),
            ..flags
        });
        if cli.dry_run {
            let resolved = config.resolve()?;
            let text = serde_json::to_string_pretty(&json!({
                "config": resolved.hashed,
                "config_hash": resolved.config_hash,
                "out": resolved.out,
                "vertex_budget": vertex_budget()?,
            }))
            .map_err(|e| Error::Io(e.to_string()))?;
            println!("{text}");
            return Ok(0);
        }
        let outcome = run(&config)?;
        println!("{}", outcome.summary);
        println!("config hash {}", outcome.config_hash);
        Ok(if outcome.passed { 0 } else { 1 })
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::BudgetExceeded { .. } = e {
                eprintln!(
                    "raise the limit with {VERTEX_BUDGET_ENV}=<vertices> (default {DEFAULT_VERTEX_BUDGET})"
                );
            }
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: CommandKind) -> RunConfig {
        RunConfig {
            command: Some(command),
            kappa: Some(2),
            ..Default::default()
        }
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_json_str(r#"{"kappa": 3, "seed": 4, "phi": "const:1"}"#).unwrap();
        let merged = file.overridden_by(RunConfig {
            kappa: Some(2),
            ..Default::default()
        });
        assert_eq!(merged.kappa, Some(2));
        assert_eq!(merged.seed, Some(4));
        assert_eq!(merged.phi.as_deref(), Some("const:1"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_json_str(r#"{"kappa": 2, "sedd": 4}"#).unwrap_err();
        assert!(err.to_string().contains("sedd"));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let mut a = cfg(CommandKind::Transform);
        a.phi = Some("poly:0,1".into());
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        assert_eq!(a.resolve().unwrap().config_hash, b.resolve().unwrap().config_hash);
        b.nmax = Some(3);
        assert_ne!(a.resolve().unwrap().config_hash, b.resolve().unwrap().config_hash);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(cfg(CommandKind::Transform).resolve(), Err(Error::InvalidArgument(_))));
        let mut c = cfg(CommandKind::Sample);
        c.phi = Some("const:1".into());
        assert!(c.resolve().is_err());
        c.radius = Some(30);
        let err = c.resolve().unwrap_err();
        assert_eq!(exit_code(&err), 3);
        let mut bad = cfg(CommandKind::Transform);
        bad.phi = Some("poly:1,x".into());
        assert_eq!(exit_code(&bad.resolve().unwrap_err()), 2);
    }
}
