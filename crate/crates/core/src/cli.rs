//! Command-line interface.
//!
//! Every command takes the same set of flags ([`RunConfig`]). A JSON file
//! passed with `--config` supplies the same fields and takes precedence over
//! the flags. Outputs go to `--out` (stdout when absent) and, where a command
//! has a secondary report, to `--json` and `--svg`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::attractor::{
    calibrated_epsilon, count_components, li_yorke_scan, li_yorke_scan_pairs, sample_attractor_with, sweep,
    ComponentReport, LiYorkeOptions, Orientation, SampleOptions, SweepBudget, SweepFamily, DEFAULT_BURN_IN,
    DEFAULT_ORIENTATION_LAG, DEFAULT_SAMPLES,
};
use crate::dynamics::{
    cesaro_with, cycle_trace, iterate_with, lyapunov_trace, verdict, Arithmetic, ConvergenceVerdict, CycleTrace,
    LyapunovKind, LyapunovTrace, VerdictOptions, P_MAX, TOL_CONV,
};
use crate::error::{QsoError, Result};
use crate::fixed_points::{
    classify_with, default_seeds, find_fixed_points, FixedPointReport, NewtonOptions, SeedFailure, TOL_SPECTRAL,
};
use crate::io::{render_svg, to_json, write_cloud_csv, write_sweep_csv, write_trajectory_csv};
use crate::operators::{Family, HeredityTensor, OperatorSpec};
use crate::rng::SeededRng;
use crate::simplex::SimplexPoint;

#[derive(Debug, Parser)]
#[command(name = "qso", version, about = "Quadratic stochastic operators on the simplex")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate an operator and write the trajectory.
    Simulate(RunConfig),
    /// Locate and classify fixed points.
    FixedPoints(RunConfig),
    /// Cesàro means of a trajectory, one CSV per order.
    Cesaro(RunConfig),
    /// Sample an attractor, count its components and draw it.
    Attractor(RunConfig),
    /// Sweep the mutation rate of the V or W family.
    Sweep(RunConfig),
    /// Scan random pairs of starts for Li-Yorke behaviour.
    LiYorke(RunConfig),
    /// Validate a heredity tensor or print the tensor of a family.
    TensorCheck(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum FamilyName {
    #[value(name = "V", alias = "v")]
    V,
    #[value(name = "W", alias = "w")]
    W,
    #[value(name = "two-allele")]
    #[serde(rename = "two-allele")]
    TwoAllele,
    #[value(name = "generic")]
    #[serde(rename = "generic")]
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticName {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LyapunovName {
    #[value(name = "product")]
    PhiProduct,
    #[value(name = "quadratic")]
    PhiQuadratic,
}

/// All run parameters. Unset values fall back to the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with the same fields; its values override the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p_het: Option<f64>,
    /// Heredity tensor JSON (`{"m": .., "P": [[[..]]]}`) for the generic family.
    #[arg(long)]
    pub tensor: Option<PathBuf>,

    /// Start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub start: Option<Vec<f64>>,
    /// Number of random seeds (fixed-points, li-yorke).
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Number of random seed pairs (li-yorke).
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,

    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Highest Cesàro order.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum)]
    pub arithmetic: Option<ArithmeticName>,

    /// Verdict window in rows (default: last 10%).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub tol_conv: Option<f64>,
    #[arg(long)]
    pub p_max: Option<usize>,
    #[arg(long)]
    pub tol_spec: Option<f64>,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Clustering radius (default: calibrated from the cloud).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub orientation_lag: Option<usize>,
    #[arg(long)]
    pub delta_low: Option<f64>,
    #[arg(long)]
    pub delta_high: Option<f64>,
    #[arg(long)]
    pub lyapunov_steps: Option<usize>,
    #[arg(long)]
    pub renorm_every: Option<usize>,
    /// Lyapunov function traced by `simulate`.
    #[arg(long, value_enum)]
    pub lyapunov: Option<LyapunovName>,
    /// Trace line/sector labels in `simulate`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<bool>,

    /// Parameter grid: `start:stop:step` or a comma separated list.
    #[arg(long)]
    pub grid: Option<String>,

    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $over:ident; $($f:ident),* $(,)?) => {
        $( if $over.$f.is_some() { $base.$f = $over.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Applies a `--config` file, if any.
    pub fn resolve(mut self) -> Result<RunConfig> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)?;
        let file: RunConfig =
            serde_json::from_str(&text).map_err(|e| QsoError::Invalid(format!("{}: {e}", path.display())))?;
        overlay!(self, file;
            family, alpha, beta, p_het, tensor, start, seeds, pairs, rng_seed, steps, burn_in, samples,
            horizon, order, arithmetic, window, tol_conv, p_max, tol_spec, newton_tol, max_iter, epsilon,
            orientation_lag, delta_low, delta_high, lyapunov_steps, renorm_every, lyapunov, cycles, grid,
            out, json, svg);
        Ok(self)
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.5)
    }

    pub fn operator(&self) -> Result<OperatorSpec> {
        let a = self.alpha();
        match self.family.unwrap_or(FamilyName::V) {
            FamilyName::V => OperatorSpec::v_alpha(a),
            FamilyName::W => OperatorSpec::w_alpha(a),
            FamilyName::TwoAllele => OperatorSpec::new(Family::TwoAllele {
                alpha: a,
                beta: self.beta.unwrap_or(0.5),
                p_het: self.p_het.unwrap_or(0.5),
            }),
            FamilyName::Generic => Ok(OperatorSpec::generic(self.load_tensor()?)),
        }
    }

    fn load_tensor(&self) -> Result<HeredityTensor> {
        let path = self.tensor.as_ref().ok_or_else(|| QsoError::Invalid("the generic family needs --tensor".into()))?;
        HeredityTensor::from_json(&fs::read_to_string(path)?)
    }

    fn rng(&self) -> SeededRng {
        SeededRng::new(self.rng_seed.unwrap_or(0))
    }

    /// The `--start` point, or a seeded random point.
    fn start_point(&self, m: usize) -> Result<SimplexPoint> {
        match &self.start {
            Some(v) => {
                let p = SimplexPoint::new(v)?;
                if p.dim() != m {
                    return Err(QsoError::Dimension(format!("start has {} coordinates, operator {m}", p.dim())));
                }
                Ok(p)
            }
            None => Ok(self.rng().simplex_point(m)),
        }
    }

    fn arithmetic(&self) -> Arithmetic {
        match self.arithmetic {
            Some(ArithmeticName::Log) => Arithmetic::Log,
            _ => Arithmetic::Linear,
        }
    }

    fn verdict_options(&self) -> VerdictOptions {
        VerdictOptions {
            window: self.window,
            tol_conv: self.tol_conv.unwrap_or(TOL_CONV),
            p_max: self.p_max.unwrap_or(P_MAX),
        }
    }

    fn grid_values(&self) -> Result<Vec<f64>> {
        let text = self.grid.as_deref().ok_or_else(|| QsoError::Invalid("sweep needs --grid".into()))?;
        parse_grid(text)
    }
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |e: &dyn std::fmt::Display| QsoError::Invalid(format!("grid `{text}`: {e}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(&e))?;
        let (a, b, h) = (v[0], v[1], v[2]);
        if !(h > 0.0) || b < a {
            return Err(bad(&"need start <= stop and a positive step"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| a + k as f64 * h).collect());
    }
    if parts.len() != 1 {
        return Err(bad(&"expected start:stop:step or a comma separated list"));
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e))).collect()
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    lyapunov: Option<LyapunovTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycles: Option<CycleTrace>,
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.operator()?;
    let x0 = cfg.start_point(spec.dim())?;
    let steps = cfg.steps.unwrap_or(1000);
    let mut csv = Vec::new();
    if steps == 0 {
        write_trajectory_csv(&mut csv, &[x0])?;
        return emit(cfg.out.as_deref(), &csv);
    }
    let t = iterate_with(&spec, &x0, steps, cfg.arithmetic())?;
    write_trajectory_csv(&mut csv, t.points())?;
    emit(cfg.out.as_deref(), &csv)?;
    if cfg.lyapunov.is_some() || cfg.cycles == Some(true) {
        let lyapunov = cfg
            .lyapunov
            .map(|k| {
                let which = match k {
                    LyapunovName::PhiProduct => LyapunovKind::PhiProduct,
                    LyapunovName::PhiQuadratic => LyapunovKind::PhiQuadratic,
                };
                lyapunov_trace(&spec, &t, which)
            })
            .transpose()?;
        let cycles = (cfg.cycles == Some(true)).then(|| cycle_trace(&spec, &t)).transpose()?;
        let json =
            cfg.json.as_deref().ok_or_else(|| QsoError::Invalid("--lyapunov and --cycles need --json".into()))?;
        fs::write(json, to_json(&SimulateReport { lyapunov, cycles })?)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct FixedPointOutput {
    operator: OperatorSpec,
    fixed_points: Vec<FixedPointReport>,
    failures: Vec<SeedFailure>,
}

fn cmd_fixed_points(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.operator()?;
    let mut seeds = default_seeds();
    let mut rng = cfg.rng();
    for _ in 0..cfg.seeds.unwrap_or(0) {
        seeds.push(rng.simplex_point(3));
    }
    let defaults = NewtonOptions::default();
    let opts = NewtonOptions {
        max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
        tol: cfg.newton_tol.unwrap_or(defaults.tol),
    };
    let search = find_fixed_points(&spec, &seeds, opts)?;
    let tol_spec = cfg.tol_spec.unwrap_or(TOL_SPECTRAL);
    let fixed_points =
        search.fixed_points.iter().map(|r| classify_with(&spec, &r.location, tol_spec)).collect::<Result<Vec<_>>>()?;
    let out = FixedPointOutput { operator: spec, fixed_points, failures: search.failures };
    emit(cfg.out.as_deref(), to_json(&out)?.as_bytes())
}

#[derive(Debug, Serialize)]
struct CesaroVerdict {
    order: usize,
    verdict: ConvergenceVerdict,
}

/// `path` with `_k<order>` inserted before the extension.
fn order_path(path: &Path, order: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_k{order}.{}", ext.to_string_lossy()),
        None => format!("{stem}_k{order}"),
    };
    path.with_file_name(name)
}

fn cmd_cesaro(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.operator()?;
    let x0 = cfg.start_point(spec.dim())?;
    let k = cfg.order.unwrap_or(1);
    let table = cesaro_with(&spec, &x0, k, cfg.steps.unwrap_or(1000), cfg.arithmetic())?;
    let mut verdicts = Vec::new();
    for order in 0..=k {
        let mut csv = Vec::new();
        write_trajectory_csv(&mut csv, table.rows(order))?;
        match &cfg.out {
            Some(p) => fs::write(order_path(p, order), csv)?,
            None if order == k => emit(None, &csv)?,
            None => {}
        }
        verdicts.push(CesaroVerdict { order, verdict: verdict(table.rows(order), cfg.verdict_options())? });
    }
    if let Some(p) = &cfg.json {
        fs::write(p, to_json(&verdicts)?)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AttractorOutput {
    operator: OperatorSpec,
    start: SimplexPoint,
    burn_in: usize,
    samples: usize,
    #[serde(flatten)]
    components: ComponentReport,
    min_coordinate_seen: f64,
    orientation: Orientation,
    angle_sum: f64,
    orientation_lag: usize,
}

fn cmd_attractor(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.operator()?;
    let x0 = cfg.start_point(spec.dim())?;
    let burn_in = cfg.burn_in.unwrap_or(DEFAULT_BURN_IN);
    let samples = match cfg.steps {
        Some(total) if total <= burn_in => return Err(QsoError::SamplesEmpty { burn_in, total }),
        Some(total) => total - burn_in,
        None => cfg.samples.unwrap_or(DEFAULT_SAMPLES),
    };
    let opts = SampleOptions {
        arithmetic: cfg.arithmetic(),
        orientation_lag: cfg.orientation_lag.unwrap_or(DEFAULT_ORIENTATION_LAG),
    };
    let cloud = sample_attractor_with(&spec, &x0, burn_in, samples, opts)?;
    let eps = cfg.epsilon.unwrap_or_else(|| calibrated_epsilon(&cloud.samples));
    let components = count_components(&cloud.samples, eps)?;
    let mut csv = Vec::new();
    write_cloud_csv(&mut csv, &cloud.samples)?;
    emit(cfg.out.as_deref(), &csv)?;
    if let Some(p) = &cfg.svg {
        fs::write(p, render_svg(&cloud.samples, 800))?;
    }
    if let Some(p) = &cfg.json {
        let report = AttractorOutput {
            operator: spec,
            start: x0,
            burn_in,
            samples,
            components,
            min_coordinate_seen: cloud.min_coordinate_seen,
            orientation: cloud.orientation,
            angle_sum: cloud.angle_sum,
            orientation_lag: cloud.orientation_lag,
        };
        fs::write(p, to_json(&report)?)?;
    }
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let family = match cfg.family.unwrap_or(FamilyName::V) {
        FamilyName::V => SweepFamily::V,
        FamilyName::W => SweepFamily::W,
        other => return Err(QsoError::Invalid(format!("sweeps run over the V or W family, not {other:?}"))),
    };
    let defaults = SweepBudget::default();
    let budget = SweepBudget {
        start: match &cfg.start {
            Some(_) => cfg.start_point(3)?,
            None => defaults.start,
        },
        burn_in: cfg.burn_in.unwrap_or(defaults.burn_in),
        samples: cfg.samples.unwrap_or(defaults.samples),
        lyapunov_steps: cfg.lyapunov_steps.unwrap_or(defaults.lyapunov_steps),
        renorm_every: cfg.renorm_every.unwrap_or(defaults.renorm_every),
        arithmetic: cfg.arithmetic(),
    };
    let rows = sweep(family, &cfg.grid_values()?, &budget)?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows)?;
    emit(cfg.out.as_deref(), &csv)
}

fn cmd_li_yorke(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.operator()?;
    let defaults = LiYorkeOptions::default();
    let opts = LiYorkeOptions {
        horizon: cfg.horizon.unwrap_or(defaults.horizon),
        delta_low: cfg.delta_low.unwrap_or(defaults.delta_low),
        delta_high: cfg.delta_high.unwrap_or(defaults.delta_high),
    };
    let mut rng = cfg.rng();
    let m = spec.dim();
    let report = match cfg.pairs {
        Some(n) => {
            let pairs: Vec<_> = (0..n).map(|_| (rng.simplex_point(m), rng.simplex_point(m))).collect();
            li_yorke_scan_pairs(&spec, &pairs, opts)?
        }
        None => {
            let seeds: Vec<_> = (0..cfg.seeds.unwrap_or(10)).map(|_| rng.simplex_point(m)).collect();
            li_yorke_scan(&spec, &seeds, opts)?
        }
    };
    emit(cfg.out.as_deref(), to_json(&report)?.as_bytes())
}

#[derive(Debug, Serialize)]
struct TensorCheck {
    valid: bool,
    m: usize,
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<f64>>>,
}

fn cmd_tensor_check(cfg: &RunConfig) -> Result<()> {
    let tensor = match &cfg.tensor {
        Some(_) => cfg.load_tensor()?,
        None => cfg.operator()?.tensor().clone(),
    };
    let report = TensorCheck { valid: true, m: tensor.dim(), p: tensor.entries() };
    emit(cfg.out.as_deref(), to_json(&report)?.as_bytes())
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    let (cmd, cfg): (fn(&RunConfig) -> Result<()>, RunConfig) = match cli.command {
        Command::Simulate(c) => (cmd_simulate, c),
        Command::FixedPoints(c) => (cmd_fixed_points, c),
        Command::Cesaro(c) => (cmd_cesaro, c),
        Command::Attractor(c) => (cmd_attractor, c),
        Command::Sweep(c) => (cmd_sweep, c),
        Command::LiYorke(c) => (cmd_li_yorke, c),
        Command::TensorCheck(c) => (cmd_tensor_check, c),
    };
    cmd(&cfg.resolve()?)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0.10:0.20:0.002").unwrap();
        assert_eq!(g.len(), 51);
        assert!((g[50] - 0.2).abs() < 1e-12);
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_grid("0.497, 0.499").unwrap(), vec![0.497, 0.499]);
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("0.2:0.1:0.01").is_err());
    }

    #[test]
    fn order_paths() {
        assert_eq!(order_path(Path::new("/tmp/ces.csv"), 2), PathBuf::from("/tmp/ces_k2.csv"));
        assert_eq!(order_path(Path::new("ces"), 0), PathBuf::from("ces_k0"));
    }

    #[test]
    fn config_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"family": "W", "alpha": 0.9, "start": [0.2, 0.3, 0.5]}"#).unwrap();
        let cli = Cli::try_parse_from([
            "qso",
            "simulate",
            "--alpha",
            "0.1",
            "--steps",
            "7",
            "--config",
            path.to_str().unwrap(),
        ])
        .unwrap();
        let Command::Simulate(cfg) = cli.command else { panic!() };
        let cfg = cfg.resolve().unwrap();
        assert_eq!(cfg.alpha, Some(0.9));
        assert_eq!(cfg.family, Some(FamilyName::W));
        assert_eq!(cfg.steps, Some(7));
        assert_eq!(cfg.start, Some(vec![0.2, 0.3, 0.5]));
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{\n  \"alpha\": 0.5,\n  \"alpah\": 1\n}").unwrap();
        let cfg = RunConfig { config: Some(path), ..Default::default() };
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig {
            family: Some(FamilyName::TwoAllele),
            alpha: Some(0.1),
            grid: Some("0.1:0.2:0.05".into()),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
