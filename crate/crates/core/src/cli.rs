//! Batch experiment driver behind the `bgchaos` binary.
//!
//! Four subcommands (`cumulants`, `bound`, `stein`, `converge`) are thin
//! wrappers over the library: outputs equal direct library calls bit-exactly
//! for fixed seeds. Reports are JSON with the fully resolved configuration
//! and seed embedded; trajectory and grid data go to CSV. A JSON config file
//! passed with `--config` overrides individual flags. The `BGCHAOS_SEED`
//! environment variable supplies the default seed. Output files are written
//! atomically (temp file in the target directory, then rename).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bg::BGParams;
use crate::bounds::{self, BoundFamily, BoundReport};
use crate::chaos::{self, ChaosKernel, Spectrum};
use crate::error::{Error, Result};
use crate::homog::{self, HomogSumSpec, InnovationLaw};
use crate::mc::{self, MCConfig};
use crate::stein::{self, IdentityTestFunction, SteinGrid};
use crate::testfn::TestFunction;

/// Environment variable consulted when no seed is configured.
pub const SEED_ENV_VAR: &str = "BGCHAOS_SEED";

/// Process exit code families: 2 configuration, 3 validation, 4 bound
/// applicability, 5 numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigInvalid(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::NonPositiveParameter { .. }
        | Error::DomainError(_)
        | Error::OrderOutOfRange { .. }
        | Error::DimMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::NotSymmetric { .. }
        | Error::TooFewSamples { .. }
        | Error::EmptyInput
        | Error::EmptyDictionary => 3,
        Error::BoundInapplicable(_)
        | Error::MeanNotZero { .. }
        | Error::NegativeRadicand { .. } => 4,
        Error::EigenFailure { .. }
        | Error::GridTooCoarse { .. }
        | Error::QuadratureNotConverged { .. } => 5,
    }
}

fn default_batches() -> usize {
    32
}

fn default_checkpoints() -> usize {
    5
}

fn default_grid_size() -> usize {
    4096
}

fn default_time_nodes() -> usize {
    64
}

fn default_quad_nodes() -> usize {
    64
}

fn default_clt_levels() -> Vec<usize> {
    vec![1, 4, 16, 64]
}

fn default_ustat_sizes() -> Vec<usize> {
    vec![10, 20, 40, 80, 160, 320]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CumulantsConfig {
    /// Target parameters as `alpha1,p1,alpha2,p2`.
    pub bg: Option<String>,
    /// Kernel file in the plain-text matrix format.
    pub kernel: Option<PathBuf>,
    /// Spectrum literal `l1,l2,...` (diagonal kernel).
    pub spectrum: Option<String>,
    /// Pairwise U-statistic table of the given size.
    pub ustat: Option<usize>,
    /// Monte Carlo sample count for estimated columns.
    pub mc: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default = "default_batches")]
    pub batches: usize,
    pub out: Option<PathBuf>,
}

impl Default for CumulantsConfig {
    fn default() -> Self {
        CumulantsConfig {
            bg: None,
            kernel: None,
            spectrum: None,
            ustat: None,
            mc: None,
            seed: None,
            batches: default_batches(),
            out: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    /// One of `bg`, `bg-mc`, `vg`, `svg`, `laplace`, `normal`, `gamma`,
    /// `decomposed`, `homog`.
    pub variant: Option<String>,
    pub bg: Option<String>,
    pub alpha: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub p: Option<f64>,
    pub sigma2: Option<f64>,
    pub kernel: Option<PathBuf>,
    pub spectrum: Option<String>,
    pub ustat: Option<usize>,
    pub innovation: Option<String>,
    /// Enables the Monte Carlo bracket: dictionary lower bound and empirical
    /// Wasserstein-1 against target samples.
    pub mc: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteinConfig {
    pub bg: Option<String>,
    /// Only run the characterizing-identity residual table.
    pub identity_only: bool,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_time_nodes")]
    pub time_nodes: usize,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Directory for solved-solution grids as `x,value` CSV files.
    pub csv_dir: Option<PathBuf>,
}

impl Default for SteinConfig {
    fn default() -> Self {
        SteinConfig {
            bg: None,
            identity_only: false,
            grid_size: default_grid_size(),
            time_nodes: default_time_nodes(),
            quad_nodes: default_quad_nodes(),
            samples: None,
            seed: None,
            out: None,
            csv_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    /// One of `bg-interp`, `clt`, `ustat`.
    pub mode: Option<String>,
    pub bg: Option<String>,
    pub sigma2: Option<f64>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[serde(default = "default_clt_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_ustat_sizes")]
    pub sizes: Vec<usize>,
    pub innovation: Option<String>,
    pub mc: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            mode: None,
            bg: None,
            sigma2: None,
            checkpoints: default_checkpoints(),
            levels: default_clt_levels(),
            sizes: default_ustat_sizes(),
            innovation: None,
            mc: None,
            seed: None,
            out: None,
        }
    }
}

/// Loads a JSON config file and lets its fields override the flag values.
pub fn apply_config_file<T: Serialize + DeserializeOwned>(flags: T, path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::ConfigInvalid(format!("cannot read config {path:?}: {e}")))?;
    let overrides: Value = serde_json::from_str(&text)
        .map_err(|e| Error::ConfigInvalid(format!("config {path:?} is not valid JSON: {e}")))?;
    let mut base = serde_json::to_value(&flags)?;
    merge_value(&mut base, overrides);
    serde_json::from_value(base)
        .map_err(|e| Error::ConfigInvalid(format!("config {path:?} rejected: {e}")))
}

fn merge_value(base: &mut Value, overrides: Value) {
    match (base, overrides) {
        (Value::Object(base_map), Value::Object(over_map)) => {
            for (k, v) in over_map {
                match base_map.get_mut(&k) {
                    Some(slot) => merge_value(slot, v),
                    None => {
                        base_map.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Seed resolution order: explicit config, then `BGCHAOS_SEED`, then 0.
pub fn resolve_seed(configured: Option<u64>) -> u64 {
    configured.or_else(read_env_seed).unwrap_or(0)
}

fn read_env_seed() -> Option<u64> {
    std::env::var(SEED_ENV_VAR).ok()?.trim().parse().ok()
}

/// Writes pretty JSON atomically (same-directory temp file, then rename).
pub fn write_json_atomic(path: &Path, value: &Value) -> Result<()> {
    let payload = serde_json::to_string_pretty(value)? + "\n";
    write_atomic(path, payload.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = format!(
        ".{}.tmp",
        path.file_name().unwrap_or_default().to_string_lossy()
    );
    let tmp = match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(dir) => dir.join(name),
        None => PathBuf::from(name),
    };
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_bg(text: &str) -> Result<BGParams> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::ConfigInvalid(format!("bad number `{t}` in --bg: {e}")))
        })
        .collect::<Result<_>>()?;
    if parts.len() != 4 {
        return Err(Error::ConfigInvalid(format!(
            "--bg needs alpha1,p1,alpha2,p2 (got {} values)",
            parts.len()
        )));
    }
    BGParams::new(parts[0], parts[1], parts[2], parts[3])
}

fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let lambdas: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::ConfigInvalid(format!("bad number `{t}` in --spectrum: {e}")))
        })
        .collect::<Result<_>>()?;
    if lambdas.is_empty() {
        return Err(Error::ConfigInvalid(
            "--spectrum needs at least one value".into(),
        ));
    }
    Ok(Spectrum::new(lambdas))
}

fn parse_innovation(text: Option<&str>) -> Result<InnovationLaw> {
    match text.unwrap_or("gaussian") {
        "gaussian" | "normal" | "standard-normal" => Ok(InnovationLaw::StandardNormal),
        "rademacher" => Ok(InnovationLaw::Rademacher),
        "uniform" | "centered-uniform" => Ok(InnovationLaw::CenteredUniform),
        other => Err(Error::ConfigInvalid(format!(
            "unknown innovation law `{other}` (expected gaussian, rademacher or uniform)"
        ))),
    }
}

/// Kernel source shared by the subcommands: file, spectrum literal, or
/// autogenerated U-statistic table.
fn load_kernel(
    kernel: &Option<PathBuf>,
    spectrum: &Option<String>,
    ustat: &Option<usize>,
) -> Result<Option<ChaosKernel>> {
    let picked = [kernel.is_some(), spectrum.is_some(), ustat.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if picked > 1 {
        return Err(Error::ConfigInvalid(
            "choose at most one of --kernel, --spectrum, --ustat".into(),
        ));
    }
    if let Some(path) = kernel {
        return Ok(Some(chaos::read_kernel(path)?));
    }
    if let Some(text) = spectrum {
        return Ok(Some(parse_spectrum(text)?.diagonal_kernel()));
    }
    if let Some(n) = ustat {
        return Ok(Some(
            homog::ustat_kernel(*n, InnovationLaw::StandardNormal)?.bridge_kernel(),
        ));
    }
    Ok(None)
}

fn cumulant_json(kappa: &crate::bg::CumulantVector) -> Value {
    let values: Vec<f64> = (1..=6).map(|j| kappa.kappa(j)).collect();
    match kappa.se(1) {
        Some(_) => {
            let se: Vec<f64> = (1..=6).map(|j| kappa.se(j).unwrap()).collect();
            json!({ "kappa": values, "se": se })
        }
        None => json!({ "kappa": values }),
    }
}

/// `cumulants`: exact cumulants of the target and/or kernel, plus Monte
/// Carlo estimates with standard errors when `mc` is set.
pub fn run_cumulants(cfg: &CumulantsConfig) -> Result<Value> {
    let seed = resolve_seed(cfg.seed);
    let mut body = serde_json::Map::new();

    let params = cfg.bg.as_deref().map(parse_bg).transpose()?;
    let kernel = load_kernel(&cfg.kernel, &cfg.spectrum, &cfg.ustat)?;
    if params.is_none() && kernel.is_none() {
        return Err(Error::ConfigInvalid(
            "cumulants needs --bg and/or a kernel source".into(),
        ));
    }

    if let Some(params) = &params {
        let mut entry = serde_json::Map::new();
        entry.insert("params".into(), serde_json::to_value(params)?);
        entry.insert("class".into(), serde_json::to_value(params.classify())?);
        entry.insert("exact".into(), cumulant_json(&params.cumulant_vector()));
        if let Some(n) = cfg.mc {
            let mc_cfg = MCConfig::new(n, seed, cfg.batches)?;
            let draws = params.sample(n, seed);
            let est = mc::sample_cumulants(&draws, 6, &mc_cfg)?;
            entry.insert("estimated".into(), cumulant_json(&est));
        }
        body.insert("target".into(), Value::Object(entry));
    }

    if let Some(kernel) = &kernel {
        let mut entry = serde_json::Map::new();
        entry.insert("dim".into(), json!(kernel.dim()));
        entry.insert("exact".into(), cumulant_json(&kernel.cumulant_vector()?));
        if let Some(n) = cfg.mc {
            let mc_cfg = MCConfig::new(n, seed, cfg.batches)?;
            let draws = kernel.spectrum()?.sample(n, seed.wrapping_add(1));
            let est = mc::sample_cumulants(&draws, 6, &mc_cfg)?;
            entry.insert("estimated".into(), cumulant_json(&est));
        }
        body.insert("kernel".into(), Value::Object(entry));
    }

    Ok(json!({
        "command": "cumulants",
        "config": serde_json::to_value(cfg)?,
        "seed": seed,
        "result": Value::Object(body),
    }))
}

/// Samples the comparison law for the Monte Carlo bracket of `run_bound`.
fn sample_target(variant: &str, cfg: &BoundConfig, n: usize, seed: u64) -> Result<Vec<f64>> {
    use rand::SeedableRng;
    use rand_distr::Distribution;
    match variant {
        "bg" | "bg-mc" | "decomposed" | "homog" => Ok(parse_bg(
            cfg.bg
                .as_deref()
                .ok_or_else(|| Error::ConfigInvalid("this variant needs --bg".into()))?,
        )?
        .sample(n, seed)),
        "vg" => {
            let (a1, a2, p) = (
                req(cfg.alpha1, "alpha1")?,
                req(cfg.alpha2, "alpha2")?,
                req(cfg.p, "p")?,
            );
            Ok(BGParams::new(a1, p, a2, p)?.sample(n, seed))
        }
        "svg" => {
            let (a, p) = (req(cfg.alpha, "alpha")?, req(cfg.p, "p")?);
            Ok(BGParams::svg(a, p)?.sample(n, seed))
        }
        "laplace" => Ok(BGParams::laplace(req(cfg.alpha, "alpha")?)?.sample(n, seed)),
        "normal" => {
            let sigma2 = req(cfg.sigma2, "sigma2")?;
            let dist = rand_distr::Normal::new(0.0, sigma2.sqrt())
                .map_err(|e| Error::ConfigInvalid(format!("bad sigma2: {e}")))?;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
        }
        "gamma" => {
            let (a, p) = (req(cfg.alpha, "alpha")?, req(cfg.p, "p")?);
            let dist = rand_distr::Gamma::new(p, 1.0 / a)
                .map_err(|e| Error::ConfigInvalid(format!("bad gamma parameters: {e}")))?;
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
        }
        other => Err(Error::ConfigInvalid(format!("unknown variant `{other}`"))),
    }
}

fn req(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::ConfigInvalid(format!("missing --{name}")))
}

/// `bound`: evaluates the selected bound variant; with `mc` also the
/// dictionary lower bound and empirical Wasserstein-1 against target samples.
pub fn run_bound(cfg: &BoundConfig) -> Result<Value> {
    let seed = resolve_seed(cfg.seed);
    let variant = cfg
        .variant
        .as_deref()
        .ok_or_else(|| Error::ConfigInvalid("missing --variant".into()))?;
    let kernel = load_kernel(&cfg.kernel, &cfg.spectrum, &cfg.ustat)?;
    let kernel_cum = kernel.as_ref().map(|k| k.cumulant_vector()).transpose()?;

    let need_kernel = || {
        kernel_cum
            .ok_or_else(|| Error::ConfigInvalid("this variant needs a kernel source".into()))
    };
    let need_bg = || {
        cfg.bg
            .as_deref()
            .ok_or_else(|| Error::ConfigInvalid(format!("variant {variant} needs --bg")))
            .and_then(parse_bg)
    };

    let report: BoundReport = match variant {
        "bg" => bounds::d3_bound_cumulants(&need_kernel()?, &need_bg()?)?,
        "bg-mc" => {
            let kernel = kernel.as_ref().ok_or_else(|| {
                Error::ConfigInvalid("variant bg-mc needs a kernel source".into())
            })?;
            let paths = cfg.mc.unwrap_or(1_000_000);
            bounds::d3_bound_gammaop_mc(kernel, &need_bg()?, paths, seed.wrapping_add(7))?
        }
        "vg" => bounds::d3_bound_family(
            &need_kernel()?,
            BoundFamily::Vg {
                alpha1: req(cfg.alpha1, "alpha1")?,
                alpha2: req(cfg.alpha2, "alpha2")?,
                p: req(cfg.p, "p")?,
            },
        )?,
        "svg" => bounds::d3_bound_family(
            &need_kernel()?,
            BoundFamily::Svg {
                alpha: req(cfg.alpha, "alpha")?,
                p: req(cfg.p, "p")?,
            },
        )?,
        "laplace" => bounds::d3_bound_family(
            &need_kernel()?,
            BoundFamily::Laplace {
                alpha: req(cfg.alpha, "alpha")?,
            },
        )?,
        "normal" => bounds::d3_bound_normal(&need_kernel()?, req(cfg.sigma2, "sigma2")?)?,
        "gamma" => {
            let kernel = kernel.as_ref().ok_or_else(|| {
                Error::ConfigInvalid("variant gamma needs a kernel source".into())
            })?;
            bounds::d3_bound_gamma_dist(kernel, req(cfg.alpha, "alpha")?, req(cfg.p, "p")?)?
        }
        "decomposed" => bounds::d3_bound_decomposed(&need_kernel()?, &need_bg()?)?,
        "homog" => {
            let params = need_bg()?;
            let innovation = parse_innovation(cfg.innovation.as_deref())?;
            let max_influence = match cfg.ustat {
                // The pairwise U-statistic drives the invariance term with
                // the normalized 1/(4n) influence value.
                Some(n) => homog::ustat_influence(n),
                None => {
                    let kernel = kernel.as_ref().ok_or_else(|| {
                        Error::ConfigInvalid("variant homog needs --ustat or a kernel".into())
                    })?;
                    let table: Vec<f64> = kernel.coeffs().to_vec();
                    HomogSumSpec::new(kernel.dim(), table, innovation)?.max_influence()
                }
            };
            bounds::d3_bound_homog(&need_kernel()?, &params, innovation.rho(), max_influence)?
        }
        other => return Err(Error::ConfigInvalid(format!("unknown variant `{other}`"))),
    };

    let mut out = json!({
        "command": "bound",
        "config": serde_json::to_value(cfg)?,
        "seed": seed,
        "report": serde_json::to_value(&report)?,
    });

    if let Some(n) = cfg.mc {
        if variant != "bg-mc" {
            let kernel = kernel.as_ref().ok_or_else(|| {
                Error::ConfigInvalid("--mc bracket needs a kernel source".into())
            })?;
            let chaos_draws = kernel.spectrum()?.sample(n, seed);
            let target_draws = sample_target(variant, cfg, n, seed.wrapping_add(1))?;
            let w1 = mc::wasserstein1_empirical(&chaos_draws, &target_draws)?;
            let dict = TestFunction::dictionary();
            let lower = mc::smooth_w3_lower_bound(&chaos_draws, &target_draws, &dict)?;
            out["mc"] = json!({
                "n": n,
                "w1_empirical": w1,
                "dictionary_lower_bound": serde_json::to_value(lower)?,
                "bracket_ok": lower.estimate <= report.total + 5.0 * lower.se,
            });
        }
    }
    Ok(out)
}

/// `stein`: characterizing-identity residual table, and (unless
/// `identity_only`) the solved Stein equation for the whole dictionary with
/// regularity and semigroup checks; solved grids go to `csv_dir`.
pub fn run_stein(cfg: &SteinConfig) -> Result<Value> {
    let seed = resolve_seed(cfg.seed);
    let params = parse_bg(
        cfg.bg
            .as_deref()
            .ok_or_else(|| Error::ConfigInvalid("stein needs --bg".into()))?,
    )?;
    let n_samples = cfg.samples.unwrap_or(1_000_000);

    let mut identity_rows = Vec::new();
    for (i, f) in IdentityTestFunction::all().into_iter().enumerate() {
        let report = stein::stein_residual(
            &params,
            n_samples,
            seed.wrapping_add(i as u64),
            cfg.quad_nodes,
            |x| f.eval(x),
        )?;
        identity_rows.push(json!({
            "function": f.label(),
            "residual": report.estimate,
            "se": report.se,
            "pass": report.estimate.abs() <= 5.0 * report.se,
        }));
    }

    let mut out = json!({
        "command": "stein",
        "config": serde_json::to_value(cfg)?,
        "seed": seed,
        "identity": identity_rows,
    });

    if !cfg.identity_only {
        let grid = SteinGrid::for_params_sized(&params, cfg.grid_size, cfg.time_nodes)?;
        let mut solver_rows = Vec::new();
        for h in TestFunction::dictionary() {
            let f_h = stein::solve_stein(&params, &h, &grid)?;
            let residual = stein::verify_solution(&params, &f_h, &h, &grid)?;
            let sups = stein::derivative_sup_norms(&f_h, &grid, 0.5);
            let pass = residual <= 1e-3
                && sups[0] <= 1.0 + 5e-3
                && sups[1] <= 0.5 + 5e-3
                && sups[2] <= 1.0 / 3.0 + 5e-3;
            if let Some(dir) = &cfg.csv_dir {
                fs::create_dir_all(dir)?;
                let file = dir.join(format!("fh_{}.csv", slug(&h.label())));
                write_grid_csv(&file, &grid, &f_h)?;
            }
            solver_rows.push(json!({
                "h": h.label(),
                "equation_residual": residual,
                "sup_f": sups[0],
                "sup_f1": sups[1],
                "sup_f2": sups[2],
                "pass": pass,
            }));
        }

        // Semigroup checks: identity at t = 0, composition, long-horizon
        // flattening to E h(X).
        let h = TestFunction::Sine { a: 1.0, b: 0.0 };
        let values = grid.evaluate(&h);
        let at_zero = stein::semigroup_apply(&params, 0.0, &values, &grid)?;
        let identity_defect = sup_diff(&at_zero, &values, &grid);
        let one = stein::semigroup_apply(&params, 1.0, &values, &grid)?;
        let part = stein::semigroup_apply(&params, 0.3, &values, &grid)?;
        let composed = stein::semigroup_apply(&params, 0.7, &part, &grid)?;
        let composition_defect = sup_diff(&one, &composed, &grid);
        let flat = stein::semigroup_apply(&params, 20.0, &values, &grid)?;
        let expectation = stein::expectation_mc(&params, &h, n_samples, seed.wrapping_add(17));
        let center = flat[grid.n_x() / 2];
        out["solver"] = Value::Array(solver_rows);
        out["semigroup"] = json!({
            "identity_defect": identity_defect,
            "composition_defect": composition_defect,
            "limit_value": center,
            "limit_mc_mean": expectation.estimate,
            "limit_mc_se": expectation.se,
            "limit_pass": (center - expectation.estimate).abs() <= 5.0 * expectation.se,
        });
    }
    Ok(out)
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64], grid: &SteinGrid) -> f64 {
    grid.central_range(0.5)
        .map(|j| (a[j] - b[j]).abs())
        .fold(0.0, f64::max)
}

fn write_grid_csv(path: &Path, grid: &SteinGrid, values: &[f64]) -> Result<()> {
    let mut text = String::from("x,value\n");
    for (x, v) in grid.points().iter().zip(values) {
        text.push_str(&format!("{x:?},{v:?}\n"));
    }
    write_atomic(path, text.as_bytes())
}

/// `converge`: writes a CSV trajectory demonstrating (or refuting) the
/// selected convergence experiment, and returns a JSON summary.
pub fn run_converge(cfg: &ConvergeConfig) -> Result<Value> {
    let seed = resolve_seed(cfg.seed);
    let mode = cfg.mode.as_deref().unwrap_or("bg-interp");
    let (csv, summary) = match mode {
        "bg-interp" => converge_bg_interp(cfg, seed)?,
        "clt" => converge_clt(cfg, seed)?,
        "ustat" => converge_ustat(cfg)?,
        other => {
            return Err(Error::ConfigInvalid(format!(
                "unknown converge mode `{other}` (expected bg-interp, clt or ustat)"
            )))
        }
    };
    if let Some(out) = &cfg.out {
        write_atomic(out, csv.as_bytes())?;
    }
    Ok(json!({
        "command": "converge",
        "config": serde_json::to_value(cfg)?,
        "seed": seed,
        "mode": mode,
        "summary": summary,
        "csv": if cfg.out.is_some() { Value::Null } else { Value::String(csv) },
    }))
}

/// Spectrum whose chaos element has exactly the law `BG(alpha, p1, alpha,
/// p2)`: eigenvalue `+1/(2 alpha)` with multiplicity `2 p1` and
/// `-1/(2 alpha)` with multiplicity `2 p2`. Needs `2 p1`, `2 p2` integral and
/// equal rates.
pub fn bg_matching_spectrum(params: &BGParams) -> Result<Spectrum> {
    if (params.alpha1 - params.alpha2).abs() > 1e-12 {
        return Err(Error::ConfigInvalid(
            "matching spectrum needs alpha1 = alpha2".into(),
        ));
    }
    let m1 = 2.0 * params.p1;
    let m2 = 2.0 * params.p2;
    if (m1 - m1.round()).abs() > 1e-9 || (m2 - m2.round()).abs() > 1e-9 {
        return Err(Error::ConfigInvalid(
            "matching spectrum needs 2*p1 and 2*p2 integral".into(),
        ));
    }
    let lambda = 1.0 / (2.0 * params.alpha1);
    let mut lambdas = vec![lambda; m1.round() as usize];
    lambdas.extend(vec![-lambda; m2.round() as usize]);
    Ok(Spectrum::new(lambdas))
}

fn converge_bg_interp(cfg: &ConvergeConfig, seed: u64) -> Result<(String, Value)> {
    let params = parse_bg(cfg.bg.as_deref().unwrap_or("2,1,2,1"))?;
    let target = bg_matching_spectrum(&params)?;
    let n_mc = cfg.mc.unwrap_or(1_000_000);
    let steps = cfg.checkpoints.max(2);

    let mut csv = String::from(
        "checkpoint,scale,bound_total,fluctuation,variance_gap,mean_gap,w1_empirical,dict_lower,dict_se\n",
    );
    let mut bounds_seen = Vec::new();
    let mut w1_seen = Vec::new();
    let target_draws = params.sample(n_mc, seed.wrapping_add(1000));
    let dict = TestFunction::dictionary();
    for step in 0..steps {
        // Scale slides from 2 down to 1 (exact match).
        let scale = 2.0 - step as f64 / (steps - 1) as f64;
        let spectrum = Spectrum::new(target.lambdas().iter().map(|l| l * scale).collect());
        let kernel = spectrum.diagonal_kernel();
        let report = bounds::d3_bound_cumulants(&kernel.cumulant_vector()?, &params)?;
        let draws = spectrum.sample(n_mc, seed.wrapping_add(step as u64));
        let w1 = mc::wasserstein1_empirical(&draws, &target_draws)?;
        let lower = mc::smooth_w3_lower_bound(&draws, &target_draws, &dict)?;
        csv.push_str(&format!(
            "{step},{scale:?},{:?},{:?},{:?},{:?},{w1:?},{:?},{:?}\n",
            report.total,
            report.term("fluctuation").unwrap_or(0.0),
            report.term("variance_gap").unwrap_or(0.0),
            report.term("mean_gap").unwrap_or(0.0),
            lower.estimate,
            lower.se,
        ));
        bounds_seen.push(report.total);
        w1_seen.push(w1);
    }
    let strictly_decreasing = bounds_seen.windows(2).all(|w| w[1] < w[0]);
    let summary = json!({
        "bounds": bounds_seen,
        "w1": w1_seen,
        "strictly_decreasing": strictly_decreasing,
        "final_bound": bounds_seen.last(),
        "w1_reduction_factor": w1_seen.first().unwrap_or(&0.0) / w1_seen.last().unwrap_or(&1.0),
    });
    Ok((csv, summary))
}

fn converge_clt(cfg: &ConvergeConfig, seed: u64) -> Result<(String, Value)> {
    let sigma2 = cfg.sigma2.unwrap_or(2.0);
    let sigma = (sigma2 / 2.0).sqrt();
    let n_mc = cfg.mc.unwrap_or(200_000);
    let mut csv = String::from("n,bound_total,kappa2,kappa6,w1_vs_normal\n");
    let mut bounds_seen = Vec::new();
    for (i, &n) in cfg.levels.iter().enumerate() {
        // n pairs of +-sigma/sqrt(2n), so kappa_2 = sigma2 exactly.
        let magnitude = sigma / (2.0 * n as f64).sqrt();
        let mut lambdas = Vec::with_capacity(2 * n);
        for _ in 0..n {
            lambdas.push(magnitude);
            lambdas.push(-magnitude);
        }
        let spectrum = Spectrum::new(lambdas);
        let cum = spectrum.cumulant_vector();
        let report = bounds::d3_bound_normal(&cum, sigma2)?;
        let w1 = if n_mc > 0 {
            use rand::SeedableRng;
            use rand_distr::Distribution;
            let draws = spectrum.sample(n_mc, seed.wrapping_add(i as u64));
            let normal = rand_distr::Normal::new(0.0, sigma2.sqrt()).expect("valid sigma");
            let mut rng =
                rand_chacha::ChaCha12Rng::seed_from_u64(seed.wrapping_add(500 + i as u64));
            let reference: Vec<f64> = (0..n_mc).map(|_| normal.sample(&mut rng)).collect();
            mc::wasserstein1_empirical(&draws, &reference)?
        } else {
            0.0
        };
        csv.push_str(&format!(
            "{n},{:?},{:?},{:?},{w1:?}\n",
            report.total,
            cum.kappa(2),
            cum.kappa(6),
        ));
        bounds_seen.push(report.total);
    }
    let ratios: Vec<f64> = bounds_seen.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((
        csv,
        json!({ "bounds": bounds_seen, "quadrupling_ratios": ratios }),
    ))
}

fn converge_ustat(cfg: &ConvergeConfig) -> Result<(String, Value)> {
    let innovation = parse_innovation(cfg.innovation.as_deref())?;
    let rho = innovation.rho();
    let mut csv =
        String::from("n,raw_max_influence,normalized_influence,invariance_term,variance\n");
    let mut terms = Vec::new();
    for &n in &cfg.sizes {
        let spec = homog::ustat_kernel(n, innovation)?;
        let normalized = homog::ustat_influence(n);
        let invariance = 2.0 * (30.0 * rho).powi(2) * normalized.sqrt();
        csv.push_str(&format!(
            "{n},{:?},{normalized:?},{invariance:?},{:?}\n",
            spec.max_influence(),
            spec.variance(),
        ));
        terms.push(invariance);
    }
    let ratios: Vec<f64> = terms.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((
        csv,
        json!({ "invariance_terms": terms, "step_ratios": ratios }),
    ))
}

/// Writes a report to `out` (atomic) or stdout.
pub fn emit(report: &Value, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => write_json_atomic(path, report),
        None => {
            println!("{}", serde_json::to_string_pretty(report)?);
            Ok(())
        }
    }
}
