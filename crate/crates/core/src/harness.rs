//! Experiments: pick sizes along a fixed-γ subsequence, simulate, rescale and
//! compare with the limit law. Reports go to CSV and JSON.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cutsim::{simulate_batch, rescale_count, CompleteTree, SimSample, Simulator, TotalRescaling, Variant};
use crate::error::{KcutError, Result};
use crate::exactmean::{expected_records, MeanQuery};
use crate::limitdist::{LimitCdf, LimitParams};
use crate::series::{constants, ConstantTable};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "KCUT_THREADS";
pub const DEFAULT_DELTA: f64 = 0.02;
/// Below this distance from an integer, γ = 0 and γ = 1 are both reported.
const GAMMA_TIE: f64 = 1e-9;

/// Which count an experiment tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMode", into = "RawMode")]
pub enum RecordMode {
    /// r-records for one r.
    Order(usize),
    /// All cuts, with every order weighted in.
    Total,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawMode {
    Order(usize),
    Name(String),
}

impl TryFrom<RawMode> for RecordMode {
    type Error = String;
    fn try_from(raw: RawMode) -> std::result::Result<Self, String> {
        match raw {
            RawMode::Order(r) => Ok(RecordMode::Order(r)),
            RawMode::Name(s) if s == "total" => Ok(RecordMode::Total),
            RawMode::Name(s) => Err(format!("r must be a positive integer or \"total\", got {s:?}")),
        }
    }
}

impl From<RecordMode> for RawMode {
    fn from(m: RecordMode) -> Self {
        match m {
            RecordMode::Order(r) => RawMode::Order(r),
            RecordMode::Total => RawMode::Name("total".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    /// Allowed circular distance between frac(lg n − lg lg n) and the target.
    pub delta: f64,
    /// Standard errors allowed between the empirical and the exact mean.
    pub mean_sigmas: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA, mean_sigmas: 4.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    /// Per-size summary table.
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Every rescaled sample, one row each.
    pub samples_csv: Option<PathBuf>,
}

fn default_variant() -> Variant {
    Variant::Node
}

fn default_simulator() -> Simulator {
    Simulator::Records
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k: usize,
    pub r: RecordMode,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default = "default_simulator")]
    pub simulator: Simulator,
    pub gamma_target: f64,
    /// Explicit sizes; otherwise `n_min`, `n_max` and `count` drive the selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(KcutError::config("k must be at least 1"));
        }
        if let RecordMode::Order(r) = self.r {
            if r == 0 || r > self.k {
                return Err(KcutError::config(format!("need 1 ≤ r ≤ k, got r = {r}, k = {}", self.k)));
            }
            if self.simulator == Simulator::Process {
                return Err(KcutError::config("the process simulator only yields totals; use r = \"total\""));
            }
        }
        if self.simulator == Simulator::Process && self.variant == Variant::Edge {
            return Err(KcutError::config("the process simulator only covers the node variant"));
        }
        if !(0.0..1.0).contains(&self.gamma_target) {
            return Err(KcutError::config(format!("gamma_target must lie in [0, 1), got {}", self.gamma_target)));
        }
        let d = self.tolerance.delta;
        if !(d > 0.0 && d <= 0.5) {
            return Err(KcutError::config(format!("delta must lie in (0, 0.5], got {d}")));
        }
        if !(self.tolerance.mean_sigmas > 0.0) {
            return Err(KcutError::config("mean_sigmas must be positive"));
        }
        match (&self.n_list, self.n_min, self.n_max, self.count) {
            (Some(list), None, None, None) => {
                if list.is_empty() {
                    return Err(KcutError::config("n_list is empty"));
                }
                if let Some(&n) = list.iter().find(|&&n| n < 16) {
                    return Err(KcutError::config(format!("experiments need n ≥ 16, got {n}")));
                }
                for &n in list {
                    CompleteTree::new(n)?.check_size()?;
                }
            }
            (None, Some(lo), Some(hi), Some(_)) => {
                if lo < 16 || lo >= hi {
                    return Err(KcutError::config(format!("need 16 ≤ n_min < n_max, got {lo} and {hi}")));
                }
            }
            _ => return Err(KcutError::config("give either n_list or all of n_min, n_max and count")),
        }
        Ok(())
    }
}

/// frac(lg n − lg lg n).
pub fn gamma_of(n: f64) -> f64 {
    let lg = n.log2();
    frac(lg - lg.log2())
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 { 0.0 } else { f }
}

/// Distance on the circle R/Z.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Root of x − lg x = c on x > 1/ln 2.
fn solve_lg(c: f64) -> f64 {
    let mut x = c + c.max(2.0).log2();
    for _ in 0..60 {
        let step = (x - x.log2() - c) / (1.0 - 1.0 / (x * std::f64::consts::LN_2));
        x -= step;
        if step.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

/// [`subsequence_select_with`] at the default delta.
pub fn subsequence_select(gamma: f64, n_min: u64, n_max: u64, count: usize) -> Result<Vec<u64>> {
    subsequence_select_with(gamma, n_min, n_max, count, DEFAULT_DELTA)
}

/// Up to `count` sizes in `[n_min, n_max]` with frac(lg n − lg lg n) within
/// `delta` of `gamma`. There is one candidate per integer part, so the
/// candidates are about a factor 2 apart; when there are more than `count`,
/// an evenly spaced subset of them is kept.
pub fn subsequence_select_with(gamma: f64, n_min: u64, n_max: u64, count: usize, delta: f64) -> Result<Vec<u64>> {
    if n_min < 16 || n_min >= n_max {
        return Err(KcutError::domain(format!("need 16 ≤ n_min < n_max, got {n_min} and {n_max}")));
    }
    if !gamma.is_finite() || !(delta >= 0.0) {
        return Err(KcutError::domain("gamma must be finite and delta nonnegative"));
    }
    let n_max = n_max.min(1 << 62);
    let level = |n: u64| {
        let lg = (n as f64).log2();
        lg - lg.log2()
    };
    let first = level(n_min).floor() as i64 - 1;
    let last = level(n_max).ceil() as i64 + 1;
    let mut found: Vec<u64> = Vec::new();
    for big_m in first..=last {
        let x = solve_lg(big_m as f64 + frac(gamma));
        if !(x > 3.0 && x < 63.0) {
            continue;
        }
        let centre = x.exp2().round() as u64;
        // near the bottom of the range rounding can matter, so look around
        let pick = [0i64, -1, 1, -2, 2]
            .iter()
            .filter_map(|&d| centre.checked_add_signed(d))
            .find(|&n| n >= n_min && n <= n_max && circular_distance(gamma_of(n as f64), gamma) <= delta);
        found.extend(pick);
    }
    found.sort_unstable();
    found.dedup();
    if found.len() <= count {
        return Ok(found);
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        return Ok(vec![found[found.len() / 2]]);
    }
    let last = found.len() - 1;
    Ok((0..count).map(|i| found[(i * last + (count - 1) / 2) / (count - 1)]).collect())
}

/// sup |F_n − F| for the empirical CDF of `samples`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(KcutError::domain("KS statistic of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(KcutError::domain("KS statistic of a sample containing NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // ties form one jump of the empirical CDF
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    Ok(d.min(1.0))
}

/// Two-sample KS distance sup |F_a − F_b|.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(KcutError::domain("KS statistic of an empty sample"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(KcutError::domain("KS statistic of a sample containing NaN"));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Summary for one tree size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: u64,
    /// frac(lg n − lg lg n); the limit law is evaluated at this value.
    pub gamma: f64,
    pub within_delta: bool,
    pub samples: u64,
    pub raw_mean: Option<f64>,
    pub raw_variance: Option<f64>,
    pub rescaled_mean: Option<f64>,
    pub rescaled_variance: Option<f64>,
    pub ks: Option<f64>,
    /// KS against the other endpoint when γ sits on 0 ≡ 1.
    pub ks_gamma_alt: Option<f64>,
    pub exact_mean: f64,
    /// (empirical − exact) / standard error.
    pub mean_z: Option<f64>,
    pub mean_ok: Option<bool>,
    #[serde(skip)]
    pub raw: Vec<u64>,
    #[serde(skip)]
    pub rescaled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub version: String,
    pub warnings: Vec<String>,
    pub sizes: Vec<SizeReport>,
}

fn mean_var(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var))
}

/// Tree sizes an experiment runs over, with warnings for the ones that miss
/// the target.
pub fn experiment_sizes(cfg: &ExperimentConfig) -> Result<(Vec<u64>, Vec<String>)> {
    let mut warnings = Vec::new();
    let sizes = match (&cfg.n_list, cfg.n_min, cfg.n_max, cfg.count) {
        (Some(list), ..) => {
            for &n in list {
                let g = gamma_of(n as f64);
                if circular_distance(g, cfg.gamma_target) > cfg.tolerance.delta {
                    warnings.push(format!("n = {n} has γ = {g:.4}, more than delta from the target"));
                }
            }
            list.clone()
        }
        (None, Some(lo), Some(hi), Some(count)) => {
            let s = subsequence_select_with(cfg.gamma_target, lo, hi, count, cfg.tolerance.delta)?;
            if s.is_empty() {
                warnings.push(format!("no n in [{lo}, {hi}] is within delta of γ = {}", cfg.gamma_target));
            }
            s
        }
        _ => return Err(KcutError::config("give either n_list or all of n_min, n_max and count")),
    };
    Ok((sizes, warnings))
}

fn size_report(cfg: &ExperimentConfig, tables: &[ConstantTable], n: u64) -> Result<SizeReport> {
    let tree = CompleteTree::new(n)?;
    tree.check_size()?;
    let nf = n as f64;
    let gamma = gamma_of(nf);
    let limit_r = match cfg.r {
        RecordMode::Order(r) => r,
        RecordMode::Total => 1,
    };
    let table = &tables[limit_r - 1];

    let exact_mean = match cfg.r {
        RecordMode::Order(r) => {
            expected_records(&MeanQuery { n, k: cfg.k, r, y: None, variant: cfg.variant })?
        }
        RecordMode::Total => {
            let mut s = 0.0;
            for r in 1..=cfg.k {
                s += expected_records(&MeanQuery { n, k: cfg.k, r, y: None, variant: cfg.variant })?;
            }
            s
        }
    };

    let batch: Vec<SimSample> = simulate_batch(&tree, cfg.k, cfg.variant, cfg.simulator, cfg.samples, cfg.seed)?;
    let raw: Vec<u64> = batch
        .iter()
        .map(|s| match cfg.r {
            RecordMode::Order(r) => s.per_r[r - 1],
            RecordMode::Total => s.total,
        })
        .collect();
    let rescaled: Vec<f64> = match cfg.r {
        RecordMode::Order(_) => raw.iter().map(|&x| rescale_count(x as f64, table, nf)).collect::<Result<_>>()?,
        RecordMode::Total => {
            let t = TotalRescaling::new(tables, nf)?;
            raw.iter().map(|&x| t.apply(x as f64)).collect()
        }
    };
    let raw_f: Vec<f64> = raw.iter().map(|&x| x as f64).collect();
    let (raw_mean, raw_variance) = mean_var(&raw_f);
    let (rescaled_mean, rescaled_variance) = mean_var(&rescaled);

    let (mut ks, mut ks_gamma_alt) = (None, None);
    if !rescaled.is_empty() {
        let cdf = LimitCdf::new(&LimitParams::new(limit_r, cfg.k, gamma)?, table)?;
        ks = Some(ks_statistic(&rescaled, |y| cdf.cdf(y))?);
        if !(GAMMA_TIE..=1.0 - GAMMA_TIE).contains(&gamma) {
            let alt = if gamma < 0.5 { 1.0 } else { 0.0 };
            let cdf = LimitCdf::new(&LimitParams::new(limit_r, cfg.k, alt)?, table)?;
            ks_gamma_alt = Some(ks_statistic(&rescaled, |y| cdf.cdf(y))?);
        }
    }
    let mean_z = match (raw_mean, raw_variance) {
        (Some(m), Some(v)) if v > 0.0 => Some((m - exact_mean) / (v / raw_f.len() as f64).sqrt()),
        (Some(m), Some(_)) => Some(if (m - exact_mean).abs() < 1e-9 * exact_mean.max(1.0) { 0.0 } else { f64::INFINITY }),
        _ => None,
    };
    Ok(SizeReport {
        n,
        gamma,
        within_delta: circular_distance(gamma, cfg.gamma_target) <= cfg.tolerance.delta,
        samples: cfg.samples,
        raw_mean,
        raw_variance,
        rescaled_mean,
        rescaled_variance,
        ks,
        ks_gamma_alt,
        exact_mean,
        mean_z,
        mean_ok: mean_z.map(|z| z.abs() <= cfg.tolerance.mean_sigmas),
        raw,
        rescaled,
    })
}

/// Run the experiment on the current rayon pool. Output files are not
/// written here; see [`write_outputs`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (sizes, warnings) = experiment_sizes(cfg)?;
    let tables: Vec<ConstantTable> = (1..=cfg.k).map(|r| constants(cfg.k, r)).collect::<Result<_>>()?;
    let mut reports = Vec::with_capacity(sizes.len());
    for n in sizes {
        let rep = size_report(cfg, &tables, n).map_err(|e| e.context(&format!("n = {n}, seed = {}", cfg.seed)))?;
        reports.push(rep);
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        warnings,
        sizes: reports,
    })
}

/// Run `f` on a private pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| KcutError::config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Worker count from the environment, if set.
pub fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(KcutError::config(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

pub const REPORT_HEADER: [&str; 13] = [
    "n",
    "gamma",
    "within_delta",
    "samples",
    "raw_mean",
    "raw_variance",
    "rescaled_mean",
    "rescaled_variance",
    "ks",
    "ks_gamma_alt",
    "exact_mean",
    "mean_z",
    "mean_ok",
];

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Summary table, one row per size.
pub fn write_report_csv<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(REPORT_HEADER)?;
    for s in &report.sizes {
        out.write_record([
            s.n.to_string(),
            fmt_real(s.gamma),
            s.within_delta.to_string(),
            s.samples.to_string(),
            opt(s.raw_mean),
            opt(s.raw_variance),
            opt(s.rescaled_mean),
            opt(s.rescaled_variance),
            opt(s.ks),
            opt(s.ks_gamma_alt),
            fmt_real(s.exact_mean),
            opt(s.mean_z),
            s.mean_ok.map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Every sample: n, index, raw count, rescaled value.
pub fn write_samples_csv<W: Write>(report: &ExperimentReport, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["n", "index", "raw", "rescaled"])?;
    for s in &report.sizes {
        for (i, (x, y)) in s.raw.iter().zip(&s.rescaled).enumerate() {
            out.write_record([s.n.to_string(), i.to_string(), x.to_string(), fmt_real(*y)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn report_csv_string(report: &ExperimentReport) -> Result<String> {
    let mut buf = Vec::new();
    write_report_csv(report, &mut buf)?;
    String::from_utf8(buf).map_err(|e| KcutError::Io(e.to_string()))
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    let _ = writeln!(s);
    Ok(s)
}

/// Write whichever outputs the config names.
pub fn write_outputs(report: &ExperimentReport) -> Result<()> {
    let out = &report.config.output;
    if let Some(p) = &out.csv {
        write_report_csv(report, std::fs::File::create(p).map_err(|e| KcutError::from(e).context(&p.display().to_string()))?)?;
    }
    if let Some(p) = &out.samples_csv {
        write_samples_csv(report, std::fs::File::create(p).map_err(|e| KcutError::from(e).context(&p.display().to_string()))?)?;
    }
    if let Some(p) = &out.json {
        std::fs::write(p, report_json(report)?).map_err(|e| KcutError::from(e).context(&p.display().to_string()))?;
    }
    Ok(())
}
