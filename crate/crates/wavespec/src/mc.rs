//! Monte Carlo harness: runs a schedule of (n, a, p) configurations with
//! parallel replicates and aggregates pooled histograms, KS distances, and
//! mode locations into a deterministic summary.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_stream;
use crate::specmat::{
    ks_statistic, log_spectrum, multiscale_hurst, wavelet_matrix, RegimeSchedule, ScheduleEntry,
    TargetLaw, WeightMode,
};
use crate::synth::{synth_ensemble, EnsembleSpec, HurstLaw, MixingSpec};
use crate::wavelet::{mallat_pyramid, WaveletFamily};

/// Growth constant in the dimension gate p <= c sqrt(n/a) (A4).
pub const A4_SQRT_C: f64 = 1.0;
/// A run fails outright when more than this fraction of replicates error.
pub const MAX_FAILED_FRACTION: f64 = 0.05;
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.02;
/// Rescaled logs live in (1, 3) for H in (0, 1); the histogram keeps slack
/// on both sides and clamps the rest into the edge bins.
pub const RESCALED_LOG_RANGE: (f64, f64) = (0.0, 4.0);
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const MODE_SMOOTH_WINDOW: usize = 5;
pub const MODE_MASS_HALF_WIDTH: f64 = 0.15;

fn default_family() -> String {
    "db2".into()
}

fn default_mixing() -> MixingSpec {
    MixingSpec::Identity
}

fn default_weights() -> WeightMode {
    WeightMode::CountProportional
}

/// Full experiment description, loadable from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub law: HurstLaw,
    pub schedule: RegimeSchedule,
    pub replicates: usize,
    #[serde(default = "default_family")]
    pub family: String,
    /// pyramid octave range for the multiscale regression; per-entry
    /// default is [3, log2 a + 2], shrunk toward log2 a while the formal
    /// coefficient count n/(a 2^j) does not exceed p
    #[serde(default)]
    pub octave_range: Option<(usize, usize)>,
    #[serde(default = "default_mixing")]
    pub mixing: MixingSpec,
    pub seed: u64,
    #[serde(default = "default_weights")]
    pub weights: WeightMode,
    #[serde(default)]
    pub outputs: Option<PathBuf>,
}

fn exact_log2(a: usize) -> Result<usize> {
    if a >= 2 && a.is_power_of_two() {
        Ok(a.trailing_zeros() as usize)
    } else {
        Err(Error::Config(format!("scale a must be a power of two >= 2, got {a}")))
    }
}

impl ExperimentConfig {
    /// Octave range for one schedule entry.
    pub fn resolved_range(&self, entry: &ScheduleEntry) -> Result<(usize, usize)> {
        let m = exact_log2(entry.a)?;
        match self.octave_range {
            Some((j1, j2)) => {
                if j1 < 1 || j2 <= j1 {
                    return Err(Error::Config(format!(
                        "octave range [{j1}, {j2}] needs 1 <= j1 < j2"
                    )));
                }
                Ok((j1, j2))
            }
            None => {
                if m <= 3 {
                    return Err(Error::Config(format!(
                        "scale {} is too small for the default octave range [3, log2 a + 2]; \
                         set octave_range explicitly",
                        entry.a
                    )));
                }
                let mut j2 = m + 2;
                while j2 > m
                    && entry.p as f64 >= entry.n as f64 / (entry.a * (1usize << (j2 - m))) as f64
                {
                    j2 -= 1;
                }
                Ok((3, j2))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.replicates > u32::MAX as usize {
            return Err(Error::Config("replicates must fit in 32 bits".into()));
        }
        WaveletFamily::parse(&self.family)?;
        let mut octaves = Vec::with_capacity(self.schedule.entries.len());
        for entry in &self.schedule.entries {
            let (_, j2) = self.resolved_range(entry)?;
            let m = exact_log2(entry.a)?;
            octaves.push(j2.saturating_sub(m));
        }
        self.schedule.validate_at(&octaves, A4_SQRT_C)
    }
}

/// Loads and validates an experiment config; the format is picked by file
/// extension (.toml or .json).
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let cfg: ExperimentConfig = match ext {
        "toml" => toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        "json" => serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        _ => {
            return Err(Error::Config(format!(
                "config {} must end in .toml or .json",
                path.display()
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Equal-width histogram over [lo, hi]; out-of-range values are clamped
/// into the edge bins so no mass is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub masses: Vec<f64>,
    pub total: u64,
}

impl Histogram {
    pub fn from_values(lo: f64, hi: f64, bin_width: f64, values: &[f64]) -> Histogram {
        let bins = ((hi - lo) / bin_width).round() as usize;
        let mut counts = vec![0u64; bins.max(1)];
        let last = counts.len() as i64 - 1;
        for &v in values {
            let i = (((v - lo) / bin_width).floor() as i64).clamp(0, last) as usize;
            counts[i] += 1;
        }
        let total = values.len() as u64;
        let masses = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect();
        Histogram { lo, hi, bin_width, counts, masses, total }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.bin_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub location: f64,
    /// histogram mass within MODE_MASS_HALF_WIDTH of the location
    pub mass: f64,
}

/// Modes found may be fewer than requested; that is reported, not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub requested: usize,
    pub modes: Vec<Mode>,
}

fn smooth(masses: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..masses.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(masses.len() - 1);
            masses[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Local maxima of the moving-average-smoothed histogram, top k by
/// prominence, ascending by location.
pub fn mode_extract(hist: &Histogram, k: usize) -> Result<ModeReport> {
    if k < 1 {
        return Err(Error::Domain("mode count k must be >= 1".into()));
    }
    let s = smooth(&hist.masses, MODE_SMOOTH_WINDOW);
    let nb = s.len();
    // plateau-aware peaks: runs of equal height above both neighbors
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    let mut i = 0;
    while i < nb {
        let mut j = i;
        while j + 1 < nb && s[j + 1] == s[i] {
            j += 1;
        }
        let up_left = i == 0 || s[i - 1] < s[i];
        let up_right = j + 1 == nb || s[j + 1] < s[i];
        if up_left && up_right && s[i] > 0.0 {
            peaks.push(((i + j) / 2, s[i]));
        }
        i = j + 1;
    }
    // prominence: drop from the peak to the higher of its two bases, a base
    // being the minimum before the nearest strictly higher bin or the edge
    let mut ranked: Vec<(f64, usize)> = peaks
        .iter()
        .map(|&(c, h)| {
            let mut left_base = h;
            let mut t = c;
            while t > 0 {
                t -= 1;
                if s[t] > h {
                    break;
                }
                left_base = left_base.min(s[t]);
            }
            let mut right_base = h;
            let mut t = c;
            while t + 1 < nb {
                t += 1;
                if s[t] > h {
                    break;
                }
                right_base = right_base.min(s[t]);
            }
            (h - left_base.max(right_base), c)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    ranked.truncate(k);
    ranked.sort_by_key(|r| r.1);
    let modes = ranked
        .iter()
        .map(|&(_, c)| {
            let location = hist.bin_center(c);
            let mass = (0..nb)
                .filter(|&i| (hist.bin_center(i) - location).abs() <= MODE_MASS_HALF_WIDTH + 1e-12)
                .map(|i| hist.masses[i])
                .sum();
            Mode { location, mass }
        })
        .collect();
    Ok(ModeReport { requested: k, modes })
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < n {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[n - 1]
    }
}

fn bootstrap_median_band(values: &[f64], resamples: usize, rng: &mut impl Rng) -> (f64, f64) {
    let n = values.len();
    let mut buf = vec![0.0; n];
    let mut medians = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for b in buf.iter_mut() {
            *b = values[rng.gen_range(0..n)];
        }
        buf.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(quantile(&buf, 0.5));
    }
    medians.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (quantile(&medians, 0.025), quantile(&medians, 0.975))
}

/// Wall-clock measurements; excluded from serialized summaries so that
/// output bytes are a pure function of the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimingStats {
    pub total_seconds: f64,
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

impl TimingStats {
    fn from_seconds(seconds: impl Iterator<Item = f64>) -> TimingStats {
        let mut t = TimingStats::default();
        let mut count = 0usize;
        for s in seconds {
            t.total_seconds += s;
            t.max_seconds = t.max_seconds.max(s);
            count += 1;
        }
        if count > 0 {
            t.mean_seconds = t.total_seconds / count as f64;
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub error: String,
}

/// Everything one replicate produced; kept out of summary.json and written
/// to the per-config CSV instead.
#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub replicate: usize,
    /// eigenvalues at scale a, ascending
    pub lambdas: Vec<f64>,
    /// rescaled log eigenvalues at scale a
    pub rescaled: Vec<f64>,
    /// per-rank multiscale estimates, ascending
    pub hurst: Vec<f64>,
    /// KS of the raw rescaled logs at scale a against the target atoms
    pub ks: f64,
    /// KS of the regression-debiased values 2H+1 against the same atoms
    pub ks_debiased: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ConfigDetail {
    pub entry: ScheduleEntry,
    pub records: Vec<ReplicateRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub entry: ScheduleEntry,
    pub octave_range: (usize, usize),
    pub completed: usize,
    pub failures: Vec<ReplicateFailure>,
    pub hurst_histogram: Histogram,
    pub rescaled_log_histogram: Histogram,
    pub modes: ModeReport,
    pub ks_median: f64,
    pub ks_iqr: (f64, f64),
    /// bootstrap 95% band for the median
    pub ks_band: (f64, f64),
    pub ks_values: Vec<f64>,
    pub ks_debiased_median: f64,
    pub ks_debiased_iqr: (f64, f64),
    pub ks_debiased_band: (f64, f64),
    pub ks_debiased_values: Vec<f64>,
    #[serde(skip)]
    pub timing: TimingStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub family: String,
    pub weights: WeightMode,
    pub law: HurstLaw,
    pub mixing: MixingSpec,
    pub replicates: usize,
    pub target_atoms: Vec<f64>,
    pub configs: Vec<ConfigSummary>,
    /// trend of the raw rescaled-log KS distances
    pub trend: Option<TrendReport>,
    /// trend of the debiased-value KS distances
    pub trend_debiased: Option<TrendReport>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub details: Vec<ConfigDetail>,
}

/// Per-config KS samples feeding the convergence trend.
#[derive(Debug, Clone)]
pub struct KsSamples {
    pub entry: ScheduleEntry,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub entry: ScheduleEntry,
    pub median_ks: f64,
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub points: Vec<TrendPoint>,
    pub non_increasing: bool,
    pub strictly_decreasing: bool,
}

/// Median KS per configuration with bootstrap bands and monotonicity flags.
pub fn convergence_trend(samples: &[KsSamples], seed: u64) -> Result<TrendReport> {
    if samples.len() < 2 {
        return Err(Error::Domain("trend needs at least two configurations".into()));
    }
    let mut points = Vec::with_capacity(samples.len());
    for (ci, s) in samples.iter().enumerate() {
        if s.values.is_empty() {
            return Err(Error::Domain(format!(
                "configuration {ci} has no KS samples"
            )));
        }
        let sorted = sorted_copy(&s.values);
        let band = bootstrap_median_band(
            &s.values,
            BOOTSTRAP_RESAMPLES,
            &mut derive_stream(seed, (1 << 48) + ci as u64),
        );
        points.push(TrendPoint { entry: s.entry, median_ks: quantile(&sorted, 0.5), band });
    }
    let non_increasing = points.windows(2).all(|w| w[1].median_ks <= w[0].median_ks);
    let strictly_decreasing = points.windows(2).all(|w| w[1].median_ks < w[0].median_ks);
    Ok(TrendReport { points, non_increasing, strictly_decreasing })
}

fn run_replicate(
    espec: &EnsembleSpec,
    family: &WaveletFamily,
    target: &TargetLaw,
    range: (usize, usize),
    scale_octave: usize,
    max_octave: usize,
    weights: WeightMode,
    seed: u64,
    config_index: u64,
    replicate: usize,
) -> Result<ReplicateRecord> {
    let mut rng = derive_stream(seed, (config_index << 32) | replicate as u64);
    let ens = synth_ensemble(espec, &mut rng)?;
    let pyramid = mallat_pyramid(&ens.observed, family, max_octave)?;
    let spectrum = log_spectrum(&wavelet_matrix(&pyramid, scale_octave)?)?;
    let ks = ks_statistic(spectrum.values(), target);
    let hurst = multiscale_hurst(&pyramid, range, weights)?;
    let debiased: Vec<f64> = hurst.iter().map(|h| 2.0 * h + 1.0).collect();
    let ks_debiased = ks_statistic(&debiased, target);
    Ok(ReplicateRecord {
        replicate,
        lambdas: spectrum.eigenvalues().to_vec(),
        rescaled: spectrum.values().to_vec(),
        hurst,
        ks,
        ks_debiased,
        seconds: 0.0,
    })
}

/// Runs every schedule entry for the configured number of replicates.
/// Replicates run concurrently; per-replicate streams and an ordered
/// reduction make the summary independent of the thread count. Individual
/// replicate errors are recorded and excluded, but more than
/// MAX_FAILED_FRACTION of them fails the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let family = WaveletFamily::parse(&config.family)?;
    let target = TargetLaw::from_hurst_law(&config.law);
    let mut configs = Vec::new();
    let mut details = Vec::new();
    let mut ks_samples = Vec::new();
    let mut ks_debiased_samples = Vec::new();
    for (ci, entry) in config.schedule.entries.iter().enumerate() {
        let range = config.resolved_range(entry)?;
        let scale_octave = exact_log2(entry.a)?;
        let max_octave = range.1.max(scale_octave);
        let espec = EnsembleSpec {
            n: entry.n,
            p: entry.p,
            law: config.law.clone(),
            mixing: config.mixing,
            seed: config.seed,
        };
        let results: Vec<(usize, Result<ReplicateRecord>)> = (0..config.replicates)
            .into_par_iter()
            .map(|r| {
                let t0 = Instant::now();
                let rec = run_replicate(
                    &espec,
                    &family,
                    &target,
                    range,
                    scale_octave,
                    max_octave,
                    config.weights,
                    config.seed,
                    ci as u64,
                    r,
                )
                .map(|mut rec| {
                    rec.seconds = t0.elapsed().as_secs_f64();
                    rec
                });
                (r, rec)
            })
            .collect();
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (r, res) in results {
            match res {
                Ok(rec) => records.push(rec),
                Err(e) => failures.push(ReplicateFailure { replicate: r, error: e.to_string() }),
            }
        }
        if failures.len() as f64 > MAX_FAILED_FRACTION * config.replicates as f64 {
            return Err(Error::Evaluation(format!(
                "{}/{} replicates failed at (n={}, a={}, p={}); first: {}",
                failures.len(),
                config.replicates,
                entry.n,
                entry.a,
                entry.p,
                failures[0].error
            )));
        }
        let hurst_pool: Vec<f64> =
            records.iter().flat_map(|r| r.hurst.iter().copied()).collect();
        let rescaled_pool: Vec<f64> =
            records.iter().flat_map(|r| r.rescaled.iter().copied()).collect();
        let hurst_histogram =
            Histogram::from_values(0.0, 1.0, HISTOGRAM_BIN_WIDTH, &hurst_pool);
        let rescaled_log_histogram = Histogram::from_values(
            RESCALED_LOG_RANGE.0,
            RESCALED_LOG_RANGE.1,
            HISTOGRAM_BIN_WIDTH,
            &rescaled_pool,
        );
        let modes = mode_extract(&hurst_histogram, config.law.support().len())?;
        let ks_values: Vec<f64> = records.iter().map(|r| r.ks).collect();
        let ks_debiased_values: Vec<f64> = records.iter().map(|r| r.ks_debiased).collect();
        let sorted = sorted_copy(&ks_values);
        let sorted_deb = sorted_copy(&ks_debiased_values);
        let ks_band = bootstrap_median_band(
            &ks_values,
            BOOTSTRAP_RESAMPLES,
            &mut derive_stream(config.seed, (1 << 48) + ci as u64),
        );
        let ks_debiased_band = bootstrap_median_band(
            &ks_debiased_values,
            BOOTSTRAP_RESAMPLES,
            &mut derive_stream(config.seed, (1 << 48) + ci as u64),
        );
        let timing = TimingStats::from_seconds(records.iter().map(|r| r.seconds));
        ks_samples.push(KsSamples { entry: *entry, values: ks_values.clone() });
        ks_debiased_samples.push(KsSamples { entry: *entry, values: ks_debiased_values.clone() });
        configs.push(ConfigSummary {
            entry: *entry,
            octave_range: range,
            completed: records.len(),
            failures,
            hurst_histogram,
            rescaled_log_histogram,
            modes,
            ks_median: quantile(&sorted, 0.5),
            ks_iqr: (quantile(&sorted, 0.25), quantile(&sorted, 0.75)),
            ks_band,
            ks_values,
            ks_debiased_median: quantile(&sorted_deb, 0.5),
            ks_debiased_iqr: (quantile(&sorted_deb, 0.25), quantile(&sorted_deb, 0.75)),
            ks_debiased_band,
            ks_debiased_values,
            timing,
        });
        details.push(ConfigDetail { entry: *entry, records });
    }
    let trend = if ks_samples.len() >= 2 {
        Some(convergence_trend(&ks_samples, config.seed)?)
    } else {
        None
    };
    let trend_debiased = if ks_debiased_samples.len() >= 2 {
        Some(convergence_trend(&ks_debiased_samples, config.seed)?)
    } else {
        None
    };
    Ok(RunOutput {
        summary: RunSummary {
            format_version: crate::FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            family: config.family.clone(),
            weights: config.weights,
            law: config.law.clone(),
            mixing: config.mixing,
            replicates: config.replicates,
            target_atoms: target.atoms().to_vec(),
            configs,
            trend,
            trend_debiased,
        },
        details,
    })
}
