//! Wavelet random matrices, their rescaled logarithmic spectra, the
//! discrete limit law with atoms 2H+1, and multi-scale Hurst estimation.
//!
//! Scale bookkeeping: the pyramid is computed at unit initial scale, so a
//! total octave j0 corresponds to scale a = 2^{j0} with analysis octave 0.
//! The rescaled log spectrum divides by log a; the per-rank regression uses
//! base-2 logs because octaves are dyadic. Both conventions are recorded in
//! serialized output.

use serde::{Deserialize, Serialize};

use crate::eigen::{eigh, SymmetricMatrix};
use crate::synth::HurstLaw;
use crate::wavelet::WaveletPyramid;
use crate::{Error, Result};

/// Scale-a sample covariance of detail coefficients across the p
/// components: (1/n_aj) sum_k D(a, k) D(a, k)^T over border-free k.
#[derive(Debug, Clone)]
pub struct WaveletMatrix {
    octave: usize,
    scale: u64,
    matrix: SymmetricMatrix,
    n_aj: usize,
}

impl WaveletMatrix {
    pub fn octave(&self) -> usize {
        self.octave
    }

    /// Analyzed scale, 2^octave.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.order()
    }

    /// Number of coefficient columns averaged.
    pub fn n_aj(&self) -> usize {
        self.n_aj
    }
}

/// Builds the wavelet random matrix from the pyramid block at total octave
/// `octave_total`. Needs at least p coefficients there, else the matrix is
/// structurally rank deficient.
pub fn wavelet_matrix(pyramid: &WaveletPyramid, octave_total: usize) -> Result<WaveletMatrix> {
    let block = pyramid.detail(octave_total)?;
    let p = block.rows();
    let n_aj = block.cols();
    if n_aj < p {
        return Err(Error::Regime(format!(
            "octave {octave_total} has n_aj = {n_aj} border-free coefficients for p = {p} \
             components; the sampling regime (A4) requires p(n) < n/(a(n)2^j)"
        )));
    }
    let inv = 1.0 / n_aj as f64;
    let matrix = SymmetricMatrix::from_fn(p, |i, j| {
        let ri = block.row(i);
        let rj = block.row(j);
        inv * ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>()
    });
    Ok(WaveletMatrix { octave: octave_total, scale: 1u64 << octave_total, matrix, n_aj })
}

/// Eigenvalue logs rescaled by the log of the scale: log lambda_l / log a,
/// ascending in l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSpectrum {
    values: Vec<f64>,
    eigenvalues: Vec<f64>,
    scale: u64,
    octave: usize,
}

impl LogSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn octave(&self) -> usize {
        self.octave
    }
}

pub fn log_spectrum(w: &WaveletMatrix) -> Result<LogSpectrum> {
    if w.scale < 2 {
        return Err(Error::Domain(format!(
            "rescaled log spectrum needs scale >= 2, got {}",
            w.scale
        )));
    }
    let dec = eigh(&w.matrix)?;
    let log_a = (w.scale as f64).ln();
    let mut values = Vec::with_capacity(dec.eigenvalues.len());
    for (rank, &l) in dec.eigenvalues.iter().enumerate() {
        if !(l > 0.0) {
            return Err(Error::Regime(format!(
                "eigenvalue at rank {rank} is {l:.6e}, not positive: log spectrum undefined; \
                 this signals a violated sampling regime (A4), e.g. p too close to n/(a2^j)"
            )));
        }
        values.push(l.ln() / log_a);
    }
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    Ok(LogSpectrum { values, eigenvalues: dec.eigenvalues, scale: w.scale, octave: w.octave })
}

/// Discrete law of 2H+1 under a Hurst law: the weak limit of the rescaled
/// log spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLaw {
    atoms: Vec<f64>,
    masses: Vec<f64>,
}

impl TargetLaw {
    pub fn from_hurst_law(law: &HurstLaw) -> Self {
        TargetLaw {
            atoms: law.support().iter().map(|h| 2.0 * h + 1.0).collect(),
            masses: law.masses().to_vec(),
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

/// Right-continuous CDF of the atomic law at `v`.
pub fn target_cdf(law: &TargetLaw, v: f64) -> f64 {
    law.atoms
        .iter()
        .zip(&law.masses)
        .take_while(|(a, _)| **a <= v)
        .map(|(_, m)| m)
        .sum()
}

/// Exact Kolmogorov-Smirnov distance between the empirical law of the
/// rescaled log eigenvalues and the target atoms.
pub fn ks_distance(spec: &LogSpectrum, law: &TargetLaw) -> f64 {
    ks_statistic(spec.values(), law)
}

/// KS distance between the empirical law of any value sample and the target
/// atoms: the sup runs over every jump point of either CDF, evaluated from
/// both sides.
pub fn ks_statistic(values: &[f64], law: &TargetLaw) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p = sorted.len() as f64;
    let emp_at = |t: f64| sorted.partition_point(|v| *v <= t) as f64 / p;
    let emp_before = |t: f64| sorted.partition_point(|v| *v < t) as f64 / p;
    let tgt_at = |t: f64| target_cdf(law, t);
    let tgt_before = |t: f64| {
        law.atoms
            .iter()
            .zip(&law.masses)
            .take_while(|(a, _)| **a < t)
            .map(|(_, m)| m)
            .sum::<f64>()
    };
    let mut d = 0.0_f64;
    for t in sorted.iter().chain(law.atoms.iter()) {
        d = d.max((emp_at(*t) - tgt_at(*t)).abs());
        d = d.max((emp_before(*t) - tgt_before(*t)).abs());
    }
    d.min(1.0)
}

/// One (n, a, p) sampling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub n: usize,
    pub a: usize,
    pub p: usize,
}

/// Growth schedule of sampling configurations, checked against the joint
/// regime conditions (A4) at analysis octave j. Serializes as a bare list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegimeSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl RegimeSchedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Self {
        RegimeSchedule { entries }
    }

    /// Validates every entry and the cross-entry monotonicity:
    /// a <= n/2^j, p < n/(a 2^j), p <= c sqrt(n/a), and p a / n decreasing.
    pub fn validate(&self, octave: usize, c: f64) -> Result<()> {
        self.validate_at(&vec![octave; self.entries.len()], c)
    }

    /// Same gate with a per-entry analysis octave.
    pub fn validate_at(&self, octaves: &[usize], c: f64) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Regime("schedule has no entries".into()));
        }
        if octaves.len() != self.entries.len() {
            return Err(Error::Regime(format!(
                "{} octaves supplied for {} schedule entries",
                octaves.len(),
                self.entries.len()
            )));
        }
        let mut prev_ratio = f64::INFINITY;
        for (e, &octave) in self.entries.iter().zip(octaves) {
            let twoj = (1u64 << octave) as f64;
            let (n, a, p) = (e.n as f64, e.a as f64, e.p as f64);
            if !(a <= n / twoj) {
                return Err(Error::Regime(format!(
                    "schedule entry (n={}, a={}, p={}) violates a(n) <= n/2^j (A4) at octave {octave}",
                    e.n, e.a, e.p
                )));
            }
            if !(p < n / (a * twoj)) {
                return Err(Error::Regime(format!(
                    "schedule entry (n={}, a={}, p={}) violates p(n) < n/(a(n)2^j) (A4)",
                    e.n, e.a, e.p
                )));
            }
            if !(p <= c * (n / a).sqrt()) {
                return Err(Error::Regime(format!(
                    "schedule entry (n={}, a={}, p={}) violates p(n) <= c sqrt(n/a(n)) (A4) with c = {c}",
                    e.n, e.a, e.p
                )));
            }
            let ratio = p * a / n;
            if !(ratio < prev_ratio) {
                return Err(Error::Regime(format!(
                    "schedule ratio p a / n must decrease (A4): got {ratio} after {prev_ratio}"
                )));
            }
            prev_ratio = ratio;
        }
        Ok(())
    }
}

/// Eigenvalues of one scale, input to the per-rank regression.
#[derive(Debug, Clone)]
pub struct ScaleSpectrum {
    pub octave: usize,
    /// coefficient count behind the estimate, used as regression weight
    pub count: usize,
    /// ascending
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    Equal,
    /// w_j proportional to the coefficient count n_j at each octave
    CountProportional,
}

/// Per-rank weighted least squares of log2 lambda_l on the octave; the
/// estimate is (slope - 1)/2 per rank, returned ascending.
pub fn hurst_from_spectra(spectra: &[ScaleSpectrum], weights: WeightMode) -> Result<Vec<f64>> {
    if spectra.len() < 2 {
        return Err(Error::Domain(
            "Hurst regression needs at least two octaves".into(),
        ));
    }
    let p = spectra[0].eigenvalues.len();
    for s in spectra {
        if s.eigenvalues.len() != p {
            return Err(Error::Domain(format!(
                "octave {} has {} eigenvalues, expected {p}",
                s.octave,
                s.eigenvalues.len()
            )));
        }
    }
    let w: Vec<f64> = spectra
        .iter()
        .map(|s| match weights {
            WeightMode::Equal => 1.0,
            WeightMode::CountProportional => s.count as f64,
        })
        .collect();
    let wsum: f64 = w.iter().sum();
    let xbar: f64 = spectra.iter().zip(&w).map(|(s, w)| w * s.octave as f64).sum::<f64>() / wsum;
    let sxx: f64 = spectra
        .iter()
        .zip(&w)
        .map(|(s, w)| {
            let d = s.octave as f64 - xbar;
            w * d * d
        })
        .sum();
    if sxx <= 0.0 {
        return Err(Error::Domain(
            "Hurst regression is singular: octaves do not vary".into(),
        ));
    }
    let mut out = Vec::with_capacity(p);
    for rank in 0..p {
        let mut sxy = 0.0;
        let mut ybar = 0.0;
        for (s, wj) in spectra.iter().zip(&w) {
            let l = s.eigenvalues[rank];
            if !(l > 0.0) {
                return Err(Error::Regime(format!(
                    "eigenvalue at rank {rank}, octave {} is {l:.6e}, not positive",
                    s.octave
                )));
            }
            ybar += wj * l.log2();
        }
        ybar /= wsum;
        for (s, wj) in spectra.iter().zip(&w) {
            sxy += wj * (s.octave as f64 - xbar) * (s.eigenvalues[rank].log2() - ybar);
        }
        out.push((sxy / sxx - 1.0) / 2.0);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Multi-scale Hurst estimates from one pyramid: wavelet matrices at every
/// octave in `[j1, j2]`, eigenvalues per scale, then the per-rank weighted
/// regression.
pub fn multiscale_hurst(
    pyramid: &WaveletPyramid,
    octave_range: (usize, usize),
    weights: WeightMode,
) -> Result<Vec<f64>> {
    let (j1, j2) = octave_range;
    if j2 <= j1 {
        return Err(Error::Domain(format!(
            "octave range [{j1}, {j2}] cannot support a regression"
        )));
    }
    let mut spectra = Vec::with_capacity(j2 - j1 + 1);
    for j in j1..=j2 {
        let w = wavelet_matrix(pyramid, j)?;
        let dec = eigh(w.matrix())?;
        spectra.push(ScaleSpectrum {
            octave: j,
            count: w.n_aj(),
            eigenvalues: dec.eigenvalues,
        });
    }
    hurst_from_spectra(&spectra, weights)
}
