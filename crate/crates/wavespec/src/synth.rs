//! Exact synthesis of fractional Gaussian noise and fractional Brownian
//! motion, mixed-Hurst ensembles, and the coordinate-mixing matrix.
//!
//! Paths are generated by circulant embedding of the fGn covariance
//! (Davies-Harte), which is exact in distribution and O(n log n). A path of
//! Hurst exponent H is the cumulative sum of one fGn draw; the observed
//! ensemble is Y = P X for an invertible mixing matrix P whose singular
//! values stay inside a fixed band.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::eigen::singular_values;
use crate::mat::Mat;
use crate::{Error, Result};

/// Discrete probability law for the Hurst exponent: support points H in
/// (0,1) with strictly positive masses. Model condition A1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawSpec", into = "LawSpec")]
pub struct HurstLaw {
    support: Vec<f64>,
    masses: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LawSpec {
    support: Vec<f64>,
    masses: Vec<f64>,
}

impl TryFrom<LawSpec> for HurstLaw {
    type Error = Error;
    fn try_from(raw: LawSpec) -> Result<Self> {
        HurstLaw::new(raw.support, raw.masses)
    }
}

impl From<HurstLaw> for LawSpec {
    fn from(law: HurstLaw) -> LawSpec {
        LawSpec { support: law.support, masses: law.masses }
    }
}

const MASS_SUM_TOL: f64 = 1e-12;

impl HurstLaw {
    pub fn new(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != masses.len() {
            return Err(Error::Domain(format!(
                "Hurst law (A1) needs matching nonempty support/mass lists, got {} and {}",
                support.len(),
                masses.len()
            )));
        }
        for &h in &support {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::Domain(format!(
                    "Hurst law (A1) requires support strictly inside (0,1), got {h}"
                )));
            }
        }
        for w in support.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Domain(format!(
                    "Hurst law (A1) support must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for &m in &masses {
            if !(m > 0.0) {
                return Err(Error::Domain(format!(
                    "Hurst law (A1) masses must be strictly positive, got {m}"
                )));
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::Domain(format!(
                "Hurst law (A1) masses must sum to 1 within {MASS_SUM_TOL}, got {total}"
            )));
        }
        Ok(HurstLaw { support, masses })
    }

    /// Equal masses on the given support points.
    pub fn uniform(support: Vec<f64>) -> Result<Self> {
        let r = support.len().max(1);
        HurstLaw::new(support, vec![1.0 / r as f64; r])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Smallest support point; the regime conditions depend on it.
    pub fn min_hurst(&self) -> f64 {
        self.support[0]
    }

    pub fn max_hurst(&self) -> f64 {
        *self.support.last().unwrap()
    }

    /// One inverse-CDF draw.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (h, m) in self.support.iter().zip(&self.masses) {
            acc += m;
            if u < acc {
                return *h;
            }
        }
        *self.support.last().unwrap()
    }
}

/// Hurst exponents drawn for the p rows of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstAssignment {
    pub values: Vec<f64>,
}

impl HurstAssignment {
    pub fn draw(law: &HurstLaw, p: usize, rng: &mut impl Rng) -> Self {
        HurstAssignment { values: (0..p).map(|_| law.sample(rng)).collect() }
    }
}

/// How the mixing matrix P is realized. Identity keeps observations equal to
/// the latent paths; `RandomConditioned` draws P = Q D Q' with Haar
/// orthogonal factors and singular values uniform in
/// [1/condition_bound, condition_bound], which keeps the singular values
/// log-negligible against any growing scale (condition A5).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MixingSpec {
    Identity,
    RandomConditioned { condition_bound: f64 },
}

impl MixingSpec {
    pub fn kind(&self) -> String {
        self.to_string()
    }

    fn validate(&self) -> Result<()> {
        if let MixingSpec::RandomConditioned { condition_bound } = self {
            if !(*condition_bound >= 1.0) {
                return Err(Error::Domain(format!(
                    "mixing bound (A5) must be >= 1 so that 1/bound <= bound, got {condition_bound}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MixingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixingSpec::Identity => write!(f, "identity"),
            MixingSpec::RandomConditioned { condition_bound } => write!(f, "cond:{condition_bound}"),
        }
    }
}

impl FromStr for MixingSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(MixingSpec::Identity);
        }
        if let Some(b) = s.strip_prefix("cond:") {
            let bound: f64 = b
                .parse()
                .map_err(|_| Error::Config(format!("bad mixing bound {b:?}")))?;
            let spec = MixingSpec::RandomConditioned { condition_bound: bound };
            spec.validate()?;
            return Ok(spec);
        }
        Err(Error::Config(format!(
            "unknown mixing {s:?}; expected \"identity\" or \"cond:<bound>\""
        )))
    }
}

impl TryFrom<String> for MixingSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MixingSpec> for String {
    fn from(m: MixingSpec) -> String {
        m.to_string()
    }
}

/// p x n matrix of component processes, rows indexed by component and
/// columns by time 1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    mat: Mat,
}

impl PathMatrix {
    pub fn new(mat: Mat) -> Result<Self> {
        if mat.rows() < 1 || mat.cols() < 2 {
            return Err(Error::Domain(format!(
                "path matrix needs p >= 1 and n >= 2, got {} x {}",
                mat.rows(),
                mat.cols()
            )));
        }
        if !mat.data().iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("path matrix has non-finite entries".into()));
        }
        Ok(PathMatrix { mat })
    }

    pub fn p(&self) -> usize {
        self.mat.rows()
    }

    pub fn n(&self) -> usize {
        self.mat.cols()
    }

    pub fn row(&self, l: usize) -> &[f64] {
        self.mat.row(l)
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }
}

/// Full generative configuration of one ensemble draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub p: usize,
    pub law: HurstLaw,
    pub mixing: MixingSpec,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("sample size n must be >= 2, got {}", self.n)));
        }
        if self.p < 1 {
            return Err(Error::Domain("dimension p must be >= 1".into()));
        }
        self.mixing.validate()
    }
}

/// One synthesized ensemble: latent paths X, observations Y = P X, and the
/// realized pieces needed to audit them.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub assignment: HurstAssignment,
    pub latent: PathMatrix,
    pub observed: PathMatrix,
    pub mixing: Mat,
}

/// Autocovariance of unit-variance fractional Gaussian noise,
/// gamma_H(k) = ((|k|+1)^{2H} - 2|k|^{2H} + (|k|-1|)^{2H}) / 2.
pub fn fgn_autocovariance(h: f64, k: i64) -> Result<f64> {
    check_hurst(h)?;
    let kf = (k.abs()) as f64;
    let e = 2.0 * h;
    Ok(0.5 * ((kf + 1.0).powf(e) - 2.0 * kf.powf(e) + (kf - 1.0).abs().powf(e)))
}

fn check_hurst(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!(
            "Hurst exponent must lie strictly inside (0,1) (A1), got {h}"
        )));
    }
    Ok(())
}

// Negative circulant eigenvalues inside this relative slack of zero are
// floating-point noise and get clamped; anything worse means the embedding
// is genuinely indefinite and synthesis must stop.
const EMBEDDING_SLACK: f64 = 1e-8;

fn validate_embedding(eigs: &mut [f64]) -> Result<()> {
    let max = eigs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !(max > 0.0) {
        return Err(Error::Synthesis(format!(
            "circulant embedding degenerate: max eigenvalue {max}"
        )));
    }
    let floor = -EMBEDDING_SLACK * max;
    let worst = eigs.iter().fold(0.0_f64, |a, &b| a.min(b));
    if worst < floor {
        return Err(Error::Synthesis(format!(
            "circulant embedding not nonnegative definite: worst eigenvalue {worst:.6e} \
             below -{EMBEDDING_SLACK:e} * max ({max:.6e})"
        )));
    }
    for e in eigs.iter_mut() {
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    Ok(())
}

/// Reusable fGn generator for one (H, n): the circulant spectrum and FFT
/// plan are computed once, each `sample` costs one inverse FFT.
pub struct FgnSampler {
    n: usize,
    m: usize,
    // sqrt(lambda_k / m), so the inverse FFT needs no extra normalization
    scaled_roots: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FgnSampler {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        check_hurst(h)?;
        if n < 2 {
            return Err(Error::Domain(format!("fGn length must be >= 2, got {n}")));
        }
        let m = (2 * (n - 1)).next_power_of_two().max(2);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let mut buf: Vec<Complex<f64>> = (0..m)
            .map(|k| {
                let lag = k.min(m - k) as i64;
                Complex::new(fgn_autocovariance(h, lag).unwrap(), 0.0)
            })
            .collect();
        forward.process(&mut buf);
        let mut eigs: Vec<f64> = buf.iter().map(|z| z.re).collect();
        // first row is even-symmetric, so the spectrum is real
        debug_assert!(buf.iter().all(|z| z.im.abs() < 1e-9 * m as f64));
        validate_embedding(&mut eigs)?;
        let scaled_roots = eigs.iter().map(|&l| (l / m as f64).sqrt()).collect();
        Ok(FgnSampler {
            n,
            m,
            scaled_roots,
            fft: planner.plan_fft_inverse(m),
        })
    }

    /// One exact fGn draw of length n. Consumes exactly m normals from `rng`
    /// in a fixed order, so draws are reproducible per stream.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let m = self.m;
        let half = m / 2;
        let mut z = vec![Complex::new(0.0, 0.0); m];
        let g0: f64 = rng.sample(StandardNormal);
        z[0] = Complex::new(self.scaled_roots[0] * g0, 0.0);
        const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
        for k in 1..half {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            let w = self.scaled_roots[k] * INV_SQRT2;
            z[k] = Complex::new(w * u, w * v);
            z[m - k] = z[k].conj();
        }
        let gh: f64 = rng.sample(StandardNormal);
        z[half] = Complex::new(self.scaled_roots[half] * gh, 0.0);
        self.fft.process(&mut z);
        z[..self.n].iter().map(|c| c.re).collect()
    }
}

/// One exact fGn draw; prefer [`FgnSampler`] when drawing many paths.
pub fn synth_fgn(h: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    Ok(FgnSampler::new(h, n)?.sample(rng))
}

/// Fractional Brownian motion at times 1..n, the running sum of exact fGn.
/// B(0) = 0 by convention and is not stored; Var B(t) = t^{2H}.
pub fn synth_fbm(h: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let mut path = synth_fgn(h, n, rng)?;
    let mut acc = 0.0;
    for x in path.iter_mut() {
        acc += *x;
        *x = acc;
    }
    Ok(path)
}

/// Realizes the mixing matrix for dimension p. Identity stays exact;
/// the random variant returns Q D Q' with independently Haar-distributed
/// orthogonal factors, and its singular values are checked against the bound
/// before returning.
pub fn realize_mixing(spec: &MixingSpec, p: usize, rng: &mut impl Rng) -> Result<Mat> {
    if p < 1 {
        return Err(Error::Domain("dimension p must be >= 1".into()));
    }
    spec.validate()?;
    match spec {
        MixingSpec::Identity => Ok(Mat::identity(p)),
        MixingSpec::RandomConditioned { condition_bound: b } => {
            let q1 = haar_orthogonal(p, rng);
            let q2 = haar_orthogonal(p, rng);
            let lo = 1.0 / b;
            let d: Vec<f64> = (0..p).map(|_| lo + (b - lo) * rng.gen::<f64>()).collect();
            let mut q1d = q1;
            for i in 0..p {
                let row = q1d.row_mut(i);
                for (j, x) in row.iter_mut().enumerate() {
                    *x *= d[j];
                }
            }
            let pmat = q1d.matmul(&q2.transpose());
            let sv = singular_values(&pmat)?;
            let slack = 1e-9 * b;
            if sv[0] < lo - slack || sv[p - 1] > b + slack {
                return Err(Error::Solver(format!(
                    "mixing matrix singular values [{:.12}, {:.12}] escaped [{lo}, {b}] (A5)",
                    sv[0],
                    sv[p - 1]
                )));
            }
            Ok(pmat)
        }
    }
}

// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
// the R-diagonal sign fix.
fn haar_orthogonal(p: usize, rng: &mut impl Rng) -> Mat {
    let a = Mat::from_fn(p, p, |_, _| rng.sample(StandardNormal));
    let (q, r_diag) = householder_qr(a);
    let mut q = q;
    for j in 0..p {
        if r_diag[j] < 0.0 {
            for i in 0..p {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    q
}

// Householder QR returning the explicit Q and the diagonal of R.
fn householder_qr(mut a: Mat) -> (Mat, Vec<f64>) {
    let p = a.rows();
    let mut q = Mat::identity(p);
    let mut v = vec![0.0; p];
    for k in 0..p {
        let mut norm = 0.0;
        for i in k..p {
            norm += a.get(i, k) * a.get(i, k);
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let akk = a.get(k, k);
        let alpha = if akk >= 0.0 { -norm } else { norm };
        let mut vnorm2 = 0.0;
        for i in k..p {
            v[i] = a.get(i, k) - if i == k { alpha } else { 0.0 };
            vnorm2 += v[i] * v[i];
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // apply H = I - beta v v^T on the left of A
        for j in k..p {
            let mut dot = 0.0;
            for i in k..p {
                dot += v[i] * a.get(i, j);
            }
            let dot = beta * dot;
            for i in k..p {
                a.set(i, j, a.get(i, j) - dot * v[i]);
            }
        }
        // accumulate Q <- Q H
        for i in 0..p {
            let mut dot = 0.0;
            for l in k..p {
                dot += q.get(i, l) * v[l];
            }
            let dot = beta * dot;
            for l in k..p {
                q.set(i, l, q.get(i, l) - dot * v[l]);
            }
        }
    }
    let r_diag = (0..p).map(|k| a.get(k, k)).collect();
    (q, r_diag)
}

/// Draws a full ensemble: Hurst assignment, latent fBm rows, mixing matrix,
/// and observations Y = P X. With identity mixing the observed matrix is
/// bit-identical to the latent one.
pub fn synth_ensemble(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<Ensemble> {
    spec.validate()?;
    let assignment = HurstAssignment::draw(&spec.law, spec.p, rng);
    let mixing = realize_mixing(&spec.mixing, spec.p, rng)?;
    let mut samplers: HashMap<u64, FgnSampler> = HashMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(spec.p);
    for &h in &assignment.values {
        let sampler = match samplers.entry(h.to_bits()) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(FgnSampler::new(h, spec.n)?),
        };
        let mut path = sampler.sample(rng);
        let mut acc = 0.0;
        for x in path.iter_mut() {
            acc += *x;
            *x = acc;
        }
        rows.push(path);
    }
    let latent = PathMatrix::new(Mat::from_rows(&rows))?;
    let observed = if matches!(spec.mixing, MixingSpec::Identity) {
        latent.clone()
    } else {
        PathMatrix::new(mixing.matmul(latent.mat()))?
    };
    Ok(Ensemble { assignment, latent, observed, mixing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn autocovariance_known_values() {
        assert_eq!(fgn_autocovariance(0.5, 0).unwrap(), 1.0);
        assert_eq!(fgn_autocovariance(0.5, 3).unwrap(), 0.0);
        // 0.5 * (2^1.6 - 2), frozen from a high-precision evaluation
        let g = fgn_autocovariance(0.8, 1).unwrap();
        assert!((g - 0.515716566510398).abs() < 1e-14, "{g}");
        // antipersistent case is negative at lag 1
        assert!(fgn_autocovariance(0.2, 1).unwrap() < 0.0);
    }

    #[test]
    fn autocovariance_is_even_and_unit_at_zero() {
        for &h in &[0.1, 0.2, 0.5, 0.8, 0.95] {
            assert_eq!(fgn_autocovariance(h, 0).unwrap(), 1.0);
            for k in 1..30 {
                assert_eq!(
                    fgn_autocovariance(h, k).unwrap(),
                    fgn_autocovariance(h, -k).unwrap()
                );
            }
        }
    }

    #[test]
    fn hurst_domain_is_enforced() {
        for h in [0.0, 1.0, -0.3, 1.7, f64::NAN] {
            assert!(fgn_autocovariance(h, 1).is_err(), "H = {h}");
            assert!(FgnSampler::new(h, 16).is_err());
        }
    }

    #[test]
    fn law_validation_names_a1() {
        let err = HurstLaw::new(vec![0.2, 1.2], vec![0.5, 0.5]).unwrap_err();
        assert!(err.to_string().contains("A1"), "{err}");
        assert!(HurstLaw::new(vec![0.5, 0.2], vec![0.5, 0.5]).is_err()); // not increasing
        assert!(HurstLaw::new(vec![0.2, 0.5], vec![0.6, 0.6]).is_err()); // sum != 1
        assert!(HurstLaw::new(vec![0.2, 0.5], vec![1.0, 0.0]).is_err()); // zero mass
        assert!(HurstLaw::uniform(vec![0.2, 0.5, 0.8]).is_ok());
    }

    #[test]
    fn law_sampling_matches_masses() {
        let law = HurstLaw::uniform(vec![0.2, 0.5, 0.8]).unwrap();
        let mut rng = derive_stream(0x5A11, 0);
        let draws = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            let h = law.sample(&mut rng);
            let idx = law.support().iter().position(|&s| s == h).expect("draw in support");
            counts[idx] += 1;
        }
        let se = ((1.0 / 3.0) * (2.0 / 3.0) / draws as f64).sqrt();
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 3.0).abs() < 3.0 * se, "frequency {freq}");
        }
    }

    #[test]
    fn embedding_validation_clamps_or_rejects() {
        let mut ok = vec![2.0, 1.0, -1.5e-8]; // within 1e-8 * max slack
        validate_embedding(&mut ok).unwrap();
        assert_eq!(ok[2], 0.0);
        let mut bad = vec![2.0, 1.0, -1.0e-7];
        let err = validate_embedding(&mut bad).unwrap_err();
        assert!(err.to_string().contains("eigenvalue"), "{err}");
    }

    #[test]
    fn fgn_sample_covariance_is_exact_within_mc_error() {
        // n = 16, 20k replicates, all entries of the covariance within 4 SE
        let n = 16;
        let reps = 20_000;
        for (stream, h) in [(1u64, 0.2f64), (2, 0.8)] {
            let sampler = FgnSampler::new(h, n).unwrap();
            let mut rng = derive_stream(0xF9A, stream);
            let mut acc = vec![0.0; n * n];
            for _ in 0..reps {
                let g = sampler.sample(&mut rng);
                for i in 0..n {
                    for j in 0..n {
                        acc[i * n + j] += g[i] * g[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let mean = acc[i * n + j] / reps as f64;
                    let gij = fgn_autocovariance(h, (i as i64) - (j as i64)).unwrap();
                    // Var(g_i g_j) = 1 + gamma_ij^2 for unit-variance rows
                    let se = ((1.0 + gij * gij) / reps as f64).sqrt();
                    assert!(
                        (mean - gij).abs() < 4.0 * se,
                        "H={h} ({i},{j}): {mean} vs {gij}"
                    );
                }
            }
        }
    }

    #[test]
    fn fbm_self_similarity_variance() {
        // Var(B(n)) = n^{2H}: sample variance of B(n)/n^H near 1
        let n = 64;
        let reps = 10_000;
        for (stream, h) in [(5u64, 0.3f64), (6, 0.7)] {
            let mut rng = derive_stream(0xFB3, stream);
            let sampler = FgnSampler::new(h, n).unwrap();
            let mut sum2 = 0.0;
            for _ in 0..reps {
                let g = sampler.sample(&mut rng);
                let b: f64 = g.iter().sum();
                let z = b / (n as f64).powf(h);
                sum2 += z * z;
            }
            let var = sum2 / reps as f64;
            let tol = 3.0 * (2.0 / reps as f64).sqrt();
            assert!((var - 1.0).abs() < tol, "H={h}: var {var}");
        }
    }

    #[test]
    fn fbm_increment_autocovariance_tracks_closed_form() {
        let n = 4096;
        let reps = 50;
        for (stream, h) in [(7u64, 0.5f64), (8, 0.8)] {
            let mut rng = derive_stream(0xFB4, stream);
            let sampler = FgnSampler::new(h, n).unwrap();
            for lag in 1..=5usize {
                let mut per_rep = Vec::with_capacity(reps);
                for _ in 0..reps {
                    let g = sampler.sample(&mut rng);
                    let m = n - lag;
                    let c: f64 = (0..m).map(|t| g[t] * g[t + lag]).sum::<f64>() / m as f64;
                    per_rep.push(c);
                }
                let mean: f64 = per_rep.iter().sum::<f64>() / reps as f64;
                let var: f64 = per_rep.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>()
                    / (reps as f64 - 1.0);
                let se = (var / reps as f64).sqrt();
                let want = fgn_autocovariance(h, lag as i64).unwrap();
                assert!(
                    (mean - want).abs() < 3.0 * se + 1e-12,
                    "H={h} lag={lag}: {mean} vs {want} (se {se})"
                );
            }
        }
    }

    #[test]
    fn identity_mixing_returns_latent_bits() {
        let spec = EnsembleSpec {
            n: 256,
            p: 4,
            law: HurstLaw::uniform(vec![0.2, 0.5, 0.8]).unwrap(),
            mixing: MixingSpec::Identity,
            seed: 0,
        };
        let mut rng = derive_stream(3, 0);
        let ens = synth_ensemble(&spec, &mut rng).unwrap();
        assert_eq!(ens.latent, ens.observed);
        assert_eq!(ens.mixing, Mat::identity(4));
        for h in &ens.assignment.values {
            assert!(spec.law.support().contains(h));
        }
    }

    #[test]
    fn ensemble_is_reproducible_per_stream() {
        let spec = EnsembleSpec {
            n: 128,
            p: 3,
            law: HurstLaw::uniform(vec![0.3, 0.6]).unwrap(),
            mixing: MixingSpec::RandomConditioned { condition_bound: 2.0 },
            seed: 0,
        };
        let a = synth_ensemble(&spec, &mut derive_stream(9, 4)).unwrap();
        let b = synth_ensemble(&spec, &mut derive_stream(9, 4)).unwrap();
        assert_eq!(a.observed, b.observed);
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn mixing_singular_values_respect_bound() {
        let mut rng = derive_stream(11, 0);
        let spec = MixingSpec::RandomConditioned { condition_bound: 2.0 };
        let p = 8;
        let m = realize_mixing(&spec, p, &mut rng).unwrap();
        let sv = singular_values(&m).unwrap();
        assert!(sv[0] >= 0.5 - 1e-9 && sv[p - 1] <= 2.0 + 1e-9, "{sv:?}");
        // condition number bounded by bound^2
        assert!(sv[p - 1] / sv[0] <= 4.0 + 1e-6);
        assert_eq!(realize_mixing(&MixingSpec::Identity, 5, &mut rng).unwrap(), Mat::identity(5));
    }

    #[test]
    fn haar_factor_is_orthogonal() {
        let mut rng = derive_stream(12, 0);
        let q = haar_orthogonal(16, &mut rng);
        let qtq = q.transpose().matmul(&q);
        assert!(qtq.max_abs_diff(&Mat::identity(16)) < 1e-12);
    }

    #[test]
    fn mixing_parse_round_trip() {
        assert_eq!("identity".parse::<MixingSpec>().unwrap(), MixingSpec::Identity);
        assert_eq!(
            "cond:2".parse::<MixingSpec>().unwrap(),
            MixingSpec::RandomConditioned { condition_bound: 2.0 }
        );
        assert!("cond:0.5".parse::<MixingSpec>().is_err());
        assert!("banana".parse::<MixingSpec>().is_err());
    }

    #[test]
    fn spec_validation_rejects_degenerate_sizes() {
        let law = HurstLaw::uniform(vec![0.5]).unwrap();
        let bad_n = EnsembleSpec { n: 1, p: 2, law: law.clone(), mixing: MixingSpec::Identity, seed: 0 };
        assert!(bad_n.validate().is_err());
        let bad_p = EnsembleSpec { n: 16, p: 0, law, mixing: MixingSpec::Identity, seed: 0 };
        assert!(bad_p.validate().is_err());
    }
}
