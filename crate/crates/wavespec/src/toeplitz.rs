//! Toeplitz matrices generated by spectral densities, eigenvalue bounds of
//! the generator (inf/sup of the density), and the stationary covariance
//! matrix of fixed-octave wavelet coefficients with its symmetric PSD
//! square root.
//!
//! Convention: a density generator f produces symbol values
//! tau(l) = (1/2pi) int_{-pi}^{pi} f(x) e^{-ilx} dx, so a covariance matrix
//! whose entries are the plain integrals int e^{ilx} g(x) dx is the Toeplitz
//! matrix generated by 2 pi g. Densities are taken even in x; odd parts
//! integrate out against the cosine.

use std::sync::Arc;

use crate::eigen::{eigh, SymmetricMatrix};
use crate::mat::Mat;
use crate::quad::gauss_legendre;
use crate::wavelet::{wavelet_autocovariance, WaveletFamily};
use crate::{Error, Result};

const QUAD_NODES: usize = 2048;
const MIN_BOUND_GRID: usize = 4096;

// Empirical absolute-summability guard for symbols computed from a density:
// past the first few lags they must decay at least like (1+|l|)^{-3/2}.
// Every density in scope decays polynomially faster; a violation signals a
// generator outside the summable (Wiener) class.
const DECAY_CONST: f64 = 50.0;
const DECAY_SKIP: usize = 8;

/// How a Toeplitz matrix is generated: an explicit symmetric symbol
/// tau(0), tau(1), ... or a density on [-pi, pi].
#[derive(Clone)]
pub enum ToeplitzGenerator {
    Symbol(Vec<f64>),
    Density(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct ToeplitzSpec {
    pub generator: ToeplitzGenerator,
    pub size: usize,
}

impl ToeplitzSpec {
    pub fn from_symbol(symbol: Vec<f64>, size: usize) -> Result<Self> {
        if size < 1 {
            return Err(Error::Domain("Toeplitz size must be >= 1".into()));
        }
        if symbol.is_empty() {
            return Err(Error::Domain("symbol sequence must be nonempty".into()));
        }
        Ok(ToeplitzSpec { generator: ToeplitzGenerator::Symbol(symbol), size })
    }

    pub fn from_density(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        size: usize,
    ) -> Result<Self> {
        if size < 1 {
            return Err(Error::Domain("Toeplitz size must be >= 1".into()));
        }
        Ok(ToeplitzSpec { generator: ToeplitzGenerator::Density(Arc::new(f)), size })
    }
}

/// Builds the size x size symmetric Toeplitz matrix with entry
/// (i, j) = tau(|i - j|). Symbols beyond the provided sequence are zero;
/// density generators are integrated lag by lag on the Gauss-Legendre rule.
pub fn build_toeplitz(spec: &ToeplitzSpec) -> Result<SymmetricMatrix> {
    let m = spec.size;
    let tau = match &spec.generator {
        ToeplitzGenerator::Symbol(symbol) => {
            let mut tau = vec![0.0; m];
            for (l, &v) in symbol.iter().take(m).enumerate() {
                tau[l] = v;
            }
            tau
        }
        ToeplitzGenerator::Density(f) => {
            let (nodes, weights) =
                gauss_legendre(QUAD_NODES, -std::f64::consts::PI, std::f64::consts::PI);
            let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::Evaluation(format!(
                    "density generator produced non-finite value {bad}"
                )));
            }
            let tau: Vec<f64> = (0..m)
                .map(|l| {
                    let lf = l as f64;
                    nodes
                        .iter()
                        .zip(&weights)
                        .zip(&values)
                        .map(|((x, w), v)| w * v * (lf * x).cos())
                        .sum::<f64>()
                        / (2.0 * std::f64::consts::PI)
                })
                .collect();
            check_symbol_decay(&tau)?;
            tau
        }
    };
    Ok(SymmetricMatrix::from_fn(m, |i, j| tau[j - i]))
}

fn check_symbol_decay(tau: &[f64]) -> Result<()> {
    let scale = tau[0].abs();
    if scale == 0.0 {
        return Ok(());
    }
    for (l, &v) in tau.iter().enumerate().skip(DECAY_SKIP) {
        let bound = DECAY_CONST * scale / (1.0 + l as f64).powf(1.5);
        if v.abs() > bound {
            return Err(Error::Evaluation(format!(
                "symbol decay check failed at lag {l}: |tau| = {:.6e} exceeds \
                 {bound:.6e}; generator does not look absolutely summable",
                v.abs()
            )));
        }
    }
    Ok(())
}

/// Infimum and supremum of the density on a uniform grid of at least
/// `grid` (and never fewer than 4096) midpoints of [-pi, pi]. For the
/// continuous densities in scope these bracket every Toeplitz eigenvalue.
pub fn gray_bounds(spec: &ToeplitzSpec, grid: usize) -> Result<(f64, f64)> {
    let f = match &spec.generator {
        ToeplitzGenerator::Density(f) => f,
        ToeplitzGenerator::Symbol(_) => {
            return Err(Error::Domain(
                "eigenvalue bounds need a density generator, not an explicit symbol".into(),
            ))
        }
    };
    let n = grid.max(MIN_BOUND_GRID);
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let x = -std::f64::consts::PI + (i as f64 + 0.5) * step;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "density generator produced non-finite value at x = {x}"
            )));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Stationary covariance of `size` consecutive octave-j wavelet
/// coefficients of fBm with exponent `hurst`, with its symmetric PSD
/// square root.
pub struct ConditionalCovariance {
    pub hurst: f64,
    pub octave: usize,
    pub size: usize,
    pub sigma: SymmetricMatrix,
    pub root: Mat,
}

const RANK_FLOOR: f64 = 1e-12;

pub fn conditional_covariance(
    hurst: f64,
    octave: usize,
    size: usize,
    family: &WaveletFamily,
) -> Result<ConditionalCovariance> {
    if size < 1 {
        return Err(Error::Domain("covariance size must be >= 1".into()));
    }
    let mut lags = Vec::with_capacity(size);
    for l in 0..size {
        lags.push(wavelet_autocovariance(hurst, octave, l as i64, family)?);
    }
    let sigma = SymmetricMatrix::from_fn(size, |i, j| lags[j - i]);
    let dec = eigh(&sigma)?;
    let max = dec.eigenvalues[size - 1];
    let min = dec.eigenvalues[0];
    if !(min > RANK_FLOOR * max.max(0.0)) {
        return Err(Error::Solver(format!(
            "covariance of {size} octave-{octave} coefficients at H = {hurst} is rank \
             deficient: eigenvalue {min:.6e} against maximum {max:.6e}; expected full rank"
        )));
    }
    let root = dec.spectral_map(f64::sqrt);
    Ok(ConditionalCovariance { hurst, octave, size, sigma, root })
}

impl ConditionalCovariance {
    /// Applies the square root to a vector: z -> Gamma z, turning iid
    /// standard normals into one stationary coefficient block.
    pub fn correlate(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.size);
        (0..self.size)
            .map(|i| {
                let row = self.root.row(i);
                row.iter().zip(z).map(|(r, zv)| r * zv).sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn explicit_symbol_places_diagonals() {
        let spec = ToeplitzSpec::from_symbol(vec![2.0, 1.0], 3).unwrap();
        let t = build_toeplitz(&spec).unwrap().to_dense();
        let want = Mat::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ]);
        assert_eq!(t, want);
    }

    #[test]
    fn constant_density_gives_scaled_identity() {
        let spec = ToeplitzSpec::from_density(|_| 3.0, 5).unwrap();
        let t = build_toeplitz(&spec).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 3.0 } else { 0.0 };
                assert!((t.get(i, j) - want).abs() < 1e-12);
            }
        }
        assert_eq!(gray_bounds(&spec, 0).unwrap(), (3.0, 3.0));
    }

    #[test]
    fn shifted_cosine_density_bounds() {
        let spec = ToeplitzSpec::from_density(|x| 2.0 + x.cos(), 4).unwrap();
        let (lo, hi) = gray_bounds(&spec, 1 << 14).unwrap();
        assert!((lo - 1.0).abs() < 1e-6, "{lo}");
        assert!((hi - 3.0).abs() < 1e-6, "{hi}");
        // tau(0) = 2, tau(1) = 1/2, tau(2) = 0
        let t = build_toeplitz(&spec).unwrap();
        assert!((t.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((t.get(0, 1) - 0.5).abs() < 1e-12);
        assert!(t.get(0, 3).abs() < 1e-12);
    }

    #[test]
    fn symbol_form_is_rejected_for_bounds() {
        let spec = ToeplitzSpec::from_symbol(vec![1.0], 2).unwrap();
        assert!(gray_bounds(&spec, 4096).is_err());
    }

    #[test]
    fn density_route_matches_coefficient_autocovariance() {
        // two quadrature paths to the same numbers: the covariance integral
        // per lag, and the symbol integral of the 2pi-scaled density
        let fam = WaveletFamily::daubechies(2).unwrap();
        let (h, j, m) = (0.5, 0, 12);
        let famc = fam.clone();
        let spec = ToeplitzSpec::from_density(
            move |x| 2.0 * std::f64::consts::PI * crate::wavelet::wavelet_spectral_density(h, x, j, &famc).unwrap(),
            m,
        )
        .unwrap();
        let t = build_toeplitz(&spec).unwrap();
        for l in 0..m {
            let want = wavelet_autocovariance(h, j, l as i64, &fam).unwrap();
            assert!(
                (t.get(0, l) - want).abs() < 1e-8,
                "lag {l}: {} vs {want}",
                t.get(0, l)
            );
        }
    }

    #[test]
    fn non_summable_generator_is_refused() {
        // |x|^{-0.9} is integrable but its symbol decays like l^{-0.1}
        let spec = ToeplitzSpec::from_density(|x: f64| x.abs().powf(-0.9), 128).unwrap();
        let err = build_toeplitz(&spec).unwrap_err();
        assert!(err.to_string().contains("decay"), "{err}");
    }

    #[test]
    fn covariance_diagonal_and_root() {
        let fam = WaveletFamily::daubechies(2).unwrap();
        let cov = conditional_covariance(0.8, 2, 16, &fam).unwrap();
        let var = wavelet_autocovariance(0.8, 2, 0, &fam).unwrap();
        for i in 0..16 {
            assert_eq!(cov.sigma.get(i, i), var);
        }
        // root squares back within 1e-9 relative Frobenius
        let g2 = cov.root.matmul(&cov.root);
        let dense = cov.sigma.to_dense();
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for i in 0..16 {
            for j in 0..16 {
                let d = g2.get(i, j) - dense.get(i, j);
                err2 += d * d;
                ref2 += dense.get(i, j) * dense.get(i, j);
            }
        }
        assert!(err2.sqrt() < 1e-9 * ref2.sqrt());
    }

    #[test]
    fn covariance_is_positive_definite_on_grid() {
        let fam = WaveletFamily::daubechies(2).unwrap();
        for &h in &[0.2, 0.5, 0.8] {
            for j in 0..=3 {
                for &m in &[2usize, 8, 32] {
                    let cov = conditional_covariance(h, j, m, &fam).unwrap();
                    let dec = eigh(&cov.sigma).unwrap();
                    assert!(dec.eigenvalues[0] > 0.0, "H={h} j={j} m={m}");
                }
            }
        }
    }

    #[test]
    fn covariance_eigenvalues_inside_density_bounds() {
        let fam = WaveletFamily::daubechies(2).unwrap();
        let (h, j, m) = (0.5, 1, 64);
        let famc = fam.clone();
        let spec = ToeplitzSpec::from_density(
            move |x| 2.0 * std::f64::consts::PI * crate::wavelet::wavelet_spectral_density(h, x, j, &famc).unwrap(),
            m,
        )
        .unwrap();
        let (lo, hi) = gray_bounds(&spec, 8192).unwrap();
        let cov = conditional_covariance(h, j, m, &fam).unwrap();
        let dec = eigh(&cov.sigma).unwrap();
        assert!(dec.eigenvalues[0] >= lo - 1e-6, "{} < {lo}", dec.eigenvalues[0]);
        assert!(dec.eigenvalues[m - 1] <= hi + 1e-6, "{} > {hi}", dec.eigenvalues[m - 1]);
    }

    #[test]
    fn root_reproduces_covariance_in_monte_carlo() {
        let fam = WaveletFamily::daubechies(2).unwrap();
        let m = 8;
        let cov = conditional_covariance(0.7, 1, m, &fam).unwrap();
        let reps = 10_000;
        let mut rng = derive_stream(0x6A3A, 0);
        let mut acc = vec![0.0; m * m];
        for _ in 0..reps {
            let z: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let x = cov.correlate(&z);
            for i in 0..m {
                for j in 0..m {
                    acc[i * m + j] += x[i] * x[j];
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                let mean = acc[i * m + j] / reps as f64;
                let sij = cov.sigma.get(i, j);
                let se = ((cov.sigma.get(i, i) * cov.sigma.get(j, j) + sij * sij)
                    / reps as f64)
                    .sqrt();
                assert!((mean - sij).abs() < 4.0 * se, "({i},{j}): {mean} vs {sij}");
            }
        }
    }
}
