//! Dense symmetric eigensolver and eigenvalue-inequality checks.
//!
//! `eigh` runs Householder tridiagonalization followed by implicit-shift QL
//! with Wilkinson shifts, the standard reliable choice for the matrix orders
//! this crate meets (p up to a few hundred). `check_weyl` evaluates the
//! classical eigenvalue inequalities for sums, products and perturbations of
//! symmetric matrices and reports slacks; it backs the property-test suites.

use crate::mat::Mat;
use crate::{Error, Result};

/// Symmetric matrix of order `m`; only the upper triangle is stored, so
/// symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    // row-wise packed upper triangle: row i holds entries (i,i)..(i,m-1)
    upper: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1);
        SymmetricMatrix { order, upper: vec![0.0; order * (order + 1) / 2] }
    }

    /// Fills entry (i, j) for i <= j from `f`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymmetricMatrix::zeros(order);
        for i in 0..order {
            for j in i..order {
                let at = m.idx(i, j);
                m.upper[at] = f(i, j);
            }
        }
        m
    }

    /// Symmetrizes a square dense matrix: entry (i,j) <- (a_ij + a_ji)/2.
    pub fn from_dense(a: &Mat) -> Self {
        assert_eq!(a.rows(), a.cols(), "not square");
        SymmetricMatrix::from_fn(a.rows(), |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        SymmetricMatrix::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.order);
        i * self.order - i * (i + 1) / 2 + j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.upper[self.idx(i, j)]
        } else {
            self.upper[self.idx(j, i)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = if i <= j { self.idx(i, j) } else { self.idx(j, i) };
        self.upper[k] = v;
    }

    pub fn to_dense(&self) -> Mat {
        Mat::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn add(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.order, other.order);
        let mut out = self.clone();
        for (a, b) in out.upper.iter_mut().zip(&other.upper) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.order, other.order);
        let mut out = self.clone();
        for (a, b) in out.upper.iter_mut().zip(&other.upper) {
            *a -= b;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }
}

/// Result of `eigh`: eigenvalues ascending, eigenvectors as the columns of
/// an orthogonal matrix, column l paired with eigenvalue l.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl EigenDecomposition {
    /// V f(Lambda) V^T. `f = sqrt` gives the symmetric PSD root,
    /// `f = id` reconstructs the input.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Mat {
        let m = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = Mat::zeros(m, m);
        for l in 0..m {
            let fl = f(self.eigenvalues[l]);
            if fl == 0.0 {
                continue;
            }
            for i in 0..m {
                let vi = v.get(i, l) * fl;
                if vi == 0.0 {
                    continue;
                }
                for j in 0..m {
                    out.set(i, j, out.get(i, j) + vi * v.get(j, l));
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Mat {
        self.spectral_map(|x| x)
    }
}

const MAX_QL_ITER: usize = 50;

/// Eigendecomposition of a symmetric matrix. Never mutates its input;
/// eigenvalues come back ascending.
pub fn eigh(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.order();
    for i in 0..n {
        for j in i..n {
            if !a.get(i, j).is_finite() {
                return Err(Error::Solver(format!("non-finite entry at ({i},{j})")));
            }
        }
    }
    let mut v = a.to_dense();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit_shift(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    Ok(EigenDecomposition { eigenvalues: d, eigenvectors: v })
}

// Householder reduction to tridiagonal form, accumulating the transform in
// `v`; on return d holds the diagonal and e[1..] the subdiagonal.
fn tridiagonalize(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.get(j, j) * f;
                for k in j + 1..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }
    // accumulate transformations
    for i in 0..n.saturating_sub(1) {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let val = v.get(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

// Implicit-shift QL sweeps on the tridiagonal (d, e); the shift is the
// Wilkinson choice from the leading 2x2 block. Eigenvectors accumulate in v.
fn ql_implicit_shift(v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    let off: f64 = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
                    return Err(Error::Solver(format!(
                        "QL failed to converge after {MAX_QL_ITER} sweeps at index {l} \
                         (order {n}, residual off-diagonal {off:.3e}, scale {tst1:.3e})"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v.get(k, i + 1);
                        v.set(k, i + 1, s * v.get(k, i) + c * h);
                        v.set(k, i, c * v.get(k, i) - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_ascending(v: &mut Mat, d: &mut [f64]) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for row in 0..n {
                let tmp = v.get(row, i);
                v.set(row, i, v.get(row, k));
                v.set(row, k, tmp);
            }
        }
    }
}

/// Singular values of a rectangular matrix, ascending. Computed as square
/// roots of the eigenvalues of the smaller Gram matrix; the nonzero spectra
/// of M M^T and M^T M coincide, so the smaller side loses nothing.
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    let gram = if m.rows() <= m.cols() {
        gram_rows(m)
    } else {
        gram_rows(&m.transpose())
    };
    let dec = eigh(&gram)?;
    Ok(dec
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt()) // tiny negatives are roundoff around 0
        .collect())
}

fn gram_rows(m: &Mat) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(m.rows(), |i, j| {
        m.row(i).iter().zip(m.row(j)).map(|(a, b)| a * b).sum()
    })
}

/// Operator (spectral) norm of a symmetric matrix.
pub fn op_norm(a: &SymmetricMatrix) -> Result<f64> {
    let dec = eigh(a)?;
    Ok(dec.eigenvalues.iter().fold(0.0, |acc: f64, &l| acc.max(l.abs())))
}

/// Slack report for the classical eigenvalue inequalities; every slack is
/// nonnegative in exact arithmetic, so `min_slack` close to zero from below
/// is the pass criterion.
#[derive(Debug, Clone)]
pub struct WeylReport {
    /// min over l of lambda_l(A+B) - (lambda_l(A) + lambda_min(B))
    pub sum_lower_slack: f64,
    /// min over l of (lambda_l(A) + lambda_max(B)) - lambda_l(A+B)
    pub sum_upper_slack: f64,
    /// ||A - B||_op - max_l |lambda_l(A) - lambda_l(B)|
    pub perturbation_slack: f64,
    /// -max_l |lambda_l(AB) - lambda_l(BA)|, both sides computed through
    /// congruence with PSD square roots
    pub cyclic_slack: f64,
    pub min_slack: f64,
}

/// Evaluates the sum inequalities, the operator-norm perturbation bound and
/// the product-commutation equality for a pair of symmetric matrices.
///
/// The product spectrum lambda(AB) is only real with a PSD factor, so the
/// cyclic check runs on the squares A^2, B^2 (PSD by construction) via their
/// symmetric roots: lambda(A^2 B^2) from A (B^2) A against lambda(B^2 A^2)
/// from B (A^2) B. Violations are reported through slacks, never thrown.
pub fn check_weyl(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<WeylReport> {
    assert_eq!(a.order(), b.order(), "order mismatch");
    let m = a.order();
    let la = eigh(a)?.eigenvalues;
    let lb = eigh(b)?.eigenvalues;
    let lab = eigh(&a.add(b))?.eigenvalues;

    let mut sum_lower_slack = f64::INFINITY;
    let mut sum_upper_slack = f64::INFINITY;
    for l in 0..m {
        sum_lower_slack = sum_lower_slack.min(lab[l] - (la[l] + lb[0]));
        sum_upper_slack = sum_upper_slack.min((la[l] + lb[m - 1]) - lab[l]);
    }

    let dev = la
        .iter()
        .zip(&lb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let perturbation_slack = op_norm(&a.sub(b))? - dev;

    // congruence routes: A (B^2) A and B (A^2) B share the nonzero spectrum
    // of A^2 B^2 resp. B^2 A^2, which commute cyclically.
    let ad = a.to_dense();
    let bd = b.to_dense();
    let b2 = bd.matmul(&bd);
    let a2 = ad.matmul(&ad);
    let route_ab = eigh(&SymmetricMatrix::from_dense(&ad.matmul(&b2).matmul(&ad)))?.eigenvalues;
    let route_ba = eigh(&SymmetricMatrix::from_dense(&bd.matmul(&a2).matmul(&bd)))?.eigenvalues;
    let scale = route_ab
        .iter()
        .chain(&route_ba)
        .fold(1.0_f64, |acc, &x| acc.max(x.abs()));
    let gap = route_ab
        .iter()
        .zip(&route_ba)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let cyclic_slack = -gap / scale;

    let min_slack = sum_lower_slack
        .min(sum_upper_slack)
        .min(perturbation_slack)
        .min(cyclic_slack);
    Ok(WeylReport {
        sum_lower_slack,
        sum_upper_slack,
        perturbation_slack,
        cyclic_slack,
        min_slack,
    })
}
