//! Toeplitz covariance of stationary wavelet coefficients: every eigenvalue
//! of the lag matrix lies between the infimum and supremum of its generating
//! density, and the matrix stays strictly positive definite.
//!
//!     cargo run --release --example covariance_bounds

use std::f64::consts::PI;

use wavespec::eigen::eigh;
use wavespec::toeplitz::{build_toeplitz, gray_bounds, ToeplitzSpec};
use wavespec::wavelet::{wavelet_spectral_density, WaveletFamily};

fn main() -> wavespec::Result<()> {
    let family = WaveletFamily::parse("db2")?;
    let size = 128;
    println!("size = {size}, family = db2, octave 2");
    println!();
    println!("  H     density inf   min eig      max eig      density sup");

    for h in [0.2, 0.5, 0.8] {
        let fam = family.clone();
        // the lag-kappa covariance is the symbol of 2 pi times the density
        let spec = ToeplitzSpec::from_density(
            move |x| 2.0 * PI * wavelet_spectral_density(h, x, 2, &fam).unwrap(),
            size,
        )?;
        let sigma = build_toeplitz(&spec)?;
        let (lo, hi) = gray_bounds(&spec, 1 << 14)?;
        let eig = eigh(&sigma)?.eigenvalues;
        let (min, max) = (eig[0], eig[size - 1]);
        assert!(min >= lo - 1e-6 && max <= hi + 1e-6);
        assert!(min > 0.0);
        println!("  {h:.1}   {lo:.6}      {min:.6}     {max:.6}     {hi:.6}");
    }
    println!();
    println!("all eigenvalues inside the density bounds, all matrices positive definite");
    Ok(())
}
