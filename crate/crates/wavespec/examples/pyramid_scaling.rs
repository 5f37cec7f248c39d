//! The wavelet scaling law on a single long path: the mean squared detail
//! coefficient grows like 2^{j(2H+1)} across octaves j, so a least-squares
//! line through (j, log2 energy) recovers the exponent.
//!
//!     cargo run --release --example pyramid_scaling

use wavespec::mat::Mat;
use wavespec::rng::derive_stream;
use wavespec::synth::{synth_fbm, PathMatrix};
use wavespec::wavelet::{mallat_pyramid, WaveletFamily};

fn main() -> wavespec::Result<()> {
    let n = 1 << 16;
    let family = WaveletFamily::parse("db2")?;
    println!("n = 2^16, family = db2, octaves 4..=8");
    println!();
    println!("  H     slope     2H+1");

    for (i, h) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let path = synth_fbm(h, n, &mut derive_stream(17, i as u64))?;
        let paths = PathMatrix::new(Mat::from_rows(&[path]))?;
        let pyramid = mallat_pyramid(&paths, &family, 8)?;

        let mut points = Vec::new();
        for j in 4..=8usize {
            let block = pyramid.detail(j)?;
            let row = block.row(0);
            let energy: f64 = row.iter().map(|d| d * d).sum::<f64>() / row.len() as f64;
            points.push((j as f64, energy.log2()));
        }
        let slope = fit_slope(&points);
        println!("  {h:.1}   {slope:.4}    {:.1}", 2.0 * h + 1.0);
    }
    Ok(())
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}
