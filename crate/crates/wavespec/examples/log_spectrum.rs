//! One replicate end to end: synthesize a mixed ensemble, take its wavelet
//! matrix at a coarse scale, and compare the rescaled log eigenvalues with
//! the atoms 2H+1 of the target law. The raw values carry a finite-scale
//! offset; the multiscale regression removes it.
//!
//!     cargo run --release --example log_spectrum

use wavespec::rng::derive_stream;
use wavespec::specmat::{log_spectrum, multiscale_hurst, wavelet_matrix, WeightMode};
use wavespec::synth::{synth_ensemble, EnsembleSpec, HurstLaw, MixingSpec};
use wavespec::wavelet::{mallat_pyramid, WaveletFamily};

fn main() -> wavespec::Result<()> {
    let spec = EnsembleSpec {
        n: 1 << 15,
        p: 8,
        law: HurstLaw::uniform(vec![0.2, 0.5, 0.8])?,
        mixing: MixingSpec::RandomConditioned { condition_bound: 2.0 },
        seed: 7,
    };
    let ensemble = synth_ensemble(&spec, &mut derive_stream(spec.seed, 0))?;
    let family = WaveletFamily::parse("db2")?;
    let pyramid = mallat_pyramid(&ensemble.observed, &family, 7)?;

    // analysis scale a = 2^5; regression octaves 3..=7
    let w = wavelet_matrix(&pyramid, 5)?;
    let spectrum = log_spectrum(&w)?;
    let hurst = multiscale_hurst(&pyramid, (3, 7), WeightMode::CountProportional)?;

    let mut assigned = ensemble.assignment.values.clone();
    assigned.sort_by(f64::total_cmp);

    println!("n = 2^15, p = 8, a = 2^5, mixing cond:2");
    println!();
    println!("rank   raw log eig   debiased 2H+1   sorted true 2H+1");
    for (l, (&raw, &h)) in spectrum.values().iter().zip(&hurst).enumerate() {
        println!(
            "{:>4}   {raw:+.4}       {:+.4}         {:+.4}",
            l + 1,
            2.0 * h + 1.0,
            2.0 * assigned[l] + 1.0
        );
    }
    Ok(())
}
