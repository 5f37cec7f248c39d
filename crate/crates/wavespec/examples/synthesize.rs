//! Draw an ensemble of mixed fractional paths and audit the increments of
//! each component against the exact fractional Gaussian noise
//! autocovariance.
//!
//!     cargo run --release --example synthesize

use wavespec::rng::derive_stream;
use wavespec::synth::{fgn_autocovariance, synth_ensemble, EnsembleSpec, HurstLaw, MixingSpec};

fn main() -> wavespec::Result<()> {
    let spec = EnsembleSpec {
        n: 1 << 14,
        p: 6,
        law: HurstLaw::uniform(vec![0.2, 0.5, 0.8])?,
        mixing: MixingSpec::Identity,
        seed: 3,
    };
    let ensemble = synth_ensemble(&spec, &mut derive_stream(spec.seed, 0))?;
    println!("n = {}, p = {}, seed = {}", spec.n, spec.p, spec.seed);
    println!();
    println!("component   H     lag   sample      exact");

    for (l, &h) in ensemble.assignment.values.iter().enumerate() {
        // rows are fBm; difference them to recover stationary increments
        let path = ensemble.latent.row(l);
        let mut incr = Vec::with_capacity(path.len());
        let mut prev = 0.0;
        for &x in path {
            incr.push(x - prev);
            prev = x;
        }
        for lag in [0usize, 1, 8] {
            let m = incr.len() - lag;
            let sample: f64 =
                (0..m).map(|t| incr[t] * incr[t + lag]).sum::<f64>() / m as f64;
            let exact = fgn_autocovariance(h, lag as i64)?;
            println!("{l:>9}   {h:.1}   {lag:>3}   {sample:+.5}    {exact:+.5}");
        }
    }
    Ok(())
}
