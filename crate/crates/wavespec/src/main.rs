use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use wavespec::io::{
    read_paths, read_pyramid, write_manifest, write_paths, write_pyramid, write_report,
    write_run_outputs, write_spectrum_csv,
};
use wavespec::mc::{load_config, run_experiment, RunSummary};
use wavespec::rng::derive_stream;
use wavespec::specmat::{log_spectrum, wavelet_matrix};
use wavespec::synth::{synth_ensemble, EnsembleSpec, HurstLaw, MixingSpec};
use wavespec::wavelet::{mallat_pyramid, WaveletFamily};
use wavespec::{Error, Result};

#[derive(Parser)]
#[command(name = "wavespec", version, about = "Wavelet eigenvalue spectra of mixed fractional ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize an ensemble of mixed fractional paths and write it to disk
    Synth {
        /// path length (power of two)
        #[arg(long)]
        n: usize,
        /// number of components
        #[arg(long)]
        p: usize,
        /// hurst law as "H:mass,H:mass,..."; masses may be fractions, e.g.
        /// "0.2:1/3,0.5:1/3,0.8:1/3"
        #[arg(long)]
        hurst: String,
        /// "identity" or "cond:<bound>"
        #[arg(long, default_value = "identity")]
        mixing: String,
        #[arg(long)]
        seed: u64,
        /// output file; a JSON sidecar is written next to it
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose stored paths into a pyramid of detail coefficients
    Wavelet {
        /// path file written by synth
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "db2")]
        family: String,
        #[arg(long)]
        max_octave: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalues and rescaled log spectrum of the wavelet matrix at one scale
    Esd {
        /// pyramid file written by wavelet
        #[arg(long)]
        pyramid: PathBuf,
        /// analysis scale, "2^m" or a power of two
        #[arg(long)]
        scale: String,
        /// output CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo experiment from a TOML or JSON config
    Mc {
        #[arg(long)]
        config: PathBuf,
        /// worker threads for the replicate loop (default: all cores)
        #[arg(long)]
        threads: Option<usize>,
        /// output directory (default: the config's `outputs`, then ".")
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate histogram.svg and trend.csv from an existing summary.json
    Report {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { n, p, hurst, mixing, seed, out } => {
            let law = parse_hurst_law(&hurst)?;
            let mixing: MixingSpec = mixing.parse()?;
            let spec = EnsembleSpec { n, p, law, mixing, seed };
            let ensemble = synth_ensemble(&spec, &mut derive_stream(seed, 0))?;
            write_paths(&out, &ensemble, &spec)?;
            let resolved = json!({
                "n": n, "p": p, "law": spec.law, "mixing": spec.mixing,
                "seed": seed, "out": out,
            });
            write_manifest(&sibling_manifest(&out), "synth", resolved)?;
            println!("wrote {} (+ sidecar, manifest)", out.display());
            Ok(())
        }
        Command::Wavelet { input, family, max_octave, out } => {
            let (paths, _) = read_paths(&input)?;
            let fam = WaveletFamily::parse(&family)?;
            let pyramid = mallat_pyramid(&paths, &fam, max_octave)?;
            write_pyramid(&out, &pyramid)?;
            let resolved = json!({
                "in": input, "family": family, "max_octave": max_octave, "out": out,
            });
            write_manifest(&sibling_manifest(&out), "wavelet", resolved)?;
            println!(
                "wrote {} (octaves 1..={}, counts {:?})",
                out.display(),
                pyramid.octaves().len(),
                pyramid.counts()
            );
            Ok(())
        }
        Command::Esd { pyramid, scale, out } => {
            let pyr = read_pyramid(&pyramid)?;
            let octave = parse_scale(&scale)?;
            let w = wavelet_matrix(&pyr, octave)?;
            let spectrum = log_spectrum(&w)?;
            write_spectrum_csv(&out, &spectrum)?;
            let resolved = json!({
                "pyramid": pyramid, "scale": spectrum.scale(), "octave": octave, "out": out,
            });
            write_manifest(&sibling_manifest(&out), "esd", resolved)?;
            println!("wrote {} ({} eigenvalues at scale {})", out.display(), spectrum.values().len(), spectrum.scale());
            Ok(())
        }
        Command::Mc { config, threads, out } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            let output = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Evaluation(format!("thread pool: {e}")))?
                    .install(|| run_experiment(&cfg)),
                None => run_experiment(&cfg),
            }?;
            let dir = out
                .or_else(|| cfg.outputs.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let written = write_run_outputs(&dir, &output)?;
            let ranges: Vec<(usize, usize)> =
                output.summary.configs.iter().map(|c| c.octave_range).collect();
            let resolved = json!({
                "config": cfg, "resolved_octave_ranges": ranges, "threads": threads,
            });
            write_manifest(&dir.join("manifest.json"), "mc", resolved)?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Report { summary, out } => {
            let parsed: RunSummary = serde_json::from_slice(&fs::read(&summary)?)?;
            if parsed.format_version != wavespec::FORMAT_VERSION {
                return Err(Error::Config(format!(
                    "summary format_version {} is not supported (expected {})",
                    parsed.format_version,
                    wavespec::FORMAT_VERSION
                )));
            }
            let written = write_report(&out, &parsed)?;
            let resolved = json!({ "summary": summary, "out": out });
            write_manifest(&out.join("report.manifest.json"), "report", resolved)?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

/// "x.bin" -> "x.bin.manifest.json", so per-file runs never collide with a
/// directory-level manifest.json.
fn sibling_manifest(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_os_string();
    os.push(".manifest.json");
    PathBuf::from(os)
}

fn parse_hurst_law(text: &str) -> Result<HurstLaw> {
    let mut support = Vec::new();
    let mut masses = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let (h, m) = part.split_once(':').ok_or_else(|| {
            Error::Config(format!("bad law atom {part:?}; expected \"H:mass\""))
        })?;
        let h: f64 = h
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad hurst value {h:?}")))?;
        support.push(h);
        masses.push(parse_fraction(m.trim())?);
    }
    HurstLaw::new(support, masses)
}

/// Masses may be written exactly as fractions ("1/3") or as decimals.
fn parse_fraction(text: &str) -> Result<f64> {
    if let Some((num, den)) = text.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad mass numerator {num:?}")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad mass denominator {den:?}")))?;
        if d == 0.0 {
            return Err(Error::Config(format!("zero denominator in mass {text:?}")));
        }
        return Ok(n / d);
    }
    text.parse()
        .map_err(|_| Error::Config(format!("bad mass {text:?}")))
}

/// Accepts "2^m" or a literal power of two; returns the octave m.
fn parse_scale(text: &str) -> Result<usize> {
    if let Some(m) = text.strip_prefix("2^") {
        return m
            .parse()
            .map_err(|_| Error::Config(format!("bad scale exponent {m:?}")));
    }
    let value: u64 = text
        .parse()
        .map_err(|_| Error::Config(format!("bad scale {text:?}; expected \"2^m\" or a power of two")))?;
    if value < 2 || !value.is_power_of_two() {
        return Err(Error::Config(format!(
            "scale must be a power of two >= 2, got {value}"
        )));
    }
    Ok(value.trailing_zeros() as usize)
}
