//! On-disk formats: little-endian f64 binaries with JSON sidecars for path
//! matrices and pyramids, CSV tables, SVG bundles, and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::mat::Mat;
use crate::mc::{ConfigDetail, RunOutput, RunSummary, TrendReport};
use crate::plot::{histogram_svg, Panel};
use crate::specmat::LogSpectrum;
use crate::synth::{Ensemble, EnsembleSpec, PathMatrix};
use crate::wavelet::{WaveletFamily, WaveletPyramid};
use crate::{Error, Result};

/// Sidecar filename: the data filename with ".json" appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    PathBuf::from(os)
}

fn le_bytes(values: &[f64]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

fn le_floats(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

fn check_version(found: u32) -> Result<()> {
    if found != crate::FORMAT_VERSION {
        return Err(Error::Config(format!(
            "sidecar format_version {found} is not supported (expected {})",
            crate::FORMAT_VERSION
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSidecar {
    pub format_version: u32,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub hurst_assignment: Vec<f64>,
    pub mixing_kind: String,
}

/// Observed paths as row-major p x n little-endian f64 plus a sidecar.
pub fn write_paths(path: &Path, ensemble: &Ensemble, spec: &EnsembleSpec) -> Result<()> {
    let sidecar = PathSidecar {
        format_version: crate::FORMAT_VERSION,
        n: spec.n,
        p: spec.p,
        seed: spec.seed,
        hurst_assignment: ensemble.assignment.values.clone(),
        mixing_kind: spec.mixing.kind(),
    };
    fs::write(path, le_bytes(ensemble.observed.mat().data()))?;
    fs::write(sidecar_path(path), pretty_json(&sidecar)?)?;
    Ok(())
}

pub fn read_paths(path: &Path) -> Result<(PathMatrix, PathSidecar)> {
    let sidecar: PathSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    check_version(sidecar.format_version)?;
    let bytes = fs::read(path)?;
    let expected = sidecar.p * sidecar.n * 8;
    if bytes.len() != expected {
        return Err(Error::Config(format!(
            "path file {} is {} bytes, expected {expected} for p = {}, n = {}",
            path.display(),
            bytes.len(),
            sidecar.p,
            sidecar.n
        )));
    }
    if sidecar.hurst_assignment.len() != sidecar.p {
        return Err(Error::Config(format!(
            "sidecar lists {} hurst values for p = {} components",
            sidecar.hurst_assignment.len(),
            sidecar.p
        )));
    }
    let data = le_floats(&bytes);
    let mat = Mat::from_fn(sidecar.p, sidecar.n, |i, j| data[i * sidecar.n + j]);
    Ok((PathMatrix::new(mat)?, sidecar))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PyramidSidecar {
    pub format_version: u32,
    pub family: String,
    pub n: usize,
    pub p: usize,
    pub octaves: Vec<usize>,
    pub counts: Vec<usize>,
}

/// Detail blocks concatenated octave by octave, each row-major p x counts[i],
/// plus a sidecar describing the layout.
pub fn write_pyramid(path: &Path, pyramid: &WaveletPyramid) -> Result<()> {
    let sidecar = PyramidSidecar {
        format_version: crate::FORMAT_VERSION,
        family: pyramid.family_name().to_string(),
        n: pyramid.n(),
        p: pyramid.p(),
        octaves: pyramid.octaves().to_vec(),
        counts: pyramid.counts().to_vec(),
    };
    let mut buf = Vec::new();
    for &j in pyramid.octaves() {
        buf.extend_from_slice(&le_bytes(pyramid.detail(j)?.data()));
    }
    fs::write(path, buf)?;
    fs::write(sidecar_path(path), pretty_json(&sidecar)?)?;
    Ok(())
}

pub fn read_pyramid(path: &Path) -> Result<WaveletPyramid> {
    let sidecar: PyramidSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    check_version(sidecar.format_version)?;
    let family = WaveletFamily::parse(&sidecar.family)?;
    let bytes = fs::read(path)?;
    let total: usize = sidecar.counts.iter().sum();
    let expected = sidecar.p * total * 8;
    if bytes.len() != expected {
        return Err(Error::Config(format!(
            "pyramid file {} is {} bytes, expected {expected} for p = {} and counts {:?}",
            path.display(),
            bytes.len(),
            sidecar.p,
            sidecar.counts
        )));
    }
    let data = le_floats(&bytes);
    let mut details = Vec::with_capacity(sidecar.counts.len());
    let mut offset = 0usize;
    for &c in &sidecar.counts {
        let block = &data[offset..offset + sidecar.p * c];
        details.push(Mat::from_fn(sidecar.p, c, |i, j| block[i * c + j]));
        offset += sidecar.p * c;
    }
    let pyramid = WaveletPyramid::from_blocks(&family, sidecar.n, details)?;
    if pyramid.octaves() != sidecar.octaves.as_slice()
        || pyramid.counts() != sidecar.counts.as_slice()
        || pyramid.p() != sidecar.p
    {
        return Err(Error::Config(format!(
            "sidecar bookkeeping for {} does not match its blocks",
            path.display()
        )));
    }
    Ok(pyramid)
}

/// One row per eigenvalue rank, ascending. Floats use the shortest
/// round-trip decimal form.
pub fn write_spectrum_csv(path: &Path, spectrum: &LogSpectrum) -> Result<()> {
    let mut s = String::from("rank,lambda,rescaled_log,scale,octave\n");
    for (i, (&lam, &val)) in spectrum
        .eigenvalues()
        .iter()
        .zip(spectrum.values())
        .enumerate()
    {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            lam,
            val,
            spectrum.scale(),
            spectrum.octave()
        ));
    }
    fs::write(path, s)?;
    Ok(())
}

/// Per-replicate eigenvalues, rescaled logs, and debiased estimates of one
/// configuration, ordered by replicate then rank.
pub fn write_config_csv(path: &Path, detail: &ConfigDetail) -> Result<()> {
    let mut s = String::from("rank,replicate,lambda,rescaled_log,hurst_estimate\n");
    for rec in &detail.records {
        for (i, ((&lam, &val), &h)) in rec
            .lambdas
            .iter()
            .zip(&rec.rescaled)
            .zip(&rec.hurst)
            .enumerate()
        {
            s.push_str(&format!("{},{},{},{},{}\n", i + 1, rec.replicate, lam, val, h));
        }
    }
    fs::write(path, s)?;
    Ok(())
}

/// Median KS per configuration with bootstrap bands, raw and debiased side
/// by side.
pub fn write_trend_csv(path: &Path, raw: &TrendReport, debiased: &TrendReport) -> Result<()> {
    let mut s = String::from(
        "n,a,p,median_ks,band_lo,band_hi,median_ks_debiased,band_debiased_lo,band_debiased_hi\n",
    );
    for (r, d) in raw.points.iter().zip(&debiased.points) {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.entry.n,
            r.entry.a,
            r.entry.p,
            r.median_ks,
            r.band.0,
            r.band.1,
            d.median_ks,
            d.band.0,
            d.band.1
        ));
    }
    fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub command: String,
    /// fully resolved configuration, sufficient to reproduce the run
    pub resolved: serde_json::Value,
}

pub fn write_manifest(path: &Path, command: &str, resolved: serde_json::Value) -> Result<()> {
    let manifest = Manifest {
        format_version: crate::FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        resolved,
    };
    fs::write(path, pretty_json(&manifest)?)?;
    Ok(())
}

fn pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the full bundle for a finished run into `dir`: summary.json, one
/// CSV per configuration, pooled histograms as SVG, and the KS trend table.
/// Returns the paths written.
pub fn write_run_outputs(dir: &Path, output: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let summary_path = dir.join("summary.json");
    fs::write(&summary_path, pretty_json(&output.summary)?)?;
    written.push(summary_path);

    for (i, detail) in output.details.iter().enumerate() {
        let e = detail.entry;
        let csv_path = dir.join(format!("config_{i}_n{}_a{}_p{}.csv", e.n, e.a, e.p));
        write_config_csv(&csv_path, detail)?;
        written.push(csv_path);
    }

    written.extend(write_report(dir, &output.summary)?);
    Ok(written)
}

/// Regenerates the presentation artifacts (histogram.svg, trend.csv) from a
/// summary alone.
pub fn write_report(dir: &Path, summary: &RunSummary) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut panels = Vec::new();
    for cfg in &summary.configs {
        let e = cfg.entry;
        panels.push(Panel {
            title: format!("hurst estimates, n={}, a={}, p={}", e.n, e.a, e.p),
            histogram: &cfg.hurst_histogram,
            marks: summary.law.support().to_vec(),
        });
        panels.push(Panel {
            title: format!("rescaled log eigenvalues, n={}, a={}, p={}", e.n, e.a, e.p),
            histogram: &cfg.rescaled_log_histogram,
            marks: summary.target_atoms.clone(),
        });
    }
    let svg_path = dir.join("histogram.svg");
    fs::write(&svg_path, histogram_svg(&panels))?;
    written.push(svg_path);

    if let (Some(raw), Some(debiased)) = (&summary.trend, &summary.trend_debiased) {
        let trend_path = dir.join("trend.csv");
        write_trend_csv(&trend_path, raw, debiased)?;
        written.push(trend_path);
    }
    Ok(written)
}
