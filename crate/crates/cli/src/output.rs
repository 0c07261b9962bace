//! File emission. One JSON summary per run plus CSV spectra where the
//! method produces them. All floats print as `{:.12e}` so reruns of a
//! deterministic pipeline byte-reproduce their outputs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

use fermicav_core::observables::RealTimeSpectral;

use crate::runner::{ElectronSpectra, Method, RunOutput};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

/// Writes `{method}_summary.json` (record fields plus a metadata block) and
/// any spectra files; returns the summary path.
pub fn write_run(dir: &Path, method: Method, out: &RunOutput) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let mut doc = serde_json::to_value(&out.record)?;
    doc["metadata"] = out.metadata.clone();
    let summary = dir.join(format!("{}_summary.json", method.name()));
    write_json(&summary, &doc)?;

    if let Some((omega, a_c)) = &out.cavity_spectrum {
        if out.electron_spectra.is_none() {
            let mut w = csv_writer(&dir.join(format!("{}_cavity_dos.csv", method.name())))?;
            w.write_record(["omega", "a_c"])?;
            for (o, a) in omega.iter().zip(a_c) {
                w.write_record([fmt(*o), fmt(*a)])?;
            }
            w.flush()?;
        }
    }

    if let Some(spectra) = &out.electron_spectra {
        write_ngf_spectra(dir, spectra, out)?;
    }
    if let Some(rt) = &out.realtime {
        write_realtime(&dir.join(format!("{}_realtime.csv", method.name())), rt)?;
    }
    Ok(summary)
}

pub fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(csv::Writer::from_writer(f))
}

/// `ngf_spectra.csv`: frequency axis, photon spectral function, photon
/// occupation density, and the state-summed spectral function of each band.
fn write_ngf_spectra(dir: &Path, spectra: &ElectronSpectra, out: &RunOutput) -> Result<()> {
    let (_, a_c) = out
        .cavity_spectrum
        .as_ref()
        .expect("frequency solver always carries its photon spectrum");
    let mut w = csv_writer(&dir.join("ngf_spectra.csv"))?;
    w.write_record(["omega", "a_c", "im_d_lesser", "a_band1", "a_band2"])?;
    for i in 0..spectra.omega.len() {
        w.write_record([
            fmt(spectra.omega[i]),
            fmt(a_c[i]),
            fmt(spectra.im_d_lesser[i]),
            fmt(spectra.a_band[0][i]),
            fmt(spectra.a_band[1][i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format real-time profile: one row per (time, site).
fn write_realtime(path: &Path, rt: &RealTimeSpectral) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["time", "site", "amplitude"])?;
    let (n_sites, n_times) = (rt.amplitude.nrows(), rt.times.len());
    for m in 0..n_times {
        for j in 0..n_sites {
            w.write_record([
                fmt(rt.times[m]),
                (j + 1).to_string(),
                fmt(rt.amplitude[[j, m]]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
