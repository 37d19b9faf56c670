//! CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use correlator_core::experiments::{OtocResult, SelftestReport, SpectrumResult};
use correlator_core::spectral::{SignalSeries, Spectrum};
use serde::Serialize;

use crate::CliError;

pub struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Writer, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv<S: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = S>) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SpectrumRow {
    omega: f64,
    re: f64,
    im: f64,
    normalized_magnitude: f64,
}

#[derive(Serialize)]
struct PeakRow {
    n: i64,
    k: f64,
    rank: usize,
    omega: f64,
    height: f64,
}

#[derive(Serialize)]
struct EnergyRow {
    n: i64,
    k: f64,
    energy: Option<f64>,
}

fn series_rows(s: &SignalSeries) -> Vec<SeriesRow> {
    s.samples
        .iter()
        .enumerate()
        .map(|(i, x)| SeriesRow {
            t: s.time(i),
            re: x.re,
            im: x.im,
        })
        .collect()
}

fn spectrum_rows(s: &Spectrum) -> Vec<SpectrumRow> {
    let max = s.magnitudes().into_iter().fold(0.0, f64::max);
    s.omegas
        .iter()
        .zip(&s.values)
        .map(|(&omega, v)| SpectrumRow {
            omega,
            re: v.re,
            im: v.im,
            normalized_magnitude: if max > 0.0 { v.norm() / max } else { 0.0 },
        })
        .collect()
}

/// Momentum index as it appears in file names; negative indices get an `m`.
fn tag(n: i64) -> String {
    if n < 0 {
        format!("m{}", -n)
    } else {
        n.to_string()
    }
}

pub fn write_spectrum(w: &mut Writer, r: &SpectrumResult) -> Result<(), CliError> {
    for m in &r.momenta {
        let t = tag(m.index);
        for (i, run) in m.runs.iter().enumerate() {
            let name = if i == 0 {
                format!("correlator_k{t}.csv")
            } else {
                format!("correlator_k{t}_run{i}.csv")
            };
            w.csv(&name, series_rows(run))?;
        }
        w.csv(&format!("spectrum_k{t}.csv"), spectrum_rows(&m.processed))?;
        w.csv(&format!("spectrum_raw_k{t}.csv"), spectrum_rows(&m.raw))?;
        if let Some(ca) = &m.ca {
            w.csv(&format!("spectrum_ca_k{t}.csv"), spectrum_rows(ca))?;
        }
    }
    let peaks: Vec<PeakRow> = r
        .momenta
        .iter()
        .flat_map(|m| {
            m.peaks.iter().enumerate().map(|(rank, p)| PeakRow {
                n: m.index,
                k: m.k,
                rank,
                omega: p.omega,
                height: p.height,
            })
        })
        .collect();
    w.csv("peaks.csv", peaks)?;
    w.csv(
        "energies.csv",
        r.momenta.iter().map(|m| EnergyRow {
            n: m.index,
            k: m.k,
            energy: m.energy,
        }),
    )?;
    if let Some(fit) = &r.fit {
        w.json("fit.json", fit)?;
    }
    if let Some(gap) = &r.gap {
        w.json("gap.json", gap)?;
    }
    Ok(())
}

pub fn write_otoc(w: &mut Writer, r: &OtocResult) -> Result<(), CliError> {
    w.csv(
        "otoc.csv",
        r.times.iter().zip(&r.values).map(|(&t, f)| SeriesRow { t, re: f.re, im: f.im }),
    )
}

pub fn write_selftest(w: &mut Writer, r: &SelftestReport) -> Result<(), CliError> {
    w.json("selftest_report.json", r)
}
