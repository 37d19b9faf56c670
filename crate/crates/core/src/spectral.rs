//! Time series to spectrum: doubling, windowing, Fourier transform,
//! correlation analysis, peak picking and the dispersion fit.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reflection used to extend a series to negative times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Antisymmetric,
    Symmetric,
    None,
}

/// Uniformly sampled complex signal starting at `t0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Complex64>,
    pub parity: Parity,
}

impl SignalSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<Complex64>) -> Result<SignalSeries> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("sample spacing must be positive, got {dt}")));
        }
        Ok(SignalSeries {
            t0,
            dt,
            samples,
            parity: Parity::None,
        })
    }

    pub fn from_real(t0: f64, dt: f64, samples: &[f64]) -> Result<SignalSeries> {
        SignalSeries::new(t0, dt, samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }
}

/// Extends a series that starts at `t = 0` to `[-T, T]`, keeping the `t = 0` sample once.
pub fn double_signal(series: &SignalSeries, parity: Parity) -> Result<SignalSeries> {
    if series.t0.abs() > 1e-12 * series.dt {
        return Err(Error::Config(format!(
            "doubling needs a series starting at t = 0, got t0 = {}",
            series.t0
        )));
    }
    if series.is_empty() {
        return Err(Error::Config("cannot double an empty series".into()));
    }
    let sign = match parity {
        Parity::Antisymmetric => -1.0,
        Parity::Symmetric => 1.0,
        Parity::None => return Ok(series.clone()),
    };
    let n = series.len();
    let mut samples: Vec<Complex64> = series.samples[1..].iter().rev().map(|&x| sign * x).collect();
    samples.extend_from_slice(&series.samples);
    if parity == Parity::Antisymmetric {
        samples[n - 1] = Complex64::new(0.0, 0.0);
    }
    Ok(SignalSeries {
        t0: -((n - 1) as f64) * series.dt,
        dt: series.dt,
        samples,
        parity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Rectangular,
    Hamming,
}

impl WindowKind {
    pub fn weights(self, m: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; m],
            WindowKind::Hamming if m < 2 => vec![1.0; m],
            WindowKind::Hamming => (0..m)
                .map(|n| {
                    0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (m - 1) as f64).cos()
                })
                .collect(),
        }
    }
}

pub fn apply_window(series: &SignalSeries, kind: WindowKind) -> SignalSeries {
    let w = kind.weights(series.len());
    SignalSeries {
        samples: series.samples.iter().zip(w).map(|(x, w)| x * w).collect(),
        ..series.clone()
    }
}

/// Values on a uniform frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub omegas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub normalized: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Grid spacing, or zero for a single point.
    pub fn spacing(&self) -> f64 {
        if self.omegas.len() < 2 {
            0.0
        } else {
            self.omegas[1] - self.omegas[0]
        }
    }

    /// Scales so the largest magnitude is one. A zero spectrum is left as is.
    pub fn normalize(mut self) -> Spectrum {
        let max = self.magnitudes().into_iter().fold(0.0, f64::max);
        if max > 0.0 {
            for v in &mut self.values {
                *v /= max;
            }
        }
        self.normalized = true;
        self
    }
}

/// `dt * sum_n x_n exp(-i w t_n)` on `w_m = 2 pi m / (M dt)`, centered on zero.
pub fn dft(series: &SignalSeries) -> Spectrum {
    dft_padded(series, 1)
}

/// As [`dft`] with zero padding to `pad * M` points, refining the grid by `pad`.
pub fn dft_padded(series: &SignalSeries, pad: usize) -> Spectrum {
    let pad = pad.max(1);
    let m = series.len() * pad;
    if m == 0 {
        return Spectrum {
            omegas: Vec::new(),
            values: Vec::new(),
            normalized: false,
        };
    }
    let mut buf = series.samples.clone();
    buf.resize(m, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let step = 2.0 * std::f64::consts::PI / (m as f64 * series.dt);
    let lo = -((m / 2) as i64);
    let hi = lo + m as i64;
    let (omegas, values) = (lo..hi)
        .map(|k| {
            let w = k as f64 * step;
            let x = buf[k.rem_euclid(m as i64) as usize];
            (w, series.dt * Complex64::from_polar(1.0, -w * series.t0) * x)
        })
        .unzip();
    Spectrum {
        omegas,
        values,
        normalized: false,
    }
}

/// `max(Re(a conj(b)), 0)`, normalized to a unit maximum.
pub fn correlation_analysis(a: &Spectrum, b: &Spectrum) -> Result<Spectrum> {
    let same = a.len() == b.len()
        && a
            .omegas
            .iter()
            .zip(&b.omegas)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    if !same {
        return Err(Error::Config("correlation analysis needs identical frequency grids".into()));
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| Complex64::new((x * y.conj()).re.max(0.0), 0.0))
        .collect();
    Ok(Spectrum {
        omegas: a.omegas.clone(),
        values,
        normalized: false,
    }
    .normalize())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
}

/// Local maxima of the magnitude above `threshold_frac` times the global
/// maximum, refined by a parabola through three points. The grid is treated
/// as periodic. Sorted by height, tallest first.
pub fn find_peaks(spec: &Spectrum, threshold_frac: f64) -> Result<Vec<Peak>> {
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return Err(Error::Config(format!("peak threshold must be in (0, 1), got {threshold_frac}")));
    }
    let y = spec.magnitudes();
    let n = y.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let max = y.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    let dw = spec.spacing();
    let mut peaks = Vec::new();
    for i in 0..n {
        let (l, c, r) = (y[(i + n - 1) % n], y[i], y[(i + 1) % n]);
        if !(c > l && c >= r) || c < threshold_frac * max {
            continue;
        }
        let curv = l - 2.0 * c + r;
        let delta = if curv.abs() > 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
        peaks.push(Peak {
            omega: spec.omegas[i] + delta * dw,
            height: c - 0.25 * (l - r) * delta,
        });
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height));
    Ok(peaks)
}

/// Tallest peak at a frequency above `min_omega`.
pub fn dominant_peak(spec: &Spectrum, threshold_frac: f64, min_omega: f64) -> Result<Option<Peak>> {
    Ok(find_peaks(spec, threshold_frac)?.into_iter().find(|p| p.omega > min_omega))
}

/// Continuum dispersion `E^2 = (rest energy)^2 + (c k)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionFit {
    /// Rest energy, the square root of the fitted intercept.
    pub rest_energy: f64,
    pub speed: f64,
    pub rest_energy_se: f64,
    pub speed_se: f64,
    /// Root-mean-square residual in `E^2`.
    pub residual: f64,
    /// The intercept came out negative; the rest energy is pinned to zero.
    pub degenerate: bool,
}

/// Least squares of `E^2` against `k^2`.
pub fn fit_dispersion(points: &[(f64, f64)]) -> Result<DispersionFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0.abs()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 3 {
        return Err(Error::Config("dispersion fit needs at least three distinct |k|".into()));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Config(format!("energies must be positive, got {} at k = {}", p.1, p.0)));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0 * p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1 * p.1).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let s2 = if points.len() > 2 { rss / (n - 2.0) } else { 0.0 };
    let se_slope = (s2 / sxx).sqrt();
    let se_intercept = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    let speed = slope.max(0.0).sqrt();
    let speed_se = if speed > 0.0 { se_slope / (2.0 * speed) } else { f64::INFINITY };
    let (rest_energy, rest_energy_se, degenerate) = if intercept < 0.0 {
        (0.0, f64::INFINITY, true)
    } else {
        let m = intercept.sqrt();
        (m, if m > 0.0 { se_intercept / (2.0 * m) } else { f64::INFINITY }, false)
    };
    Ok(DispersionFit {
        rest_energy,
        speed,
        rest_energy_se,
        speed_se,
        residual: (rss / n).sqrt(),
        degenerate,
    })
}
