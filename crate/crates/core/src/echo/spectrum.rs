use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::trace::EchoTrace;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl std::str::FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Window::None),
            "hann" => Ok(Window::Hann),
            _ => Err(Error::InvalidArgument(format!("unknown window `{s}` (none, hann)"))),
        }
    }
}

/// Frequency-domain echo, zero detuning at the center. `values` are scaled
/// by dt and phase-referenced to the echo center, so a symmetric envelope
/// gives a real spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub magnitude: Vec<f64>,
    pub df: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// sum |X|^2 df.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.df
    }

    pub fn argmax(&self) -> usize {
        self.magnitude
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }
}

pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect()
}

/// Signed FFT bin index of storage position `i`.
fn bin(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub fn fft_spectrum(trace: &EchoTrace, window: Window) -> Spectrum {
    let n = trace.len();
    let mut buf: Vec<Complex64> = match window {
        Window::None => trace.samples.clone(),
        Window::Hann => trace.samples.iter().zip(hann(n)).map(|(s, w)| s * w).collect(),
    };
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * trace.dt);
    let shift = n - n / 2;
    let mut freqs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let i = (j + shift) % n;
        let f = bin(i, n) as f64 * df;
        freqs.push(f);
        values.push(buf[i] * trace.dt * Complex64::from_polar(1.0, 2.0 * PI * f * trace.t0));
    }
    let magnitude = values.iter().map(|v| v.norm()).collect();
    Spectrum { freqs, values, magnitude, df }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::{synthesize_echo, VoigtParams};

    #[test]
    fn axis_is_centered_and_increasing() {
        for n in [64usize, 65] {
            let tr = EchoTrace::new(vec![Complex64::new(1.0, 0.0); n], 1e-6, 0.0).unwrap();
            let s = fft_spectrum(&tr, Window::None);
            assert!(s.freqs.windows(2).all(|w| (w[1] - w[0] - s.df).abs() < 1e-9));
            assert!(s.freqs.contains(&0.0));
            assert!(s.freqs[0] < 0.0 && *s.freqs.last().unwrap() > 0.0);
        }
    }

    #[test]
    fn constant_trace_single_bin() {
        let tr = EchoTrace::new(vec![Complex64::new(2.0, 0.0); 128], 1e-6, 0.0).unwrap();
        let s = fft_spectrum(&tr, Window::None);
        let zero = s.freqs.iter().position(|&f| f == 0.0).unwrap();
        for (k, m) in s.magnitude.iter().enumerate() {
            if k != zero {
                assert!(*m < 1e-12 * s.magnitude[zero]);
            }
        }
    }

    #[test]
    fn tone_on_bin() {
        let n = 256;
        let dt = 1e-6;
        let f0 = 17.0 / (n as f64 * dt);
        let samples = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * f0 * k as f64 * dt)).collect();
        let s = fft_spectrum(&EchoTrace::new(samples, dt, 0.0).unwrap(), Window::None);
        let k = s.argmax();
        assert!((s.freqs[k] - f0).abs() < 1e-6);
        let others: f64 = s.magnitude.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, m)| m).sum();
        assert!(others < 1e-10 * s.magnitude[k]);
    }

    #[test]
    fn parseval() {
        let shape = VoigtParams { center_hz: 0.0, sigma_hz: 7e3, gamma_hz: 3e3, amplitude: 2.0, baseline: 0.0 };
        let tr = synthesize_echo(3.3e4, &shape, 1e-6, 1000).unwrap();
        for w in [Window::None, Window::Hann] {
            let s = fft_spectrum(&tr, w);
            let e_t = match w {
                Window::None => tr.energy(),
                Window::Hann => tr.samples.iter().zip(hann(tr.len())).map(|(x, h)| (x * h).norm_sqr()).sum::<f64>() * tr.dt,
            };
            assert!((s.energy() / e_t - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn synthesized_peak_within_one_bin() {
        let shape = VoigtParams { center_hz: 0.0, sigma_hz: 5e3, gamma_hz: 2e3, amplitude: 1.0, baseline: 0.0 };
        let tr = synthesize_echo(5e4, &shape, 1e-6, 1024).unwrap();
        let s = fft_spectrum(&tr, Window::None);
        assert!((s.freqs[s.argmax()] - 5e4).abs() <= s.df);
    }

    #[test]
    fn zero_detuning_spectrum_is_real() {
        let shape = VoigtParams { center_hz: 0.0, sigma_hz: 5e3, gamma_hz: 2e3, amplitude: 1.0, baseline: 0.0 };
        let tr = synthesize_echo(0.0, &shape, 1e-6, 1024).unwrap();
        let s = fft_spectrum(&tr, Window::None);
        let peak = s.values[s.argmax()].re;
        // the one unpaired sample at -n/2 dt leaves a tiny imaginary part
        assert!(s.values.iter().all(|v| v.im.abs() < 1e-4 * peak));
    }
}
