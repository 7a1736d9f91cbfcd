use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::voigt::VoigtParams;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 64;

/// Uniformly sampled echo with its center time.
#[derive(Clone, Debug, PartialEq)]
pub struct EchoTrace {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    pub t0: f64,
}

impl EchoTrace {
    pub fn new(samples: Vec<Complex64>, dt: f64, t0: f64) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "trace needs at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidArgument(format!("bad sampling: dt = {dt}, t0 = {t0}")));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidArgument("trace contains non-finite samples".into()));
        }
        Ok(EchoTrace { samples, dt, t0 })
    }

    /// Builds a trace from explicit sample times, which must be uniform to
    /// 1e-6 of a step. The echo center is placed at the largest-magnitude sample.
    pub fn from_times(times: &[f64], samples: Vec<Complex64>) -> Result<Self> {
        if times.len() != samples.len() {
            return Err(Error::InvalidArgument("time and sample columns differ in length".into()));
        }
        if times.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "trace needs at least {MIN_SAMPLES} samples, got {}",
                times.len()
            )));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (k, w) in times.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt.abs() {
                return Err(Error::InvalidArgument(format!("non-uniform sampling at sample {}", k + 1)));
            }
        }
        let peak = samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let t0 = times[peak] - times[0];
        Self::new(samples, dt, t0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt
    }
}

/// Experimental timing defaults: 15 us echo delay, 130 ns pi pulse, 300
/// averages at a 9.7 GHz drive. Only `dt_s` and `samples` enter synthesis;
/// the rest is carried as metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SynthesisProfile {
    pub tau_s: f64,
    pub pi_pulse_s: f64,
    pub averages: u32,
    pub drive_hz: f64,
    pub dt_s: f64,
    pub samples: usize,
    pub lineshape: VoigtParams,
}

impl Default for SynthesisProfile {
    fn default() -> Self {
        SynthesisProfile {
            tau_s: 15e-6,
            pi_pulse_s: 130e-9,
            averages: 300,
            drive_hz: 9.7e9,
            dt_s: 1e-6,
            samples: 1024,
            lineshape: VoigtParams { center_hz: 0.0, sigma_hz: 5e3, gamma_hz: 2e3, amplitude: 1.0, baseline: 0.0 },
        }
    }
}

/// exp(i 2 pi detuning (t - t0)) times the inverse transform of the Voigt
/// shape, t0 = (n/2) dt. The envelope peak equals `lineshape.amplitude`;
/// the line center and baseline of `lineshape` are ignored.
pub fn synthesize_echo(detuning_hz: f64, lineshape: &VoigtParams, dt: f64, n: usize) -> Result<EchoTrace> {
    lineshape.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("trace needs at least {MIN_SAMPLES} samples, got {n}")));
    }
    if !(detuning_hz.abs() < 0.5 / dt) {
        return Err(Error::InvalidArgument(format!(
            "detuning {detuning_hz} Hz violates the Nyquist limit {} Hz",
            0.5 / dt
        )));
    }
    let t0 = (n / 2) as f64 * dt;
    let (s, g) = (lineshape.sigma_hz, lineshape.gamma_hz);
    let samples = (0..n)
        .map(|k| {
            let tau = (k as f64 - (n / 2) as f64) * dt;
            let env = lineshape.amplitude * (-2.0 * PI * PI * s * s * tau * tau - 2.0 * PI * g * tau.abs()).exp();
            env * Complex64::from_polar(1.0, 2.0 * PI * detuning_hz * tau)
        })
        .collect();
    EchoTrace::new(samples, dt, t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(sigma: f64, gamma: f64) -> VoigtParams {
        VoigtParams { center_hz: 0.0, sigma_hz: sigma, gamma_hz: gamma, amplitude: 1.0, baseline: 0.0 }
    }

    #[test]
    fn zero_detuning_is_real_and_symmetric() {
        let tr = synthesize_echo(0.0, &shape(5e3, 2e3), 1e-6, 256).unwrap();
        let c = 128;
        for k in 1..128 {
            assert_eq!(tr.samples[c + k].im, 0.0);
            assert_eq!(tr.samples[c + k].re, tr.samples[c - k].re);
        }
        assert_eq!(tr.samples[c].re, 1.0);
    }

    #[test]
    fn gaussian_envelope_when_gamma_zero() {
        let sigma = 4e3;
        let tr = synthesize_echo(1e4, &shape(sigma, 0.0), 1e-6, 256).unwrap();
        for (k, s) in tr.samples.iter().enumerate() {
            let tau = tr.time(k) - tr.t0;
            let g = (-2.0 * PI * PI * sigma * sigma * tau * tau).exp();
            assert!((s.norm() - g).abs() < 1e-14);
        }
    }

    #[test]
    fn nyquist_and_size_checks() {
        assert!(synthesize_echo(6e5, &shape(5e3, 2e3), 1e-6, 1024).is_err());
        assert!(synthesize_echo(0.0, &shape(5e3, 2e3), 1e-6, 32).is_err());
        assert!(synthesize_echo(0.0, &shape(0.0, 0.0), 1e-6, 128).is_err());
    }

    #[test]
    fn from_times_checks_uniformity() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 1e-6).collect();
        let mut s = vec![Complex64::new(0.1, 0.0); 100];
        s[40] = Complex64::new(1.0, 0.0);
        let tr = EchoTrace::from_times(&t, s.clone()).unwrap();
        assert!((tr.t0 - 40e-6).abs() < 1e-15);
        let mut bad = t.clone();
        bad[50] += 3e-7;
        assert!(EchoTrace::from_times(&bad, s).is_err());
    }
}
