use nalgebra::{Matrix5, Vector5};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spectrum::{fft_spectrum, Spectrum, Window};
use super::trace::EchoTrace;
use super::voigt::{voigt_profile, VoigtParams};
use crate::error::{Error, Result};

const N_PARAMS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative decrease of the residual sum of squares treated as converged.
    pub ftol: f64,
    /// Extra starts from randomly rescaled widths; 0 disables.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 500, ftol: 1e-14, restarts: 0, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VoigtFit {
    pub params: VoigtParams,
    pub rss: f64,
    pub iterations: usize,
}

fn to_vec(p: &VoigtParams) -> Vector5<f64> {
    Vector5::new(p.center_hz, p.sigma_hz, p.gamma_hz, p.amplitude, p.baseline)
}

fn from_vec(v: &Vector5<f64>) -> VoigtParams {
    VoigtParams { center_hz: v[0], sigma_hz: v[1], gamma_hz: v[2], amplitude: v[3], baseline: v[4] }
}

fn rss(freqs: &[f64], y: &[f64], p: &VoigtParams) -> f64 {
    freqs.iter().zip(y).map(|(f, y)| (p.eval(*f) - y).powi(2)).sum()
}

/// Keeps widths non-negative and not both zero.
fn project(v: &mut Vector5<f64>, prev: &Vector5<f64>) {
    v[1] = v[1].max(0.0);
    v[2] = v[2].max(0.0);
    if v[1] == 0.0 && v[2] == 0.0 {
        v[1] = 1e-3 * prev[1].max(prev[2]);
    }
}

/// Center at the argmax, widths from the second moment of the peak region,
/// baseline from the minimum.
pub fn initial_guess(freqs: &[f64], y: &[f64]) -> Result<VoigtParams> {
    if freqs.len() != y.len() || freqs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three spectral points".into()));
    }
    let k = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap();
    let base = y.iter().copied().fold(f64::INFINITY, f64::min);
    let peak = y[k] - base;
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument("spectrum has no peak".into()));
    }
    let c = freqs[k];
    let (mut lo, mut hi) = (k, k);
    while lo > 0 && y[lo - 1] - base > 0.1 * peak {
        lo -= 1;
    }
    while hi + 1 < y.len() && y[hi + 1] - base > 0.1 * peak {
        hi += 1;
    }
    let (mut w0, mut w2) = (0.0, 0.0);
    for j in lo..=hi {
        let w = y[j] - base;
        w0 += w;
        w2 += w * (freqs[j] - c).powi(2);
    }
    let step = (freqs[freqs.len() - 1] - freqs[0]).abs() / (freqs.len() - 1) as f64;
    let width = (w2 / w0).sqrt().max(0.5 * step);
    let (sigma, gamma) = (0.8 * width, 0.4 * width);
    Ok(VoigtParams { center_hz: c, sigma_hz: sigma, gamma_hz: gamma, amplitude: peak / voigt_profile(0.0, sigma, gamma), baseline: base })
}

fn levenberg_marquardt(freqs: &[f64], y: &[f64], init: &VoigtParams, opts: &LmOptions) -> Result<VoigtFit> {
    let mut p = to_vec(init);
    let mut cur = from_vec(&p);
    let mut ss = rss(freqs, y, &cur);
    let mut lambda = 1e-3;
    for iter in 1..=opts.max_iterations {
        let mut a = Matrix5::<f64>::zeros();
        let mut g = Vector5::<f64>::zeros();
        for (f, yv) in freqs.iter().zip(y) {
            let (m, grad) = cur.eval_with_gradient(*f);
            let j = Vector5::from(grad);
            a += j * j.transpose();
            g += j * (m - yv);
        }
        // widths resting on zero and pushed outward are held fixed
        let held: Vec<bool> = (0..N_PARAMS).map(|i| (i == 1 || i == 2) && p[i] == 0.0 && g[i] > 0.0).collect();
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = a;
            let mut rhs = -g;
            for i in 0..N_PARAMS {
                damped[(i, i)] += lambda * a[(i, i)].max(1e-300);
                if held[i] {
                    damped.row_mut(i).fill(0.0);
                    damped.column_mut(i).fill(0.0);
                    damped[(i, i)] = 1.0;
                    rhs[i] = 0.0;
                }
            }
            let Some(step) = damped.lu().solve(&rhs) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = p + step;
            project(&mut trial, &p);
            let tp = from_vec(&trial);
            let tss = rss(freqs, y, &tp);
            if tss.is_finite() && tss < ss {
                let small_step = (0..N_PARAMS).all(|i| (trial[i] - p[i]).abs() <= 1e-12 * (p[i].abs() + p[1] + p[2]));
                let decrease = (ss - tss) / ss.max(f64::MIN_POSITIVE);
                p = trial;
                cur = tp;
                ss = tss;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                if decrease < opts.ftol || small_step {
                    return Ok(VoigtFit { params: cur, rss: ss, iterations: iter });
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no downhill step at any damping: a stationary point
            return Ok(VoigtFit { params: cur, rss: ss, iterations: iter });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iterations, residual: ss, best: Box::new(cur) })
}

/// Least-squares Voigt fit. Deterministic for a given `init`; with
/// `restarts > 0` the best of additional seeded starts is returned.
pub fn fit_voigt(freqs: &[f64], y: &[f64], init: &VoigtParams, opts: &LmOptions) -> Result<VoigtFit> {
    if freqs.len() != y.len() {
        return Err(Error::InvalidArgument("frequency and magnitude lengths differ".into()));
    }
    if freqs.len() < 5 * N_PARAMS {
        return Err(Error::InvalidArgument(format!(
            "Voigt fit needs at least {} points, got {}",
            5 * N_PARAMS,
            freqs.len()
        )));
    }
    init.validate()?;
    let mut best = levenberg_marquardt(freqs, y, init, opts);
    if opts.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.restarts {
            let start = VoigtParams {
                sigma_hz: init.sigma_hz * rng.gen_range(0.25..4.0),
                gamma_hz: init.gamma_hz * rng.gen_range(0.25..4.0),
                ..*init
            };
            let r = levenberg_marquardt(freqs, y, &start, opts);
            best = match (best, r) {
                (Ok(b), Ok(r)) => Ok(if r.rss < b.rss { r } else { b }),
                (Err(_), Ok(r)) => Ok(r),
                (b, Err(_)) => b,
            };
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoFitOptions {
    pub window: Window,
    /// Half width of the fitted region in FWHMs of the initial guess.
    pub fit_span_fwhm: f64,
    pub lm: LmOptions,
}

impl Default for EchoFitOptions {
    fn default() -> Self {
        EchoFitOptions { window: Window::None, fit_span_fwhm: 6.0, lm: LmOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EchoFit {
    pub detuning_hz: f64,
    pub fit: VoigtFit,
    pub bin_hz: f64,
    pub points_fitted: usize,
}

/// Frequencies and magnitudes of `count` bins centered on storage index `k`,
/// unwrapped across the spectrum edge.
fn unwrapped_region(s: &Spectrum, k: usize, half: usize) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let period = n as f64 * s.df;
    let mut f = Vec::with_capacity(2 * half + 1);
    let mut y = Vec::with_capacity(2 * half + 1);
    for off in -(half as i64)..=(half as i64) {
        let j = k as i64 + off;
        let idx = j.rem_euclid(n as i64) as usize;
        let wraps = j.div_euclid(n as i64) as f64;
        f.push(s.freqs[idx] + wraps * period);
        y.push(s.magnitude[idx]);
    }
    (f, y)
}

/// Spectrum, initial guess, and Voigt fit of one echo; returns the detuning
/// folded into the Nyquist band.
pub fn fit_trace(trace: &EchoTrace, opts: &EchoFitOptions) -> Result<EchoFit> {
    let s = fft_spectrum(trace, opts.window);
    let n = s.len();
    let k = s.argmax();
    let max_half = (n - 1) / 2;
    let (f_all, y_all) = unwrapped_region(&s, k, max_half);
    let init = initial_guess(&f_all, &y_all)?;
    let half = ((opts.fit_span_fwhm * init.fwhm_hz() / s.df).ceil() as usize).clamp(3 * N_PARAMS, max_half);
    let (f, y) = unwrapped_region(&s, k, half);
    let fit = fit_voigt(&f, &y, &init, &opts.lm)?;
    let period = n as f64 * s.df;
    let mut c = fit.params.center_hz;
    c -= period * ((c + 0.5 * period) / period).floor();
    Ok(EchoFit { detuning_hz: c, fit, bin_hz: s.df, points_fitted: f.len() })
}
