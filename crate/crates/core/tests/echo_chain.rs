use donor_strain::echo::{
    extract_shift_series, fft_spectrum, fit_trace, synthesize_echo, EchoFitOptions, EchoTrace, VoigtParams, Window,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const DT: f64 = 2.5e-7;
const N: usize = 4096;

fn shape(sigma: f64, gamma: f64) -> VoigtParams {
    VoigtParams { center_hz: 0.0, sigma_hz: sigma, gamma_hz: gamma, amplitude: 1.0, baseline: 0.0 }
}

/// 10 detunings across (-0.4, 0.4)/dt times 10 lineshapes whose widths span 100x.
pub fn grid() -> Vec<(f64, f64, f64)> {
    let mut cases = Vec::new();
    for i in 0..10 {
        let det = (-0.4 + 0.8 * (i as f64 + 0.37) / 10.0) / DT;
        for j in 0..10 {
            let w = 1.5e3 * 100f64.powf(j as f64 / 9.0);
            let mix = [0.0, 0.25, 0.5, 1.0, 2.0][j % 5];
            cases.push((det, w, mix * w));
        }
    }
    cases
}

#[test]
fn roundtrip_grid() {
    let mut worst: f64 = 0.0;
    for (det, s, g) in grid() {
        let tr = synthesize_echo(det, &shape(s, g), DT, N).unwrap();
        let r = fit_trace(&tr, &EchoFitOptions::default()).unwrap();
        let err = (r.detuning_hz - det).abs() / r.bin_hz;
        println!("det {det:10.1} sigma {s:9.1} gamma {g:9.1} err {err:.2e} bins");
        worst = worst.max(err);
    }
    println!("worst {worst:.3e}");
    assert!(worst < 0.01);
}

fn add_noise(tr: &EchoTrace, rms: f64, rng: &mut ChaCha8Rng) -> EchoTrace {
    // complex white noise with total RMS `rms`
    let d = Normal::new(0.0, rms / 2f64.sqrt()).unwrap();
    let samples = tr.samples.iter().map(|s| s + Complex64::new(d.sample(rng), d.sample(rng))).collect();
    EchoTrace::new(samples, tr.dt, tr.t0).unwrap()
}

#[test]
fn noisy_recovery_at_20_db() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let clean = synthesize_echo(5e4, &shape(5e3, 2e3), 1e-6, 1024).unwrap();
    // 20 dB: envelope peak / noise RMS = 10
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let tr = add_noise(&clean, 0.1, &mut rng);
        let r = fit_trace(&tr, &EchoFitOptions::default()).unwrap();
        worst = worst.max((r.detuning_hz - 5e4).abs() / r.bin_hz);
    }
    assert!(worst < 2.0, "worst {worst} bins");
}

#[test]
fn hann_window_keeps_center() {
    let tr = synthesize_echo(-3.1e4, &shape(4e3, 1e3), 1e-6, 1024).unwrap();
    let opts = EchoFitOptions { window: Window::Hann, ..Default::default() };
    let r = fit_trace(&tr, &opts).unwrap();
    assert!((r.detuning_hz + 3.1e4).abs() < 0.05 * r.bin_hz);
}

#[test]
fn pure_limits_fit_exact_shape() {
    // the fitted spectrum itself, not just the center, follows the closed forms
    let tr = synthesize_echo(1e4, &shape(6e3, 0.0), 1e-6, 1024).unwrap();
    let s = fft_spectrum(&tr, Window::None);
    let k = s.argmax();
    let g = donor_strain::echo::gaussian(s.freqs[k] - 1e4, 6e3);
    assert!((s.magnitude[k] - g).abs() < 1e-8 * g);
}

#[test]
fn shift_series_recovers_bi_slope() {
    let slope = 5.4e9;
    let strains: Vec<f64> = (0..5).map(|k| -1.45e-5 * k as f64).collect();
    let traces: Vec<EchoTrace> =
        strains.iter().map(|e| synthesize_echo(slope * e, &shape(5e3, 2e3), 1e-6, 1024).unwrap()).collect();
    let s = extract_shift_series(&traces, &strains, &EchoFitOptions::default()).unwrap();
    let tol = (3.0 * s.line.slope_se).max(1e-6 * slope);
    assert!((s.line.slope - slope).abs() < tol, "{:?}", s.line);
    assert!(s.line.intercept.abs() < 1.0);
}

#[test]
fn shift_series_zero_and_short() {
    let strains = [0.0, -1e-5, -2e-5];
    let traces: Vec<EchoTrace> = strains.iter().map(|_| synthesize_echo(0.0, &shape(5e3, 2e3), 1e-6, 1024).unwrap()).collect();
    let s = extract_shift_series(&traces, &strains, &EchoFitOptions::default()).unwrap();
    assert!(s.line.slope.abs() < 1e-3);
    assert!(s.detunings_hz.iter().all(|d| d.abs() < 1e-6));
    assert!(extract_shift_series(&traces[..2], &strains[..2], &EchoFitOptions::default()).is_err());
}

#[test]
fn common_offset_moves_intercept_only() {
    let strains: Vec<f64> = (0..4).map(|k| -1e-5 * k as f64).collect();
    let make = |off: f64| -> Vec<EchoTrace> {
        strains.iter().map(|e| synthesize_echo(3e9 * e + off, &shape(5e3, 2e3), 1e-6, 1024).unwrap()).collect()
    };
    let a = extract_shift_series(&make(0.0), &strains, &EchoFitOptions::default()).unwrap();
    let b = extract_shift_series(&make(7.5e3), &strains, &EchoFitOptions::default()).unwrap();
    assert!((a.line.slope - b.line.slope).abs() < 1e-6 * a.line.slope.abs());
    assert!((b.line.intercept - a.line.intercept - 7.5e3).abs() < 0.01);
}
