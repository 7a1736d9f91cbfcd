use std::f64::consts::{PI, SQRT_2};

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Voigt line: `baseline + amplitude * V(f - center)` with V normalized to
/// unit area. `sigma_hz` is the Gaussian standard deviation and `gamma_hz`
/// the Lorentzian half width at half maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoigtParams {
    pub center_hz: f64,
    pub sigma_hz: f64,
    pub gamma_hz: f64,
    pub amplitude: f64,
    pub baseline: f64,
}

impl VoigtParams {
    pub fn new(center_hz: f64, sigma_hz: f64, gamma_hz: f64, amplitude: f64, baseline: f64) -> Result<Self> {
        let p = VoigtParams { center_hz, sigma_hz, gamma_hz, amplitude, baseline };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.center_hz, self.sigma_hz, self.gamma_hz, self.amplitude, self.baseline];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Voigt parameters must be finite".into()));
        }
        if self.sigma_hz < 0.0 || self.gamma_hz < 0.0 || (self.sigma_hz == 0.0 && self.gamma_hz == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Voigt widths must be non-negative and not both zero (sigma {}, gamma {})",
                self.sigma_hz, self.gamma_hz
            )));
        }
        Ok(())
    }

    pub fn eval(&self, f: f64) -> f64 {
        self.baseline + self.amplitude * voigt_profile(f - self.center_hz, self.sigma_hz, self.gamma_hz)
    }

    /// Value and gradient with respect to (center, sigma, gamma, amplitude, baseline).
    pub fn eval_with_gradient(&self, f: f64) -> (f64, [f64; 5]) {
        let (v, dx, ds, dg) = profile_with_derivatives(f - self.center_hz, self.sigma_hz, self.gamma_hz);
        let a = self.amplitude;
        (self.baseline + a * v, [-a * dx, a * ds, a * dg, v, 1.0])
    }

    /// Full width at half maximum (Olivero-Longbothum approximation).
    pub fn fwhm_hz(&self) -> f64 {
        let fg = 2.0 * (2.0 * 2f64.ln()).sqrt() * self.sigma_hz;
        let fl = 2.0 * self.gamma_hz;
        0.5346 * fl + (0.2166 * fl * fl + fg * fg).sqrt()
    }
}

pub fn gaussian(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}

pub fn lorentzian(x: f64, gamma: f64) -> f64 {
    gamma / (PI * (x * x + gamma * gamma))
}

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
pub fn faddeeva(z: Complex64) -> Complex64 {
    z.w()
}

/// Unit-area Voigt profile, Re w(z) / (sigma sqrt(2 pi)) with
/// z = (x + i gamma) / (sigma sqrt 2).
pub fn voigt_profile(x: f64, sigma: f64, gamma: f64) -> f64 {
    if sigma == 0.0 {
        return lorentzian(x, gamma);
    }
    let z = Complex64::new(x, gamma) / (sigma * SQRT_2);
    faddeeva(z).re / (sigma * (2.0 * PI).sqrt())
}

/// (V, dV/dx, dV/dsigma, dV/dgamma).
pub fn profile_with_derivatives(x: f64, sigma: f64, gamma: f64) -> (f64, f64, f64, f64) {
    if sigma == 0.0 {
        let d = x * x + gamma * gamma;
        let v = gamma / (PI * d);
        let dx = -2.0 * gamma * x / (PI * d * d);
        let dg = (x * x - gamma * gamma) / (PI * d * d);
        return (v, dx, 0.0, dg);
    }
    let s2 = sigma * SQRT_2;
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let z = Complex64::new(x, gamma) / s2;
    let w = faddeeva(z);
    let dw = -2.0 * z * w + Complex64::new(0.0, 2.0 / SQRT_PI);
    let v = w.re * norm;
    let dx = dw.re / s2 * norm;
    let dg = (dw * Complex64::i()).re / s2 * norm;
    let ds = (dw * (-z / sigma)).re * norm - v / sigma;
    (v, dx, ds, dg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent route: w(z) = (i/pi) * integral exp(-t^2) / (z - t) dt for
    /// Im z > 0, by composite Simpson on a wide grid.
    fn faddeeva_quadrature(z: Complex64) -> Complex64 {
        let (a, b, n) = (-12.0, 12.0, 240_000);
        let h = (b - a) / n as f64;
        let f = |t: f64| (-t * t).exp() / (z - t);
        let mut s = f(a) + f(b);
        for k in 1..n {
            let t = a + k as f64 * h;
            s += f(t) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0 * Complex64::i() / PI
    }

    #[test]
    fn faddeeva_matches_quadrature() {
        for (x, y) in [(0.0, 0.5), (1.3, 0.7), (-2.1, 1.5), (3.0, 0.9), (0.2, 3.0)] {
            let z = Complex64::new(x, y);
            let a = faddeeva(z);
            let b = faddeeva_quadrature(z);
            assert!((a - b).norm() < 1e-9 * b.norm(), "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn unit_area() {
        let (sigma, gamma) = (1.0, 0.3);
        let h = 0.005;
        let s: f64 = (-200_000..=200_000).map(|k| voigt_profile(k as f64 * h, sigma, gamma)).sum::<f64>() * h;
        // Lorentzian tails beyond |x| = 1000 hold 2 gamma / (pi 1000) of the area
        assert!((s - 1.0 + 2.0 * gamma / (PI * 1000.0)).abs() < 1e-6, "{s}");
    }

    #[test]
    fn gaussian_limit() {
        for k in -40..=40 {
            let x = k as f64 * 0.1;
            assert!((voigt_profile(x, 1.0, 0.0) - gaussian(x, 1.0)).abs() < 1e-8);
            assert!((voigt_profile(x, 1.0, 1e-10) - gaussian(x, 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn lorentzian_limit() {
        for k in -40..=40 {
            let x = k as f64 * 0.1;
            assert_eq!(voigt_profile(x, 0.0, 0.7), lorentzian(x, 0.7));
            assert!((voigt_profile(x, 1e-9, 0.7) - lorentzian(x, 0.7)).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = VoigtParams::new(1.2e4, 3e3, 2e3, 5.0, 0.1).unwrap();
        for f in [0.0, 1.0e4, 1.25e4, 2.0e4] {
            let (_, g) = p.eval_with_gradient(f);
            let steps = [1.0, 1.0, 1.0, 1e-4, 1e-4];
            for i in 0..5 {
                let mut a = [p.center_hz, p.sigma_hz, p.gamma_hz, p.amplitude, p.baseline];
                let mut b = a;
                a[i] += steps[i];
                b[i] -= steps[i];
                let pa = VoigtParams { center_hz: a[0], sigma_hz: a[1], gamma_hz: a[2], amplitude: a[3], baseline: a[4] };
                let pb = VoigtParams { center_hz: b[0], sigma_hz: b[1], gamma_hz: b[2], amplitude: b[3], baseline: b[4] };
                let fd = (pa.eval(f) - pb.eval(f)) / (2.0 * steps[i]);
                assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-12), "param {i} at {f}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn lorentzian_branch_gradient() {
        let (_, dx, ds, dg) = profile_with_derivatives(0.4, 0.0, 0.7);
        let h = 1e-6;
        assert!((dx - (lorentzian(0.4 + h, 0.7) - lorentzian(0.4 - h, 0.7)) / (2.0 * h)).abs() < 1e-8);
        assert!((dg - (lorentzian(0.4, 0.7 + h) - lorentzian(0.4, 0.7 - h)) / (2.0 * h)).abs() < 1e-8);
        assert_eq!(ds, 0.0);
    }

    #[test]
    fn rejects_bad_widths() {
        assert!(VoigtParams::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(VoigtParams::new(0.0, -1.0, 1.0, 1.0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 200, rng_seed: proptest::test_runner::RngSeed::Fixed(5), ..ProptestConfig::default() })]

        #[test]
        fn symmetric_and_monotone(x in 0.0f64..20.0, dx in 1e-3f64..5.0, sigma in 0.05f64..5.0, gamma in 0.0f64..5.0) {
            let v = voigt_profile(x, sigma, gamma);
            prop_assert!((v - voigt_profile(-x, sigma, gamma)).abs() <= 1e-14 * v.max(1e-300));
            prop_assert!(voigt_profile(x + dx, sigma, gamma) <= v);
        }
    }
}
