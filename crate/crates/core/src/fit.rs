//! Parameter extraction from shift data: the single slope of df/d eps_11
//! against df/dA, and the three-parameter {K, beta_VRM, beta_shear} fit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::donor::{DonorSpecies, DonorTable, GAnisotropySource, ParameterSet, ShiftModelParams};
use crate::error::{Error, Result};
use crate::response::{beta_shear_theory, beta_vrm_theory, shear_angular, vrm_angular};
use crate::spin::{HalfInt, TransitionTable};
use crate::strain::{hydrostatic_fraction_110, ElasticConstants, STRAIN_GUARD};

/// Relative singular value below which a design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// One observed shift. Pre-reduced slope data use `eps11 = 1` and the
/// slope df/d eps_11 as `df_hz`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub donor: String,
    pub m_i: HalfInt,
    pub theta_rad: f64,
    pub eps11: f64,
    pub df_hz: f64,
}

impl MeasurementRecord {
    pub fn is_slope(&self) -> bool {
        self.eps11 == 1.0
    }

    pub fn validate(&self, donor: &DonorSpecies) -> Result<()> {
        if self.m_i.twice().abs() > donor.nuclear_spin.twice() {
            return Err(Error::InvalidArgument(format!("m_I = {} is not valid for {}", self.m_i, donor.name)));
        }
        if !self.is_slope() && !(self.eps11.abs() < STRAIN_GUARD) {
            return Err(Error::InvalidArgument(format!("strain {} outside the linear-elastic guard", self.eps11)));
        }
        if !(self.theta_rad.is_finite() && self.df_hz.is_finite()) {
            return Err(Error::InvalidArgument("non-finite angle or shift".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub rss: f64,
    pub residuals: Vec<f64>,
    pub condition_number: f64,
    pub dof: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        self.names.iter().position(|n| *n == name).map(|i| (self.params[i], self.std_errors[i]))
    }
}

/// Least squares through the SVD. `noise_sigma` replaces the residual-based
/// variance estimate when the per-point noise is known.
pub fn solve_least_squares(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[&'static str],
    noise_sigma: Option<f64>,
) -> Result<FitResult> {
    let (n, p) = design.shape();
    if n < p {
        return Err(Error::InvalidArgument(format!("{n} records cannot determine {p} parameters")));
    }
    // column scaling keeps the rank test independent of units
    let scales: Vec<f64> = (0..p).map(|j| design.column(j).norm()).collect();
    if let Some(j) = scales.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::DegenerateDesign { columns: vec![names[j]], condition: f64::INFINITY });
    }
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let (kmin, smin) = sv.iter().enumerate().fold((0, f64::INFINITY), |a, (i, s)| if *s < a.1 { (i, *s) } else { a });
    let condition = smax / smin;
    if !(smin > RANK_TOL * smax) {
        let vt = svd.v_t.as_ref().expect("requested V^T");
        let null = vt.row(kmin);
        let columns = (0..p).filter(|&j| null[j].abs() > 0.1).map(|j| names[j]).collect();
        return Err(Error::DegenerateDesign { columns, condition });
    }
    let z = svd.solve(y, 0.0).map_err(|e| Error::Degenerate(e.to_string()))?;
    let params: Vec<f64> = (0..p).map(|j| z[j] / scales[j]).collect();
    let fitted = design * DVector::from_column_slice(&params);
    let residuals: Vec<f64> = (y - fitted).iter().copied().collect();
    let rss = residuals.iter().map(|r| r * r).sum::<f64>();
    let dof = n - p;
    let var = match noise_sigma {
        Some(s) => s * s,
        None if dof > 0 => rss / dof as f64,
        None => 0.0,
    };
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let std_errors = (0..p)
        .map(|j| {
            let s: f64 = (0..p).map(|k| (vt[(k, j)] / sv[k]).powi(2)).sum();
            (var * s).sqrt() / scales[j]
        })
        .collect();
    Ok(FitResult { names: names.to_vec(), params, std_errors, rss, residuals, condition_number: condition, dof })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    /// dA/d eps_11, Hz.
    pub da_deps11_hz: f64,
    pub da_deps11_se_hz: f64,
    /// dA/d eps_hs, Hz.
    pub da_dhs_hz: f64,
    pub da_dhs_se_hz: f64,
    pub rss: f64,
    pub residuals: Vec<f64>,
    /// Diagnostic fit with an intercept (needs three or more transitions).
    pub with_intercept: Option<crate::echo::LineFit>,
}

impl SlopeFit {
    /// K = (dA/d eps_hs) / A0.
    pub fn k(&self, a0_hz: f64) -> (f64, f64) {
        (self.da_dhs_hz / a0_hz, self.da_dhs_se_hz / a0_hz)
    }
}

/// Through-origin regression of per-transition df/d eps_11 on df/dA.
pub fn fit_slope_vs_dfda(slopes_hz: &[f64], dfda: &[f64], c: &ElasticConstants) -> Result<SlopeFit> {
    let n = slopes_hz.len();
    if n != dfda.len() {
        return Err(Error::InvalidArgument("slope and sensitivity lengths differ".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 transitions, got {n}")));
    }
    let first = dfda[0];
    if dfda.iter().all(|x| (x - first).abs() <= 1e-12 * first.abs().max(1e-300)) {
        return Err(Error::DegenerateDesign { columns: vec!["dA/deps11"], condition: f64::INFINITY });
    }
    let sxx: f64 = dfda.iter().map(|x| x * x).sum();
    let sxy: f64 = dfda.iter().zip(slopes_hz).map(|(x, y)| x * y).sum();
    let b = sxy / sxx;
    let residuals: Vec<f64> = dfda.iter().zip(slopes_hz).map(|(x, y)| y - b * x).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let se = (rss / (n - 1) as f64 / sxx).sqrt();
    let h = hydrostatic_fraction_110(c);
    let with_intercept = if n >= 3 { crate::echo::ols_line(dfda, slopes_hz).ok() } else { None };
    Ok(SlopeFit {
        da_deps11_hz: b,
        da_deps11_se_hz: se,
        da_dhs_hz: b / h,
        da_dhs_se_hz: se / h,
        rss,
        residuals,
        with_intercept,
    })
}

pub const ANISOTROPY_COLUMNS: [&str; 3] = ["K", "beta_vrm", "beta_shear"];

/// One row of the linear model for the three fitted parameters.
pub fn anisotropy_row(a0_hz: f64, h110: f64, dfda: f64, dfdg_hz: f64, theta: f64, eps11: f64) -> [f64; 3] {
    [
        a0_hz * h110 * dfda * eps11,
        vrm_angular(theta) * dfdg_hz * eps11,
        shear_angular(theta) * dfdg_hz * eps11,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnisotropyFit {
    pub donor: String,
    pub k: f64,
    pub beta_vrm: f64,
    pub beta_shear: f64,
    pub result: FitResult,
}

impl AnisotropyFit {
    pub fn as_params(&self, template: &ShiftModelParams) -> ShiftModelParams {
        ShiftModelParams { k: self.k, beta_vrm: self.beta_vrm, beta_shear: self.beta_shear, errors: None, ..*template }
    }
}

/// Fits {K, beta_VRM, beta_shear} using the sensitivities of `table`, which
/// must hold the unstrained transitions of `donor`.
pub fn fit_anisotropy(
    records: &[MeasurementRecord],
    donor: &DonorSpecies,
    table: &TransitionTable,
    c: &ElasticConstants,
    noise_sigma: Option<f64>,
) -> Result<AnisotropyFit> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records".into()));
    }
    let h = hydrostatic_fraction_110(c);
    let mut design = DMatrix::zeros(records.len(), 3);
    let mut y = DVector::zeros(records.len());
    for (i, r) in records.iter().enumerate() {
        if !r.donor.eq_ignore_ascii_case(&donor.name) && !r.donor.eq_ignore_ascii_case(&donor.isotope) {
            return Err(Error::InvalidArgument(format!("record {i} is for {}, not {}", r.donor, donor.name)));
        }
        r.validate(donor)?;
        let tr = table.row(r.m_i).ok_or_else(|| {
            Error::InvalidArgument(format!("m_I = {} has no allowed transition at {} Hz", r.m_i, table.f_mw_hz))
        })?;
        let row = anisotropy_row(donor.a0_hz, h, tr.dfda, tr.dfdg_hz, r.theta_rad, r.eps11);
        for (j, v) in row.iter().enumerate() {
            design[(i, j)] = *v;
        }
        y[i] = r.df_hz;
    }
    let result = solve_least_squares(&design, &y, &ANISOTROPY_COLUMNS, noise_sigma)?;
    Ok(AnisotropyFit {
        donor: donor.name.clone(),
        k: result.params[0],
        beta_vrm: result.params[1],
        beta_shear: result.params[2],
        result,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: &'static str,
    pub fitted: f64,
    pub fitted_se: f64,
    pub theory: f64,
    pub theory_source: &'static str,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryComparison {
    pub donor: String,
    pub rows: Vec<ComparisonRow>,
}

/// Fitted values against the tight-binding K and the closed-form betas.
pub fn compare_with_theory(
    fit: &AnisotropyFit,
    donor: &DonorSpecies,
    table: &DonorTable,
    c: &ElasticConstants,
    source: GAnisotropySource,
) -> TheoryComparison {
    let tb = table.params(donor, ParameterSet::TightBinding, c, source);
    let valley = table.valley_params(donor, source);
    let se = |name| fit.result.get(name).map(|(_, s)| s).unwrap_or(0.0);
    let row = |quantity, fitted: f64, fitted_se, theory: f64, theory_source| ComparisonRow {
        quantity,
        fitted,
        fitted_se,
        theory,
        theory_source,
        ratio: fitted / theory,
    };
    TheoryComparison {
        donor: donor.name.clone(),
        rows: vec![
            row("K", fit.k, se("K"), tb.k, "tight-binding"),
            row("beta_vrm", fit.beta_vrm, se("beta_vrm"), beta_vrm_theory(&valley, c), "closed-form"),
            row("beta_shear", fit.beta_shear, se("beta_shear"), beta_shear_theory(&valley, c), "closed-form"),
        ],
    }
}
