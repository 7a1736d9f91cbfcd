//! Donor species constants and the shipped response-parameter sets.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::response::{beta_shear_theory, beta_vrm_theory, vrm_l_coefficient, ValleyModelParams};
use crate::spin::HalfInt;
use crate::strain::ElasticConstants;

/// Default constants file, compiled in.
pub const DEFAULT_DONORS_TOML: &str = include_str!("../data/donors.toml");

/// Which of the three per-donor response parameter sets a number came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParameterSet {
    Experimental,
    TightBinding,
    VrmAnalytic,
}

impl ParameterSet {
    pub const ALL: [ParameterSet; 3] = [
        ParameterSet::Experimental,
        ParameterSet::TightBinding,
        ParameterSet::VrmAnalytic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParameterSet::Experimental => "experimental",
            ParameterSet::TightBinding => "tight-binding",
            ParameterSet::VrmAnalytic => "vrm-analytic",
        }
    }
}

impl fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParameterSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "experimental" | "exp" => Ok(ParameterSet::Experimental),
            "tight-binding" | "tb" => Ok(ParameterSet::TightBinding),
            "vrm-analytic" | "vrm" => Ok(ParameterSet::VrmAnalytic),
            other => Err(Error::InvalidArgument(format!(
                "unknown parameter set `{other}` (expected experimental, tight-binding or vrm-analytic)"
            ))),
        }
    }
}

/// One-sigma uncertainties attached to an experimental parameter set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    pub k: f64,
    pub beta_vrm: f64,
    pub beta_shear: f64,
}

/// Strain-response coefficients: the hyperfine expansion (K, L, N) and the
/// two g-factor anisotropy strengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftModelParams {
    pub k: f64,
    pub l: f64,
    pub n: f64,
    pub beta_vrm: f64,
    pub beta_shear: f64,
    pub provenance: ParameterSet,
    pub errors: Option<ParamErrors>,
}

impl ShiftModelParams {
    pub fn new(k: f64, l: f64, n: f64, beta_vrm: f64, beta_shear: f64, provenance: ParameterSet) -> Self {
        ShiftModelParams { k, l, n, beta_vrm, beta_shear, provenance, errors: None }
    }
}

/// Which g_par - g_perp value the theory betas use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GAnisotropySource {
    #[default]
    Literature,
    TightBinding,
}

impl FromStr for GAnisotropySource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "literature" => Ok(GAnisotropySource::Literature),
            "tight-binding" | "tb" => Ok(GAnisotropySource::TightBinding),
            other => Err(Error::InvalidArgument(format!("unknown g-anisotropy source `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DonorSpecies {
    pub name: String,
    pub isotope: String,
    pub nuclear_spin: HalfInt,
    pub a0_hz: f64,
    pub g_e: f64,
    pub g_n: f64,
    pub delta_ev: f64,
    pub g_par_minus_perp: f64,
    pub g_par_minus_perp_tb: Option<f64>,
    experimental: RawParams,
    tight_binding: RawParams,
}

impl DonorSpecies {
    /// Donor with no response data attached, for spin-only work.
    pub fn bare(name: &str, nuclear_spin: f64, a0_hz: f64, g_e: f64, g_n: f64, delta_ev: f64) -> Result<Self> {
        let d = DonorSpecies {
            name: name.to_string(),
            isotope: name.to_string(),
            nuclear_spin: HalfInt::from_f64(nuclear_spin)?,
            a0_hz,
            g_e,
            g_n,
            delta_ev,
            g_par_minus_perp: 0.0,
            g_par_minus_perp_tb: None,
            experimental: RawParams::default(),
            tight_binding: RawParams::default(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let i2 = self.nuclear_spin.twice();
        if i2 < 1 {
            return Err(Error::Config(format!("{}: nuclear spin must be >= 1/2", self.name)));
        }
        if !(self.a0_hz > 0.0 && self.a0_hz.is_finite()) {
            return Err(Error::Config(format!("{}: A0 must be positive", self.name)));
        }
        if !(self.delta_ev > 0.0 && self.delta_ev.is_finite()) {
            return Err(Error::Config(format!("{}: Delta must be positive", self.name)));
        }
        if !self.g_e.is_finite() || !self.g_n.is_finite() {
            return Err(Error::Config(format!("{}: g-factors must be finite", self.name)));
        }
        Ok(())
    }

    /// Number of nuclear projections, 2I+1.
    pub fn multiplicity(&self) -> usize {
        (self.nuclear_spin.twice() + 1) as usize
    }

    pub fn g_anisotropy(&self, source: GAnisotropySource) -> f64 {
        match source {
            GAnisotropySource::Literature => self.g_par_minus_perp,
            GAnisotropySource::TightBinding => self
                .g_par_minus_perp_tb
                .unwrap_or(self.g_par_minus_perp),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "K", default)]
    k: f64,
    #[serde(rename = "K_err")]
    k_err: Option<f64>,
    #[serde(rename = "L", default)]
    l: f64,
    #[serde(rename = "N", default)]
    n: f64,
    beta_vrm: Option<f64>,
    beta_vrm_err: Option<f64>,
    beta_shear: Option<f64>,
    beta_shear_err: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDonor {
    name: String,
    isotope: Option<String>,
    #[serde(rename = "I")]
    nuclear_spin: f64,
    #[serde(rename = "A0_Hz")]
    a0_hz: f64,
    g_e: f64,
    g_n: f64,
    #[serde(rename = "Delta_eV")]
    delta_ev: f64,
    #[serde(default)]
    g_par_minus_perp: f64,
    g_par_minus_perp_tb: Option<f64>,
    experimental: RawParams,
    tight_binding: RawParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    version: String,
    #[serde(rename = "xi_u_eV")]
    xi_u_ev: f64,
    c_shear: f64,
    donor: Vec<RawDonor>,
}

/// Parsed constants file: shared valley constants plus every donor.
#[derive(Clone, Debug)]
pub struct DonorTable {
    pub version: String,
    pub xi_u_ev: f64,
    pub c_shear: f64,
    donors: BTreeMap<String, DonorSpecies>,
    order: Vec<String>,
}

impl DonorTable {
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_DONORS_TOML).expect("bundled donor constants parse")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let raw: RawTable = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if !(raw.xi_u_ev > 0.0) {
            return Err(Error::Config("xi_u_eV must be positive".into()));
        }
        let mut donors = BTreeMap::new();
        let mut order = Vec::new();
        for d in raw.donor {
            let species = DonorSpecies {
                isotope: d.isotope.unwrap_or_else(|| d.name.clone()),
                name: d.name.clone(),
                nuclear_spin: HalfInt::from_f64(d.nuclear_spin)
                    .map_err(|e| Error::Config(format!("{}: {e}", d.name)))?,
                a0_hz: d.a0_hz,
                g_e: d.g_e,
                g_n: d.g_n,
                delta_ev: d.delta_ev,
                g_par_minus_perp: d.g_par_minus_perp,
                g_par_minus_perp_tb: d.g_par_minus_perp_tb,
                experimental: d.experimental,
                tight_binding: d.tight_binding,
            };
            species.validate()?;
            for (set, p) in [("experimental", &species.experimental), ("tight_binding", &species.tight_binding)] {
                let vals = [p.k, p.l, p.n, p.beta_vrm.unwrap_or(0.0), p.beta_shear.unwrap_or(0.0)];
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("{}.{set}: non-finite coefficient", species.name)));
                }
            }
            if donors.insert(d.name.clone(), species).is_some() {
                return Err(Error::Config(format!("duplicate donor `{}`", d.name)));
            }
            order.push(d.name);
        }
        Ok(DonorTable { version: raw.version, xi_u_ev: raw.xi_u_ev, c_shear: raw.c_shear, donors, order })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    pub fn donors(&self) -> impl Iterator<Item = &DonorSpecies> {
        self.order.iter().map(move |n| &self.donors[n])
    }

    pub fn get(&self, name: &str) -> Result<&DonorSpecies> {
        self.donors
            .get(name)
            .or_else(|| self.donors.values().find(|d| d.name.eq_ignore_ascii_case(name) || d.isotope.eq_ignore_ascii_case(name)))
            .ok_or_else(|| Error::UnknownDonor {
                name: name.to_string(),
                known: self.order.join(", "),
            })
    }

    pub fn valley_params(&self, donor: &DonorSpecies, source: GAnisotropySource) -> ValleyModelParams {
        ValleyModelParams {
            xi_u_ev: self.xi_u_ev,
            delta_ev: donor.delta_ev,
            g_par_minus_perp: donor.g_anisotropy(source),
            c_shear: self.c_shear,
        }
    }

    /// Resolves one named parameter set. Missing betas are filled from the
    /// closed-form theory; the VRM-analytic set is always derived.
    pub fn params(
        &self,
        donor: &DonorSpecies,
        set: ParameterSet,
        elastic: &ElasticConstants,
        source: GAnisotropySource,
    ) -> ShiftModelParams {
        let valley = self.valley_params(donor, source);
        let bv = beta_vrm_theory(&valley, elastic);
        let bs = beta_shear_theory(&valley, elastic);
        match set {
            ParameterSet::VrmAnalytic => {
                ShiftModelParams::new(0.0, vrm_l_coefficient(&valley), 0.0, bv, bs, set)
            }
            ParameterSet::Experimental | ParameterSet::TightBinding => {
                let raw = if set == ParameterSet::Experimental {
                    &donor.experimental
                } else {
                    &donor.tight_binding
                };
                let errors = raw.k_err.map(|k| ParamErrors {
                    k,
                    beta_vrm: raw.beta_vrm_err.unwrap_or(0.0),
                    beta_shear: raw.beta_shear_err.unwrap_or(0.0),
                });
                ShiftModelParams {
                    k: raw.k,
                    l: raw.l,
                    n: raw.n,
                    beta_vrm: raw.beta_vrm.unwrap_or(bv),
                    beta_shear: raw.beta_shear.unwrap_or(bs),
                    provenance: set,
                    errors,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_four_donors() {
        let t = DonorTable::builtin();
        let names: Vec<&str> = t.names().collect();
        assert_eq!(names, vec!["P", "As", "Sb", "Bi"]);
        let spins: Vec<i32> = t.donors().map(|d| d.nuclear_spin.twice()).collect();
        assert_eq!(spins, vec![1, 3, 5, 9]);
    }

    #[test]
    fn bismuth_hyperfine() {
        let t = DonorTable::builtin();
        let bi = t.get("Bi").unwrap();
        assert_eq!(bi.a0_hz, 1.4754e9);
        assert_eq!(bi.delta_ev, 41e-3);
        assert_eq!(t.get("bi").unwrap().name, "Bi");
        assert_eq!(t.get("209Bi").unwrap().name, "Bi");
    }

    #[test]
    fn unknown_donor_lists_known() {
        let t = DonorTable::builtin();
        let err = t.get("Li").unwrap_err().to_string();
        for n in ["P", "As", "Sb", "Bi"] {
            assert!(err.contains(n), "{err}");
        }
    }

    #[test]
    fn all_shipped_l_negative() {
        let t = DonorTable::builtin();
        let c = ElasticConstants::default();
        for d in t.donors() {
            for set in ParameterSet::ALL {
                let p = t.params(d, set, &c, GAnisotropySource::Literature);
                assert!(p.l < 0.0, "{} {set}", d.name);
                assert_eq!(p.provenance, set);
            }
        }
    }

    #[test]
    fn rejects_bad_constants() {
        let bad = DEFAULT_DONORS_TOML.replacen("A0_Hz = 117.53e6", "A0_Hz = -1.0", 1);
        assert!(DonorTable::from_toml_str(&bad).is_err());
        let bad = DEFAULT_DONORS_TOML.replacen("I = 0.5", "I = 0.7", 1);
        assert!(DonorTable::from_toml_str(&bad).is_err());
    }

    #[test]
    fn parameter_set_names() {
        for s in ParameterSet::ALL {
            assert_eq!(s.as_str().parse::<ParameterSet>().unwrap(), s);
        }
    }
}
