//! Linear elasticity of cubic silicon: uniaxial stress along [001] or [110]
//! to strain, the inverse Hooke map, and the hydrostatic / uniaxial / shear
//! split of a strain tensor.
//!
//! Strains use the tensor shear convention (eps_xy, not the engineering
//! gamma_xy = 2 eps_xy). Compressive stress and strain are negative.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix6, Vector6};
use serde::{Deserialize, Serialize, Serializer};

use crate::constants::G_GRAV;
use crate::error::{Error, Result};

/// Largest strain component accepted by [`StrainTensor`].
pub const STRAIN_GUARD: f64 = 1e-2;

/// Largest uniaxial stress accepted by the stress-to-strain maps, Pa.
pub const STRESS_GUARD_PA: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticConstants {
    pub c11: f64,
    pub c12: f64,
    pub c44: f64,
}

impl Default for ElasticConstants {
    fn default() -> Self {
        Self::SILICON
    }
}

impl ElasticConstants {
    /// Bulk silicon: c11 = 166 GPa, c12 = 64 GPa, c44 = 79.6 GPa.
    pub const SILICON: ElasticConstants = ElasticConstants { c11: 166e9, c12: 64e9, c44: 79.6e9 };

    pub fn new(c11: f64, c12: f64, c44: f64) -> Result<Self> {
        let c = ElasticConstants { c11, c12, c44 };
        c.validate()?;
        Ok(c)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "si" | "si-paper" => Ok(Self::SILICON),
            _ => Err(Error::InvalidArgument(format!("unknown elastic preset `{name}` (known: si)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c11 > self.c12 && self.c12 > 0.0 && self.c44 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "elastic constants must satisfy c11 > c12 > 0 and c44 > 0, got {self:?}"
            )));
        }
        Ok(())
    }

    fn d110(&self) -> f64 {
        (self.c11 - self.c12) * (self.c11 + 2.0 * self.c12) + 2.0 * self.c11 * self.c44
    }

    /// eps_xx = eps_yy = k1 eps_par under [110] stress.
    pub fn k1(&self) -> f64 {
        2.0 * self.c11 * self.c44 / self.d110()
    }

    /// eps_zz = -k2 eps_par under [110] stress.
    pub fn k2(&self) -> f64 {
        4.0 * self.c12 * self.c44 / self.d110()
    }

    /// (c11 - c12) / (c11 + c12); the [001] hydrostatic fraction is k/3.
    pub fn k001(&self) -> f64 {
        (self.c11 - self.c12) / (self.c11 + self.c12)
    }

    /// 6x6 stiffness in Voigt order (xx, yy, zz, yz, xz, xy) acting on
    /// engineering shears.
    pub fn stiffness(&self) -> Matrix6<f64> {
        let mut c = Matrix6::zeros();
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] = if i == j { self.c11 } else { self.c12 };
            }
            c[(i + 3, i + 3)] = self.c44;
        }
        c
    }
}

/// Symmetric strain tensor in the cubic axes x = [100], y = [010], z = [001].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrainTensor(Matrix3<f64>);

impl StrainTensor {
    pub fn zero() -> Self {
        StrainTensor(Matrix3::zeros())
    }

    pub fn from_components(xx: f64, yy: f64, zz: f64, yz: f64, xz: f64, xy: f64) -> Result<Self> {
        Self::from_matrix(Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz))
    }

    pub fn hydrostatic(eps: f64) -> Result<Self> {
        Self::from_components(eps, eps, eps, 0.0, 0.0, 0.0)
    }

    /// Rejects asymmetric, non-finite, or out-of-guard input.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("strain has non-finite components".into()));
        }
        let scale = m.amax();
        if (m - m.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("strain tensor is not symmetric".into()));
        }
        if scale >= STRAIN_GUARD {
            return Err(Error::InvalidArgument(format!(
                "strain component {scale:.3e} outside the linear-elastic guard {STRAIN_GUARD:e}"
            )));
        }
        Ok(StrainTensor(0.5 * (m + m.transpose())))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn xx(&self) -> f64 {
        self.0[(0, 0)]
    }
    pub fn yy(&self) -> f64 {
        self.0[(1, 1)]
    }
    pub fn zz(&self) -> f64 {
        self.0[(2, 2)]
    }
    pub fn yz(&self) -> f64 {
        self.0[(1, 2)]
    }
    pub fn xz(&self) -> f64 {
        self.0[(0, 2)]
    }
    pub fn xy(&self) -> f64 {
        self.0[(0, 1)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// (xx, yy, zz, yz, xz, xy) with tensor shears.
    pub fn voigt(&self) -> [f64; 6] {
        [self.xx(), self.yy(), self.zz(), self.yz(), self.xz(), self.xy()]
    }

    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::from_matrix(self.0 * a)
    }

    /// Components in a rotated frame whose axes are the rows of `r`.
    pub fn in_frame(&self, r: &Matrix3<f64>) -> Matrix3<f64> {
        r * self.0 * r.transpose()
    }
}

impl Serialize for StrainTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.0;
        let rows = [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ];
        rows.serialize(s)
    }
}

/// Rows are the [110], [-110], [001] axes expressed in cubic coordinates.
pub fn frame_110() -> Matrix3<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix3::new(h, h, 0.0, -h, h, 0.0, 0.0, 0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StressAxis {
    #[serde(rename = "001")]
    Axis001,
    #[serde(rename = "110")]
    Axis110,
}

impl FromStr for StressAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_matches(|c| c == '[' || c == ']') {
            "001" => Ok(StressAxis::Axis001),
            "110" => Ok(StressAxis::Axis110),
            other => Err(Error::InvalidArgument(format!("stress axis must be [001] or [110], got `{other}`"))),
        }
    }
}

impl fmt::Display for StressAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StressAxis::Axis001 => "[001]",
            StressAxis::Axis110 => "[110]",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Load {
    /// Uniaxial stress, Pa (compressive negative).
    Stress(f64),
    /// A mass resting on a face of the given area; compressive.
    Mass { kg: f64, cross_section_m2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressSpec {
    pub axis: StressAxis,
    pub load: Load,
}

impl StressSpec {
    pub fn sigma_pa(&self) -> Result<f64> {
        match self.load {
            Load::Stress(s) => Ok(s),
            Load::Mass { kg, cross_section_m2 } => {
                if !(cross_section_m2 > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "cross-section must be positive, got {cross_section_m2}"
                    )));
                }
                Ok(-kg * G_GRAV / cross_section_m2)
            }
        }
    }

    pub fn strain(&self, c: &ElasticConstants) -> Result<StrainTensor> {
        let s = self.sigma_pa()?;
        match self.axis {
            StressAxis::Axis001 => strain_from_stress_001(s, c),
            StressAxis::Axis110 => strain_from_stress_110(s, c).map(|r| r.cubic),
        }
    }
}

fn check_stress(sigma: f64, c: &ElasticConstants) -> Result<()> {
    c.validate()?;
    if !(sigma.abs() < STRESS_GUARD_PA) {
        return Err(Error::InvalidArgument(format!("|stress| must be below 1 GPa, got {sigma} Pa")));
    }
    Ok(())
}

/// Strain from uniaxial stress sigma_zz along [001].
pub fn strain_from_stress_001(sigma_pa: f64, c: &ElasticConstants) -> Result<StrainTensor> {
    check_stress(sigma_pa, c)?;
    let ezz = sigma_pa * (c.c11 + c.c12) / ((c.c11 - c.c12) * (c.c11 + 2.0 * c.c12));
    let exx = -c.c12 / (c.c11 + c.c12) * ezz;
    StrainTensor::from_components(exx, exx, ezz, 0.0, 0.0, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Strain110 {
    /// eps_11 along the stress axis.
    pub eps_par: f64,
    pub cubic: StrainTensor,
    /// (eps_11, eps_22, eps_33) in the ([110], [-110], [001]) frame.
    pub frame: [f64; 3],
}

/// Strain from uniaxial stress along [110].
pub fn strain_from_stress_110(sigma_pa: f64, c: &ElasticConstants) -> Result<Strain110> {
    check_stress(sigma_pa, c)?;
    let p = (c.c11 - c.c12) * (c.c11 + 2.0 * c.c12);
    let d = c.d110();
    let eps_par = d / (4.0 * p * c.c44) * sigma_pa;
    let (k1, k2) = (c.k1(), c.k2());
    let cubic = StrainTensor::from_components(k1 * eps_par, k1 * eps_par, -k2 * eps_par, 0.0, 0.0, (1.0 - k1) * eps_par)?;
    let frame = [eps_par, -(p - 2.0 * c.c11 * c.c44) / d * eps_par, -k2 * eps_par];
    Ok(Strain110 { eps_par, cubic, frame })
}

/// (2 k1 - k2) / 3: hydrostatic strain per unit eps_11 under [110] stress.
pub fn hydrostatic_fraction_110(c: &ElasticConstants) -> f64 {
    (2.0 * c.k1() - c.k2()) / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrainDecomposition {
    pub eps_hs: f64,
    /// Traceless diagonal part.
    pub eps_uni: StrainTensor,
    /// Off-diagonal part.
    pub eps_shear: StrainTensor,
}

impl StrainDecomposition {
    pub fn recompose(&self) -> Matrix3<f64> {
        Matrix3::identity() * self.eps_hs + self.eps_uni.matrix() + self.eps_shear.matrix()
    }
}

pub fn decompose(eps: &StrainTensor) -> StrainDecomposition {
    let hs = eps.trace() / 3.0;
    let m = eps.matrix();
    let uni = Matrix3::from_diagonal(&nalgebra::Vector3::new(m[(0, 0)] - hs, m[(1, 1)] - hs, m[(2, 2)] - hs));
    let mut shear = *m;
    shear.fill_diagonal(0.0);
    StrainDecomposition {
        eps_hs: hs,
        eps_uni: StrainTensor(uni),
        eps_shear: StrainTensor(shear),
    }
}

/// Cubic Hooke's law, stress tensor in Pa.
pub fn stress_from_strain(eps: &StrainTensor, c: &ElasticConstants) -> Matrix3<f64> {
    let [xx, yy, zz, yz, xz, xy] = eps.voigt();
    let s = c.stiffness() * Vector6::new(xx, yy, zz, 2.0 * yz, 2.0 * xz, 2.0 * xy);
    Matrix3::new(s[0], s[5], s[4], s[5], s[1], s[3], s[4], s[3], s[2])
}
