//! Edge-stopping function, constant cross-diffusion matrices and the named
//! NCDF presets.
//!
//! The diffusion tensor of the filter is `D(u, v) = g(|w|) d` with a constant
//! 2×2 matrix `d` and the rational edge-stopping function
//! `g(w) = 1 / (1 + (w/κ)²)`. Since `0 < g ≤ 1`, uniform ellipticity of `D`
//! reduces to positive definiteness of the symmetric part of `d`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};

/// Constant matrix `[[d11, d12], [d21, d22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix {
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

impl DiffusionMatrix {
    pub fn new(d11: f64, d12: f64, d21: f64, d22: f64) -> Result<Self> {
        for (index, x) in [d11, d12, d21, d22].into_iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteValue { index });
            }
        }
        Ok(Self { d11, d12, d21, d22 })
    }

    pub const IDENTITY: DiffusionMatrix = DiffusionMatrix {
        d11: 1.0,
        d12: 0.0,
        d21: 0.0,
        d22: 1.0,
    };

    /// `[[cos θ, −sin θ], [sin θ, cos θ]]`, the complex-diffusion matrix.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            d11: c,
            d12: -s,
            d21: s,
            d22: c,
        }
    }

    /// Checks that `d` satisfies the ellipticity hypothesis.
    pub fn validated(self) -> Result<Self> {
        let alpha = ellipticity(&self);
        if alpha > 0.0 {
            Ok(self)
        } else {
            Err(Error::NotPositiveDefinite { ellipticity: alpha })
        }
    }

    /// Returns θ when the matrix has rotation form with θ ∈ (0, π/2).
    pub fn rotation_angle(&self) -> Option<f64> {
        let is_rotation = self.d11 == self.d22
            && self.d12 == -self.d21
            && self.d11 > 0.0
            && self.d21 > 0.0
            && (self.d11.hypot(self.d21) - 1.0).abs() < 1e-12;
        is_rotation.then(|| self.d21.atan2(self.d11))
    }

    /// Applies `d` to the vector `(a, b)`.
    #[inline]
    pub fn apply(&self, a: f64, b: f64) -> (f64, f64) {
        (self.d11 * a + self.d12 * b, self.d21 * a + self.d22 * b)
    }

    pub fn trace(&self) -> f64 {
        self.d11 + self.d22
    }

    pub fn determinant(&self) -> f64 {
        self.d11 * self.d22 - self.d12 * self.d21
    }

    /// Entries of the symmetric part `(d + dᵀ)/2` as `(a, b, c)` for `[[a, b], [b, c]]`.
    pub fn symmetric_part(&self) -> (f64, f64, f64) {
        (self.d11, 0.5 * (self.d12 + self.d21), self.d22)
    }
}

impl fmt::Display for DiffusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.d11, self.d12, self.d21, self.d22)
    }
}

/// Eigenvalues `(min, max)` of the symmetric matrix `[[a, b], [b, c]]`.
pub(crate) fn symmetric_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    (mean - radius, mean + radius)
}

/// Smallest eigenvalue of the symmetric part of `d`: the largest `α` with
/// `ξᵀ d ξ ≥ α |ξ|²` for every `ξ`.
pub fn ellipticity(d: &DiffusionMatrix) -> f64 {
    let (a, b, c) = d.symmetric_part();
    symmetric_eigenvalues(a, b, c).0
}

/// Spectral radius of the symmetric part of `d`.
pub fn symmetric_spectral_radius(d: &DiffusionMatrix) -> f64 {
    let (a, b, c) = d.symmetric_part();
    let (lo, hi) = symmetric_eigenvalues(a, b, c);
    lo.abs().max(hi.abs())
}

/// `s = (d22 − d11)² + 4 d12 d21`. Real distinct eigenvalues when positive,
/// a complex pair when negative.
pub fn eigen_discriminant(d: &DiffusionMatrix) -> f64 {
    let diff = d.d22 - d.d11;
    diff * diff + 4.0 * d.d12 * d.d21
}

/// |s| at or below this is classified as zero.
pub const DISCRIMINANT_ZERO_TOL: f64 = 1e-12;

/// Sign class of the eigenvalue discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminantSign {
    Positive,
    Negative,
    Zero,
}

impl DiscriminantSign {
    pub fn of(s: f64) -> Self {
        if s.abs() <= DISCRIMINANT_ZERO_TOL {
            DiscriminantSign::Zero
        } else if s > 0.0 {
            DiscriminantSign::Positive
        } else {
            DiscriminantSign::Negative
        }
    }
}

/// Rational edge-stopping function with threshold `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStopping {
    kappa: f64,
}

impl EdgeStopping {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa > 0.0 && !kappa.is_nan() {
            Ok(Self { kappa })
        } else {
            Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")))
        }
    }

    /// The complex-diffusion variant `1 / (1 + (w/(κθ))²)` is the same
    /// function with threshold `κθ`.
    pub fn complex(kappa: f64, theta: f64) -> Result<Self> {
        Self::new(kappa * theta)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    #[inline]
    pub fn eval(&self, w: f64) -> f64 {
        edge_stopping(w, self)
    }
}

/// `g(w) = 1 / (1 + (w/κ)²)`.
#[inline]
pub fn edge_stopping(w: f64, spec: &EdgeStopping) -> f64 {
    let r = w / spec.kappa;
    1.0 / (1.0 + r * r)
}

/// Identifier of a built-in matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PresetName {
    Ncdf1,
    Ncdf2,
    Ncdf3,
    Ncdf4,
    Ncdf5,
    Ncdf6,
    Rotation(f64),
}

impl PresetName {
    pub const NCDF: [PresetName; 6] = [
        PresetName::Ncdf1,
        PresetName::Ncdf2,
        PresetName::Ncdf3,
        PresetName::Ncdf4,
        PresetName::Ncdf5,
        PresetName::Ncdf6,
    ];

    /// The discriminant sign each NCDF preset is published under.
    pub fn labeled_sign(&self) -> Option<DiscriminantSign> {
        use DiscriminantSign::*;
        match self {
            PresetName::Ncdf1 | PresetName::Ncdf4 => Some(Positive),
            PresetName::Ncdf2 | PresetName::Ncdf5 => Some(Negative),
            PresetName::Ncdf3 | PresetName::Ncdf6 => Some(Zero),
            PresetName::Rotation(_) => None,
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetName::Ncdf1 => f.write_str("ncdf1"),
            PresetName::Ncdf2 => f.write_str("ncdf2"),
            PresetName::Ncdf3 => f.write_str("ncdf3"),
            PresetName::Ncdf4 => f.write_str("ncdf4"),
            PresetName::Ncdf5 => f.write_str("ncdf5"),
            PresetName::Ncdf6 => f.write_str("ncdf6"),
            PresetName::Rotation(theta) => write!(f, "rotation:{theta}"),
        }
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let name = match lower.as_str() {
            "ncdf1" => PresetName::Ncdf1,
            "ncdf2" => PresetName::Ncdf2,
            "ncdf3" => PresetName::Ncdf3,
            "ncdf4" => PresetName::Ncdf4,
            "ncdf5" => PresetName::Ncdf5,
            "ncdf6" => PresetName::Ncdf6,
            other => {
                let theta = other
                    .strip_prefix("rotation:")
                    .and_then(|t| t.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownPreset(s.to_string()))?;
                PresetName::Rotation(theta)
            }
        };
        Ok(name)
    }
}

/// A named matrix together with its validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: PresetName,
    pub matrix: DiffusionMatrix,
    pub theta: Option<f64>,
    pub ellipticity: f64,
    /// Set when the published discriminant label disagrees with the
    /// coefficients (NCDF3).
    pub warning: Option<String>,
}

/// Looks up a built-in matrix. Coefficients are the published ones, verbatim.
pub fn preset(name: PresetName) -> Result<Preset> {
    let (matrix, theta) = match name {
        PresetName::Ncdf1 => (DiffusionMatrix::new(1.0, 0.025, 1.0, 1.0)?, None),
        PresetName::Ncdf2 => (DiffusionMatrix::new(1.0, -0.025, 0.025, 1.0)?, None),
        PresetName::Ncdf3 => (DiffusionMatrix::new(1.0, -0.025, 1.0, 1.1)?, None),
        PresetName::Ncdf4 => (DiffusionMatrix::new(1.0, 0.9, 1.0, 1.0)?, None),
        PresetName::Ncdf5 => (DiffusionMatrix::new(1.0, -0.9, 0.9, 1.0)?, None),
        PresetName::Ncdf6 => (DiffusionMatrix::new(1.0, -0.9, 0.225, 1.9)?, None),
        PresetName::Rotation(theta) => {
            if !(theta > 0.0 && theta < FRAC_PI_2) {
                return Err(Error::InvalidParameter(format!(
                    "rotation angle must lie in (0, pi/2), got {theta}"
                )));
            }
            (DiffusionMatrix::rotation(theta), Some(theta))
        }
    };
    let alpha = ellipticity(&matrix);
    let warning = name.labeled_sign().and_then(|label| {
        let s = eigen_discriminant(&matrix);
        let actual = DiscriminantSign::of(s);
        (actual != label).then(|| {
            format!("{name}: published as s {label:?} but coefficients give s = {s} ({actual:?})")
        })
    });
    if let Some(w) = &warning {
        warn!("{w}");
    }
    Ok(Preset {
        name,
        matrix,
        theta,
        ellipticity: alpha,
        warning,
    })
}

/// Parses and resolves a preset string (`ncdf1`..`ncdf6`, `rotation:<theta>`).
pub fn preset_by_name(name: &str) -> Result<Preset> {
    preset(name.parse()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ncdf(name: PresetName) -> DiffusionMatrix {
        preset(name).unwrap().matrix
    }

    #[test]
    fn edge_stopping_values() {
        let g = EdgeStopping::new(10.0).unwrap();
        assert_eq!(g.eval(0.0), 1.0);
        assert_eq!(g.eval(10.0), 0.5);
        assert!((g.eval(30.0) - 0.1).abs() < 1e-15);
        for kappa in [0.3, 1.0, 7.0, 1e4] {
            assert_eq!(EdgeStopping::new(kappa).unwrap().eval(kappa), 0.5);
        }
    }

    #[test]
    fn kappa_must_be_positive() {
        assert!(EdgeStopping::new(0.0).is_err());
        assert!(EdgeStopping::new(-1.0).is_err());
        assert!(EdgeStopping::new(f64::NAN).is_err());
    }

    #[test]
    fn ellipticity_examples() {
        assert_eq!(ellipticity(&DiffusionMatrix::IDENTITY), 1.0);
        assert!((ellipticity(&ncdf(PresetName::Ncdf1)) - 0.4875).abs() < 1e-15);
        for theta in [0.1, PI / 6.0, PI / 3.0, 1.5] {
            let e = ellipticity(&DiffusionMatrix::rotation(theta));
            assert!((e - theta.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn discriminant_examples() {
        assert!((eigen_discriminant(&ncdf(PresetName::Ncdf1)) - 0.1).abs() < 1e-15);
        assert!((eigen_discriminant(&ncdf(PresetName::Ncdf2)) + 0.0025).abs() < 1e-15);
        assert!(eigen_discriminant(&ncdf(PresetName::Ncdf6)).abs() < 1e-15);
    }

    #[test]
    fn published_coefficients() {
        assert_eq!(ncdf(PresetName::Ncdf4), DiffusionMatrix::new(1.0, 0.9, 1.0, 1.0).unwrap());
        assert_eq!(ncdf(PresetName::Ncdf5), DiffusionMatrix::new(1.0, -0.9, 0.9, 1.0).unwrap());
        let r = ncdf(PresetName::Rotation(PI / 3.0));
        let half_sqrt3 = 3f64.sqrt() / 2.0;
        assert!((r.d11 - 0.5).abs() < 1e-15 && (r.d22 - 0.5).abs() < 1e-15);
        assert!((r.d12 + half_sqrt3).abs() < 1e-15 && (r.d21 - half_sqrt3).abs() < 1e-15);
    }

    #[test]
    fn labels_match_except_ncdf3() {
        for name in PresetName::NCDF {
            let p = preset(name).unwrap();
            assert!(p.ellipticity > 0.0, "{name}");
            if name == PresetName::Ncdf3 {
                assert!(p.warning.is_some());
                assert!((eigen_discriminant(&p.matrix) + 0.09).abs() < 1e-12);
            } else {
                assert!(p.warning.is_none(), "{name}: {:?}", p.warning);
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("NCDF2".parse::<PresetName>().unwrap(), PresetName::Ncdf2);
        assert_eq!(
            "rotation:0.5".parse::<PresetName>().unwrap(),
            PresetName::Rotation(0.5)
        );
        assert!(matches!("ncdf7".parse::<PresetName>(), Err(Error::UnknownPreset(_))));
        assert!(matches!("rotation:x".parse::<PresetName>(), Err(Error::UnknownPreset(_))));
        assert!(preset(PresetName::Rotation(2.0)).is_err());
    }

    #[test]
    fn rotation_detection() {
        let theta = 0.7;
        let got = DiffusionMatrix::rotation(theta).rotation_angle().unwrap();
        assert!((got - theta).abs() < 1e-14);
        assert!(DiffusionMatrix::IDENTITY.rotation_angle().is_none());
        assert!(ncdf(PresetName::Ncdf5).rotation_angle().is_none());
    }

    #[test]
    fn not_positive_definite() {
        let d = DiffusionMatrix::new(1.0, 3.0, 3.0, 1.0).unwrap();
        assert!(matches!(d.validated(), Err(Error::NotPositiveDefinite { .. })));
    }
}
