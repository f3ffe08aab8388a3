//! Prescribed axisymmetric motion and the kinematic tensors derived from it.
//!
//! A displacement `u(p, t) = s(t) * u_shape(p)` is the product of a spatial
//! profile and a ramp schedule `s(t)`. Every profile supplies its value, its
//! four partial derivatives, and the hoop ratio `u_r / r_m` analytically, so
//! nothing is ever divided by `r_m = 0`.
//!
//! From a sample the module builds a [`KinematicPoint`]: the meridional
//! deformation gradient `F2 = I + Grad u`, the hoop stretch
//! `1 + u_r / r_m`, the three-dimensional Jacobian
//! `det F = (1 + u_r / r_m) det F2`, and the pull-back tensor
//!
//! ```text
//! N = | du_r/dz_m       -1 - du_r/dr_m |
//!     | 1 + du_z/dz_m   -du_z/dr_m     |
//! ```
//!
//! through which curls of the azimuthal field are written on the reference
//! section.

use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;
use crate::mesh::Point;

/// Time schedule multiplying the displacement profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// `s(t) = clamp(t / T, 0, 1)`.
    Linear(f64),
    /// `s(t) = s` for all `t`.
    Constant(f64),
}

impl Ramp {
    pub fn linear(duration: f64) -> Result<Self, KinematicsError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(KinematicsError::InvalidRamp(format!(
                "linear ramp needs a positive duration, got {duration}"
            )));
        }
        Ok(Ramp::Linear(duration))
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Ramp::Linear(duration) => (t / duration).clamp(0.0, 1.0),
            Ramp::Constant(s) => s,
        }
    }
}

/// Spatial shape of the displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// `u_r = c r_m`, `u_z = 0`.
    RadialStretch(f64),
    /// The upsetting-like test field: `u_r = r_m g(z_m)`, `u_z = 0`, with `g`
    /// given by [`upsetting_profile`].
    PaperTest,
}

/// Displacement and its first derivatives at one reference point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DisplacementSample {
    pub ur: f64,
    pub uz: f64,
    /// `u_r / r_m`, finite on the axis.
    pub ur_over_r: f64,
    pub dur_dr: f64,
    pub dur_dz: f64,
    pub duz_dr: f64,
    pub duz_dz: f64,
}

/// Prescribed motion `u(p, t) = ramp(t) * profile(p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementField {
    pub profile: Profile,
    pub ramp: Ramp,
}

/// Hoop ratio `g(z) = u_r / r_m` of the upsetting test field and `g'(z)`.
///
/// A cubic holds for `z <= 0.02` m and three Gaussians above it; `z` is in
/// metres.
pub fn upsetting_profile(z: f64) -> (f64, f64) {
    if z <= 0.02 {
        let g = 1e3 * (-188.2593 * z + 6.1464) * z * z;
        let dg = 1e3 * (-3.0 * 188.2593 * z * z + 2.0 * 6.1464 * z);
        (g, dg)
    } else {
        const TERMS: [(f64, f64, f64); 3] = [
            (1.0793, 0.0293, 0.03104),
            (-18.4974, -0.03324, 0.01705),
            (1.0779, 0.4363, 1.263),
        ];
        let mut g = -1.0;
        let mut dg = 0.0;
        for (amp, centre, width) in TERMS {
            let s = (z - centre) / width;
            let e = amp * (-s * s).exp();
            g += e;
            dg += e * (-2.0 * s / width);
        }
        (g, dg)
    }
}

impl DisplacementField {
    pub fn new(profile: Profile, ramp: Ramp) -> Self {
        Self { profile, ramp }
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero, Ramp::Constant(1.0))
    }

    /// The upsetting test field scaled by `ramp`.
    pub fn paper_test(ramp: Ramp) -> Self {
        Self::new(Profile::PaperTest, ramp)
    }

    pub fn sample(&self, p: Point, t: f64) -> DisplacementSample {
        let s = self.ramp.value(t);
        let [r, z] = p;
        match self.profile {
            Profile::Zero => DisplacementSample::default(),
            Profile::RadialStretch(c) => {
                let c = s * c;
                DisplacementSample {
                    ur: c * r,
                    ur_over_r: c,
                    dur_dr: c,
                    ..Default::default()
                }
            }
            Profile::PaperTest => {
                let (g, dg) = upsetting_profile(z);
                let (g, dg) = (s * g, s * dg);
                DisplacementSample {
                    ur: r * g,
                    ur_over_r: g,
                    dur_dr: g,
                    dur_dz: r * dg,
                    ..Default::default()
                }
            }
        }
    }

    /// Kinematic tensors at reference point `p` and time `t`.
    pub fn eval(&self, p: Point, t: f64) -> Result<KinematicPoint, KinematicsError> {
        KinematicPoint::from_sample(p, t, &self.sample(p, t))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.profile, Profile::Zero)
    }
}

/// Kinematic quantities at one point of the reference section.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicPoint {
    /// Meridional deformation gradient, rows `(r, z)`, columns `(r_m, z_m)`.
    pub f2: [[f64; 2]; 2],
    pub det_f2: f64,
    /// Jacobian of the full three-dimensional motion.
    pub det_f3: f64,
    /// Pull-back tensor for azimuthal curls.
    pub n: [[f64; 2]; 2],
    /// `1 + u_r / r_m`.
    pub radial_factor: f64,
    /// Current radius `r_m + u_r`.
    pub r_current: f64,
}

impl KinematicPoint {
    pub fn from_sample(p: Point, t: f64, d: &DisplacementSample) -> Result<Self, KinematicsError> {
        let f2 = [
            [1.0 + d.dur_dr, d.dur_dz],
            [d.duz_dr, 1.0 + d.duz_dz],
        ];
        let det_f2 = f2[0][0] * f2[1][1] - f2[0][1] * f2[1][0];
        let radial_factor = 1.0 + d.ur_over_r;
        let det_f3 = radial_factor * det_f2;
        if !(det_f2 > 0.0 && radial_factor > 0.0) {
            return Err(KinematicsError::DegenerateMotion {
                r: p[0],
                z: p[1],
                t,
                det_f: det_f3,
                radial_factor,
            });
        }
        let n = [
            [d.dur_dz, -1.0 - d.dur_dr],
            [1.0 + d.duz_dz, -d.duz_dr],
        ];
        Ok(Self {
            f2,
            det_f2,
            det_f3,
            n,
            radial_factor,
            r_current: p[0] + d.ur,
        })
    }

    /// `F2^{-T} g`.
    pub fn inv_transpose_apply(&self, g: [f64; 2]) -> [f64; 2] {
        let f = &self.f2;
        let inv = 1.0 / self.det_f2;
        [
            inv * (f[1][1] * g[0] - f[1][0] * g[1]),
            inv * (-f[0][1] * g[0] + f[0][0] * g[1]),
        ]
    }

    /// `N g`.
    pub fn n_apply(&self, g: [f64; 2]) -> [f64; 2] {
        let n = &self.n;
        [n[0][0] * g[0] + n[0][1] * g[1], n[1][0] * g[0] + n[1][1] * g[1]]
    }
}
