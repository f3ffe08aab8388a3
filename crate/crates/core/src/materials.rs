//! Constitutive laws of the conductor.
//!
//! Temperatures are in degrees Celsius throughout. The defaults of
//! [`MaterialModel::steel`] are the fitted laws of a typical forging steel:
//!
//! * electrical conductivity as the inverse of a quadratic resistivity,
//! * thermal conductivity as a quartic,
//! * specific heat as a sum of three Gaussians,
//! * permeability by a Frohlich-Kennelly saturation law
//!   `mu = mu0 + f(theta) / (a + b |H|)` whose temperature factor `f` drops to
//!   zero at the Curie point.
//!
//! `sigma`, `k` and `cp` are evaluated at the temperature clamped to
//! [`MaterialModel::clamp`] (the quartic turns negative far outside its fit);
//! the first clamp event is logged. The permeability is not clamped.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::MaterialError;

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// Offset between degrees Celsius and kelvin.
pub const KELVIN_OFFSET: f64 = 273.15;

static CLAMP_LOGGED: AtomicBool = AtomicBool::new(false);

/// Electrical conductivity law, S/m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConductivityLaw {
    /// `1 / (c2 theta^2 + c1 theta + c0)`.
    InverseQuadratic { c2: f64, c1: f64, c0: f64 },
    Constant(f64),
}

/// Thermal conductivity law, W/(m K).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThermalConductivityLaw {
    /// Coefficients of `theta^4 .. theta^0`, highest degree first.
    Quartic([f64; 5]),
    Constant(f64),
}

/// One term `amplitude * exp(-((theta - centre) / width)^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub amplitude: f64,
    pub centre: f64,
    pub width: f64,
}

/// Specific heat law, J/(kg K).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecificHeatLaw {
    Gaussians(Vec<Gaussian>),
    Constant(f64),
}

/// Magnetic permeability law, H/m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PermeabilityLaw {
    /// `mu0 + f(theta) / (a + b |H|)` with
    /// `f = ((Tc^2 - T^2) / (Tc^2 - T0^2))^(1/4)` below the Curie point
    /// (temperatures in kelvin) and `f = 0` above it.
    FrohlichKennelly {
        a: f64,
        b: f64,
        curie: f64,
        room: f64,
    },
    Constant(f64),
}

/// Permeability and its partial derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermeabilityEval {
    pub mu: f64,
    /// `d mu / d |H|`.
    pub d_h: f64,
    /// `d mu / d theta` (one-sided, zero at and above the Curie point).
    pub d_theta: f64,
}

/// All material data of the conductor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialModel {
    pub sigma: ConductivityLaw,
    pub k: ThermalConductivityLaw,
    pub cp: SpecificHeatLaw,
    /// Mass density of the reference configuration, kg/m^3.
    pub rho0: f64,
    pub mu: PermeabilityLaw,
    /// Temperature window, degrees C, for `sigma`, `k` and `cp`.
    pub clamp: [f64; 2],
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self::steel()
    }
}

impl MaterialModel {
    /// The fitted steel used by the upsetting test.
    pub fn steel() -> Self {
        Self {
            sigma: ConductivityLaw::InverseQuadratic {
                c2: -4.3306e-13,
                c1: 1.0839e-9,
                c0: 2.0170e-7,
            },
            k: ThermalConductivityLaw::Quartic([
                -2.7834e-11,
                1.1045e-7,
                -1.3658e-4,
                0.04639,
                34.0140,
            ]),
            cp: SpecificHeatLaw::Gaussians(vec![
                Gaussian {
                    amplitude: 660.9,
                    centre: 723.3,
                    width: 23.93,
                },
                Gaussian {
                    amplitude: 288.9,
                    centre: 697.6,
                    width: 133.5,
                },
                Gaussian {
                    amplitude: 657.1,
                    centre: 908.1,
                    width: 1497.0,
                },
            ]),
            rho0: 7799.0,
            mu: PermeabilityLaw::FrohlichKennelly {
                a: 2532.35,
                b: 0.49,
                curie: 748.69,
                room: 23.5,
            },
            clamp: [0.0, 1500.0],
        }
    }

    /// Temperature-independent material, handy for verification problems.
    pub fn linear(sigma: f64, mu: f64, k: f64, cp: f64, rho0: f64) -> Self {
        Self {
            sigma: ConductivityLaw::Constant(sigma),
            k: ThermalConductivityLaw::Constant(k),
            cp: SpecificHeatLaw::Constant(cp),
            rho0,
            mu: PermeabilityLaw::Constant(mu),
            clamp: [0.0, 1500.0],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rho0 > 0.0) {
            return Err(format!("rho0 must be positive, got {}", self.rho0));
        }
        if !(self.clamp[0] < self.clamp[1]) {
            return Err(format!("empty clamp window {:?}", self.clamp));
        }
        match &self.sigma {
            ConductivityLaw::Constant(s) if !(*s > 0.0) => {
                return Err(format!("constant sigma must be positive, got {s}"))
            }
            _ => {}
        }
        match &self.k {
            ThermalConductivityLaw::Constant(k) if !(*k > 0.0) => {
                return Err(format!("constant k must be positive, got {k}"))
            }
            _ => {}
        }
        match &self.cp {
            SpecificHeatLaw::Constant(c) if !(*c > 0.0) => {
                return Err(format!("constant cp must be positive, got {c}"))
            }
            SpecificHeatLaw::Gaussians(g) if g.iter().any(|g| !(g.width != 0.0)) => {
                return Err("Gaussian widths must be non-zero".into())
            }
            _ => {}
        }
        match &self.mu {
            PermeabilityLaw::Constant(m) if !(*m > 0.0) => {
                return Err(format!("constant mu must be positive, got {m}"))
            }
            PermeabilityLaw::FrohlichKennelly { a, b, curie, room } => {
                if !(*a > 0.0 && *b >= 0.0) {
                    return Err(format!("need a > 0 and b >= 0, got a = {a}, b = {b}"));
                }
                if !(curie > room) {
                    return Err(format!("Curie point {curie} must exceed room temperature {room}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Clamped temperature and whether the derivative passes through.
    fn clamped(&self, theta: f64) -> (f64, bool) {
        let [lo, hi] = self.clamp;
        if theta < lo || theta > hi {
            if !CLAMP_LOGGED.swap(true, Ordering::Relaxed) {
                log::warn!(
                    "temperature {theta} C outside [{lo}, {hi}] C; material laws are evaluated at the nearest bound"
                );
            }
            (theta.clamp(lo, hi), false)
        } else {
            (theta, true)
        }
    }

    /// Electrical conductivity and `d sigma / d theta`.
    pub fn sigma(&self, theta: f64) -> Result<(f64, f64), MaterialError> {
        let (th, inside) = self.clamped(theta);
        match self.sigma {
            ConductivityLaw::Constant(s) => Ok((s, 0.0)),
            ConductivityLaw::InverseQuadratic { c2, c1, c0 } => {
                let rho = (c2 * th + c1) * th + c0;
                if !(rho > 0.0) {
                    return Err(MaterialError::OutOfRange {
                        law: "resistivity",
                        theta,
                        value: rho,
                    });
                }
                let s = 1.0 / rho;
                let ds = if inside { -(2.0 * c2 * th + c1) * s * s } else { 0.0 };
                Ok((s, ds))
            }
        }
    }

    /// Thermal conductivity and `dk / d theta`.
    pub fn k(&self, theta: f64) -> (f64, f64) {
        let (th, inside) = self.clamped(theta);
        match self.k {
            ThermalConductivityLaw::Constant(k) => (k, 0.0),
            ThermalConductivityLaw::Quartic(c) => {
                let v = (((c[0] * th + c[1]) * th + c[2]) * th + c[3]) * th + c[4];
                let d = ((4.0 * c[0] * th + 3.0 * c[1]) * th + 2.0 * c[2]) * th + c[3];
                (v, if inside { d } else { 0.0 })
            }
        }
    }

    /// Specific heat and `d cp / d theta`.
    pub fn cp(&self, theta: f64) -> (f64, f64) {
        let (th, inside) = self.clamped(theta);
        match &self.cp {
            SpecificHeatLaw::Constant(c) => (*c, 0.0),
            SpecificHeatLaw::Gaussians(terms) => {
                let mut v = 0.0;
                let mut d = 0.0;
                for g in terms {
                    let s = (th - g.centre) / g.width;
                    let e = g.amplitude * (-s * s).exp();
                    v += e;
                    d += e * (-2.0 * s / g.width);
                }
                (v, if inside { d } else { 0.0 })
            }
        }
    }

    /// Permeability at field modulus `h` (A/m) and temperature `theta`.
    pub fn mu(&self, h: f64, theta: f64) -> Result<PermeabilityEval, MaterialError> {
        if h < 0.0 {
            return Err(MaterialError::NegativeField(h));
        }
        Ok(match self.mu {
            PermeabilityLaw::Constant(mu) => PermeabilityEval {
                mu,
                d_h: 0.0,
                d_theta: 0.0,
            },
            PermeabilityLaw::FrohlichKennelly { a, b, curie, room } => {
                let (f, df) = curie_factor(theta, curie, room);
                let den = a + b * h;
                PermeabilityEval {
                    mu: MU0 + f / den,
                    d_h: -f * b / (den * den),
                    d_theta: df / den,
                }
            }
        })
    }

    /// Curie temperature of the permeability law, if it has one.
    pub fn curie_temperature(&self) -> Option<f64> {
        match self.mu {
            PermeabilityLaw::FrohlichKennelly { curie, .. } => Some(curie),
            PermeabilityLaw::Constant(_) => None,
        }
    }
}

/// Temperature factor of the saturation law and its derivative.
///
/// Equal to one at `room`, zero at and above `curie`. Below `room` the
/// formula is evaluated as written and exceeds one.
pub fn curie_factor(theta: f64, curie: f64, room: f64) -> (f64, f64) {
    if theta >= curie {
        return (0.0, 0.0);
    }
    let tc = curie + KELVIN_OFFSET;
    let t0 = room + KELVIN_OFFSET;
    let t = theta + KELVIN_OFFSET;
    let den = tc * tc - t0 * t0;
    let x = (tc * tc - t * t) / den;
    let f = x.powf(0.25);
    // d/dtheta of x^(1/4) = (1/4) x^(-3/4) * (-2 t / den)
    let df = -0.5 * t / den * f / x;
    (f, df)
}
