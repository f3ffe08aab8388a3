//! Transient heat conduction with implicit Euler in time.
//!
//! The nodal unknown is the temperature at material points, so the time
//! derivative is the material derivative in both formulations and no
//! advection term appears. Element weights come from [`crate::fem`]. The
//! convection-radiation flux is
//!
//! ```text
//! q = h (theta_c - theta) + sigma_SB eps ((theta_r + 273.15)^4 - (theta + 273.15)^4)
//! ```
//!
//! with temperatures in degrees C and the radiation evaluated in kelvin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{ElementGeometry, Geometry};
use crate::materials::{MaterialModel, KELVIN_OFFSET};
use crate::mesh::{MeridionalMesh, ThermalTag};
use crate::sparse::Triplets;

/// Stefan-Boltzmann constant, W/(m^2 K^4).
pub const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

/// Convection-radiation data shared by all `convrad` edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvRad {
    /// Heat transfer coefficient, W/(m^2 K).
    pub h: f64,
    pub emissivity: f64,
    /// Ambient temperature for convection, C.
    pub theta_conv: f64,
    /// Ambient temperature for radiation, C.
    pub theta_rad: f64,
}

impl ConvRad {
    /// Inward flux and its derivative with respect to the wall temperature.
    pub fn flux(&self, theta: f64) -> (f64, f64) {
        let t = theta + KELVIN_OFFSET;
        let tr = self.theta_rad + KELVIN_OFFSET;
        let rad = STEFAN_BOLTZMANN * self.emissivity;
        (
            self.h * (self.theta_conv - theta) + rad * (tr.powi(4) - t.powi(4)),
            -self.h - 4.0 * rad * t.powi(3),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.h == 0.0 && self.emissivity == 0.0
    }
}

/// Thermal boundary data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalBc {
    pub conv_rad: ConvRad,
    /// Prescribed temperature on `dirichlet` edges, C.
    pub dirichlet: f64,
}

impl ThermalBc {
    /// Zero flux on every `convrad` edge.
    pub fn insulated() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), String> {
        let c = &self.conv_rad;
        if !(c.h >= 0.0) {
            return Err(format!("heat transfer coefficient must be >= 0, got {}", c.h));
        }
        if !(0.0..=1.0).contains(&c.emissivity) {
            return Err(format!("emissivity must lie in [0, 1], got {}", c.emissivity));
        }
        Ok(())
    }
}

/// Nodes carrying a prescribed temperature.
pub fn dirichlet_nodes(mesh: &MeridionalMesh) -> Vec<bool> {
    let mut d = vec![false; mesh.n_nodes()];
    for e in mesh.boundary_edges() {
        if e.thermal == ThermalTag::Dirichlet {
            d[e.a] = true;
            d[e.b] = true;
        }
    }
    d
}

/// Heat source of one element: either a prescribed spatial density or the
/// Joule density at each quadrature point already multiplied by its weight.
#[derive(Clone, Copy, Debug)]
pub(crate) enum ElementSource {
    Density(f64),
    Weighted([f64; 3]),
}

/// Element residual and its Jacobian with respect to the three nodal
/// temperatures. The source enters with a minus sign and without Jacobian;
/// the caller adds its derivatives.
pub(crate) fn element_residual(
    el: &ElementGeometry,
    mat: &MaterialModel,
    theta: [f64; 3],
    theta_old: [f64; 3],
    dt: f64,
    source: ElementSource,
    want_jac: bool,
) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut r = [0.0; 3];
    let mut j = [[0.0; 3]; 3];
    for (qi, q) in el.qp.iter().enumerate() {
        let mut th = 0.0;
        let mut th_old = 0.0;
        let mut grad = [0.0; 2];
        for a in 0..3 {
            th += q.phi[a] * theta[a];
            th_old += q.phi[a] * theta_old[a];
            grad[0] += q.th_grad[a][0] * theta[a];
            grad[1] += q.th_grad[a][1] * theta[a];
        }
        let (cp, dcp) = mat.cp(th);
        let (k, dk) = mat.k(th);
        let rate = (th - th_old) / dt;
        let s = match source {
            ElementSource::Density(qd) => qd * q.th_diff_w,
            ElementSource::Weighted(w) => w[qi],
        };
        for a in 0..3 {
            let ga = q.th_grad[a][0] * grad[0] + q.th_grad[a][1] * grad[1];
            r[a] += q.th_mass_w * cp * rate * q.phi[a] + q.th_diff_w * k * ga - s * q.phi[a];
            if want_jac {
                for b in 0..3 {
                    let gab = q.th_grad[a][0] * q.th_grad[b][0] + q.th_grad[a][1] * q.th_grad[b][1];
                    j[a][b] += q.th_mass_w * (dcp * rate + cp / dt) * q.phi[a] * q.phi[b]
                        + q.th_diff_w * (dk * q.phi[b] * ga + k * gab);
                }
            }
        }
    }
    (r, j)
}

/// Boundary residual contributions `-int q psi` of all `convrad` edges.
pub(crate) fn boundary_residual(
    geom: &Geometry,
    bc: &ConvRad,
    theta: &[f64],
    mut add_r: impl FnMut(usize, f64),
    mut add_j: Option<&mut dyn FnMut(usize, usize, f64)>,
) {
    if bc.is_zero() {
        return;
    }
    for e in &geom.conv_edges {
        for g in 0..2 {
            let pa = e.phi_a[g];
            let phi = [pa, 1.0 - pa];
            let nodes = [e.a, e.b];
            let th = pa * theta[e.a] + (1.0 - pa) * theta[e.b];
            let (q, dq) = bc.flux(th);
            for a in 0..2 {
                add_r(nodes[a], -e.weight[g] * q * phi[a]);
                if let Some(add_j) = add_j.as_mut() {
                    for b in 0..2 {
                        add_j(nodes[a], nodes[b], -e.weight[g] * dq * phi[a] * phi[b]);
                    }
                }
            }
        }
    }
}

/// Residual and Jacobian of one implicit Euler step over nodal temperatures.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalSystem {
    pub residual: Vec<f64>,
    pub jacobian: Triplets<f64>,
}

/// Assembles the thermal step `theta_old -> theta` under a prescribed
/// per-triangle heat source (spatial density, W/m^3). Dirichlet rows read
/// `theta_i - theta_D`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_thermal(
    geom: &Geometry,
    mat: &MaterialModel,
    bc: &ThermalBc,
    dirichlet: &[bool],
    theta_old: &[f64],
    theta: &[f64],
    dt: f64,
    source: &[f64],
) -> Result<ThermalSystem> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let n = theta.len();
    let mut r = vec![0.0; n];
    let mut jac = Triplets::with_capacity(n, 9 * geom.elements.len() + 4 * n);
    for (el, &qd) in geom.elements.iter().zip(source) {
        let (re, je) = element_residual(
            el,
            mat,
            el.nodes.map(|i| theta[i]),
            el.nodes.map(|i| theta_old[i]),
            dt,
            ElementSource::Density(qd),
            true,
        );
        for a in 0..3 {
            let ia = el.nodes[a];
            if dirichlet[ia] {
                continue;
            }
            r[ia] += re[a];
            for b in 0..3 {
                jac.push(ia, el.nodes[b], je[a][b]);
            }
        }
    }
    {
        let mut add_j = |i: usize, j: usize, v: f64| {
            if !dirichlet[i] {
                jac.push(i, j, v)
            }
        };
        boundary_residual(
            geom,
            &bc.conv_rad,
            theta,
            |i, v| {
                if !dirichlet[i] {
                    r[i] += v
                }
            },
            Some(&mut add_j),
        );
    }
    for i in 0..n {
        if dirichlet[i] {
            r[i] = theta[i] - bc.dirichlet;
            jac.push(i, i, 1.0);
        }
    }
    Ok(ThermalSystem { residual: r, jacobian: jac })
}
