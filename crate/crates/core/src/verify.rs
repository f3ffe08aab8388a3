//! Solver runs paired with their independent references.
//!
//! Each case builds a small problem, solves it with the coupled solver and
//! evaluates the matching function of [`crate::oracles`]. The `verify`
//! subcommand prints these as tables and the acceptance tests assert on them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::coupled::{CoupledState, HeatSource, Problem, Simulation, SolverConfig};
use crate::em::PortSpec;
use crate::error::Result;
use crate::fem::Formulation;
use crate::kinematics::DisplacementField;
use crate::materials::MaterialModel;
use crate::mesh::{generate_rectangle_mesh, EmTag, MeridionalMesh};
use crate::oracles;
use crate::thermal::ThermalBc;

/// Bar radius of the upsetting test, m.
pub const RADIUS: f64 = 0.02875;
/// Bar length of the upsetting test, m.
pub const LENGTH: f64 = 0.165;
/// Current amplitude of the upsetting test, A.
pub const CURRENT: f64 = 35000.0;
/// Frequency of the upsetting test, Hz.
pub const FREQUENCY: f64 = 500.0;

/// One line of an oracle comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub quantity: String,
    pub solver: f64,
    pub reference: f64,
    pub error: f64,
    /// `None` for informational rows.
    pub tolerance: Option<f64>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.tolerance.is_none_or(|t| self.error <= t)
    }
}

/// Relative discrete L2 distance `|a - b| / |b|`.
pub fn relative_l2<T: Copy + Into<Complex64>>(a: &[T], b: &[T]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y): (Complex64, Complex64) = (x.into(), y.into());
        num += (x - y).norm_sqr();
        den += y.norm_sqr();
    }
    (num / den).sqrt()
}

/// Nodes on the row `z = z0`, sorted by radius.
pub fn nodes_on_row(mesh: &MeridionalMesh, z0: f64) -> Vec<usize> {
    let tol = 1e-9 * LENGTH.max(z0.abs());
    let mut ids: Vec<usize> = (0..mesh.n_nodes())
        .filter(|&i| (mesh.nodes()[i][1] - z0).abs() <= tol)
        .collect();
    ids.sort_by(|&a, &b| mesh.nodes()[a][0].total_cmp(&mesh.nodes()[b][0]));
    ids
}

/// Nodes touching an insulated edge and no port.
pub fn insulated_nodes(mesh: &MeridionalMesh) -> Vec<usize> {
    let mut on = vec![false; mesh.n_nodes()];
    let mut port = vec![false; mesh.n_nodes()];
    for e in mesh.boundary_edges() {
        let flag = match e.em {
            EmTag::Insulated => &mut on,
            EmTag::PortJ(_) | EmTag::PortE => &mut port,
            EmTag::Axis => continue,
        };
        flag[e.a] = true;
        flag[e.b] = true;
    }
    (0..mesh.n_nodes()).filter(|&i| on[i] && !port[i]).collect()
}

/// Bar of the upsetting test with a single current port and the given material.
pub fn bar_problem(nr: usize, nz: usize, material: MaterialModel, omega: f64) -> Result<Problem> {
    Ok(Problem {
        mesh: generate_rectangle_mesh(RADIUS, LENGTH, nr, nz)?,
        motion: DisplacementField::zero(),
        material,
        ports: PortSpec::single_current(1, CURRENT),
        omega,
        bc: ThermalBc::insulated(),
        theta0: 20.0,
        source: HeatSource::Joule,
    })
}

/// Field problem alone on the undeformed bar.
pub fn solve_field(problem: Problem, mode: Formulation) -> Result<CoupledState> {
    let config = SolverConfig {
        mode,
        ..Default::default()
    };
    Simulation::new(problem, config)?.initial_state()
}

/// Outcome of the skin-effect comparison.
#[derive(Clone, Debug)]
pub struct SkinEffect {
    pub kappa_r: f64,
    /// `(r, H~ solver, H~ reference)` along the mid-height row.
    pub line: Vec<(f64, Complex64, Complex64)>,
    pub l2_error: f64,
    pub port_power: f64,
    pub joule_power: f64,
}

/// Permeability giving `|kappa R| = kappa_r` for the bar at the test frequency
/// and conductivity `sigma`.
pub fn permeability_for(kappa_r: f64, sigma: f64) -> f64 {
    kappa_r * kappa_r / (2.0 * PI * FREQUENCY * sigma * RADIUS * RADIUS)
}

/// Straight bar with uniform material against the Bessel solution.
pub fn skin_effect(nr: usize, nz: usize, kappa_r: f64) -> Result<SkinEffect> {
    let sigma = MaterialModel::steel().sigma(20.0)?.0;
    let mu = permeability_for(kappa_r, sigma);
    let omega = 2.0 * PI * FREQUENCY;
    let material = MaterialModel::linear(sigma, mu, 40.0, 470.0, 7799.0);
    let problem = bar_problem(nr, nz, material, omega)?;
    let mesh = problem.mesh.clone();
    let state = solve_field(problem, Formulation::Lagrangian)?;
    let mut line = Vec::new();
    for i in nodes_on_row(&mesh, 0.5 * LENGTH) {
        let r = mesh.nodes()[i][0];
        let h = oracles::skin_effect_h(r, CURRENT, omega, sigma, mu, RADIUS)?.value * r;
        line.push((r, state.h[i], h));
    }
    let fem: Vec<Complex64> = line.iter().map(|l| l.1).collect();
    let reference: Vec<Complex64> = line.iter().map(|l| l.2).collect();
    Ok(SkinEffect {
        kappa_r: oracles::skin_parameter(omega, sigma, mu, RADIUS),
        l2_error: relative_l2(&fem, &reference),
        line,
        port_power: state.diagnostics.port_power.re,
        joule_power: state.diagnostics.p_diss,
    })
}

/// Outcome of the direct-current comparison.
#[derive(Clone, Debug)]
pub struct DcLimit {
    pub voltage: Complex64,
    pub reference: f64,
    /// Largest `| |J| / J_dc - 1 |` over centroids with `r >= R/2` and
    /// `L/4 <= z <= 3L/4`.
    pub j_deviation: f64,
    /// Largest relative deviation of `H~` from `I/(2 pi)` on insulated nodes.
    pub boundary_deviation: f64,
}

/// Nearly static current through the bar at the room-temperature conductivity.
pub fn dc_limit(nr: usize, nz: usize) -> Result<DcLimit> {
    let steel = MaterialModel::steel();
    let sigma = steel.sigma(20.0)?.0;
    let mu = steel.mu(0.0, 20.0)?.mu;
    let material = MaterialModel::linear(sigma, mu, 40.0, 470.0, 7799.0);
    let problem = bar_problem(nr, nz, material, 2.0 * PI * 1e-3)?;
    let mesh = problem.mesh.clone();
    let state = solve_field(problem, Formulation::Lagrangian)?;
    let j_dc = CURRENT / (PI * RADIUS * RADIUS);
    let mut j_deviation: f64 = 0.0;
    for (t, &j) in state.post.j_abs.iter().enumerate() {
        let p = mesh.triangle_points(t);
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        if c[0] >= 0.5 * RADIUS && (0.25 * LENGTH..=0.75 * LENGTH).contains(&c[1]) {
            j_deviation = j_deviation.max((j / j_dc - 1.0).abs());
        }
    }
    Ok(DcLimit {
        voltage: state.ports[0].voltage,
        reference: oracles::dc_voltage(CURRENT, LENGTH, RADIUS, sigma).value,
        j_deviation,
        boundary_deviation: boundary_deviation(&mesh, &state, CURRENT),
    })
}

/// Largest relative deviation of `H~` from `current / (2 pi)` on insulated nodes.
pub fn boundary_deviation(mesh: &MeridionalMesh, state: &CoupledState, current: f64) -> f64 {
    let target = current / (2.0 * PI);
    insulated_nodes(mesh)
        .into_iter()
        .map(|i| (state.h[i] - target).norm() / target)
        .fold(0.0, f64::max)
}

/// Outcome of the adiabatic heating comparison.
#[derive(Clone, Debug)]
pub struct Adiabatic {
    pub theta_min: f64,
    pub theta_max: f64,
    pub reference: f64,
}

impl Adiabatic {
    /// Largest relative deviation of a nodal temperature from the reference.
    pub fn error(&self) -> f64 {
        ((self.theta_max - self.reference).abs()).max((self.theta_min - self.reference).abs()) / self.reference
    }
}

/// Joule density of the direct current of the upsetting test at 20 C, W/m^3.
pub fn dc_joule_density() -> Result<f64> {
    let sigma = MaterialModel::steel().sigma(20.0)?.0;
    let j = CURRENT / (PI * RADIUS * RADIUS);
    Ok(j * j / (2.0 * sigma))
}

/// Uniformly heated insulated bar with the steel heat capacity.
pub fn adiabatic(nr: usize, nz: usize, q: f64, dt: f64, t_end: f64) -> Result<Adiabatic> {
    let steel = MaterialModel::steel();
    let mut problem = bar_problem(nr, nz, steel.clone(), 0.0)?;
    problem.source = HeatSource::Uniform(q);
    problem.ports = PortSpec::default();
    let config = SolverConfig {
        dt,
        t_end,
        ..Default::default()
    };
    let last = Simulation::new(problem, config)?.run_with(|_| Ok(()))?;
    let cp = |th: f64| steel.cp(th).0;
    Ok(Adiabatic {
        theta_min: last.theta_min(),
        theta_max: last.theta_max(),
        reference: oracles::adiabatic_heating(20.0, q, steel.rho0, cp, t_end)?.value,
    })
}

/// Named sets accepted by [`comparisons`].
pub const SETS: [&str; 4] = ["skin", "dc", "power", "adiabatic"];

/// Oracle-versus-solver rows for one named set on an `nr x nz` mesh.
pub fn comparisons(set: &str, nr: usize, nz: usize) -> Result<Vec<Comparison>> {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    Ok(match set {
        "skin" => {
            let s = skin_effect(nr, nz, 6.0)?;
            let mut rows = vec![Comparison {
                quantity: format!("L2 error of H~ at mid height (|kappa R| = {:.2})", s.kappa_r),
                solver: s.l2_error,
                reference: 0.0,
                error: s.l2_error,
                tolerance: Some(0.01),
            }];
            let stride = (s.line.len() / 8).max(1);
            for &(r, h, href) in s.line.iter().step_by(stride).skip(1) {
                rows.push(Comparison {
                    quantity: format!("|H~| at r = {r:.5}"),
                    solver: h.norm(),
                    reference: href.norm(),
                    error: (h - href).norm() / href.norm(),
                    tolerance: None,
                });
            }
            rows
        }
        "dc" => {
            let d = dc_limit(nr, nz)?;
            vec![
                Comparison {
                    quantity: "port voltage Re V, V".into(),
                    solver: d.voltage.re,
                    reference: d.reference,
                    error: rel(d.voltage.re, d.reference),
                    tolerance: Some(0.005),
                },
                Comparison {
                    quantity: "max | |J|/J_dc - 1 | in the bulk".into(),
                    solver: d.j_deviation,
                    reference: 0.0,
                    error: d.j_deviation,
                    tolerance: Some(0.005),
                },
                Comparison {
                    quantity: "max |H~ - I/(2 pi)| / (I/(2 pi)) on insulated nodes".into(),
                    solver: d.boundary_deviation,
                    reference: 0.0,
                    error: d.boundary_deviation,
                    tolerance: Some(1e-9),
                },
            ]
        }
        "power" => {
            let s = skin_effect(nr, nz, 6.0)?;
            vec![Comparison {
                quantity: "dissipated power, W".into(),
                solver: s.joule_power,
                reference: s.port_power,
                error: rel(s.joule_power, s.port_power),
                tolerance: Some(0.01),
            }]
        }
        "adiabatic" => {
            let q = dc_joule_density()?;
            let a = adiabatic(nr.min(4), nz.min(8), q, 0.05, 20.0)?;
            vec![Comparison {
                quantity: format!("theta at 20 s under Q = {q:.4e} W/m^3"),
                solver: a.theta_max,
                reference: a.reference,
                error: a.error(),
                tolerance: Some(0.001),
            }]
        }
        other => {
            return Err(crate::error::Error::InvalidArgument(format!(
                "unknown oracle set {other}; expected one of {}",
                SETS.join(", ")
            )))
        }
    })
}

