//! Monolithic thermo-electromagnetic time stepping.
//!
//! Every step solves one real nonlinear system over
//! `[Re/Im pairs of (H~, lambda, V), theta]` by damped Newton. The Jacobian is
//! exact, including the permeability dependence on `|H|` and `theta`, the
//! conductivity dependence on `theta`, and the Joule source dependence on
//! `H~`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em::{
    constraint_entries, element_field, element_matrix, em_point, em_rhs, reconstruct_current_density,
    Drive, EmLayout, EmPoint, EmPostFields, Port, PortSpec, PortValue,
};
use crate::error::{Error, Result};
use crate::fem::{Formulation, Geometry};
use crate::kinematics::DisplacementField;
use crate::materials::MaterialModel;
use crate::mesh::MeridionalMesh;
use crate::newton::{newton_solve, NewtonConfig, NonlinearSystem};
use crate::sparse::Triplets;
use crate::thermal::{boundary_residual, dirichlet_nodes, element_residual, ElementSource, ThermalBc};

/// Where the heat comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatSource {
    /// Joule heating of the computed eddy currents.
    #[default]
    Joule,
    /// Prescribed uniform spatial density, W/m^3; the field problem is skipped.
    Uniform(f64),
}

/// Everything that defines the physical problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub mesh: MeridionalMesh,
    pub motion: DisplacementField,
    pub material: MaterialModel,
    pub ports: PortSpec,
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub bc: ThermalBc,
    /// Initial temperature, C.
    pub theta0: f64,
    pub source: HeatSource,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub newton: NewtonConfig,
    pub mode: Formulation,
    /// Times a failed step is retried with half the step.
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_end: 20.0,
            newton: NewtonConfig::default(),
            mode: Formulation::Lagrangian,
            max_halvings: 3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0) {
            return Err(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0) {
            return Err(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.newton.tol > 0.0 && self.newton.abs_tol > 0.0) {
            return Err("Newton tolerances must be positive".into());
        }
        if self.newton.max_iter == 0 {
            return Err("newton max_iter must be at least 1".into());
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_end]`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// End time of step `n`.
    pub fn time(&self, n: usize) -> f64 {
        (n as f64 * self.dt).min(self.t_end)
    }
}

/// Which equations a step solves; the others are frozen.
#[derive(Clone, Debug, PartialEq)]
pub enum StepKind {
    /// Field problem only, temperatures fixed.
    EmOnly,
    /// Heat equation only with a per-triangle source, field fixed.
    ThermalOnly(Vec<f64>),
    Coupled,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub p_diss: f64,
    /// `1/2 sum V conj(I)`.
    pub port_power: Complex64,
    pub newton_iterations: usize,
    pub residual_history: Vec<f64>,
    /// Number of halvings needed to reach this state.
    pub halvings: usize,
}

/// Solution at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledState {
    pub t: f64,
    /// Nodal weighted field, zero on the axis.
    pub h: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
    pub ports: Vec<PortValue>,
    /// Nodal temperature, C.
    pub theta: Vec<f64>,
    pub post: EmPostFields,
    pub diagnostics: Diagnostics,
    /// The raw unknown vector, used to warm start the next step.
    pub unknowns: Vec<f64>,
}

impl CoupledState {
    pub fn theta_max(&self) -> f64 {
        self.theta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn theta_min(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The real nonlinear system of one step.
pub struct CoupledSystem<'a> {
    pub geom: &'a Geometry,
    pub material: &'a MaterialModel,
    pub layout: &'a EmLayout,
    pub bc: &'a ThermalBc,
    pub dirichlet: &'a [bool],
    pub omega: f64,
    pub dt: f64,
    pub theta_old: &'a [f64],
    /// Values held by the frozen equations.
    pub frozen: &'a [f64],
    pub kind: StepKind,
}

impl CoupledSystem<'_> {
    fn theta_offset(&self) -> usize {
        2 * self.layout.n_complex()
    }

    fn complex_unknowns(&self, x: &[f64]) -> Vec<Complex64> {
        (0..self.layout.n_complex())
            .map(|c| Complex64::new(x[2 * c], x[2 * c + 1]))
            .collect()
    }

    fn eval(&self, x: &[f64], want_jac: bool) -> Result<(Vec<f64>, Triplets<f64>)> {
        let layout = self.layout;
        let nc = layout.n_complex();
        let to = self.theta_offset();
        let n = to + layout.n_nodes;
        let mut r = vec![0.0; n];
        let mut jac = Triplets::with_capacity(
            n,
            if want_jac { 90 * self.geom.elements.len() + 8 * n } else { 0 },
        );
        let z = self.complex_unknowns(x);
        let h = layout.nodal_field(&z);
        let theta = &x[to..];
        let do_em = !matches!(self.kind, StepKind::ThermalOnly(_));
        let do_th = !matches!(self.kind, StepKind::EmOnly);
        let coupled = matches!(self.kind, StepKind::Coupled);
        let guard = 1e-12 * h.iter().fold(0.0f64, |m, v| m.max(v.norm()));

        let mut rc = vec![Complex64::default(); nc];
        let omega = self.omega;

        for (ei, el) in self.geom.elements.iter().enumerate() {
            let hn = element_field(el.nodes, &h);
            let tn = el.nodes.map(|i| theta[i]);
            let pts: Option<[EmPoint; 3]> = if do_em || coupled {
                Some([
                    em_point(&el.qp[0], hn, tn, self.material)?,
                    em_point(&el.qp[1], hn, tn, self.material)?,
                    em_point(&el.qp[2], hn, tn, self.material)?,
                ])
            } else {
                None
            };
            let dofs = el.nodes.map(|i| layout.h_index[i]);
            // Local Jacobian over (Re H_a, Im H_a) at 2a, 2a + 1 and theta_a at 6 + a.
            let mut loc = [[0.0; 9]; 9];

            if do_em {
                let pts = pts.as_ref().unwrap();
                let k = element_matrix(&el.qp, pts, omega);
                for a in 0..3 {
                    let Some(ga) = dofs[a] else { continue };
                    for b in 0..3 {
                        rc[ga] += k[a][b] * hn[b];
                    }
                    if !want_jac {
                        continue;
                    }
                    for b in 0..3 {
                        let v = k[a][b];
                        loc[2 * a][2 * b] += v.re;
                        loc[2 * a][2 * b + 1] -= v.im;
                        loc[2 * a + 1][2 * b] += v.im;
                        loc[2 * a + 1][2 * b + 1] += v.re;
                    }
                }
                if want_jac {
                    for (q, p) in el.qp.iter().zip(pts) {
                        let hmod = p.h.norm();
                        let i_omega_m = Complex64::new(0.0, omega * q.em_mass_w);
                        if p.mu.d_h != 0.0 && hmod > guard && hmod > 0.0 {
                            let c = i_omega_m * p.h * (p.mu.d_h / (hmod * q.r));
                            for a in 0..3 {
                                let ca = c * q.phi[a];
                                for b in 0..3 {
                                    let vre = ca * (p.h.re * q.phi[b]);
                                    let vim = ca * (p.h.im * q.phi[b]);
                                    loc[2 * a][2 * b] += vre.re;
                                    loc[2 * a + 1][2 * b] += vre.im;
                                    loc[2 * a][2 * b + 1] += vim.re;
                                    loc[2 * a + 1][2 * b + 1] += vim.im;
                                }
                            }
                        }
                        if coupled {
                            let dinv = -p.dsigma / (p.sigma * p.sigma) * q.em_stiff_w;
                            for a in 0..3 {
                                let ga_gh = p.gh[0] * q.em_grad[a][0] + p.gh[1] * q.em_grad[a][1];
                                let base = i_omega_m * p.h * (p.mu.d_theta * q.phi[a]) + ga_gh * dinv;
                                for b in 0..3 {
                                    let v = base * q.phi[b];
                                    loc[2 * a][6 + b] += v.re;
                                    loc[2 * a + 1][6 + b] += v.im;
                                }
                            }
                        }
                    }
                }
            }

            if do_th {
                let source = match &self.kind {
                    StepKind::ThermalOnly(q) => ElementSource::Density(q[ei]),
                    _ => {
                        let pts = pts.as_ref().unwrap();
                        let mut w = [0.0; 3];
                        for (qi, (q, p)) in el.qp.iter().zip(pts).enumerate() {
                            w[qi] = (p.gh[0].norm_sqr() + p.gh[1].norm_sqr()) * q.em_stiff_w
                                / (2.0 * p.sigma);
                        }
                        ElementSource::Weighted(w)
                    }
                };
                let (re, je) = element_residual(
                    el,
                    self.material,
                    tn,
                    el.nodes.map(|i| self.theta_old[i]),
                    self.dt,
                    source,
                    want_jac,
                );
                for a in 0..3 {
                    if self.dirichlet[el.nodes[a]] {
                        continue;
                    }
                    r[to + el.nodes[a]] += re[a];
                    if !want_jac {
                        continue;
                    }
                    for b in 0..3 {
                        loc[6 + a][6 + b] += je[a][b];
                    }
                    if coupled {
                        let pts = pts.as_ref().unwrap();
                        for (q, p) in el.qp.iter().zip(pts) {
                            let f = -q.phi[a] * q.em_stiff_w / p.sigma;
                            let gre = [p.gh[0].re, p.gh[1].re];
                            let gim = [p.gh[0].im, p.gh[1].im];
                            for b in 0..3 {
                                let g = q.em_grad[b];
                                loc[6 + a][2 * b] += f * (gre[0] * g[0] + gre[1] * g[1]);
                                loc[6 + a][2 * b + 1] += f * (gim[0] * g[0] + gim[1] * g[1]);
                            }
                            let ds = q.phi[a] * p.dsigma / (2.0 * p.sigma * p.sigma)
                                * (p.gh[0].norm_sqr() + p.gh[1].norm_sqr())
                                * q.em_stiff_w;
                            for b in 0..3 {
                                loc[6 + a][6 + b] += ds * q.phi[b];
                            }
                        }
                    }
                }
            }

            if want_jac {
                let global = |l: usize| -> Option<usize> {
                    if l < 6 {
                        dofs[l / 2].map(|g| 2 * g + l % 2)
                    } else {
                        Some(to + el.nodes[l - 6])
                    }
                };
                for (li, row) in loc.iter().enumerate() {
                    let Some(gi) = global(li) else { continue };
                    if li >= 6 && self.dirichlet[el.nodes[li - 6]] {
                        continue;
                    }
                    for (lj, &v) in row.iter().enumerate() {
                        if v == 0.0 {
                            continue;
                        }
                        if let Some(gj) = global(lj) {
                            jac.push(gi, gj, v);
                        }
                    }
                }
            }
        }

        if do_em {
            constraint_entries(layout, |i, j, c| {
                rc[i] += z[j] * c;
                if want_jac {
                    jac.push(2 * i, 2 * j, c);
                    jac.push(2 * i + 1, 2 * j + 1, c);
                }
            });
            for (ri, bi) in rc.iter_mut().zip(em_rhs(layout)) {
                *ri -= bi;
            }
            for (c, v) in rc.iter().enumerate() {
                r[2 * c] = v.re;
                r[2 * c + 1] = v.im;
            }
        } else {
            for i in 0..to {
                r[i] = x[i] - self.frozen[i];
                if want_jac {
                    jac.push(i, i, 1.0);
                }
            }
        }

        if do_th {
            let dirichlet = self.dirichlet;
            let mut add_j = |i: usize, j: usize, v: f64| {
                if !dirichlet[i] {
                    jac.push(to + i, to + j, v)
                }
            };
            boundary_residual(
                self.geom,
                &self.bc.conv_rad,
                theta,
                |i, v| {
                    if !dirichlet[i] {
                        r[to + i] += v
                    }
                },
                if want_jac { Some(&mut add_j) } else { None },
            );
            for i in 0..layout.n_nodes {
                if self.dirichlet[i] {
                    r[to + i] = theta[i] - self.bc.dirichlet;
                    if want_jac {
                        jac.push(to + i, to + i, 1.0);
                    }
                }
            }
        } else {
            for i in to..n {
                r[i] = x[i] - self.frozen[i];
                if want_jac {
                    jac.push(i, i, 1.0);
                }
            }
        }
        Ok((r, jac))
    }
}

impl NonlinearSystem for CoupledSystem<'_> {
    fn size(&self) -> usize {
        self.theta_offset() + self.layout.n_nodes
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval(x, false)?.0)
    }

    fn residual_and_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, Triplets<f64>)> {
        self.eval(x, true)
    }
}

/// A problem bound to a solver configuration.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub problem: Problem,
    pub config: SolverConfig,
    pub layout: EmLayout,
    dirichlet: Vec<bool>,
}

impl Simulation {
    pub fn new(problem: Problem, config: SolverConfig) -> Result<Self> {
        config.validate().map_err(Error::InvalidArgument)?;
        problem.material.validate().map_err(Error::InvalidArgument)?;
        problem.bc.validate().map_err(Error::InvalidArgument)?;
        if !(problem.omega > 0.0) && matches!(problem.source, HeatSource::Joule) {
            return Err(Error::InvalidArgument(format!(
                "angular frequency must be positive, got {}",
                problem.omega
            )));
        }
        let mut problem = problem;
        if matches!(problem.source, HeatSource::Uniform(_)) && problem.ports.ports.is_empty() {
            problem.ports = PortSpec {
                ports: problem
                    .mesh
                    .port_indices()
                    .into_iter()
                    .map(|k| Port {
                        k,
                        drive: Drive::Current(Complex64::default()),
                    })
                    .collect(),
            };
        }
        let layout = EmLayout::new(&problem.mesh, &problem.ports)?;
        let dirichlet = dirichlet_nodes(&problem.mesh);
        Ok(Self {
            problem,
            config,
            layout,
            dirichlet,
        })
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.layout.n_complex() + self.layout.n_nodes
    }

    pub fn geometry(&self, t: f64) -> Result<Geometry> {
        Geometry::build(
            &self.problem.mesh,
            &self.problem.motion,
            t,
            self.config.mode,
            self.problem.material.rho0,
        )
    }

    /// The nonlinear system of a step from `theta_old` on `geom`.
    pub fn system<'a>(
        &'a self,
        geom: &'a Geometry,
        kind: StepKind,
        theta_old: &'a [f64],
        frozen: &'a [f64],
        dt: f64,
    ) -> CoupledSystem<'a> {
        CoupledSystem {
            geom,
            material: &self.problem.material,
            layout: &self.layout,
            bc: &self.problem.bc,
            dirichlet: &self.dirichlet,
            omega: self.problem.omega,
            dt,
            theta_old,
            frozen,
            kind,
        }
    }

    fn uniform_source(&self) -> Option<Vec<f64>> {
        match self.problem.source {
            HeatSource::Uniform(q) => Some(vec![q; self.problem.mesh.n_triangles()]),
            HeatSource::Joule => None,
        }
    }

    fn state_from(
        &self,
        t: f64,
        geom: &Geometry,
        x: Vec<f64>,
        iterations: usize,
        history: Vec<f64>,
    ) -> Result<CoupledState> {
        let nc = self.layout.n_complex();
        let z: Vec<Complex64> = (0..nc).map(|c| Complex64::new(x[2 * c], x[2 * c + 1])).collect();
        let h = self.layout.nodal_field(&z);
        let theta = x[2 * nc..].to_vec();
        let lo = self.layout.lambda_offset();
        let lambda = z[lo..lo + self.layout.n_lambda()].to_vec();
        let ports = if self.uniform_source().is_some() {
            Vec::new()
        } else {
            self.layout.port_values(&z)
        };
        let post = reconstruct_current_density(geom, &self.problem.material, &h, &theta)?;
        Ok(CoupledState {
            t,
            diagnostics: Diagnostics {
                p_diss: post.p_diss,
                port_power: crate::em::complex_port_power(&ports),
                newton_iterations: iterations,
                residual_history: history,
                halvings: 0,
            },
            h,
            lambda,
            ports,
            theta,
            post,
            unknowns: x,
        })
    }

    /// State at `t = 0`: uniform initial temperature and the field solved on
    /// the initial geometry.
    pub fn initial_state(&self) -> Result<CoupledState> {
        let geom = self.geometry(0.0)?;
        let mut x = vec![0.0; self.n_unknowns()];
        let to = 2 * self.layout.n_complex();
        for v in &mut x[to..] {
            *v = self.problem.theta0;
        }
        for (i, &d) in self.dirichlet.iter().enumerate() {
            if d {
                x[to + i] = self.problem.bc.dirichlet;
            }
        }
        if self.uniform_source().is_some() {
            return self.state_from(0.0, &geom, x, 0, Vec::new());
        }
        let theta_old = x[to..].to_vec();
        let frozen = x.clone();
        let sys = self.system(&geom, StepKind::EmOnly, &theta_old, &frozen, self.config.dt);
        let rep = newton_solve(&sys, x.clone(), &self.config.newton)?;
        self.state_from(0.0, &geom, rep.x, rep.iterations, rep.history)
    }

    fn try_step(&self, prev: &CoupledState, t: f64) -> Result<CoupledState> {
        let geom = self.geometry(t)?;
        let dt = t - prev.t;
        let kind = match self.uniform_source() {
            Some(q) => StepKind::ThermalOnly(q),
            None => StepKind::Coupled,
        };
        let sys = self.system(&geom, kind, &prev.theta, &prev.unknowns, dt);
        let rep = newton_solve(&sys, prev.unknowns.clone(), &self.config.newton)?;
        self.state_from(t, &geom, rep.x, rep.iterations, rep.history)
    }

    fn step_recursive(&self, prev: &CoupledState, t: f64, depth: usize) -> Result<CoupledState> {
        match self.try_step(prev, t) {
            Ok(s) => Ok(s),
            Err(e) if retryable(&e) && depth < self.config.max_halvings => {
                let mid = 0.5 * (prev.t + t);
                log::warn!(
                    "step to t = {t} failed ({e}); retrying with dt = {}",
                    mid - prev.t
                );
                let half = self.step_recursive(prev, mid, depth + 1)?;
                let mut s = self.step_recursive(&half, t, depth + 1)?;
                s.diagnostics.newton_iterations += half.diagnostics.newton_iterations;
                s.diagnostics.halvings = s.diagnostics.halvings.max(half.diagnostics.halvings).max(depth + 1);
                Ok(s)
            }
            Err(e) if retryable(&e) => Err(Error::StepFailure {
                t,
                halvings: depth,
                source: Box::new(e),
            }),
            Err(e) => Err(e),
        }
    }

    /// Advances `prev` to time `t`, halving the step on Newton failure.
    pub fn time_step(&self, prev: &CoupledState, t: f64) -> Result<CoupledState> {
        if !(t > prev.t) {
            return Err(Error::InvalidArgument(format!(
                "step must advance time: {} -> {t}",
                prev.t
            )));
        }
        self.step_recursive(prev, t, 0)
    }

    /// Runs to `t_end`, calling `observe` on every state including `t = 0`.
    pub fn run_with(&self, mut observe: impl FnMut(&CoupledState) -> Result<()>) -> Result<CoupledState> {
        let mut state = self.initial_state()?;
        observe(&state)?;
        for n in 1..=self.config.n_steps() {
            let t = self.config.time(n);
            state = self.time_step(&state, t)?;
            log::info!(
                "t = {t:.4} s: theta in [{:.2}, {:.2}] C, P = {:.6e} W, {} Newton iterations",
                state.theta_min(),
                state.theta_max(),
                state.diagnostics.p_diss,
                state.diagnostics.newton_iterations
            );
            observe(&state)?;
        }
        Ok(state)
    }

    /// Runs to `t_end` and keeps every state.
    pub fn run(&self) -> Result<Vec<CoupledState>> {
        let mut states = Vec::new();
        self.run_with(|s| {
            states.push(s.clone());
            Ok(())
        })?;
        Ok(states)
    }
}

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::NonConvergence { .. } | Error::LinearSolve(_) | Error::Material(_)
    )
}

/// Runs `problem` under `config` and returns every state.
pub fn run_simulation(problem: Problem, config: SolverConfig) -> Result<Vec<CoupledState>> {
    Simulation::new(problem, config)?.run()
}
