//! Time-harmonic eddy currents in the weighted field `H~ = r H_theta`.
//!
//! Unknowns, in this order:
//!
//! * `H~` at every node off the axis (P1, zero on the axis),
//! * one multiplier `lambda_e` per insulated boundary edge,
//! * the voltage `V_k` of every current-driven port.
//!
//! For a P1 trace the tangential derivative integrates exactly along an edge,
//! so each insulated edge `a -> b` contributes the row `H~(a) - H~(b) = 0` and
//! each current-driven port the row `-sum (H~(a) - H~(b)) = -I_k / (2 pi)`.
//! The incidence vectors `p_k` of the ports appear transposed in the field
//! rows, which keeps the whole matrix complex symmetric:
//!
//! ```text
//! [ A   C^T  -P^T ] [H~    ]   [ sum_{voltage ports} V_k p_k ]
//! [ C   0     0   ] [lambda] = [ 0                           ]
//! [ -P  0     0   ] [V     ]   [ -I / (2 pi)                 ]
//! ```
//!
//! Port voltages are reported as drops from the port to ground in the sense of
//! the port current, so `Re(V conj(I)) / 2` is the power delivered to the
//! conductor. The current through a voltage-driven port is recovered as
//! `2 pi p_k . H~`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use crate::error::{Error, Result};
use crate::fem::{Geometry, QuadPoint};
use crate::materials::{MaterialModel, PermeabilityEval};
use crate::mesh::{EmTag, MeridionalMesh};
use crate::sparse::Triplets;

/// How a port is driven.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    /// Prescribed complex current amplitude, A.
    Current(Complex64),
    /// Prescribed complex voltage amplitude, V.
    Voltage(Complex64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Port {
    /// Index `k` of the `portJ:k` boundary.
    pub k: usize,
    pub drive: Drive,
}

/// Drives of all ports; the `portE` boundary is the ground.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PortSpec {
    pub ports: Vec<Port>,
}

impl PortSpec {
    pub fn single_current(k: usize, amplitude: f64) -> Self {
        Self {
            ports: vec![Port {
                k,
                drive: Drive::Current(Complex64::new(amplitude, 0.0)),
            }],
        }
    }

    pub fn single_voltage(k: usize, amplitude: f64) -> Self {
        Self {
            ports: vec![Port {
                k,
                drive: Drive::Voltage(Complex64::new(amplitude, 0.0)),
            }],
        }
    }
}

/// A port with its incidence vector over field unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct PortTerm {
    pub k: usize,
    pub drive: Drive,
    /// `(field unknown, coefficient)` of `sum_edges (H~(a) - H~(b))`.
    pub incidence: Vec<(usize, f64)>,
}

/// Numbering of the electromagnetic unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct EmLayout {
    pub n_nodes: usize,
    /// Field unknown of every node, `None` on the axis.
    pub h_index: Vec<Option<usize>>,
    pub n_h: usize,
    /// Boundary edge index of every multiplier.
    pub lambda_edges: Vec<usize>,
    /// `(field unknown, coefficient)` pairs of every multiplier row.
    pub lambda_rows: Vec<Vec<(usize, f64)>>,
    /// Ports in ascending `k`, current-driven ones carrying a voltage unknown.
    pub ports: Vec<PortTerm>,
}

impl EmLayout {
    /// Numbers the unknowns and checks the port specification against the
    /// mesh tags.
    pub fn new(mesh: &MeridionalMesh, spec: &PortSpec) -> Result<Self> {
        let axis = mesh.axis_nodes();
        let mut h_index = vec![None; mesh.n_nodes()];
        let mut n_h = 0;
        for (i, on_axis) in axis.iter().enumerate() {
            if !on_axis {
                h_index[i] = Some(n_h);
                n_h += 1;
            }
        }

        let edge_row = |a: usize, b: usize| -> Vec<(usize, f64)> {
            let mut row = Vec::new();
            if let Some(i) = h_index[a] {
                row.push((i, 1.0));
            }
            if let Some(j) = h_index[b] {
                row.push((j, -1.0));
            }
            row
        };

        let mut lambda_edges = Vec::new();
        let mut lambda_rows = Vec::new();
        for (ei, e) in mesh.boundary_edges().iter().enumerate() {
            if e.em == EmTag::Insulated {
                let row = edge_row(e.a, e.b);
                if row.is_empty() {
                    return Err(Error::Ports(format!(
                        "insulated edge {ei} lies on the axis"
                    )));
                }
                lambda_edges.push(ei);
                lambda_rows.push(row);
            }
        }

        let present = mesh.port_indices();
        let mut specified: Vec<usize> = spec.ports.iter().map(|p| p.k).collect();
        specified.sort_unstable();
        if let Some(w) = specified.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Ports(format!("port {} is driven twice", w[0])));
        }
        if specified != present {
            return Err(Error::Ports(format!(
                "drives given for ports {specified:?} but the mesh has ports {present:?}"
            )));
        }
        let has_ground = mesh
            .boundary_edges()
            .iter()
            .any(|e| e.em == EmTag::PortE);
        let has_voltage = spec
            .ports
            .iter()
            .any(|p| matches!(p.drive, Drive::Voltage(_)));
        if !has_ground && !has_voltage {
            return Err(Error::Ports(
                "the potential is not fixed: need a portE boundary or a voltage-driven port".into(),
            ));
        }
        mesh.boundary_runs(crate::mesh::BoundaryTag::Em(EmTag::PortE))?;

        let mut ports = Vec::new();
        for &k in &present {
            let drive = spec.ports.iter().find(|p| p.k == k).unwrap().drive;
            mesh.boundary_runs(crate::mesh::BoundaryTag::Em(EmTag::PortJ(k)))?;
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for e in mesh.boundary_edges().iter().filter(|e| e.em == EmTag::PortJ(k)) {
                for (i, c) in edge_row(e.a, e.b) {
                    *acc.entry(i).or_default() += c;
                }
            }
            let incidence: Vec<(usize, f64)> = acc.into_iter().filter(|(_, c)| *c != 0.0).collect();
            if incidence.is_empty() {
                return Err(Error::Ports(format!(
                    "port {k} does not reach off-axis boundary nodes"
                )));
            }
            ports.push(PortTerm { k, drive, incidence });
        }

        Ok(Self {
            n_nodes: mesh.n_nodes(),
            h_index,
            n_h,
            lambda_edges,
            lambda_rows,
            ports,
        })
    }

    pub fn n_lambda(&self) -> usize {
        self.lambda_edges.len()
    }

    pub fn lambda_offset(&self) -> usize {
        self.n_h
    }

    pub fn voltage_offset(&self) -> usize {
        self.n_h + self.n_lambda()
    }

    /// Current-driven ports, whose voltages are unknowns, with their unknown
    /// index.
    pub fn current_ports(&self) -> impl Iterator<Item = (usize, &PortTerm)> {
        let off = self.voltage_offset();
        self.ports
            .iter()
            .filter(|p| matches!(p.drive, Drive::Current(_)))
            .enumerate()
            .map(move |(i, p)| (off + i, p))
    }

    pub fn n_voltage_unknowns(&self) -> usize {
        self.current_ports().count()
    }

    /// Number of complex unknowns.
    pub fn n_complex(&self) -> usize {
        self.voltage_offset() + self.n_voltage_unknowns()
    }

    /// Nodal weighted field from the complex unknown vector.
    pub fn nodal_field(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.h_index
            .iter()
            .map(|i| i.map_or(Complex64::default(), |i| z[i]))
            .collect()
    }

    /// Voltage and current of every port from a solved unknown vector.
    pub fn port_values(&self, z: &[Complex64]) -> Vec<PortValue> {
        let mut unknown = self.voltage_offset();
        self.ports
            .iter()
            .map(|p| match p.drive {
                Drive::Current(i) => {
                    let v = z[unknown];
                    unknown += 1;
                    PortValue {
                        k: p.k,
                        voltage: v,
                        current: i,
                    }
                }
                Drive::Voltage(v) => {
                    let flux: Complex64 = p.incidence.iter().map(|&(j, c)| z[j] * c).sum();
                    PortValue {
                        k: p.k,
                        voltage: v,
                        current: flux * (2.0 * PI),
                    }
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortValue {
    pub k: usize,
    pub voltage: Complex64,
    pub current: Complex64,
}

/// Pushes the constraint blocks and returns the right-hand side they induce.
/// `put(row, col, value)` receives complex-unknown indices.
pub(crate) fn constraint_entries(layout: &EmLayout, mut put: impl FnMut(usize, usize, f64)) {
    let lo = layout.lambda_offset();
    for (l, row) in layout.lambda_rows.iter().enumerate() {
        for &(i, c) in row {
            put(lo + l, i, c);
            put(i, lo + l, c);
        }
    }
    for (v, p) in layout.current_ports() {
        for &(i, c) in &p.incidence {
            put(v, i, -c);
            put(i, v, -c);
        }
    }
}

/// Right-hand side of the complex system.
pub fn em_rhs(layout: &EmLayout) -> Vec<Complex64> {
    let mut b = vec![Complex64::default(); layout.n_complex()];
    let mut v_unknown = layout.voltage_offset();
    for p in &layout.ports {
        match p.drive {
            Drive::Current(i) => {
                b[v_unknown] = -i / (2.0 * PI);
                v_unknown += 1;
            }
            Drive::Voltage(v) => {
                for &(j, c) in &p.incidence {
                    b[j] += v * c;
                }
            }
        }
    }
    b
}

/// Field and material state at one quadrature point.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EmPoint {
    /// Interpolated weighted field.
    pub h: Complex64,
    /// `em_grad . H~`.
    pub gh: [Complex64; 2],
    pub mu: PermeabilityEval,
    pub sigma: f64,
    pub dsigma: f64,
}

pub(crate) fn em_point(
    q: &QuadPoint,
    h: [Complex64; 3],
    theta: [f64; 3],
    mat: &MaterialModel,
) -> Result<EmPoint> {
    let mut hq = Complex64::default();
    let mut gh = [Complex64::default(); 2];
    let mut th = 0.0;
    for i in 0..3 {
        hq += h[i] * q.phi[i];
        gh[0] += h[i] * q.em_grad[i][0];
        gh[1] += h[i] * q.em_grad[i][1];
        th += theta[i] * q.phi[i];
    }
    let mu = mat.mu(hq.norm() / q.r, th)?;
    let (sigma, dsigma) = mat.sigma(th)?;
    Ok(EmPoint {
        h: hq,
        gh,
        mu,
        sigma,
        dsigma,
    })
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Complex element matrix at fixed permeability and conductivity.
pub(crate) fn element_matrix(
    qps: &[QuadPoint; 3],
    pts: &[EmPoint; 3],
    omega: f64,
) -> [[Complex64; 3]; 3] {
    let mut k = [[Complex64::default(); 3]; 3];
    for (q, p) in qps.iter().zip(pts) {
        let m = omega * p.mu.mu * q.em_mass_w;
        let s = q.em_stiff_w / p.sigma;
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] += Complex64::new(
                    s * dot(q.em_grad[i], q.em_grad[j]),
                    m * q.phi[i] * q.phi[j],
                );
            }
        }
    }
    k
}

/// Nodal field of one element.
pub(crate) fn element_field(nodes: [usize; 3], h: &[Complex64]) -> [Complex64; 3] {
    nodes.map(|n| h[n])
}

/// Complex system linearised at `h_lin` (nodal weighted field) and `theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmSystem {
    pub matrix: Triplets<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl EmSystem {
    pub fn solve(&self) -> Result<Vec<Complex64>> {
        self.matrix.solve(&self.rhs)
    }
}

/// Assembles the complex system with permeability evaluated at `h_lin`.
/// The geometry decides between the reference and the current configuration.
pub fn assemble_em(
    geom: &Geometry,
    mat: &MaterialModel,
    layout: &EmLayout,
    omega: f64,
    theta: &[f64],
    h_lin: &[Complex64],
) -> Result<EmSystem> {
    let n = layout.n_complex();
    let mut a = Triplets::with_capacity(n, 9 * geom.elements.len() + 4 * n);
    for el in &geom.elements {
        let hn = element_field(el.nodes, h_lin);
        let tn = el.nodes.map(|i| theta[i]);
        let pts = [
            em_point(&el.qp[0], hn, tn, mat)?,
            em_point(&el.qp[1], hn, tn, mat)?,
            em_point(&el.qp[2], hn, tn, mat)?,
        ];
        let k = element_matrix(&el.qp, &pts, omega);
        for i in 0..3 {
            let Some(gi) = layout.h_index[el.nodes[i]] else { continue };
            for j in 0..3 {
                let Some(gj) = layout.h_index[el.nodes[j]] else { continue };
                a.push(gi, gj, k[i][j]);
            }
        }
    }
    constraint_entries(layout, |i, j, c| a.push(i, j, Complex64::new(c, 0.0)));
    Ok(EmSystem {
        matrix: a,
        rhs: em_rhs(layout),
    })
}

/// Post-processed electromagnetic quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct EmPostFields {
    /// `|J|` at every triangle centroid, A/m^2.
    pub j_abs: Vec<f64>,
    /// Time-averaged Joule density `|J|^2 / (2 sigma)` at centroids, W/m^3.
    pub joule: Vec<f64>,
    /// Dissipated power integrated over the current configuration, W.
    pub p_diss: f64,
}

/// Current density and Joule heating from a solved nodal field.
pub fn reconstruct_current_density(
    geom: &Geometry,
    mat: &MaterialModel,
    h: &[Complex64],
    theta: &[f64],
) -> Result<EmPostFields> {
    let mut j_abs = Vec::with_capacity(geom.elements.len());
    let mut joule = Vec::with_capacity(geom.elements.len());
    let mut p = 0.0;
    for el in &geom.elements {
        let hn = element_field(el.nodes, h);
        let tn = el.nodes.map(|i| theta[i]);
        let c = &el.centroid;
        let mut g = [Complex64::default(); 2];
        for i in 0..3 {
            g[0] += hn[i] * c.grad[i][0];
            g[1] += hn[i] * c.grad[i][1];
        }
        let j = ((g[1] / c.r).norm_sqr() + (g[0] / c.r_axial).norm_sqr()).sqrt();
        let (sigma, _) = mat.sigma((tn[0] + tn[1] + tn[2]) / 3.0)?;
        j_abs.push(j);
        joule.push(j * j / (2.0 * sigma));
        for q in &el.qp {
            let pt = em_point(q, hn, tn, mat)?;
            p += (pt.gh[0].norm_sqr() + pt.gh[1].norm_sqr()) * q.em_stiff_w / (2.0 * pt.sigma);
        }
    }
    Ok(EmPostFields {
        j_abs,
        joule,
        p_diss: 2.0 * PI * p,
    })
}

/// `S = 1/2 sum_k V_k conj(I_k)`.
pub fn complex_port_power(ports: &[PortValue]) -> Complex64 {
    ports
        .iter()
        .map(|p| p.voltage * p.current.conj())
        .sum::<Complex64>()
        * 0.5
}
