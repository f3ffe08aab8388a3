//! P1 geometry shared by the electromagnetic and thermal kernels.
//!
//! Both formulations reduce to the same element kernels once the geometric
//! factors are folded into per-quadrature-point gradients and weights. With
//! `r` the current radius, `A` a triangle area and `w` the quadrature weight:
//!
//! | factor        | Lagrangian (reference mesh)      | Eulerian (pushed mesh) |
//! |---------------|----------------------------------|------------------------|
//! | `em_grad`     | `N grad phi`                     | `rot(grad_x phi)`      |
//! | `em_stiff_w`  | `w A / (r det F2)`               | `w A / r`              |
//! | `em_mass_w`   | `w A det F2 / r`                 | `w A / r`              |
//! | `th_grad`     | `F2^-T grad phi`                 | `grad_x phi`           |
//! | `th_diff_w`   | `w A det F2 r`                   | `w A r`                |
//! | `th_mass_w`   | `rho0 r_m w A`                   | `rho w A r`            |
//!
//! where `rot(g) = (-g_z, g_r)` and the Eulerian density is
//! `rho = rho0 / det F` with `det F` the element volume ratio. The spatial
//! Joule density then integrates as `|em_grad . H|^2 em_stiff_w / (2 sigma)` in
//! both cases, and `th_diff_w` is the spatial volume weight `r dr dz`.
//!
//! Volume integrals use the three-point interior rule (barycentric
//! `(2/3, 1/6, 1/6)`, exact for quadratics) so no quadrature point lies on the
//! symmetry axis. Boundary integrals use two-point Gauss-Legendre.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kinematics::DisplacementField;
use crate::mesh::{signed_area, MeridionalMesh, Point, ThermalTag};

/// Which configuration the weak forms are posed on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Reference mesh with pull-back factors.
    #[default]
    Lagrangian,
    /// Mesh pushed to the current configuration.
    Eulerian,
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Formulation::Lagrangian => "lagrangian",
            Formulation::Eulerian => "eulerian",
        })
    }
}

/// Barycentric coordinates of the interior rule.
pub const TRIANGLE_RULE: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];
pub const TRIANGLE_WEIGHT: f64 = 1.0 / 3.0;

/// Two-point Gauss-Legendre abscissae on `[0, 1]`, weight 1/2 each.
pub fn edge_rule() -> [f64; 2] {
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d]
}

/// Gradients of the three P1 shape functions and the signed area.
pub fn p1_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let area = signed_area(p[0], p[1], p[2]);
    let inv = 0.5 / area;
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        g[i] = [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv];
    }
    (g, area)
}

fn combine(p: [Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}

fn rot(g: [f64; 2]) -> [f64; 2] {
    [-g[1], g[0]]
}

/// Everything the kernels need at one volume quadrature point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub phi: [f64; 3],
    /// Current radius.
    pub r: f64,
    pub em_grad: [[f64; 2]; 3],
    pub em_stiff_w: f64,
    pub em_mass_w: f64,
    pub th_grad: [[f64; 2]; 3],
    pub th_diff_w: f64,
    /// Heat capacity weight, density included.
    pub th_mass_w: f64,
}

/// Data for point-wise post-processing at the centroid.
///
/// The current density is `J = (-d_z H~ / r, d_r H~ / r_axial)` with spatial
/// derivatives. `r_axial` is half the radial slope of the linear interpolant
/// of `r^2`, which makes a uniform axial current exact on any triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentroidPoint {
    pub r: f64,
    pub r_axial: f64,
    /// Spatial gradients of the shape functions.
    pub grad: [[f64; 2]; 3],
}

impl CentroidPoint {
    fn new(r: f64, grad: [[f64; 2]; 3], current: [Point; 3]) -> Self {
        let slope: f64 = (0..3).map(|a| current[a][0] * current[a][0] * grad[a][0]).sum();
        let r_axial = 0.5 * slope;
        Self {
            r,
            r_axial: if r_axial > 0.25 * r && r_axial < 4.0 * r { r_axial } else { r },
            grad,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    pub nodes: [usize; 3],
    pub qp: [QuadPoint; 3],
    pub centroid: CentroidPoint,
    /// Area of the triangle in the current configuration.
    pub current_area: f64,
}

/// Quadrature of one boundary edge: `phi_a` at each Gauss point and the full
/// weight `w |e| factor r` so that an edge integral of `f psi` is
/// `sum_g weight[g] f(g) psi(g)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGeometry {
    pub edge: usize,
    pub a: usize,
    pub b: usize,
    pub phi_a: [f64; 2],
    pub weight: [f64; 2],
}

/// Geometric factors of every element and convection-radiation edge at one
/// instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub formulation: Formulation,
    pub elements: Vec<ElementGeometry>,
    pub conv_edges: Vec<EdgeGeometry>,
    /// Node positions in the current configuration.
    pub current_nodes: Vec<Point>,
}

impl Geometry {
    /// Evaluates the motion at `t` and builds all factors for `formulation`.
    pub fn build(
        mesh: &MeridionalMesh,
        field: &DisplacementField,
        t: f64,
        formulation: Formulation,
        rho0: f64,
    ) -> Result<Self> {
        match formulation {
            Formulation::Lagrangian => Self::lagrangian(mesh, field, t, rho0),
            Formulation::Eulerian => {
                let pushed = mesh.push_forward(field, t)?;
                Ok(Self::eulerian(mesh, &pushed, rho0))
            }
        }
    }

    fn lagrangian(
        mesh: &MeridionalMesh,
        field: &DisplacementField,
        t: f64,
        rho0: f64,
    ) -> Result<Self> {
        let mut elements = Vec::with_capacity(mesh.n_triangles());
        for (ti, &nodes) in mesh.triangles().iter().enumerate() {
            let p = mesh.triangle_points(ti);
            let (g, area) = p1_gradients(p);
            let mut qp = [None; 3];
            for (q, l) in TRIANGLE_RULE.iter().enumerate() {
                let x = combine(p, *l);
                let k = field.eval(x, t)?;
                let r = k.r_current;
                let wa = TRIANGLE_WEIGHT * area;
                qp[q] = Some(QuadPoint {
                    phi: *l,
                    r,
                    em_grad: g.map(|gi| k.n_apply(gi)),
                    em_stiff_w: wa / (r * k.det_f2),
                    em_mass_w: wa * k.det_f2 / r,
                    th_grad: g.map(|gi| k.inv_transpose_apply(gi)),
                    th_diff_w: wa * k.det_f2 * r,
                    th_mass_w: wa * x[0] * rho0,
                });
            }
            let c = combine(p, [1.0 / 3.0; 3]);
            let k = field.eval(c, t)?;
            let current: [Point; 3] = p.map(|x| {
                let d = field.sample(x, t);
                [x[0] + d.ur, x[1] + d.uz]
            });
            elements.push(ElementGeometry {
                nodes,
                qp: qp.map(Option::unwrap),
                centroid: CentroidPoint::new(k.r_current, g.map(|gi| k.inv_transpose_apply(gi)), current),
                current_area: signed_area(current[0], current[1], current[2]),
            });
        }

        let [s0, s1] = edge_rule();
        let mut conv_edges = Vec::new();
        for (ei, e) in mesh.boundary_edges().iter().enumerate() {
            if e.thermal != ThermalTag::ConvRad {
                continue;
            }
            let pa = mesh.nodes()[e.a];
            let pb = mesh.nodes()[e.b];
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = d[0].hypot(d[1]);
            let normal = [d[1] / len, -d[0] / len];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let k = field.eval(mid, t)?;
            let m = k.inv_transpose_apply(normal);
            let factor = m[0].hypot(m[1]) * k.det_f2;
            let mut weight = [0.0; 2];
            for (g, s) in [s0, s1].into_iter().enumerate() {
                let x = [pa[0] + s * d[0], pa[1] + s * d[1]];
                let r = x[0] + field.sample(x, t).ur;
                weight[g] = 0.5 * len * factor * r;
            }
            conv_edges.push(EdgeGeometry {
                edge: ei,
                a: e.a,
                b: e.b,
                phi_a: [1.0 - s0, 1.0 - s1],
                weight,
            });
        }

        let current_nodes = mesh
            .nodes()
            .iter()
            .map(|&x| {
                let d = field.sample(x, t);
                [x[0] + d.ur, x[1] + d.uz]
            })
            .collect();
        Ok(Self {
            formulation: Formulation::Lagrangian,
            elements,
            conv_edges,
            current_nodes,
        })
    }

    /// Eulerian factors on `pushed`, which must share connectivity with
    /// `reference`; the reference mesh only supplies the density ratio.
    pub fn eulerian(reference: &MeridionalMesh, pushed: &MeridionalMesh, rho0: f64) -> Self {
        let mut elements = Vec::with_capacity(pushed.n_triangles());
        for (ti, &nodes) in pushed.triangles().iter().enumerate() {
            let p = pushed.triangle_points(ti);
            let p_ref = reference.triangle_points(ti);
            let (g, area) = p1_gradients(p);
            let area_ref = signed_area(p_ref[0], p_ref[1], p_ref[2]);
            let rbar = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let rbar_ref = (p_ref[0][0] + p_ref[1][0] + p_ref[2][0]) / 3.0;
            let rho = rho0 / ((area / area_ref) * (rbar / rbar_ref));
            let grad_rot = g.map(rot);
            let mut qp = [None; 3];
            for (q, l) in TRIANGLE_RULE.iter().enumerate() {
                let r = combine(p, *l)[0];
                let wa = TRIANGLE_WEIGHT * area;
                qp[q] = Some(QuadPoint {
                    phi: *l,
                    r,
                    em_grad: grad_rot,
                    em_stiff_w: wa / r,
                    em_mass_w: wa / r,
                    th_grad: g,
                    th_diff_w: wa * r,
                    th_mass_w: wa * r * rho,
                });
            }
            let c = combine(p, [1.0 / 3.0; 3]);
            elements.push(ElementGeometry {
                nodes,
                qp: qp.map(Option::unwrap),
                centroid: CentroidPoint::new(c[0], g, p),
                current_area: area,
            });
        }

        let [s0, s1] = edge_rule();
        let mut conv_edges = Vec::new();
        for (ei, e) in pushed.boundary_edges().iter().enumerate() {
            if e.thermal != ThermalTag::ConvRad {
                continue;
            }
            let pa = pushed.nodes()[e.a];
            let pb = pushed.nodes()[e.b];
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = d[0].hypot(d[1]);
            let mut weight = [0.0; 2];
            for (g, s) in [s0, s1].into_iter().enumerate() {
                weight[g] = 0.5 * len * (pa[0] + s * d[0]);
            }
            conv_edges.push(EdgeGeometry {
                edge: ei,
                a: e.a,
                b: e.b,
                phi_a: [1.0 - s0, 1.0 - s1],
                weight,
            });
        }

        Self {
            formulation: Formulation::Eulerian,
            elements,
            conv_edges,
            current_nodes: pushed.nodes().to_vec(),
        }
    }

    /// Spatial volume `2 pi sum r dA` of the body.
    pub fn volume(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self
                .elements
                .iter()
                .flat_map(|e| e.qp.iter())
                .map(|q| q.th_diff_w)
                .sum::<f64>()
    }

    /// Spatial area `2 pi sum r dl` of the convection-radiation boundary.
    pub fn conv_area(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self
                .conv_edges
                .iter()
                .map(|e| e.weight[0] + e.weight[1])
                .sum::<f64>()
    }

    /// Mass `2 pi sum rho r dA`.
    pub fn mass(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self
                .elements
                .iter()
                .flat_map(|e| e.qp.iter())
                .map(|q| q.th_mass_w)
                .sum::<f64>()
    }
}
