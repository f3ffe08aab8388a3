//! Axisymmetric thermo-electromagnetic finite elements for conductors under a
//! prescribed large deformation.
//!
//! A cylindrical conductor carries a time-harmonic current through electrodes
//! while it is being deformed. The azimuthal magnetic field `H_theta` and the
//! temperature are solved together on the meridional half-plane with linear
//! triangles:
//!
//! * the eddy-current problem is written for `H~ = r H_theta`, with electrode
//!   currents or voltages imposed through ports and Lagrange multipliers on
//!   insulated walls,
//! * the heat equation is advanced with implicit Euler and driven by the
//!   time-averaged Joule heating,
//! * both are assembled either on the reference configuration (Lagrangian) or
//!   on the mesh pushed forward at each step (Eulerian),
//! * every step solves the coupled nonlinear system with Newton's method.
//!
//! ```
//! use axitherm::{generate_rectangle_mesh, oracles};
//!
//! let mesh = generate_rectangle_mesh(0.02875, 0.165, 4, 8).unwrap();
//! assert_eq!(mesh.n_triangles(), 64);
//! let v = oracles::dc_voltage(35000.0, 0.165, 0.02875, 4.48e6).value;
//! assert!((v - 0.4964).abs() < 1e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coupled;
pub mod em;
pub mod error;
pub mod fem;
pub mod io;
pub mod kinematics;
pub mod materials;
pub mod mesh;
pub mod newton;
pub mod oracles;
pub mod sparse;
pub mod thermal;
pub mod verify;

pub use coupled::{run_simulation, CoupledState, HeatSource, Problem, Simulation, SolverConfig};
pub use em::{Drive, Port, PortSpec};
pub use error::{Error, Result};
pub use fem::Formulation;
pub use io::config::{load_config, parse_config, ScenarioConfig};
pub use kinematics::{DisplacementField, Ramp};
pub use materials::MaterialModel;
pub use mesh::{generate_rectangle_mesh, MeridionalMesh};
pub use thermal::{ConvRad, ThermalBc};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/formulation.md")]
    mod formulation {}
    #[doc = include_str!("../../../book/src/materials.md")]
    mod materials {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/library.md")]
    mod library {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
