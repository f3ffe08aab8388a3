//! Acceptance suite. Every criterion writes one `PASS`/`FAIL` line to stderr
//! (bypassing the test harness capture) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use axitherm::coupled::StepKind;
use axitherm::em::{assemble_em, EmLayout};
use axitherm::fem::Geometry;
use axitherm::kinematics::{upsetting_profile, Profile};
use axitherm::materials::MaterialModel;
use axitherm::newton::NonlinearSystem;
use axitherm::thermal::ConvRad;
use axitherm::verify::{self, relative_l2, CURRENT, LENGTH, RADIUS};
use axitherm::{
    CoupledState, DisplacementField, Formulation, MeridionalMesh, Ramp, ScenarioConfig, Simulation, SolverConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CURIE: f64 = 748.69;

fn report(n: usize, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n:>2} [{name}] {verdict}: {detail}");
}

fn pinned() {
    axitherm::sparse::set_single_threaded();
}

#[test]
fn criterion_01_skin_effect() {
    pinned();
    let start = Instant::now();
    let coarse = verify::skin_effect(32, 64, 6.0).unwrap();
    let fine = verify::skin_effect(64, 128, 6.0).unwrap();
    let elapsed = start.elapsed();
    let ratio = coarse.l2_error / fine.l2_error;
    let pass = fine.l2_error <= 0.01 && ratio >= 3.4 && elapsed <= Duration::from_secs(60) && (fine.kappa_r - 6.0).abs() < 1e-9;
    report(
        1,
        "skin effect",
        pass,
        &format!(
            "|kappa R| = {:.3}, L2 error {:.3e} (32x64) and {:.3e} (64x128) <= 1e-2, ratio {ratio:.3} >= 3.4, {:.2} s <= 60 s",
            fine.kappa_r,
            coarse.l2_error,
            fine.l2_error,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_dc_limit() {
    pinned();
    let d = verify::dc_limit(32, 64).unwrap();
    let v_err = (d.voltage.re - d.reference).abs() / d.reference;
    let pass = v_err <= 0.005 && d.j_deviation <= 0.005;
    report(
        2,
        "DC limit",
        pass,
        &format!(
            "Re V = {:.7} V vs I L/(sigma pi R^2) = {:.7} V, rel {v_err:.3e} <= 5e-3; max ||J|/J_dc - 1| = {:.3e} <= 5e-3",
            d.voltage.re, d.reference, d.j_deviation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_power_balance() {
    pinned();
    let s = verify::skin_effect(64, 128, 6.0).unwrap();
    let rel = (s.joule_power - s.port_power).abs() / s.port_power;
    let pass = rel <= 0.01;
    report(
        3,
        "power balance",
        pass,
        &format!(
            "Re(1/2 V conj I) = {:.9e} W, integral of |J|^2/(2 sigma) = {:.9e} W, rel {rel:.3e} <= 1e-2",
            s.port_power, s.joule_power
        ),
    );
    assert!(pass);
}

fn max_rel_entry(a: &[(usize, usize, f64)], b: &[(usize, usize, f64)]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        assert_eq!((x.0, x.1), (y.0, y.1));
        let scale = x.2.abs().max(y.2.abs());
        if scale > 0.0 {
            worst = worst.max((x.2 - y.2).abs() / scale);
        }
    }
    worst
}

fn flatten(m: std::collections::BTreeMap<(usize, usize), f64>) -> Vec<(usize, usize, f64)> {
    m.into_iter().map(|((i, j), v)| (i, j, v)).collect()
}

#[test]
fn criterion_04_zero_displacement_equivalence() {
    pinned();
    let mut problem = verify::bar_problem(8, 16, MaterialModel::steel(), 2.0 * PI * 500.0).unwrap();
    problem.bc.conv_rad = ConvRad {
        h: 15.0,
        emissivity: 0.5,
        theta_conv: 20.0,
        theta_rad: 20.0,
    };
    let config = |mode| SolverConfig {
        dt: 0.1,
        t_end: 0.3,
        mode,
        ..Default::default()
    };
    let lag = Simulation::new(problem.clone(), config(Formulation::Lagrangian)).unwrap();
    let eul = Simulation::new(problem.clone(), config(Formulation::Eulerian)).unwrap();
    let gl = lag.geometry(0.0).unwrap();
    let ge = eul.geometry(0.0).unwrap();

    // Assembled coupled Jacobians and residuals at a random state.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = lag.n_unknowns();
    let to = 2 * lag.layout.n_complex();
    let x: Vec<f64> = (0..n)
        .map(|i| if i < to { rng.gen_range(-5000.0..5000.0) } else { rng.gen_range(20.0..900.0) })
        .collect();
    let old: Vec<f64> = x[to..].iter().map(|t| t - 3.0).collect();
    let (rl, jl) = lag.system(&gl, StepKind::Coupled, &old, &x, 0.1).residual_and_jacobian(&x).unwrap();
    let (re, je) = eul.system(&ge, StepKind::Coupled, &old, &x, 0.1).residual_and_jacobian(&x).unwrap();
    let mut system_err = max_rel_entry(&flatten(jl.to_map()), &flatten(je.to_map()));
    for (a, b) in rl.iter().zip(&re) {
        let s = a.abs().max(b.abs());
        if s > 0.0 {
            system_err = system_err.max((a - b).abs() / s);
        }
    }
    // Complex field matrices.
    let layout = EmLayout::new(&problem.mesh, &problem.ports).unwrap();
    let theta: Vec<f64> = x[to..].to_vec();
    let h: Vec<Complex64> = (0..problem.mesh.n_nodes())
        .map(|_| Complex64::new(rng.gen_range(-4000.0..4000.0), rng.gen_range(-4000.0..4000.0)))
        .collect();
    let el = assemble_em(&gl, &problem.material, &layout, problem.omega, &theta, &h).unwrap();
    let ee = assemble_em(&ge, &problem.material, &layout, problem.omega, &theta, &h).unwrap();
    let (ml, me) = (el.matrix.to_map(), ee.matrix.to_map());
    assert_eq!(ml.len(), me.len());
    for ((ka, a), (kb, b)) in ml.iter().zip(&me) {
        assert_eq!(ka, kb);
        let s = a.norm().max(b.norm());
        if s > 0.0 {
            system_err = system_err.max((a - b).norm() / s);
        }
    }

    // Solved coupled fields after three steps.
    let sl = lag.run().unwrap();
    let se = eul.run().unwrap();
    let mut field_err: f64 = 0.0;
    for (a, b) in sl.iter().zip(&se) {
        let scale = a.unknowns.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (u, v) in a.unknowns.iter().zip(&b.unknowns) {
            field_err = field_err.max((u - v).abs() / scale);
        }
    }
    let pass = system_err <= 1e-13 && field_err <= 1e-12;
    report(
        4,
        "zero-displacement equivalence",
        pass,
        &format!("assembled entries rel {system_err:.3e} <= 1e-13, solved fields rel {field_err:.3e} <= 1e-12"),
    );
    assert!(pass);
}

struct Snapshot {
    t: f64,
    theta: Vec<f64>,
    h_abs: Vec<f64>,
    j_abs: Vec<f64>,
}

struct UpsettingRun {
    mesh: MeridionalMesh,
    snapshots: Vec<Snapshot>,
    boundary_deviation: f64,
    elapsed: Duration,
}

impl UpsettingRun {
    fn at(&self, t: f64) -> &Snapshot {
        self.snapshots.iter().find(|s| (s.t - t).abs() < 1e-9).expect("snapshot")
    }
}

fn upsetting(nr: usize, nz: usize, t_end: f64, mode: Formulation) -> UpsettingRun {
    pinned();
    let mut cfg = ScenarioConfig::paper_test();
    cfg.geometry.nr = Some(nr);
    cfg.geometry.nz = Some(nz);
    cfg.solver.t_end = t_end;
    cfg.solver.mode = mode;
    let (problem, solver) = cfg.build(Path::new(".")).unwrap();
    assert_eq!(solver.dt, 0.1);
    let mesh = problem.mesh.clone();
    let sim = Simulation::new(problem, solver).unwrap();
    let mut snapshots = Vec::new();
    let mut boundary_deviation: f64 = 0.0;
    let start = Instant::now();
    sim.run_with(|s: &CoupledState| {
        boundary_deviation = boundary_deviation.max(verify::boundary_deviation(&mesh, s, CURRENT));
        if [2.0, 20.0].iter().any(|t| (s.t - t).abs() < 1e-9) {
            snapshots.push(Snapshot {
                t: s.t,
                theta: s.theta.clone(),
                h_abs: s.h.iter().map(|h| h.norm()).collect(),
                j_abs: s.post.j_abs.clone(),
            });
        }
        Ok(())
    })
    .unwrap();
    UpsettingRun {
        mesh,
        snapshots,
        boundary_deviation,
        elapsed: start.elapsed(),
    }
}

fn full_runs() -> &'static (UpsettingRun, UpsettingRun) {
    static RUNS: OnceLock<(UpsettingRun, UpsettingRun)> = OnceLock::new();
    RUNS.get_or_init(|| {
        (
            upsetting(48, 96, 20.0, Formulation::Lagrangian),
            upsetting(48, 96, 20.0, Formulation::Eulerian),
        )
    })
}

fn discrepancies(lag: &UpsettingRun, eul: &UpsettingRun, t: f64) -> (f64, f64) {
    let (a, b) = (lag.at(t), eul.at(t));
    (relative_l2(&b.theta, &a.theta), relative_l2(&b.h_abs, &a.h_abs))
}

#[test]
fn criterion_05_eulerian_lagrangian_agreement() {
    let (lag, eul) = full_runs();
    let (th2, h2) = discrepancies(lag, eul, 2.0);
    let (th20, h20) = discrepancies(lag, eul, 20.0);
    let full_time = lag.elapsed + eul.elapsed;
    let full_pass = th2 <= 0.02 && th20 <= 0.02 && h2 <= 0.03 && h20 <= 0.03 && full_time <= Duration::from_secs(900);

    let rl = upsetting(24, 48, 2.0, Formulation::Lagrangian);
    let re = upsetting(24, 48, 2.0, Formulation::Eulerian);
    let (rth, rh) = discrepancies(&rl, &re, 2.0);
    let reduced_time = rl.elapsed + re.elapsed;
    let reduced_pass = rth <= 0.02 && rh <= 0.03 && reduced_time <= Duration::from_secs(60);
    let pass = full_pass && reduced_pass;
    report(
        5,
        "Eulerian/Lagrangian agreement",
        pass,
        &format!(
            "48x96: theta L2 {th2:.3e} (2 s), {th20:.3e} (20 s) <= 2e-2; |H~| L2 {h2:.3e} (2 s), {h20:.3e} (20 s) <= 3e-2; \
             both runs {:.1} s <= 900 s. 24x48 to 2 s: theta {rth:.3e}, |H~| {rh:.3e}, both runs {:.1} s <= 60 s",
            full_time.as_secs_f64(),
            reduced_time.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// Coefficient of variation of `|J|` over the elements of the mid-height row.
fn mid_row_cov(mesh: &MeridionalMesh, j_abs: &[f64], nz: usize) -> f64 {
    let dz = LENGTH / nz as f64;
    let vals: Vec<f64> = (0..mesh.n_triangles())
        .filter(|&t| {
            let p = mesh.triangle_points(t);
            let zc = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            (zc - 0.5 * LENGTH).abs() < dz
        })
        .map(|t| j_abs[t])
        .collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    var.sqrt() / mean
}

#[test]
fn criterion_06_curie_attenuation() {
    let (lag, eul) = full_runs();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, run) in [("Lagrangian", lag), ("Eulerian", eul)] {
        let max2 = run.at(2.0).theta.iter().copied().fold(f64::MIN, f64::max);
        let max20 = run.at(20.0).theta.iter().copied().fold(f64::MIN, f64::max);
        let cov2 = mid_row_cov(&run.mesh, &run.at(2.0).j_abs, 96);
        let cov20 = mid_row_cov(&run.mesh, &run.at(20.0).j_abs, 96);
        let reached = max20 >= CURIE;
        let not_yet = max2 < CURIE;
        let attenuated = cov20 < cov2;
        pass &= reached && not_yet && attenuated;
        detail.push(format!(
            "{name}: max theta {max2:.2} C at 2 s (< {CURIE}: {not_yet}), {max20:.2} C at 20 s (>= {CURIE}: {reached}); \
             CoV of |J| {cov2:.4} -> {cov20:.4} (smaller: {attenuated})"
        ));
    }
    report(6, "Curie attenuation", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_07_boundary_ampere() {
    let (lag, eul) = full_runs();
    let dc = verify::dc_limit(32, 64).unwrap();
    let worst = lag.boundary_deviation.max(eul.boundary_deviation).max(dc.boundary_deviation);
    let pass = worst <= 1e-9;
    report(
        7,
        "boundary Ampere invariant",
        pass,
        &format!(
            "max |H~ - I/(2 pi)| / (I/(2 pi)) = {worst:.3e} <= 1e-9 with I/(2 pi) = {:.2} A over every step of both 48x96 runs and the DC case",
            CURRENT / (2.0 * PI)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_adiabatic_heating() {
    pinned();
    let q = verify::dc_joule_density().unwrap();
    let a = verify::adiabatic(4, 8, q, 0.05, 20.0).unwrap();
    let pass = a.error() <= 1e-3;
    report(
        8,
        "adiabatic heating",
        pass,
        &format!(
            "Q = {q:.5e} W/m^3: theta(20 s) in [{:.6}, {:.6}] C vs ODE {:.6} C, rel {:.3e} <= 1e-3",
            a.theta_min,
            a.theta_max,
            a.reference,
            a.error()
        ),
    );
    assert!(pass);
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn criterion_09_derivative_consistency() {
    pinned();
    let steel = MaterialModel::steel();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut dmu_h, mut dmu_t, mut drad): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let h = rng.gen_range(10.0..2e5);
        let th = rng.gen_range(20.0..740.0);
        let e = steel.mu(h, th).unwrap();
        let dh = 1e-6 * h;
        let fd_h = (steel.mu(h + dh, th).unwrap().mu - steel.mu(h - dh, th).unwrap().mu) / (2.0 * dh);
        dmu_h = dmu_h.max(rel_diff(e.d_h, fd_h));
        let dt = 1e-5;
        let fd_t = (steel.mu(h, th + dt).unwrap().mu - steel.mu(h, th - dt).unwrap().mu) / (2.0 * dt);
        dmu_t = dmu_t.max(rel_diff(e.d_theta, fd_t));
    }
    for _ in 0..200 {
        let c = ConvRad {
            h: rng.gen_range(0.0..50.0),
            emissivity: rng.gen_range(0.05..1.0),
            theta_conv: rng.gen_range(0.0..100.0),
            theta_rad: rng.gen_range(0.0..100.0),
        };
        let th = rng.gen_range(20.0..1200.0);
        let d = 1e-4;
        let fd = (c.flux(th + d).0 - c.flux(th - d).0) / (2.0 * d);
        drad = drad.max(rel_diff(c.flux(th).1, fd));
    }

    let mut djac: f64 = 0.0;
    let mut problem = verify::bar_problem(4, 8, steel.clone(), 2.0 * PI * 500.0).unwrap();
    problem.motion = DisplacementField::paper_test(Ramp::Linear(20.0));
    problem.bc.conv_rad = ConvRad {
        h: 25.0,
        emissivity: 0.8,
        theta_conv: 20.0,
        theta_rad: 20.0,
    };
    for mode in [Formulation::Lagrangian, Formulation::Eulerian] {
        let sim = Simulation::new(
            problem.clone(),
            SolverConfig {
                mode,
                ..Default::default()
            },
        )
        .unwrap();
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let t = rng.gen_range(0.0..20.0);
            let geom: Geometry = sim.geometry(t).unwrap();
            let n = sim.n_unknowns();
            let to = 2 * sim.layout.n_complex();
            let x: Vec<f64> = (0..n)
                .map(|i| if i < to { rng.gen_range(-6000.0..6000.0) } else { rng.gen_range(20.0..740.0) })
                .collect();
            let old: Vec<f64> = x[to..].iter().map(|t| t - rng.gen_range(0.0..10.0)).collect();
            let sys = sim.system(&geom, StepKind::Coupled, &old, &x, 0.1);
            let (_, jac) = sys.residual_and_jacobian(&x).unwrap();
            let v: Vec<f64> = (0..n)
                .map(|i| if i < to { rng.gen_range(-1.0..1.0) } else { rng.gen_range(-0.1..0.1) })
                .collect();
            let jv = jac.mul_vec(&v);
            let eps = 1e-3;
            let shifted = |s: f64| -> Vec<f64> { x.iter().zip(&v).map(|(a, b)| a + s * eps * b).collect() };
            let rp = sys.residual(&shifted(1.0)).unwrap();
            let rm = sys.residual(&shifted(-1.0)).unwrap();
            let err: f64 = rp
                .iter()
                .zip(&rm)
                .zip(&jv)
                .map(|((p, m), j)| ((p - m) / (2.0 * eps) - j).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale: f64 = jv.iter().map(|a| a * a).sum::<f64>().sqrt();
            djac = djac.max(err / scale);
        }
    }
    let pass = dmu_h <= 1e-5 && dmu_t <= 1e-5 && drad <= 1e-5 && djac <= 1e-5;
    report(
        9,
        "derivative consistency",
        pass,
        &format!(
            "max rel deviation from central differences: dmu/d|H| {dmu_h:.2e}, dmu/dtheta {dmu_t:.2e}, radiation {drad:.2e}, \
             coupled Jacobian {djac:.2e} (all <= 1e-5)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_kinematics_identities() {
    let field = DisplacementField::new(Profile::PaperTest, Ramp::Constant(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut det_err: f64 = 0.0;
    let mut branch_err: f64 = 0.0;
    for _ in 0..1000 {
        // Three-dimensional Jacobian of the motion by central differences in
        // Cartesian coordinates, against det F2 (1 + u_r / r_m).
        let r = rng.gen_range(0.05..1.0) * RADIUS;
        let z = rng.gen_range(0.0..1.0) * LENGTH;
        let phi = rng.gen_range(0.0..2.0 * PI);
        let x = [r * phi.cos(), r * phi.sin(), z];
        let map = |p: [f64; 3]| -> [f64; 3] {
            let rr = p[0].hypot(p[1]);
            let d = field.sample([rr, p[2]], 0.0);
            let s = 1.0 + d.ur_over_r;
            [p[0] * s, p[1] * s, p[2] + d.uz]
        };
        let h = 1e-7;
        let mut f = [[0.0; 3]; 3];
        for j in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let (a, b) = (map(xp), map(xm));
            for i in 0..3 {
                f[i][j] = (a[i] - b[i]) / (2.0 * h);
            }
        }
        let det3 = f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
            + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
        // Skip stencils straddling the branch junction.
        if (z - 0.02).abs() > 2.0 * h {
            let k = field.eval([r, z], 0.0).unwrap();
            det_err = det_err.max(rel_diff(k.det_f2 * k.radial_factor, det3));
            det_err = det_err.max(rel_diff(k.det_f3, det3));
        }

        let rb = rng.gen_range(0.0..1.0) * RADIUS;
        let below = field.sample([rb, 0.02], 0.0);
        let above = field.sample([rb, 0.02 + 1e-12], 0.0);
        let (g_lo, _) = upsetting_profile(0.02);
        let (g_hi, _) = upsetting_profile(0.02 + 1e-12);
        branch_err = branch_err.max(rel_diff(g_lo, g_hi));
        if rb > 0.0 {
            branch_err = branch_err.max(rel_diff(below.ur, above.ur));
        }
    }
    let pass = det_err <= 1e-6 && branch_err <= 1e-3;
    report(
        10,
        "kinematics identities",
        pass,
        &format!(
            "1000 random points: det F = det F2 (1 + u_r/r_m) to rel {det_err:.2e} (finite-difference 3D Jacobian, <= 1e-6); \
             branch mismatch at z_m = 0.02 rel {branch_err:.2e} <= 1e-3"
        ),
    );
    assert!(pass);
}
