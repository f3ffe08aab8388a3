//! Independent reference solutions.
//!
//! Nothing here touches the finite-element kernels: the skin-effect field
//! comes from a complex Bessel series, the port voltage from Ohm's law, and
//! the lumped thermal histories from an adaptive Dormand-Prince integrator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::OracleError;

/// A reference value with the formula it came from and an error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    pub formula: &'static str,
    /// Estimated absolute error of `value`.
    pub error_bound: f64,
}

/// Largest `|z|` accepted by [`bessel_j1`].
pub const J1_MAX_ARG: f64 = 12.0;

/// Bessel function of the first kind of order one by its ascending series,
/// with an estimate of the rounding error.
pub fn bessel_j1(z: Complex64) -> Result<(Complex64, f64), OracleError> {
    if !(z.norm() <= J1_MAX_ARG) {
        return Err(OracleError::Range(format!(
            "|z| = {} exceeds {J1_MAX_ARG}",
            z.norm()
        )));
    }
    let half = z * 0.5;
    let q = -(half * half);
    let mut term = half;
    let mut sum = term;
    let mut largest = term.norm();
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + 1.0));
        sum += term;
        largest = largest.max(term.norm());
        if term.norm() <= 1e-18 * sum.norm().max(1e-300) && k > 2.0 {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    Ok((sum, 4.0 * f64::EPSILON * largest * k))
}

/// Azimuthal field of an infinite straight cylinder carrying `current` at
/// angular frequency `omega`, uniform `sigma` and `mu`, at radius `r`.
pub fn skin_effect_h(
    r: f64,
    current: f64,
    omega: f64,
    sigma: f64,
    mu: f64,
    radius: f64,
) -> Result<OracleResult<Complex64>, OracleError> {
    if !(0.0..=radius).contains(&r) || !(radius > 0.0) {
        return Err(OracleError::Range(format!("need 0 <= r <= R, got r = {r}, R = {radius}")));
    }
    let surface = current / (2.0 * PI * radius);
    let k2 = omega * mu * sigma;
    if k2 == 0.0 {
        return Ok(OracleResult {
            value: Complex64::new(current * r / (2.0 * PI * radius * radius), 0.0),
            formula: "I r / (2 pi R^2)",
            error_bound: 0.0,
        });
    }
    let kappa = Complex64::new(0.0, -k2).sqrt();
    let (num, en) = bessel_j1(kappa * r)?;
    let (den, ed) = bessel_j1(kappa * radius)?;
    let value = num / den * surface;
    let rel = en / num.norm().max(1e-300) + ed / den.norm();
    Ok(OracleResult {
        value,
        formula: "I/(2 pi R) J1(kappa r) / J1(kappa R), kappa^2 = -i omega mu sigma",
        error_bound: rel * value.norm(),
    })
}

/// `|kappa R|` of the skin-effect problem.
pub fn skin_parameter(omega: f64, sigma: f64, mu: f64, radius: f64) -> f64 {
    (omega * mu * sigma).sqrt() * radius
}

/// Voltage across a uniform cylinder of length `length` carrying a DC current.
pub fn dc_voltage(current: f64, length: f64, radius: f64, sigma: f64) -> OracleResult<f64> {
    let value = current * length / (sigma * PI * radius * radius);
    OracleResult {
        value,
        formula: "I L / (sigma pi R^2)",
        error_bound: 4.0 * f64::EPSILON * value.abs(),
    }
}

/// Adaptive Dormand-Prince 5(4) integration of `y' = f(t, y)` from `0` to
/// `t_end` with mixed tolerance `tol (1 + |y|)` per step.
pub fn integrate_ode(
    f: impl Fn(f64, f64) -> f64,
    y0: f64,
    t_end: f64,
    tol: f64,
) -> Result<(f64, f64), OracleError> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    if !(t_end >= 0.0) || !(tol > 0.0) {
        return Err(OracleError::Range(format!("need t_end >= 0 and tol > 0, got {t_end}, {tol}")));
    }
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (t_end * 1e-3).max(1e-12);
    let mut err_sum = 0.0;
    let mut steps = 0usize;
    while t < t_end {
        if steps > 10_000_000 {
            return Err(OracleError::Integration("too many steps".into()));
        }
        steps += 1;
        h = h.min(t_end - t);
        let mut k = [0.0; 7];
        for s in 0..7 {
            let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
            k[s] = f(t + C[s] * h, ys);
        }
        let y5 = y + h * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
        let y4 = y + h * (0..7).map(|s| B4[s] * k[s]).sum::<f64>();
        let err = (y5 - y4).abs();
        let scale = tol * (1.0 + y.abs());
        if !y5.is_finite() {
            return Err(OracleError::Integration(format!("non-finite state at t = {t}")));
        }
        if err <= scale {
            t += h;
            y = y5;
            err_sum += err;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t_end.max(1.0) {
            return Err(OracleError::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok((y, err_sum))
}

/// Temperature after `t_end` of a body heated uniformly by `q` with no
/// losses: `rho0 cp(theta) dtheta/dt = q`.
pub fn adiabatic_heating(
    theta0: f64,
    q: f64,
    rho0: f64,
    cp: impl Fn(f64) -> f64,
    t_end: f64,
) -> Result<OracleResult<f64>, OracleError> {
    if q < 0.0 {
        return Err(OracleError::Range(format!("source must be non-negative, got {q}")));
    }
    let (value, err) = integrate_ode(|_, th| q / (rho0 * cp(th)), theta0, t_end, 1e-10)?;
    Ok(OracleResult {
        value,
        formula: "rho0 cp(theta) dtheta/dt = Q",
        error_bound: err,
    })
}

const STEFAN_BOLTZMANN: f64 = 5.670374419e-8;

/// Lumped temperature of a body of volume `volume` and radiating area `area`
/// cooling to surroundings at `theta_r` (all temperatures in C, radiation in
/// kelvin).
#[allow(clippy::too_many_arguments)]
pub fn lumped_radiation_cooling(
    theta0: f64,
    theta_r: f64,
    emissivity: f64,
    area: f64,
    volume: f64,
    rho0: f64,
    cp: impl Fn(f64) -> f64,
    t_end: f64,
) -> Result<OracleResult<f64>, OracleError> {
    let tr4 = (theta_r + 273.15).powi(4);
    let (value, err) = integrate_ode(
        |_, th| -STEFAN_BOLTZMANN * emissivity * area * ((th + 273.15).powi(4) - tr4) / (rho0 * cp(th) * volume),
        theta0,
        t_end,
        1e-10,
    )?;
    Ok(OracleResult {
        value,
        formula: "rho0 cp V dtheta/dt = -sigma_SB eps A (T^4 - T_R^4)",
        error_bound: err,
    })
}
