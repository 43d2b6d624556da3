//! Staggered finite-volume integration of the isentropic system
//!
//! ```text
//! rho_t + (rho u)_x = 0
//! (rho u)_t + (rho u^2)_x + (rho^gamma)_x = (mu(rho) u_x)_x
//! ```
//!
//! Densities live at cell centers, velocities and momenta at faces. The mass
//! flux is first-order upwind in the face velocity; the momentum convection
//! uses dual mass fluxes built from the primal ones, so the face densities
//! obey a discrete mass balance of their own. The hyperbolic part advances
//! with Heun's method; the viscous part is either folded into both Heun
//! stages or solved implicitly afterwards (see [`ViscousScheme`]).

mod convergence;
mod initial;
mod run;

pub use initial::{build_initial_data, CompatibilityReport, DensityKind, InitialProfile, Table, VelocityKind};
pub use convergence::{l1_distance, restrict, self_convergence, ConvergenceReport};
pub use run::{
    run, MemorySink, NullSink, RunOutcome, RunSink, Violation, BOUNDARY_DENSITY_TOL, DENSITY_CAP_TOL,
    ENERGY_STEP_TOL, INTERPOLATION_TOL, MASS_TOL, XI_ETA_DRIFT_TOL,
};

use crate::model::{
    face_densities, pressure_unchecked, sound_speed, viscosity_unchecked, Grid, Params, State,
    ViscousScheme,
};
use crate::{Error, Result};

fn check_finite(state: &State) -> Result<()> {
    if let Some(j) = state.rho.iter().position(|r| !r.is_finite()) {
        return Err(integration_error(state.t, 0, j, "non-finite density"));
    }
    if let Some(i) = state.u.iter().position(|v| !v.is_finite()) {
        return Err(integration_error(state.t, 0, i, "non-finite velocity"));
    }
    Ok(())
}

fn integration_error(t: f64, stage: usize, cell: usize, msg: &str) -> Error {
    Error::Integration {
        t,
        stage,
        cell,
        msg: msg.to_string(),
    }
}

/// Time step bound of the fully explicit scheme:
/// `min_j { cfl_adv dx / (|u| + c), cfl_visc dx^2 max(rho, rho_floor) / mu(rho) }`
/// where `|u|` is the larger of the two face speeds bounding cell `j`.
pub fn cfl_dt(state: &State, grid: &Grid, params: &Params) -> Result<f64> {
    check_finite(state)?;
    let adv = advective_dt(state, grid, params)?;
    let dx2 = grid.dx * grid.dx;
    let visc = state
        .rho
        .iter()
        .map(|&r| params.cfl_visc * dx2 * r.max(params.rho_floor) / viscosity_unchecked(r, params.beta))
        .fold(f64::INFINITY, f64::min);
    Ok(adv.min(visc))
}

/// Advective part of [`cfl_dt`]; infinite for a quiescent vacuum.
pub fn advective_dt(state: &State, grid: &Grid, params: &Params) -> Result<f64> {
    check_finite(state)?;
    let mut dt = f64::INFINITY;
    for (j, &r) in state.rho.iter().enumerate() {
        let speed = state.u[j].abs().max(state.u[j + 1].abs()) + sound_speed(r, params.gamma);
        if speed > 0.0 {
            dt = dt.min(params.cfl_adv * grid.dx / speed);
        }
    }
    Ok(dt)
}

/// Step bound for the configured viscous treatment.
pub fn stable_dt(state: &State, grid: &Grid, params: &Params) -> Result<f64> {
    match params.viscous {
        ViscousScheme::Implicit => advective_dt(state, grid, params),
        ViscousScheme::Explicit => cfl_dt(state, grid, params),
    }
}

/// Velocity from face momentum, zero where the face density is at the floor.
fn recover_velocity(m: &[f64], face_rho: &[f64], floor: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    out[0] = 0.0;
    out[n] = 0.0;
    for i in 1..n {
        out[i] = if face_rho[i] > floor { m[i] / face_rho[i] } else { 0.0 };
    }
}

/// Center viscous stress `mu(rho_j) (u_{j+1} - u_j) / dx`.
pub(crate) fn viscous_stress(rho: &[f64], u: &[f64], dx: f64, beta: f64) -> Vec<f64> {
    rho.iter()
        .enumerate()
        .map(|(j, &r)| viscosity_unchecked(r, beta) * (u[j + 1] - u[j]) / dx)
        .collect()
}

/// Upwind primal mass fluxes at faces; zero at the boundary.
pub(crate) fn mass_fluxes(rho: &[f64], u: &[f64]) -> Vec<f64> {
    let n = rho.len();
    let mut f = vec![0.0; n + 1];
    for i in 1..n {
        let v = u[i];
        f[i] = if v >= 0.0 { v * rho[i - 1] } else { v * rho[i] };
    }
    f
}

/// Momentum convection fluxes at centers from dual mass fluxes.
pub(crate) fn momentum_fluxes(flux: &[f64], u: &[f64]) -> Vec<f64> {
    (0..flux.len() - 1)
        .map(|j| {
            let g = 0.5 * (flux[j] + flux[j + 1]);
            g * if g >= 0.0 { u[j] } else { u[j + 1] }
        })
        .collect()
}

struct Stage {
    rho: Vec<f64>,
    m: Vec<f64>,
    u: Vec<f64>,
}

fn euler_stage(
    rho: &[f64],
    m: &[f64],
    u: &[f64],
    dt: f64,
    dx: f64,
    params: &Params,
    t: f64,
    stage: usize,
) -> Result<Stage> {
    let n = rho.len();
    let lam = dt / dx;
    let flux = mass_fluxes(rho, u);
    let mut rho_new = vec![0.0; n];
    for j in 0..n {
        let r = rho[j] - lam * (flux[j + 1] - flux[j]);
        if !r.is_finite() {
            return Err(integration_error(t, stage, j, "non-finite density"));
        }
        if r < 0.0 {
            return Err(integration_error(t, stage, j, "negative density"));
        }
        rho_new[j] = r;
    }
    let conv = momentum_fluxes(&flux, u);
    let p: Vec<f64> = rho.iter().map(|&r| pressure_unchecked(r, params.gamma)).collect();
    let stress = match params.viscous {
        ViscousScheme::Explicit => Some(viscous_stress(rho, u, dx, params.beta)),
        ViscousScheme::Implicit => None,
    };
    let mut m_new = vec![0.0; n + 1];
    for i in 1..n {
        let mut v = m[i] - lam * (conv[i] - conv[i - 1]) - lam * (p[i] - p[i - 1]);
        if let Some(s) = &stress {
            v += lam * (s[i] - s[i - 1]);
        }
        if !v.is_finite() {
            return Err(integration_error(t, stage, i, "non-finite momentum"));
        }
        m_new[i] = v;
    }
    let mut u_new = vec![0.0; n + 1];
    recover_velocity(&m_new, &face_densities(&rho_new), params.rho_floor, &mut u_new);
    Ok(Stage {
        rho: rho_new,
        m: m_new,
        u: u_new,
    })
}

/// Backward-Euler viscous update on interior faces:
/// `rho_f u - dt/dx^2 [mu_i (u_{i+1} - u_i) - mu_{i-1} (u_i - u_{i-1})] = m`.
/// The matrix is symmetric, diagonally dominant and nonsingular even where
/// `rho_f = 0`, since `mu >= 1`.
fn implicit_viscous(rho: &[f64], m: &[f64], dt: f64, dx: f64, beta: f64) -> Vec<f64> {
    let n = rho.len();
    let k = dt / (dx * dx);
    let face_rho = face_densities(rho);
    let mu: Vec<f64> = rho.iter().map(|&r| viscosity_unchecked(r, beta)).collect();
    // Unknowns u_1..u_{n-1}; Thomas algorithm.
    let size = n - 1;
    let mut c_prime = vec![0.0; size];
    let mut d_prime = vec![0.0; size];
    for row in 0..size {
        let i = row + 1;
        let lower = -k * mu[i - 1];
        let upper = -k * mu[i];
        let diag = face_rho[i] + k * (mu[i - 1] + mu[i]);
        let (cp, dp) = if row == 0 {
            (upper / diag, m[i] / diag)
        } else {
            let denom = diag - lower * c_prime[row - 1];
            (upper / denom, (m[i] - lower * d_prime[row - 1]) / denom)
        };
        c_prime[row] = cp;
        d_prime[row] = dp;
    }
    let mut u = vec![0.0; n + 1];
    for row in (0..size).rev() {
        let next = if row + 1 < size { u[row + 2] } else { 0.0 };
        u[row + 1] = d_prime[row] - c_prime[row] * next;
    }
    u
}

/// Advances `state` by `dt`.
///
/// Mass is conserved to rounding (telescoping fluxes, zero boundary flux).
/// Density stays nonnegative when `dt` respects the advective bound with
/// `cfl_adv <= 0.5`; a negative density is reported as an integration error
/// so callers can retry with a smaller step.
pub fn step(state: &State, dt: f64, grid: &Grid, params: &Params) -> Result<State> {
    let n = state.n_cells();
    if grid.n_cells() != n {
        return Err(Error::Shape {
            expected: grid.n_cells(),
            got: n,
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(integration_error(state.t, 0, 0, "time step must be positive and finite"));
    }
    check_finite(state)?;
    let dx = grid.dx;
    let s1 = euler_stage(&state.rho, &state.m, &state.u, dt, dx, params, state.t, 1)?;
    let s2 = euler_stage(&s1.rho, &s1.m, &s1.u, dt, dx, params, state.t, 2)?;
    let rho: Vec<f64> = state
        .rho
        .iter()
        .zip(&s2.rho)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut m: Vec<f64> = state.m.iter().zip(&s2.m).map(|(a, b)| 0.5 * (a + b)).collect();
    m[0] = 0.0;
    m[n] = 0.0;
    let face_rho = face_densities(&rho);
    let u = match params.viscous {
        ViscousScheme::Implicit => implicit_viscous(&rho, &m, dt, dx, params.beta),
        ViscousScheme::Explicit => {
            let mut u = vec![0.0; n + 1];
            recover_velocity(&m, &face_rho, params.rho_floor, &mut u);
            u
        }
    };
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(integration_error(state.t, 3, i, "non-finite velocity"));
    }
    let m = match params.viscous {
        ViscousScheme::Implicit => face_rho.iter().zip(&u).map(|(r, v)| r * v).collect(),
        ViscousScheme::Explicit => m,
    };
    Ok(State {
        t: state.t + dt,
        rho,
        u,
        m,
    })
}
