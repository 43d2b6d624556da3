//! Domain types and closures shared by the solver, monitors and CLI.
//!
//! The pressure and viscosity laws are normalized to `p = rho^gamma` and
//! `mu = 1 + rho^beta`. Powers use the convention `0^0 = 1`, so `beta = 0`
//! gives the constant viscosity `mu = 2` everywhere, vacuum included.

use crate::{Error, Result};

/// Upper end of the admissible open interval for the spatial weight exponent,
/// `1 + 2 / cbrt(1 + cbrt(4))`, evaluated in extended precision and rounded
/// to 15 significant digits.
pub const ALPHA_UPPER_BOUND: f64 = 2.45682956183656;

/// Strict lower end of the admissible weight interval.
pub const ALPHA_LOWER_BOUND: f64 = 2.0;

/// Minimum number of cells accepted by [`make_grid`].
pub const MIN_CELLS: usize = 8;

/// `rho^e` with `0^0 = 1`. Callers guarantee `rho >= 0`.
#[inline]
pub(crate) fn pow0(rho: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if rho == 0.0 {
        0.0
    } else {
        rho.powf(e)
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho < 0.0 || rho.is_nan() {
        return Err(Error::Domain(format!("density must be nonnegative, got {rho}")));
    }
    Ok(())
}

/// Isentropic pressure `rho^gamma`.
pub fn pressure(rho: f64, gamma: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(pow0(rho, gamma))
}

/// Viscosity coefficient `1 + rho^beta`; never below 1.
pub fn viscosity(rho: f64, beta: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(1.0 + pow0(rho, beta))
}

#[inline]
pub(crate) fn pressure_unchecked(rho: f64, gamma: f64) -> f64 {
    pow0(rho, gamma)
}

#[inline]
pub(crate) fn viscosity_unchecked(rho: f64, beta: f64) -> f64 {
    1.0 + pow0(rho, beta)
}

/// Sound speed `sqrt(gamma rho^(gamma-1))`, zero at vacuum.
#[inline]
pub fn sound_speed(rho: f64, gamma: f64) -> f64 {
    if rho <= 0.0 {
        0.0
    } else {
        (gamma * rho.powf(gamma - 1.0)).sqrt()
    }
}

/// Viscosity potential `eta(rho) = int_1^rho mu(s)/s ds`.
///
/// Closed forms: `ln rho + (rho^beta - 1)/beta` for `beta > 0` and
/// `2 ln rho` for `beta = 0`. At vacuum (`rho <= 0`) this returns
/// `f64::NEG_INFINITY`; see [`is_vacuum_sentinel`].
pub fn eta(rho: f64, beta: f64) -> f64 {
    if rho <= 0.0 || rho.is_nan() {
        return f64::NEG_INFINITY;
    }
    if beta == 0.0 {
        2.0 * rho.ln()
    } else {
        // ln_1p/exp_m1 keep (rho^beta - 1)/beta accurate for small beta ln(rho).
        let l = rho.ln();
        l + (beta * l).exp_m1() / beta
    }
}

/// True for the value [`eta`] returns at vacuum.
#[inline]
pub fn is_vacuum_sentinel(v: f64) -> bool {
    v == f64::NEG_INFINITY
}

/// Inverse of [`eta`]: the unique `rho > 0` with `eta(rho) = level`.
pub fn eta_inverse(level: f64, beta: f64) -> f64 {
    if level == f64::NEG_INFINITY {
        return 0.0;
    }
    if level == f64::INFINITY || level.is_nan() {
        return level.abs();
    }
    // Bracket in log space, then bisect; eta is strictly increasing.
    let mut lo = -1.0_f64;
    let mut hi = 1.0_f64;
    while eta(lo.exp(), beta) > level {
        lo *= 2.0;
    }
    while eta(hi.exp(), beta) < level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if eta(mid.exp(), beta) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Report on a candidate spatial weight exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaReport {
    pub alpha: f64,
    pub admissible: bool,
    /// Interpolation exponent `(2 alpha - 1) / (3 alpha)`.
    pub theta: f64,
    /// `alpha (alpha - 1)^3 / 8`.
    pub coeff: f64,
    pub upper_bound: f64,
}

pub fn alpha_check(alpha: f64) -> AlphaReport {
    let theta = (2.0 * alpha - 1.0) / (3.0 * alpha);
    let coeff = alpha * (alpha - 1.0).powi(3) / 8.0;
    AlphaReport {
        alpha,
        admissible: alpha > ALPHA_LOWER_BOUND && alpha < ALPHA_UPPER_BOUND,
        theta,
        coeff,
        upper_bound: ALPHA_UPPER_BOUND,
    }
}

/// How the viscous term is advanced in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ViscousScheme {
    /// Backward Euler after the explicit hyperbolic update. Stable through
    /// vacuum, where the velocity equation turns elliptic.
    #[default]
    Implicit,
    /// Viscous stress inside both Heun stages. Needs the viscous time step
    /// restriction and is only practical for data bounded away from vacuum.
    Explicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub half_width: f64,
    pub n_cells: usize,
    pub cfl_adv: f64,
    pub cfl_visc: f64,
    /// Face densities at or below this recover `u = 0` from the momentum.
    pub rho_floor: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    /// Enables the `|x|^alpha` weighted functionals; requires admissible alpha.
    pub weighted: bool,
    pub viscous: ViscousScheme,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            beta: 1.0,
            alpha: 2.3,
            half_width: 10.0,
            n_cells: 1024,
            cfl_adv: 0.4,
            cfl_visc: 0.25,
            rho_floor: 1e-12,
            t_end: 1.0,
            snapshot_every: 100,
            weighted: true,
            viscous: ViscousScheme::Implicit,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return fail(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return fail(format!("beta must be nonnegative, got {}", self.beta));
        }
        if !self.alpha.is_finite() {
            return fail(format!("alpha must be finite, got {}", self.alpha));
        }
        if self.weighted {
            let report = alpha_check(self.alpha);
            if !report.admissible {
                return fail(format!(
                    "alpha = {} outside the admissible interval 2 < alpha < {:.15} \
                     (both ends strict)",
                    self.alpha, ALPHA_UPPER_BOUND
                ));
            }
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return fail(format!("L must be positive, got {}", self.half_width));
        }
        if self.n_cells < MIN_CELLS {
            return fail(format!("N must be at least {MIN_CELLS}, got {}", self.n_cells));
        }
        if !(self.cfl_adv > 0.0 && self.cfl_adv <= 1.0) {
            return fail(format!("cfl_adv must lie in (0, 1], got {}", self.cfl_adv));
        }
        if !(self.cfl_visc > 0.0 && self.cfl_visc <= 0.5) {
            return fail(format!("cfl_visc must lie in (0, 0.5], got {}", self.cfl_visc));
        }
        if !(self.rho_floor > 0.0) || !self.rho_floor.is_finite() {
            return fail(format!("rho_floor must be positive, got {}", self.rho_floor));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return fail(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if self.snapshot_every == 0 {
            return fail("snapshot_every must be at least 1".into());
        }
        Ok(())
    }
}

/// Uniform staggered grid on `[-L, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub centers: Vec<f64>,
    pub faces: Vec<f64>,
    pub dx: f64,
}

impl Grid {
    pub fn n_cells(&self) -> usize {
        self.centers.len()
    }

    pub fn half_width(&self) -> f64 {
        -self.faces[0]
    }
}

pub fn make_grid(half_width: f64, n_cells: usize) -> Result<Grid> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::Config(format!("L must be positive, got {half_width}")));
    }
    if n_cells < MIN_CELLS {
        return Err(Error::Config(format!(
            "N must be at least {MIN_CELLS}, got {n_cells}"
        )));
    }
    let dx = 2.0 * half_width / n_cells as f64;
    let faces: Vec<f64> = (0..=n_cells)
        .map(|i| {
            if i == n_cells {
                half_width
            } else {
                -half_width + i as f64 * dx
            }
        })
        .collect();
    let centers = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(Grid { centers, faces, dx })
}

/// Time-stamped discrete fields: densities at cell centers, velocities and
/// momenta at faces. Boundary faces carry zero velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub m: Vec<f64>,
}

impl State {
    /// Builds a state from densities and face velocities, deriving momenta.
    pub fn new(t: f64, rho: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if u.len() != rho.len() + 1 {
            return Err(Error::Shape {
                expected: rho.len() + 1,
                got: u.len(),
            });
        }
        let m = face_densities(&rho)
            .iter()
            .zip(&u)
            .map(|(r, v)| r * v)
            .collect();
        Ok(Self { t, rho, u, m })
    }

    pub fn vacuum(n_cells: usize) -> Self {
        Self {
            t: 0.0,
            rho: vec![0.0; n_cells],
            u: vec![0.0; n_cells + 1],
            m: vec![0.0; n_cells + 1],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.rho.len()
    }

    pub fn face_rho(&self) -> Vec<f64> {
        face_densities(&self.rho)
    }

    /// Checks nonnegative density, finite fields and resting boundary faces.
    pub fn validate(&self) -> Result<()> {
        if self.u.len() != self.rho.len() + 1 || self.m.len() != self.u.len() {
            return Err(Error::Shape {
                expected: self.rho.len() + 1,
                got: self.u.len(),
            });
        }
        if let Some(i) = self.rho.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Domain(format!("rho[{i}] = {}", self.rho[i])));
        }
        if let Some(i) = self.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("u[{i}] = {}", self.u[i])));
        }
        if let Some(i) = self.m.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("m[{i}] = {}", self.m[i])));
        }
        let n = self.rho.len();
        if self.u[0] != 0.0 || self.u[n] != 0.0 {
            return Err(Error::Domain("boundary face velocity must be zero".into()));
        }
        Ok(())
    }
}

/// Arithmetic face averages; boundary faces copy the adjacent cell.
pub fn face_densities(rho: &[f64]) -> Vec<f64> {
    let n = rho.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(rho[0]);
    out.extend(rho.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    out.push(rho[n - 1]);
    out
}
