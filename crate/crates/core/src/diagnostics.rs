//! Estimate functionals evaluated on state snapshots.
//!
//! Every quantity here is a midpoint sum on the staggered grid: center
//! quantities weighted at centers, face quantities at faces. Time derivatives
//! are backward differences of consecutive snapshots. The [`DiagTracker`]
//! composes the pure group functions into one [`DiagRecord`] per snapshot and
//! carries the cumulative time integrals (left-endpoint rule).

use crate::model::{alpha_check, pow0, pressure_unchecked, viscosity_unchecked, Grid, Params, State};
use crate::{Error, Result};

/// Second-order finite differences of a center or face field: central in the
/// interior, one-sided three-point at the ends.
pub fn gradient(field: &[f64], grid: &Grid, order: usize) -> Result<Vec<f64>> {
    if order != 2 {
        return Err(Error::Config(format!("unsupported stencil order {order}")));
    }
    let n = grid.n_cells();
    if field.len() != n && field.len() != n + 1 {
        return Err(Error::Shape {
            expected: n,
            got: field.len(),
        });
    }
    Ok(gradient_uniform(field, grid.dx))
}

pub(crate) fn gradient_uniform(f: &[f64], dx: f64) -> Vec<f64> {
    let k = f.len();
    let h2 = 2.0 * dx;
    let mut out = vec![0.0; k];
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / h2;
    out[k - 1] = (3.0 * f[k - 1] - 4.0 * f[k - 2] + f[k - 3]) / h2;
    for i in 1..k - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / h2;
    }
    out
}

/// Second differences of a face field; the end values extrapolate linearly.
pub(crate) fn second_difference(f: &[f64], dx: f64) -> Vec<f64> {
    let k = f.len();
    let mut out = vec![0.0; k];
    for i in 1..k - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (dx * dx);
    }
    out[0] = 2.0 * out[1] - out[2];
    out[k - 1] = 2.0 * out[k - 2] - out[k - 3];
    out
}

/// Staggered velocity gradient `(u_{j+1} - u_j) / dx` at cell centers.
pub fn velocity_gradient(u: &[f64], dx: f64) -> Vec<f64> {
    u.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
}

/// Differences of a center field across interior faces.
fn center_differences(f: &[f64], dx: f64) -> impl Iterator<Item = f64> + '_ {
    f.windows(2).map(move |w| (w[1] - w[0]) / dx)
}

fn sq_int(it: impl Iterator<Item = f64>, dx: f64) -> f64 {
    it.map(|v| v * v).sum::<f64>() * dx
}

fn check_pair(prev: &State, next: &State) -> Result<f64> {
    if prev.n_cells() != next.n_cells() {
        return Err(Error::Shape {
            expected: prev.n_cells(),
            got: next.n_cells(),
        });
    }
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::Domain(format!(
            "snapshots must advance in time (t = {} then {})",
            prev.t, next.t
        )));
    }
    Ok(dt)
}

/// Backward differences `(u_t at faces, rho_t at centers)`.
pub fn time_derivative(prev: &State, next: &State) -> Result<(Vec<f64>, Vec<f64>)> {
    let dt = check_pair(prev, next)?;
    let ut = prev.u.iter().zip(&next.u).map(|(a, b)| (b - a) / dt).collect();
    let rt = prev.rho.iter().zip(&next.rho).map(|(a, b)| (b - a) / dt).collect();
    Ok((ut, rt))
}

/// Material derivative `u_t + u u_x` at faces, using the later snapshot for
/// `u` and `u_x`.
pub fn material_derivative(prev: &State, next: &State, grid: &Grid) -> Result<Vec<f64>> {
    let (ut, _) = time_derivative(prev, next)?;
    let ux = gradient(&next.u, grid, 2)?;
    Ok(ut
        .iter()
        .zip(&next.u)
        .zip(&ux)
        .map(|((a, u), d)| a + u * d)
        .collect())
}

/// Effective viscous flux `mu(rho) u_x - rho^gamma` at centers and its max norm.
pub fn effective_viscous_flux(state: &State, grid: &Grid, params: &Params) -> (Vec<f64>, f64) {
    let ux = velocity_gradient(&state.u, grid.dx);
    let f: Vec<f64> = state
        .rho
        .iter()
        .zip(&ux)
        .map(|(&r, &d)| viscosity_unchecked(r, params.beta) * d - pressure_unchecked(r, params.gamma))
        .collect();
    let max = f.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    (f, max)
}

/// Discrete energy `sum (rho_f u^2 / 2) dx + sum rho^gamma / (gamma - 1) dx`.
pub fn energy(state: &State, grid: &Grid, params: &Params) -> f64 {
    let face_rho = state.face_rho();
    let kinetic: f64 = face_rho
        .iter()
        .zip(&state.u)
        .map(|(r, v)| 0.5 * r * v * v)
        .sum();
    let internal: f64 = state
        .rho
        .iter()
        .map(|&r| pressure_unchecked(r, params.gamma))
        .sum::<f64>()
        / (params.gamma - 1.0);
    (kinetic + internal) * grid.dx
}

/// Viscous dissipation rate `sum mu(rho) u_x^2 dx`.
pub fn dissipation_rate(state: &State, grid: &Grid, params: &Params) -> f64 {
    let ux = velocity_gradient(&state.u, grid.dx);
    state
        .rho
        .iter()
        .zip(&ux)
        .map(|(&r, d)| viscosity_unchecked(r, params.beta) * d * d)
        .sum::<f64>()
        * grid.dx
}

/// Per-step energy identity residual `E(n+1) - E(n) + dt D(n+1)`.
pub fn energy_identity_residual(prev: &State, next: &State, grid: &Grid, params: &Params) -> Result<f64> {
    let dt = check_pair(prev, next)?;
    Ok(energy(next, grid, params) - energy(prev, grid, params)
        + dt * dissipation_rate(next, grid, params))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FirstOrderGroup {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub max_rho: f64,
    pub ux_l2: f64,
    pub ux_linf: f64,
    pub rho_x_l2: f64,
    pub rho_gamma_x_l2: f64,
    pub rho_beta_x_l2: f64,
}

/// Mass, momentum, energy and the first-derivative integrals. The `_l2`
/// entries are squared norms (`int f^2 dx`).
pub fn first_order_group(state: &State, grid: &Grid, params: &Params) -> FirstOrderGroup {
    let dx = grid.dx;
    let ux = velocity_gradient(&state.u, dx);
    let pg: Vec<f64> = state.rho.iter().map(|&r| pow0(r, params.gamma)).collect();
    let pb: Vec<f64> = state.rho.iter().map(|&r| pow0(r, params.beta)).collect();
    FirstOrderGroup {
        mass: state.rho.iter().sum::<f64>() * dx,
        momentum: state.m.iter().sum::<f64>() * dx,
        energy: energy(state, grid, params),
        max_rho: state.rho.iter().fold(0.0, |a: f64, &b| a.max(b)),
        ux_l2: sq_int(ux.iter().copied(), dx),
        ux_linf: ux.iter().fold(0.0, |a: f64, b| a.max(b.abs())),
        rho_x_l2: sq_int(center_differences(&state.rho, dx), dx),
        rho_gamma_x_l2: sq_int(center_differences(&pg, dx), dx),
        rho_beta_x_l2: sq_int(center_differences(&pb, dx), dx),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeightedGroup {
    /// `int rho |u|^(alpha+2)`.
    pub rho_u_pow: f64,
    /// `int |x|^alpha (rho u^2 + rho^gamma + rho^beta)`.
    pub wmoment: f64,
    /// Instantaneous `int |x|^alpha mu u_x^2`, integrated in time by the tracker.
    pub wdiss_rate: f64,
}

/// Power-weighted functionals. Requires an admissible weight exponent.
pub fn weighted_group(state: &State, grid: &Grid, params: &Params) -> Result<WeightedGroup> {
    let alpha = params.alpha;
    if !alpha_check(alpha).admissible {
        return Err(Error::Config(format!(
            "weighted diagnostics need 2 < alpha < upper bound, got {alpha}"
        )));
    }
    let dx = grid.dx;
    let face_rho = state.face_rho();
    let ux = velocity_gradient(&state.u, dx);
    let mut rho_u_pow = 0.0;
    let mut wmoment = 0.0;
    for (i, &x) in grid.faces.iter().enumerate() {
        let (r, v) = (face_rho[i], state.u[i]);
        rho_u_pow += r * v.abs().powf(alpha + 2.0);
        wmoment += x.abs().powf(alpha) * r * v * v;
    }
    let mut wdiss = 0.0;
    for (j, &x) in grid.centers.iter().enumerate() {
        let r = state.rho[j];
        let w = x.abs().powf(alpha);
        let beta_term = if r > 0.0 { pow0(r, params.beta) } else { 0.0 };
        wmoment += w * (pow0(r, params.gamma) + beta_term);
        wdiss += w * viscosity_unchecked(r, params.beta) * ux[j] * ux[j];
    }
    Ok(WeightedGroup {
        rho_u_pow: rho_u_pow * dx,
        wmoment: wmoment * dx,
        wdiss_rate: wdiss * dx,
    })
}

/// Higher-order functionals. Entries that need more history than supplied
/// are `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HigherOrderGroup {
    pub rho_ut_l2: Option<f64>,
    pub uxx_l2: f64,
    pub mat_l2: Option<f64>,
    pub mat_w: Option<f64>,
    pub udot_x_l2: Option<f64>,
    pub tw1: Option<f64>,
    pub tw2: Option<f64>,
    pub tw3: Option<f64>,
    pub tw4: f64,
    /// Material derivative at the latest snapshot, reused for the next `u_dot_t`.
    pub udot: Option<Vec<f64>>,
}

/// `u_xx` and `u_xxx` at faces by repeated stencils.
pub fn velocity_higher_derivatives(u: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let uxx = second_difference(u, dx);
    let uxxx = gradient_uniform(&uxx, dx);
    (uxx, uxxx)
}

/// `history` is ordered oldest first and ends at the snapshot being
/// evaluated. One snapshot yields the spatial entries only; two add the
/// first time derivatives; three add `t^2 int rho u_dot_t^2`.
pub fn higher_order_group(history: &[&State], grid: &Grid, params: &Params) -> Result<HigherOrderGroup> {
    let next = *history
        .last()
        .ok_or_else(|| Error::Domain("empty snapshot history".into()))?;
    let dx = grid.dx;
    let t = next.t;
    let (uxx, uxxx) = velocity_higher_derivatives(&next.u, dx);
    let mut out = HigherOrderGroup {
        uxx_l2: uxx.iter().map(|v| v * v).sum::<f64>() * dx,
        tw4: t * uxxx.iter().map(|v| v * v).sum::<f64>() * dx,
        ..HigherOrderGroup::default()
    };
    if history.len() < 2 {
        return Ok(out);
    }
    let prev = history[history.len() - 2];
    let face_rho = next.face_rho();
    let (ut, _) = time_derivative(prev, next)?;
    let udot = material_derivative(prev, next, grid)?;
    let udot_x = velocity_gradient(&udot, dx);
    let alpha = params.alpha;

    out.rho_ut_l2 = Some(face_rho.iter().zip(&ut).map(|(r, v)| r * v * v).sum::<f64>() * dx);
    out.mat_l2 = Some(face_rho.iter().zip(&udot).map(|(r, v)| r * v * v).sum::<f64>() * dx);
    if params.weighted {
        out.mat_w = Some(
            grid.faces
                .iter()
                .zip(face_rho.iter().zip(&udot))
                .map(|(x, (r, v))| x.abs().powf(alpha) * r * v * v)
                .sum::<f64>()
                * dx,
        );
    }
    out.udot_x_l2 = Some(udot_x.iter().map(|v| v * v).sum::<f64>() * dx);
    let mut tw1 = 0.0;
    let mut tw3 = 0.0;
    for (j, &x) in grid.centers.iter().enumerate() {
        let mu = viscosity_unchecked(next.rho[j], params.beta);
        let d2 = udot_x[j] * udot_x[j];
        tw1 += mu * d2;
        tw3 += mu * x.abs().powf(0.5 * alpha) * d2;
    }
    out.tw1 = Some(t * tw1 * dx);
    if params.weighted {
        out.tw3 = Some(t * tw3 * dx);
    }
    if history.len() >= 3 {
        let older = history[history.len() - 3];
        let udot_prev = material_derivative(older, prev, grid)?;
        let dt = next.t - prev.t;
        let s: f64 = face_rho
            .iter()
            .zip(udot.iter().zip(&udot_prev))
            .map(|(r, (a, b))| {
                let d = (a - b) / dt;
                r * d * d
            })
            .sum();
        out.tw2 = Some(t * t * s * dx);
    }
    out.udot = Some(udot);
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TransportResiduals {
    /// L2 norm of `(rho^beta)_t + u (rho^beta)_x + beta rho^beta u_x`.
    pub rho_beta: f64,
    /// L2 norm of `(rho^gamma)_t + u (rho^gamma)_x + gamma rho^gamma u_x`.
    pub rho_gamma: f64,
}

fn renormalized_residual(prev: &State, next: &State, grid: &Grid, exponent: f64, dt: f64) -> f64 {
    if exponent == 0.0 {
        return 0.0;
    }
    let dx = grid.dx;
    let q0: Vec<f64> = prev.rho.iter().map(|&r| pow0(r, exponent)).collect();
    let q1: Vec<f64> = next.rho.iter().map(|&r| pow0(r, exponent)).collect();
    let qx = gradient_uniform(&q0, dx);
    let ux = velocity_gradient(&prev.u, dx);
    let mut sum = 0.0;
    for j in 0..q0.len() {
        let uc = 0.5 * (prev.u[j] + prev.u[j + 1]);
        let r = (q1[j] - q0[j]) / dt + uc * qx[j] + exponent * q0[j] * ux[j];
        sum += r * r;
    }
    (sum * dx).sqrt()
}

/// Residuals of the renormalized transport equations for `rho^beta` and
/// `rho^gamma`, spatial terms at the earlier snapshot.
pub fn transport_residuals(prev: &State, next: &State, grid: &Grid, params: &Params) -> Result<TransportResiduals> {
    let dt = check_pair(prev, next)?;
    Ok(TransportResiduals {
        rho_beta: renormalized_residual(prev, next, grid, params.beta, dt),
        rho_gamma: renormalized_residual(prev, next, grid, params.gamma, dt),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InterpolationReport {
    /// `||u||_inf`.
    pub lhs: f64,
    /// `||u||_q^(1/alpha) ||u_x||_2^(1 - 1/alpha)` with `q = 2/(alpha - 1)`.
    pub rhs: f64,
    /// `lhs / rhs`; zero for the zero field.
    pub ratio: f64,
}

/// Both sides of `||u||_inf <= ||u||_q^(1/alpha) ||u_x||_2^(1-1/alpha)` for a
/// face field on spacing `dx`.
pub fn interpolation_ratio(u: &[f64], dx: f64, alpha: f64) -> InterpolationReport {
    let lhs = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if lhs == 0.0 {
        return InterpolationReport::default();
    }
    let q = 2.0 / (alpha - 1.0);
    let lq = (u.iter().map(|v| v.abs().powf(q)).sum::<f64>() * dx).powf(1.0 / q);
    let grad = (u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / dx).sqrt();
    let rhs = lq.powf(1.0 / alpha) * grad.powf(1.0 - 1.0 / alpha);
    InterpolationReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
    }
}

pub fn uinf_interpolation_check(state: &State, grid: &Grid, params: &Params) -> Result<InterpolationReport> {
    if !alpha_check(params.alpha).admissible {
        return Err(Error::Config(format!(
            "interpolation check needs admissible alpha, got {}",
            params.alpha
        )));
    }
    Ok(interpolation_ratio(&state.u, grid.dx, params.alpha))
}

/// One row of estimate functionals. Optional entries are absent when the
/// history is too short or weighted diagnostics are disabled.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub dissipation_cum: f64,
    pub max_rho: f64,
    pub ux_l2: f64,
    pub ux_linf: f64,
    pub rho_x_l2: f64,
    pub rho_gamma_x_l2: f64,
    pub rho_beta_x_l2: f64,
    pub rho_u_pow: Option<f64>,
    pub wmoment: Option<f64>,
    pub wdiss_cum: Option<f64>,
    pub rho_ut_l2: Option<f64>,
    pub uxx_l2: f64,
    pub mat_l2: Option<f64>,
    pub mat_w: Option<f64>,
    pub udot_x_l2: Option<f64>,
    pub evf_linf: f64,
    pub tw1: Option<f64>,
    pub tw2: Option<f64>,
    pub tw3: Option<f64>,
    pub tw4: f64,
    pub sup_xi_eta: Option<f64>,
    pub rho_cap: Option<f64>,
    pub res_rho_beta: Option<f64>,
    pub res_rho_gamma: Option<f64>,
    pub res_xi: Option<f64>,
}

impl DiagRecord {
    /// Column names in serialization order.
    pub const FIELDS: [&'static str; 29] = [
        "t",
        "mass",
        "momentum",
        "energy",
        "dissipation_cum",
        "max_rho",
        "ux_l2",
        "ux_linf",
        "rho_x_l2",
        "rho_gamma_x_l2",
        "rho_beta_x_l2",
        "rho_u_pow",
        "wmoment",
        "wdiss_cum",
        "rho_ut_l2",
        "uxx_l2",
        "mat_l2",
        "mat_w",
        "udot_x_l2",
        "evf_linf",
        "tw1",
        "tw2",
        "tw3",
        "tw4",
        "sup_xi_eta",
        "rho_cap",
        "res_rho_beta",
        "res_rho_gamma",
        "res_xi",
    ];

    /// Values in the order of [`DiagRecord::FIELDS`].
    pub fn values(&self) -> [Option<f64>; 29] {
        [
            Some(self.t),
            Some(self.mass),
            Some(self.momentum),
            Some(self.energy),
            Some(self.dissipation_cum),
            Some(self.max_rho),
            Some(self.ux_l2),
            Some(self.ux_linf),
            Some(self.rho_x_l2),
            Some(self.rho_gamma_x_l2),
            Some(self.rho_beta_x_l2),
            self.rho_u_pow,
            self.wmoment,
            self.wdiss_cum,
            self.rho_ut_l2,
            Some(self.uxx_l2),
            self.mat_l2,
            self.mat_w,
            self.udot_x_l2,
            Some(self.evf_linf),
            self.tw1,
            self.tw2,
            self.tw3,
            Some(self.tw4),
            self.sup_xi_eta,
            self.rho_cap,
            self.res_rho_beta,
            self.res_rho_gamma,
            self.res_xi,
        ]
    }

    /// Inverse of [`DiagRecord::values`]. Fails when a mandatory entry is
    /// absent.
    pub fn from_values(v: &[Option<f64>; 29]) -> std::result::Result<Self, String> {
        let req = |k: usize| v[k].ok_or_else(|| format!("missing value for {}", Self::FIELDS[k]));
        Ok(Self {
            t: req(0)?,
            mass: req(1)?,
            momentum: req(2)?,
            energy: req(3)?,
            dissipation_cum: req(4)?,
            max_rho: req(5)?,
            ux_l2: req(6)?,
            ux_linf: req(7)?,
            rho_x_l2: req(8)?,
            rho_gamma_x_l2: req(9)?,
            rho_beta_x_l2: req(10)?,
            rho_u_pow: v[11],
            wmoment: v[12],
            wdiss_cum: v[13],
            rho_ut_l2: v[14],
            uxx_l2: req(15)?,
            mat_l2: v[16],
            mat_w: v[17],
            udot_x_l2: v[18],
            evf_linf: req(19)?,
            tw1: v[20],
            tw2: v[21],
            tw3: v[22],
            tw4: req(23)?,
            sup_xi_eta: v[24],
            rho_cap: v[25],
            res_rho_beta: v[26],
            res_rho_gamma: v[27],
            res_xi: v[28],
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let k = Self::FIELDS.iter().position(|f| *f == name)?;
        self.values()[k]
    }

    /// Names of present entries that are not finite.
    pub fn non_finite(&self) -> Vec<&'static str> {
        Self::FIELDS
            .iter()
            .zip(self.values())
            .filter_map(|(n, v)| match v {
                Some(x) if !x.is_finite() => Some(*n),
                _ => None,
            })
            .collect()
    }
}

/// Composes the group functions over a stream of snapshots.
#[derive(Clone, Debug)]
pub struct DiagTracker {
    params: Params,
    older: Option<State>,
    prev: Option<State>,
    prev_diss_rate: f64,
    prev_wdiss_rate: f64,
    dissipation_cum: f64,
    wdiss_cum: f64,
}

impl DiagTracker {
    pub fn new(params: &Params) -> Self {
        Self {
            params: params.clone(),
            older: None,
            prev: None,
            prev_diss_rate: 0.0,
            prev_wdiss_rate: 0.0,
            dissipation_cum: 0.0,
            wdiss_cum: 0.0,
        }
    }

    /// Evaluates the record for `state`, the next snapshot in time order.
    pub fn record(&mut self, state: &State, grid: &Grid) -> Result<DiagRecord> {
        let p = &self.params;
        if let Some(prev) = &self.prev {
            let dt = state.t - prev.t;
            self.dissipation_cum += dt * self.prev_diss_rate;
            self.wdiss_cum += dt * self.prev_wdiss_rate;
        }
        let first = first_order_group(state, grid, p);
        let weighted = if p.weighted {
            Some(weighted_group(state, grid, p)?)
        } else {
            None
        };
        let mut history: Vec<&State> = Vec::with_capacity(3);
        history.extend(self.older.as_ref());
        history.extend(self.prev.as_ref());
        history.push(state);
        let higher = higher_order_group(&history, grid, p)?;
        let residuals = match &self.prev {
            Some(prev) => Some(transport_residuals(prev, state, grid, p)?),
            None => None,
        };
        let (_, evf) = effective_viscous_flux(state, grid, p);

        let record = DiagRecord {
            t: state.t,
            mass: first.mass,
            momentum: first.momentum,
            energy: first.energy,
            dissipation_cum: self.dissipation_cum,
            max_rho: first.max_rho,
            ux_l2: first.ux_l2,
            ux_linf: first.ux_linf,
            rho_x_l2: first.rho_x_l2,
            rho_gamma_x_l2: first.rho_gamma_x_l2,
            rho_beta_x_l2: first.rho_beta_x_l2,
            rho_u_pow: weighted.map(|w| w.rho_u_pow),
            wmoment: weighted.map(|w| w.wmoment),
            wdiss_cum: weighted.map(|_| self.wdiss_cum),
            rho_ut_l2: higher.rho_ut_l2,
            uxx_l2: higher.uxx_l2,
            mat_l2: higher.mat_l2,
            mat_w: higher.mat_w,
            udot_x_l2: higher.udot_x_l2,
            evf_linf: evf,
            tw1: higher.tw1,
            tw2: higher.tw2,
            tw3: higher.tw3,
            tw4: higher.tw4,
            res_rho_beta: residuals.map(|r| r.rho_beta),
            res_rho_gamma: residuals.map(|r| r.rho_gamma),
            ..DiagRecord::default()
        };

        self.prev_diss_rate = dissipation_rate(state, grid, p);
        self.prev_wdiss_rate = weighted.map_or(0.0, |w| w.wdiss_rate);
        self.older = self.prev.take();
        self.prev = Some(state.clone());
        Ok(record)
    }
}
