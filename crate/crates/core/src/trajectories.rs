//! Particle tracking and the density upper-bound monitor.
//!
//! With `xi(x) = int_{-L}^x rho u` and `eta` the viscosity potential, the
//! momentum equation integrates to `xi_t + rho u^2 - mu u_x + p = 0`, and
//! along particle paths `d/dt (xi + eta) = -p <= 0`. Particles carry
//! `xi + eta`; the monitor checks that the carried values never rise and that
//! the density stays below the cap implied by inverting `eta`.

use crate::model::{eta, eta_inverse, is_vacuum_sentinel, pressure_unchecked, Grid, Params, State};
use crate::solver::viscous_stress;
use crate::{Error, Result};

/// Cumulative trapezoidal integral of the face momentum from the left
/// boundary; the last entry is the total discrete momentum.
pub fn xi_field(state: &State, grid: &Grid) -> Vec<f64> {
    let mut xi = Vec::with_capacity(state.m.len());
    let mut acc = 0.0;
    xi.push(0.0);
    for w in state.m.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * grid.dx;
        xi.push(acc);
    }
    xi
}

/// Normalization of the far-field flux in the `xi` identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FarField {
    /// Take `rho u^2 - mu u_x + p = 0` at the left end, as on the whole line.
    Zero,
    /// Subtract the discrete flux at the left boundary of the window.
    #[default]
    LeftBoundary,
}

/// Residual of `xi_t + rho u^2 - mu u_x + p = F(-L)` at faces, with spatial
/// terms from `state_n`. Returns the field and its max norm.
///
/// For a constant state that does not decay, `FarField::Zero` yields
/// `rho^gamma` everywhere: the identity assumes the flux vanishes at the far
/// field. `FarField::LeftBoundary` accounts for the truncated window.
pub fn momentum_potential_residual(
    state_n: &State,
    state_np1: &State,
    dt: f64,
    grid: &Grid,
    params: &Params,
    far_field: FarField,
) -> Result<(Vec<f64>, f64)> {
    if state_n.n_cells() != state_np1.n_cells() || state_n.n_cells() != grid.n_cells() {
        return Err(Error::Shape {
            expected: grid.n_cells(),
            got: state_np1.n_cells(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let n = state_n.n_cells();
    let xi0 = xi_field(state_n, grid);
    let xi1 = xi_field(state_np1, grid);
    let stress = viscous_stress(&state_n.rho, &state_n.u, grid.dx, params.beta);
    let p: Vec<f64> = state_n
        .rho
        .iter()
        .map(|&r| pressure_unchecked(r, params.gamma))
        .collect();
    let face_rho = state_n.face_rho();
    // Center flux, extended to faces by averaging; end faces take the end cells.
    let center = |j: usize| p[j] - stress[j];
    let face_flux = |i: usize| -> f64 {
        let spatial = if i == 0 {
            center(0)
        } else if i == n {
            center(n - 1)
        } else {
            0.5 * (center(i - 1) + center(i))
        };
        face_rho[i] * state_n.u[i] * state_n.u[i] + spatial
    };
    let offset = match far_field {
        FarField::Zero => 0.0,
        FarField::LeftBoundary => face_flux(0),
    };
    let res: Vec<f64> = (0..=n)
        .map(|i| (xi1[i] - xi0[i]) / dt + face_flux(i) - offset)
        .collect();
    let max = res.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok((res, max))
}

/// Linear interpolation of a face field.
fn interp_faces(f: &[f64], grid: &Grid, x: f64) -> f64 {
    let n = grid.n_cells();
    let s = ((x - grid.faces[0]) / grid.dx).clamp(0.0, n as f64);
    let k = (s.floor() as usize).min(n - 1);
    let w = s - k as f64;
    f[k] * (1.0 - w) + f[k + 1] * w
}

/// Linear interpolation of a center field, constant beyond the end centers.
fn interp_centers(f: &[f64], grid: &Grid, x: f64) -> f64 {
    let n = grid.n_cells();
    let s = ((x - grid.centers[0]) / grid.dx).clamp(0.0, (n - 1) as f64);
    let k = (s.floor() as usize).min(n - 2);
    let w = s - k as f64;
    f[k] * (1.0 - w) + f[k + 1] * w
}

/// `xi + eta(rho)` at `x`; the vacuum sentinel where the density vanishes.
pub fn sample_xi_eta(xi: &[f64], state: &State, grid: &Grid, beta: f64, x: f64) -> f64 {
    let rho = interp_centers(&state.rho, grid, x);
    let e = eta(rho, beta);
    if is_vacuum_sentinel(e) {
        e
    } else {
        interp_faces(xi, grid, x) + e
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    pub positions: Vec<f64>,
    pub xi_eta: Vec<f64>,
    /// Supremum of `xi_0 + eta_0` over the grid and the seeds.
    pub initial_sup: f64,
    /// Set for particles that reached the window boundary and were clamped.
    pub exited: Vec<bool>,
    /// Per particle, the sum of all increases of `xi + eta`.
    pub total_rise: Vec<f64>,
    /// Per particle, the largest value above a previous minimum.
    pub max_rise: Vec<f64>,
    running_min: Vec<f64>,
}

impl ParticleSet {
    pub fn from_positions(positions: Vec<f64>, state: &State, grid: &Grid, beta: f64) -> Self {
        let xi = xi_field(state, grid);
        let xi_eta: Vec<f64> = positions
            .iter()
            .map(|&x| sample_xi_eta(&xi, state, grid, beta, x))
            .collect();
        let grid_sup = grid
            .centers
            .iter()
            .map(|&x| sample_xi_eta(&xi, state, grid, beta, x))
            .fold(f64::NEG_INFINITY, f64::max);
        let initial_sup = xi_eta.iter().copied().fold(grid_sup, f64::max);
        let p = positions.len();
        Self {
            exited: vec![false; p],
            total_rise: vec![0.0; p],
            max_rise: vec![0.0; p],
            running_min: xi_eta.clone(),
            positions,
            xi_eta,
            initial_sup,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Largest carried value, ignoring vacuum particles.
    pub fn sup(&self) -> f64 {
        self.xi_eta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn worst_total_rise(&self) -> f64 {
        self.total_rise.iter().copied().fold(0.0, f64::max)
    }

    pub fn worst_max_rise(&self) -> f64 {
        self.max_rise.iter().copied().fold(0.0, f64::max)
    }

    fn resample(&mut self, state: &State, grid: &Grid, beta: f64) {
        let xi = xi_field(state, grid);
        for k in 0..self.len() {
            let new = sample_xi_eta(&xi, state, grid, beta, self.positions[k]);
            let old = self.xi_eta[k];
            if !is_vacuum_sentinel(new) && !is_vacuum_sentinel(old) && new > old {
                self.total_rise[k] += new - old;
            }
            if !is_vacuum_sentinel(new) {
                let min = self.running_min[k].min(new);
                self.running_min[k] = min;
                if !is_vacuum_sentinel(min) {
                    self.max_rise[k] = self.max_rise[k].max(new - min);
                }
            }
            self.xi_eta[k] = new;
        }
    }
}

/// Seeds `count` particles uniformly over the support of the density, plus
/// one at its maximum and one where `xi + eta` peaks. An empty support gives
/// an empty set.
pub fn seed_particles(state: &State, grid: &Grid, beta: f64, count: usize) -> ParticleSet {
    let first = state.rho.iter().position(|&r| r > 0.0);
    let last = state.rho.iter().rposition(|&r| r > 0.0);
    let mut positions = Vec::with_capacity(count + 1);
    if let (Some(a), Some(b)) = (first, last) {
        let lo = grid.centers[a];
        let hi = grid.centers[b];
        for k in 0..count {
            positions.push(lo + (k as f64 + 0.5) * (hi - lo) / count as f64);
        }
        let argmax = state
            .rho
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (j, &r)| if r > acc.1 { (j, r) } else { acc })
            .0;
        positions.push(grid.centers[argmax]);
        // The grid point realizing sup(xi + eta) joins the seeds, so the
        // particle supremum starts exactly at `initial_sup`.
        let xi = xi_field(state, grid);
        let best = grid
            .centers
            .iter()
            .map(|&x| sample_xi_eta(&xi, state, grid, beta, x))
            .enumerate()
            .fold((argmax, f64::NEG_INFINITY), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc })
            .0;
        if best != argmax {
            positions.push(grid.centers[best]);
        }
    }
    ParticleSet::from_positions(positions, state, grid, beta)
}

fn clamp_into(x: f64, grid: &Grid) -> (f64, bool) {
    let lo = grid.faces[0];
    let hi = grid.faces[grid.n_cells()];
    if x <= lo {
        (lo + 1e-12 * grid.dx, true)
    } else if x >= hi {
        (hi - 1e-12 * grid.dx, true)
    } else {
        (x, false)
    }
}

/// Heun update of positions in the frozen velocity field of `state`, then
/// resampling of `xi + eta` from `state`.
pub fn advect_particles(ps: &ParticleSet, state: &State, grid: &Grid, dt: f64, beta: f64) -> ParticleSet {
    advect_particles_between(ps, state, state, grid, dt, beta)
}

/// Heun update with the predictor velocity from `prev` and the corrector from
/// `next`, then resampling from `next`.
pub fn advect_particles_between(
    ps: &ParticleSet,
    prev: &State,
    next: &State,
    grid: &Grid,
    dt: f64,
    beta: f64,
) -> ParticleSet {
    let mut out = ps.clone();
    for k in 0..ps.len() {
        let x0 = ps.positions[k];
        let v0 = interp_faces(&prev.u, grid, x0);
        let (pred, _) = clamp_into(x0 + dt * v0, grid);
        let v1 = interp_faces(&next.u, grid, pred);
        let (x1, hit) = clamp_into(x0 + 0.5 * dt * (v0 + v1), grid);
        out.positions[k] = x1;
        out.exited[k] |= hit;
    }
    out.resample(next, grid, beta);
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub sup_xi_eta: f64,
    /// Density solving `eta(rho_cap) = initial_sup + sup_t ||sqrt(rho) u||_2 ||rho||_1^(1/2)`.
    pub rho_cap: f64,
    pub max_rho: f64,
    pub violation: bool,
}

/// Running state of the density-bound monitor.
#[derive(Clone, Debug)]
pub struct DensityMonitor {
    pub tol: f64,
    flux_bound_sup: f64,
}

impl DensityMonitor {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            flux_bound_sup: 0.0,
        }
    }

    pub fn flux_bound_sup(&self) -> f64 {
        self.flux_bound_sup
    }

    pub fn update(&mut self, ps: &ParticleSet, state: &State, grid: &Grid, params: &Params) -> BoundReport {
        density_bound_monitor(ps, state, grid, params, self)
    }
}

/// `||sqrt(rho) u||_2 ||rho||_1^(1/2)`, an upper bound for `int |rho u|`.
pub fn momentum_flux_bound(state: &State, grid: &Grid) -> f64 {
    let face_rho = state.face_rho();
    let ke: f64 = face_rho
        .iter()
        .zip(&state.u)
        .map(|(r, v)| r * v * v)
        .sum::<f64>()
        * grid.dx;
    let mass: f64 = state.rho.iter().sum::<f64>() * grid.dx;
    ke.sqrt() * mass.sqrt()
}

pub fn density_bound_monitor(
    ps: &ParticleSet,
    state: &State,
    grid: &Grid,
    params: &Params,
    monitor: &mut DensityMonitor,
) -> BoundReport {
    monitor.flux_bound_sup = monitor.flux_bound_sup.max(momentum_flux_bound(state, grid));
    let max_rho = state.rho.iter().fold(0.0_f64, |a, &b| a.max(b));
    let rho_cap = eta_inverse(ps.initial_sup + monitor.flux_bound_sup, params.beta);
    BoundReport {
        sup_xi_eta: ps.sup(),
        rho_cap,
        max_rho,
        violation: max_rho > rho_cap * (1.0 + monitor.tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_grid;

    fn bump_state(grid: &Grid, odd_velocity: bool) -> State {
        let rho: Vec<f64> = grid
            .centers
            .iter()
            .map(|x| (1.0 - x * x / 4.0).max(0.0).powi(4))
            .collect();
        let u: Vec<f64> = grid
            .faces
            .iter()
            .map(|&x| {
                let e = (1.0 - x * x / 4.0).max(0.0).powi(2);
                if odd_velocity { x * e } else { 0.3 * e }
            })
            .collect();
        let n = u.len();
        let mut u = u;
        u[0] = 0.0;
        u[n - 1] = 0.0;
        State::new(0.0, rho, u).unwrap()
    }

    #[test]
    fn xi_zero_velocity_and_odd_symmetry() {
        let grid = make_grid(3.0, 64).unwrap();
        let s = State::new(0.0, vec![1.0; 64], vec![0.0; 65]).unwrap();
        assert!(xi_field(&s, &grid).iter().all(|&v| v == 0.0));
        let s = bump_state(&grid, true);
        let xi = xi_field(&s, &grid);
        assert!(xi[64].abs() < 1e-15);
    }

    #[test]
    fn xi_matches_direct_summation() {
        let grid = make_grid(3.0, 64).unwrap();
        let s = bump_state(&grid, false);
        let xi = xi_field(&s, &grid);
        for i in 0..=64 {
            let mut direct = 0.0;
            for k in 0..i {
                direct += (s.m[k] + s.m[k + 1]) * grid.dx / 2.0;
            }
            assert!((xi[i] - direct).abs() <= 1e-14 * direct.abs().max(1e-300));
        }
        let total: f64 = s.m.iter().sum::<f64>() * grid.dx;
        assert!((xi[64] - total).abs() <= 1e-14 * total.abs());
    }

    #[test]
    fn residual_constant_state_and_vacuum() {
        let grid = make_grid(1.0, 16).unwrap();
        let p = Params::default();
        let s0 = State::new(0.0, vec![1.5; 16], vec![0.0; 17]).unwrap();
        let s1 = State { t: 0.1, ..s0.clone() };
        let (r, _) = momentum_potential_residual(&s0, &s1, 0.1, &grid, &p, FarField::Zero).unwrap();
        assert!(r.iter().all(|&v| v == 1.5f64.powi(2)));
        let (_, m) = momentum_potential_residual(&s0, &s1, 0.1, &grid, &p, FarField::LeftBoundary).unwrap();
        assert_eq!(m, 0.0);
        let v0 = State::vacuum(16);
        let v1 = State { t: 0.1, ..v0.clone() };
        let (_, m) = momentum_potential_residual(&v0, &v1, 0.1, &grid, &p, FarField::Zero).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn residual_localizes_at_velocity_spike() {
        let grid = make_grid(1.0, 16).unwrap();
        let p = Params::default();
        let mut u = vec![0.0; 17];
        u[8] = 0.5;
        let s0 = State::new(0.0, vec![0.0; 16], u).unwrap();
        let s1 = State { t: 0.01, ..s0.clone() };
        let (r, m) = momentum_potential_residual(&s0, &s1, 0.01, &grid, &p, FarField::Zero).unwrap();
        assert!(m > 0.0);
        for (i, v) in r.iter().enumerate() {
            if !(7..=9).contains(&i) {
                assert_eq!(*v, 0.0, "face {i}");
            }
        }
    }

    #[test]
    fn advection_identity_and_constant_velocity() {
        let grid = make_grid(2.0, 32).unwrap();
        let s = bump_state(&grid, false);
        let still = State::new(0.0, s.rho.clone(), vec![0.0; 33]).unwrap();
        let ps = seed_particles(&s, &grid, 1.0, 8);
        let moved = advect_particles(&ps, &still, &grid, 0.1, 1.0);
        assert_eq!(moved.positions, ps.positions);

        let mut u = vec![0.25; 33];
        u[0] = 0.0;
        u[32] = 0.0;
        let uniform = State::new(0.0, vec![1.0; 32], u).unwrap();
        let ps = ParticleSet::from_positions(vec![-0.5, 0.0, 0.7], &uniform, &grid, 1.0);
        let moved = advect_particles(&ps, &uniform, &grid, 0.2, 1.0);
        for (a, b) in ps.positions.iter().zip(&moved.positions) {
            assert!((b - a - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_field_matches_exponential() {
        let grid = make_grid(2.0, 64).unwrap();
        let k = 0.8;
        let u: Vec<f64> = grid.faces.iter().map(|&x| k * x).collect();
        let s = State { t: 0.0, rho: vec![1.0; 64], m: u.clone(), u };
        let x0 = 0.3;
        let mut ps = ParticleSet::from_positions(vec![x0], &s, &grid, 1.0);
        let dt = 0.01;
        for _ in 0..50 {
            ps = advect_particles(&ps, &s, &grid, dt, 1.0);
        }
        let exact = x0 * (k * 0.5f64).exp();
        // Heun's global error is O(dt^2).
        assert!((ps.positions[0] - exact).abs() < 0.5 * exact * (k * dt).powi(2));
    }

    #[test]
    fn exiting_particles_are_clamped_and_flagged() {
        let grid = make_grid(1.0, 16).unwrap();
        let mut u = vec![5.0; 17];
        u[0] = 0.0;
        u[16] = 0.0;
        let s = State::new(0.0, vec![1.0; 16], u).unwrap();
        let ps = ParticleSet::from_positions(vec![0.9], &s, &grid, 1.0);
        let moved = advect_particles(&ps, &s, &grid, 1.0, 1.0);
        assert!(moved.exited[0]);
        assert!(moved.positions[0] < 1.0);
    }

    #[test]
    fn monitor_initial_and_vacuum() {
        let grid = make_grid(3.0, 64).unwrap();
        let p = Params::default();
        let s = bump_state(&grid, false);
        let ps = seed_particles(&s, &grid, p.beta, 16);
        assert!(ps.len() >= 17);
        assert_eq!(ps.sup(), ps.initial_sup);
        let mut mon = DensityMonitor::new(1e-3);
        let rep = mon.update(&ps, &s, &grid, &p);
        assert!(rep.sup_xi_eta <= ps.initial_sup);
        assert!(!rep.violation);
        assert!(rep.rho_cap >= rep.max_rho);

        let v = State::vacuum(64);
        let ps = seed_particles(&v, &grid, p.beta, 16);
        assert!(ps.is_empty());
        let rep = DensityMonitor::new(1e-3).update(&ps, &v, &grid, &p);
        assert_eq!(rep.max_rho, 0.0);
        assert!(!rep.violation);
    }
}
