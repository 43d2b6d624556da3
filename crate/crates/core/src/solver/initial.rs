use std::f64::consts::PI;

use crate::diagnostics::gradient;
use crate::model::{pow0, viscosity_unchecked, Grid, Params, State};
use crate::{Error, Result};

/// Tabulated profile, linearly interpolated and zero outside its range.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl Table {
    pub fn new(x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::Shape {
                expected: x.len(),
                got: values.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::Config("table needs at least two rows".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("table abscissae must be strictly increasing".into()));
        }
        if x.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Config("table entries must be finite".into()));
        }
        Ok(Self { x, values })
    }

    pub fn eval(&self, at: f64) -> f64 {
        let n = self.x.len();
        if at < self.x[0] || at > self.x[n - 1] {
            return 0.0;
        }
        let k = self.x.partition_point(|&v| v <= at).clamp(1, n - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let s = (at - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - s) + self.values[k] * s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityKind {
    /// `A (1 - (x/R)^2)^k` on `|x| < R`.
    CompactBump,
    /// `A exp(-4 (x/R)^2) (1 - (x/R)^2)^k` on `|x| < R`.
    GaussianTimesCutoff,
    /// `A exp(-(x/R)^2)`, positive on the whole window.
    Gaussian,
    Table(Table),
}

#[derive(Clone, Debug, PartialEq)]
pub enum VelocityKind {
    Zero,
    /// `U sin(pi x/R) (1 - (x/R)^2)^k` on `|x| < R`.
    SineInSupport,
    Table(Table),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialProfile {
    pub kind: DensityKind,
    pub amplitude: f64,
    pub support_radius: f64,
    pub smoothness_order: u32,
    pub velocity: VelocityKind,
    pub velocity_amplitude: f64,
}

impl Default for InitialProfile {
    fn default() -> Self {
        Self {
            kind: DensityKind::CompactBump,
            amplitude: 1.0,
            support_radius: 2.0,
            smoothness_order: 4,
            velocity: VelocityKind::Zero,
            velocity_amplitude: 0.0,
        }
    }
}

impl InitialProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Config(format!(
                "amplitude must be nonnegative, got {}",
                self.amplitude
            )));
        }
        if !(self.support_radius > 0.0) || !self.support_radius.is_finite() {
            return Err(Error::Config(format!(
                "support_radius must be positive, got {}",
                self.support_radius
            )));
        }
        if self.smoothness_order < 2 {
            return Err(Error::Config(format!(
                "smoothness_order must be at least 2, got {}",
                self.smoothness_order
            )));
        }
        if !self.velocity_amplitude.is_finite() {
            return Err(Error::Config("velocity_amplitude must be finite".into()));
        }
        if let DensityKind::Table(t) = &self.kind {
            if t.values.iter().any(|v| *v < 0.0) {
                return Err(Error::Config("density table has negative entries".into()));
            }
        }
        Ok(())
    }

    fn envelope(&self, x: f64) -> f64 {
        let s = x / self.support_radius;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - s * s).powi(self.smoothness_order as i32)
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let s = x / self.support_radius;
        match &self.kind {
            DensityKind::CompactBump => self.amplitude * self.envelope(x),
            DensityKind::GaussianTimesCutoff => {
                self.amplitude * (-4.0 * s * s).exp() * self.envelope(x)
            }
            DensityKind::Gaussian => self.amplitude * (-s * s).exp(),
            DensityKind::Table(t) => t.eval(x),
        }
    }

    pub fn velocity_at(&self, x: f64) -> f64 {
        match &self.velocity {
            VelocityKind::Zero => 0.0,
            VelocityKind::SineInSupport => {
                self.velocity_amplitude * (PI * x / self.support_radius).sin() * self.envelope(x)
            }
            VelocityKind::Table(t) => t.eval(x),
        }
    }
}

/// Compatibility data of the initial state.
///
/// `g` is defined through `[mu(rho0) u0_x]_x - [rho0^gamma]_x = sqrt(rho0) g`
/// on the cells where `rho0 > rho_floor`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    /// `(x, g)` pairs on the positive-density cells.
    pub g_values: Vec<(f64, f64)>,
    /// `|| sqrt(rho0) g (1 + |x|^(alpha/2)) ||_2`.
    pub weighted_l2: f64,
    /// `|| g (1 + |x|^(alpha/2)) ||_2` over the positive-density cells.
    pub g_weighted_l2: f64,
    /// Largest `|[mu u0_x]_x - [rho0^gamma]_x|` on cells at or below the floor.
    pub max_residual: f64,
    /// `|| |x|^(alpha/2) rho0^(beta/2) ||_2`.
    pub rho_beta_moment: f64,
    /// `|| |x|^(alpha/2) rho0^(gamma/2) ||_2`.
    pub rho_gamma_moment: f64,
    /// `|| sqrt(rho0) u0 (1 + |x|^(alpha/2)) ||_2`.
    pub momentum_moment: f64,
}

impl CompatibilityReport {
    fn zero() -> Self {
        Self {
            g_values: Vec::new(),
            weighted_l2: 0.0,
            g_weighted_l2: 0.0,
            max_residual: 0.0,
            rho_beta_moment: 0.0,
            rho_gamma_moment: 0.0,
            momentum_moment: 0.0,
        }
    }
}

/// Samples the profile on the grid and evaluates the compatibility data.
pub fn build_initial_data(
    profile: &InitialProfile,
    grid: &Grid,
    params: &Params,
) -> Result<(State, CompatibilityReport)> {
    profile.validate()?;
    let n = grid.n_cells();
    let rho: Vec<f64> = grid.centers.iter().map(|&x| profile.density(x)).collect();
    if let Some(j) = rho.iter().position(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Profile(format!(
            "density {} at x = {}",
            rho[j], grid.centers[j]
        )));
    }
    let mut u: Vec<f64> = grid.faces.iter().map(|&x| profile.velocity_at(x)).collect();
    u[0] = 0.0;
    u[n] = 0.0;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Profile("initial velocity is not finite".into()));
    }
    let state = State::new(0.0, rho, u)?;
    if state.rho.iter().all(|&r| r == 0.0) && state.u.iter().all(|&v| v == 0.0) {
        return Ok((state, CompatibilityReport::zero()));
    }

    let dx = grid.dx;
    let half_alpha = 0.5 * params.alpha;
    let u_c: Vec<f64> = grid.centers.iter().map(|&x| profile.velocity_at(x)).collect();
    let ux = gradient(&u_c, grid, 2)?;
    let stress: Vec<f64> = state
        .rho
        .iter()
        .zip(&ux)
        .map(|(&r, &d)| viscosity_unchecked(r, params.beta) * d)
        .collect();
    let stress_x = gradient(&stress, grid, 2)?;
    let p: Vec<f64> = state.rho.iter().map(|&r| pow0(r, params.gamma)).collect();
    let p_x = gradient(&p, grid, 2)?;

    let mut report = CompatibilityReport::zero();
    let (mut wl2, mut gl2, mut mb, mut mg) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..n {
        let x = grid.centers[j];
        let r = state.rho[j];
        let weight = 1.0 + x.abs().powf(half_alpha);
        let defect = stress_x[j] - p_x[j];
        if r > params.rho_floor {
            let g = defect / r.sqrt();
            report.g_values.push((x, g));
            wl2 += (defect * weight).powi(2) * dx;
            gl2 += (g * weight).powi(2) * dx;
        } else {
            report.max_residual = report.max_residual.max(defect.abs());
        }
        let xw = x.abs().powf(params.alpha);
        if r > 0.0 {
            mb += xw * pow0(r, params.beta) * dx;
        }
        mg += xw * pow0(r, params.gamma) * dx;
    }
    let face_rho = state.face_rho();
    let mut mm = 0.0;
    for (i, &x) in grid.faces.iter().enumerate() {
        let w = 1.0 + x.abs().powf(half_alpha);
        mm += face_rho[i] * (state.u[i] * w).powi(2) * dx;
    }
    report.weighted_l2 = wl2.sqrt();
    report.g_weighted_l2 = gl2.sqrt();
    report.rho_beta_moment = mb.sqrt();
    report.rho_gamma_moment = mg.sqrt();
    report.momentum_moment = mm.sqrt();

    if !report.weighted_l2.is_finite() || !report.g_weighted_l2.is_finite() {
        return Err(Error::Profile(format!(
            "compatibility norm is not finite (weighted_l2 = {}, g norm = {}); \
             raise the vacuum boundary exponent smoothness_order (currently {})",
            report.weighted_l2, report.g_weighted_l2, profile.smoothness_order
        )));
    }
    Ok((state, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_grid;

    #[test]
    fn table_interpolates_and_vanishes_outside() {
        let t = Table::new(vec![-1.0, 0.0, 1.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.eval(-0.5), 1.0);
        assert_eq!(t.eval(0.0), 2.0);
        assert_eq!(t.eval(1.5), 0.0);
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_velocity_gives_pressure_only_g() {
        let grid = make_grid(10.0, 512).unwrap();
        let params = Params::default();
        let profile = InitialProfile::default();
        let (state, report) = build_initial_data(&profile, &grid, &params).unwrap();
        let p: Vec<f64> = state.rho.iter().map(|r| r * r).collect();
        let px = gradient(&p, &grid, 2).unwrap();
        for &(x, g) in &report.g_values {
            let j = grid.centers.iter().position(|&c| c == x).unwrap();
            let expected = -px[j] / state.rho[j].sqrt();
            assert!((g - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
        assert!(report.weighted_l2 > 0.0 && report.weighted_l2.is_finite());
    }

    #[test]
    fn total_vacuum_gives_zero_report() {
        let grid = make_grid(1.0, 16).unwrap();
        let profile = InitialProfile {
            amplitude: 0.0,
            ..InitialProfile::default()
        };
        let (state, report) = build_initial_data(&profile, &grid, &Params::default()).unwrap();
        assert!(state.rho.iter().all(|&r| r == 0.0));
        assert!(state.u.iter().all(|&v| v == 0.0));
        assert_eq!(report, CompatibilityReport::zero());
    }

    #[test]
    fn rejects_bad_profiles() {
        let grid = make_grid(1.0, 16).unwrap();
        let bad = InitialProfile {
            smoothness_order: 1,
            ..InitialProfile::default()
        };
        assert!(build_initial_data(&bad, &grid, &Params::default()).is_err());
        let neg = InitialProfile {
            kind: DensityKind::Table(Table::new(vec![-1.0, 1.0], vec![-1.0, 1.0]).unwrap()),
            ..InitialProfile::default()
        };
        assert!(build_initial_data(&neg, &grid, &Params::default()).is_err());
    }
}
