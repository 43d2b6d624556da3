use log::warn;

use super::{build_initial_data, stable_dt, step, CompatibilityReport, InitialProfile};
use crate::diagnostics::{energy_identity_residual, uinf_interpolation_check, DiagRecord, DiagTracker};
use crate::model::{alpha_check, make_grid, Grid, Params, State};
use crate::trajectories::{
    advect_particles_between, momentum_potential_residual, seed_particles, DensityMonitor, FarField,
    ParticleSet,
};
use crate::{Error, Result};

/// Allowed per-step energy increase relative to the initial energy.
pub const ENERGY_STEP_TOL: f64 = 1e-8;
/// Allowed relative mass drift over a run.
pub const MASS_TOL: f64 = 1e-12;
/// Allowed rise of `sup (xi + eta)` above its initial value.
pub const XI_ETA_DRIFT_TOL: f64 = 1e-3;
/// Relative slack of the density cap.
pub const DENSITY_CAP_TOL: f64 = 1e-3;
/// Slack of the velocity interpolation ratio.
pub const INTERPOLATION_TOL: f64 = 1e-6;
/// Boundary density, relative to the initial maximum, that triggers a warning.
pub const BOUNDARY_DENSITY_TOL: f64 = 1e-10;

const MAX_STEP_HALVINGS: usize = 30;

/// Output handles for a run.
pub trait RunSink {
    fn record(&mut self, _record: &DiagRecord) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _step: usize, _state: &State, _grid: &Grid) -> Result<()> {
        Ok(())
    }
    fn particles(&mut self, _t: f64, _ps: &ParticleSet) -> Result<()> {
        Ok(())
    }
}

pub struct NullSink;

impl RunSink for NullSink {}

/// Keeps snapshots in memory.
#[derive(Default)]
pub struct MemorySink {
    pub snapshots: Vec<(usize, State)>,
}

impl RunSink for MemorySink {
    fn snapshot(&mut self, step: usize, state: &State, _grid: &Grid) -> Result<()> {
        self.snapshots.push((step, state.clone()));
        Ok(())
    }
}

/// A monitored bound that failed during a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub kind: &'static str,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub grid: Grid,
    pub initial: State,
    pub final_state: State,
    pub compatibility: CompatibilityReport,
    pub records: Vec<DiagRecord>,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
    pub steps: usize,
    pub particles: ParticleSet,
    /// `E(n+1) - E(n) + dt D(n+1)` for every step.
    pub energy_residuals: Vec<f64>,
    /// Smallest density seen over all cells and steps.
    pub min_rho: f64,
    /// Largest velocity interpolation ratio over all steps.
    pub max_interpolation_ratio: f64,
    pub max_sup_xi_eta: f64,
}

/// Advances the profile from `t = 0` to `params.t_end`, evaluating the
/// monitors after every step.
///
/// The step size is recomputed each step; a step that produces a negative
/// density is retried with half the step. Results are deterministic for
/// fixed inputs. On an integration error the last good state is written to
/// the sink before the error is returned.
pub fn run(params: &Params, profile: &InitialProfile, sink: &mut dyn RunSink) -> Result<RunOutcome> {
    params.validate()?;
    if params.weighted && !alpha_check(params.alpha).admissible {
        return Err(Error::Config(format!("alpha = {} is not admissible", params.alpha)));
    }
    let grid = make_grid(params.half_width, params.n_cells)?;
    let (initial, compatibility) = build_initial_data(profile, &grid, params)?;
    let mut state = initial.clone();

    let mut tracker = DiagTracker::new(params);
    let mut particles = seed_particles(&state, &grid, params.beta, params.n_cells / 4);
    let mut monitor = DensityMonitor::new(DENSITY_CAP_TOL);
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    let mut energy_residuals = Vec::new();

    let amplitude = state.rho.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mass0 = state.rho.iter().sum::<f64>() * grid.dx;
    let mut boundary_warned = false;
    let mut min_rho = state.rho.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut max_ratio: f64 = 0.0;

    let mut record = tracker.record(&state, &grid)?;
    let bound = monitor.update(&particles, &state, &grid, params);
    if !particles.is_empty() {
        record.sup_xi_eta = Some(bound.sup_xi_eta);
        record.rho_cap = Some(bound.rho_cap);
    }
    if params.weighted {
        max_ratio = max_ratio.max(uinf_interpolation_check(&state, &grid, params)?.ratio);
    }
    let energy0 = record.energy;
    let mut max_sup = bound.sup_xi_eta;
    sink.record(&record)?;
    sink.snapshot(0, &state, &grid)?;
    sink.particles(state.t, &particles)?;
    records.push(record);

    let mut steps = 0usize;
    while state.t < params.t_end {
        let remaining = params.t_end - state.t;
        let mut dt = stable_dt(&state, &grid, params)?.min(remaining);
        let mut halvings = 0;
        let next = loop {
            match step(&state, dt, &grid, params) {
                Ok(s) => break s,
                Err(Error::Integration { msg, .. }) if msg == "negative density" && halvings < MAX_STEP_HALVINGS => {
                    dt *= 0.5;
                    halvings += 1;
                }
                Err(e) => {
                    sink.snapshot(steps, &state, &grid)?;
                    return Err(e);
                }
            }
        };
        // Land exactly on t_end.
        let next = if dt == remaining {
            State { t: params.t_end, ..next }
        } else {
            next
        };
        let dt = next.t - state.t;
        steps += 1;

        particles = advect_particles_between(&particles, &state, &next, &grid, dt, params.beta);
        let mut record = tracker.record(&next, &grid)?;
        let bound = monitor.update(&particles, &next, &grid, params);
        if !particles.is_empty() {
            record.sup_xi_eta = Some(bound.sup_xi_eta);
            record.rho_cap = Some(bound.rho_cap);
        }
        let (_, res_xi) = momentum_potential_residual(&state, &next, dt, &grid, params, FarField::LeftBoundary)?;
        record.res_xi = Some(res_xi);

        let t = next.t;
        let residual = energy_identity_residual(&state, &next, &grid, params)?;
        energy_residuals.push(residual);
        if record.energy > records.last().map_or(energy0, |r: &DiagRecord| r.energy) + ENERGY_STEP_TOL * energy0 {
            violations.push(Violation {
                t,
                kind: "energy_increase",
                value: record.energy,
                bound: records.last().map_or(energy0, |r| r.energy),
            });
        }
        if mass0 > 0.0 && (record.mass - mass0).abs() > MASS_TOL * mass0 {
            violations.push(Violation {
                t,
                kind: "mass_drift",
                value: record.mass,
                bound: mass0,
            });
        }
        if !particles.is_empty() {
            max_sup = max_sup.max(bound.sup_xi_eta);
            if bound.sup_xi_eta > particles.initial_sup + XI_ETA_DRIFT_TOL {
                violations.push(Violation {
                    t,
                    kind: "xi_eta_sup_growth",
                    value: bound.sup_xi_eta,
                    bound: particles.initial_sup,
                });
            }
            if bound.violation {
                violations.push(Violation {
                    t,
                    kind: "density_cap",
                    value: bound.max_rho,
                    bound: bound.rho_cap,
                });
            }
        }
        if params.weighted {
            let ratio = uinf_interpolation_check(&next, &grid, params)?.ratio;
            max_ratio = max_ratio.max(ratio);
            if ratio > 1.0 + INTERPOLATION_TOL {
                violations.push(Violation {
                    t,
                    kind: "interpolation_ratio",
                    value: ratio,
                    bound: 1.0,
                });
            }
        }
        let bad = record.non_finite();
        if !bad.is_empty() {
            violations.push(Violation {
                t,
                kind: "non_finite_record",
                value: f64::NAN,
                bound: bad.len() as f64,
            });
        }
        min_rho = next.rho.iter().fold(min_rho, |a, &b| a.min(b));
        let n = next.n_cells();
        let edge = next.rho[0].max(next.rho[n - 1]);
        if !boundary_warned && amplitude > 0.0 && edge > BOUNDARY_DENSITY_TOL * amplitude {
            let msg = format!(
                "density reached the window boundary at t = {t:.6e} ({edge:.3e}); enlarge L"
            );
            warn!("{msg}");
            warnings.push(msg);
            boundary_warned = true;
        }

        sink.record(&record)?;
        if steps % params.snapshot_every == 0 {
            sink.snapshot(steps, &next, &grid)?;
            sink.particles(t, &particles)?;
        }
        records.push(record);
        state = next;
    }
    if steps % params.snapshot_every != 0 {
        sink.snapshot(steps, &state, &grid)?;
        sink.particles(state.t, &particles)?;
    }

    Ok(RunOutcome {
        grid,
        initial,
        final_state: state,
        compatibility,
        records,
        violations,
        warnings,
        steps,
        particles,
        energy_residuals,
        min_rho,
        max_interpolation_ratio: max_ratio,
        max_sup_xi_eta: max_sup,
    })
}
