use rayon::prelude::*;

use super::{run, InitialProfile, NullSink, RunOutcome};
use crate::model::{Params, State};
use crate::{Error, Result};

/// Self-convergence of the density in `L1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub cells: Vec<usize>,
    /// `|| rho_N - R(rho_2N) ||_1` for consecutive pairs, where `R` averages
    /// pairs of fine cells.
    pub errors: Vec<f64>,
    /// `log2(errors[k] / errors[k + 1])`.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Averages pairs of neighbouring cells.
pub fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks(2).map(|c| 0.5 * (c[0] + c[c.len() - 1])).collect()
}

pub fn l1_distance(coarse: &State, fine: &State, dx: f64) -> Result<f64> {
    if fine.n_cells() != 2 * coarse.n_cells() {
        return Err(Error::Shape {
            expected: 2 * coarse.n_cells(),
            got: fine.n_cells(),
        });
    }
    Ok(restrict(&fine.rho)
        .iter()
        .zip(&coarse.rho)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * dx)
}

/// Runs the profile at each resolution in `cells` (successively doubled) and
/// measures the observed order of the density.
pub fn self_convergence(params: &Params, profile: &InitialProfile, cells: &[usize]) -> Result<ConvergenceReport> {
    if cells.len() < 3 || cells.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Config(
            "self-convergence needs at least three successively doubled resolutions".into(),
        ));
    }
    let outcomes: Vec<RunOutcome> = cells
        .par_iter()
        .map(|&n| {
            let p = Params { n_cells: n, ..params.clone() };
            run(&p, profile, &mut NullSink)
        })
        .collect::<Result<_>>()?;
    let errors = outcomes
        .windows(2)
        .map(|w| l1_distance(&w[0].final_state, &w[1].final_state, w[0].grid.dx))
        .collect::<Result<Vec<_>>>()?;
    let orders = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    Ok(ConvergenceReport {
        cells: cells.to_vec(),
        errors,
        orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_averages_pairs() {
        assert_eq!(restrict(&[1.0, 3.0, 5.0, 7.0]), vec![2.0, 6.0]);
    }

    #[test]
    fn rejects_non_doubled_resolutions() {
        let p = Params::default();
        assert!(self_convergence(&p, &InitialProfile::default(), &[64, 128, 200]).is_err());
    }
}
