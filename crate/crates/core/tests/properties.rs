use ns1d::diagnostics::{dissipation_rate, energy, first_order_group, gradient, interpolation_ratio};
use ns1d::inequalities::{ckn_ratio, CknCase, TestFunction};
use ns1d::model::{alpha_check, eta, eta_inverse, make_grid, pressure, viscosity, ALPHA_UPPER_BOUND};
use ns1d::solver::{stable_dt, step};
use ns1d::trajectories::{advect_particles, seed_particles};
use ns1d::{Grid, Params, State};
use proptest::prelude::*;

/// Composite Simpson rule, kept independent of the library quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn grid(n: usize) -> Grid {
    make_grid(10.0, n).unwrap()
}

fn state_from(rho: Vec<f64>, interior_u: Vec<f64>) -> State {
    let mut u = vec![0.0];
    u.extend(interior_u);
    u.push(0.0);
    State::new(0.0, rho, u).unwrap()
}

fn fields(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0..3.0f64, n),
        prop::collection::vec(-2.0..2.0f64, n - 1),
    )
}

proptest! {
    #[test]
    fn eta_matches_its_integral(rho in 1e-3..20.0f64, beta in 0.0..3.0f64) {
        // eta(rho) = int_0^{ln rho} (1 + e^{beta v}) dv
        let oracle = simpson(|v| 1.0 + (beta * v).exp(), 0.0, rho.ln(), 2000);
        let got = eta(rho, beta);
        prop_assert!((got - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()), "{got} vs {oracle}");
    }

    #[test]
    fn eta_is_increasing_and_invertible(a in 1e-6..50.0f64, b in 1e-6..50.0f64, beta in 0.0..3.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi > lo * (1.0 + 1e-12));
        prop_assert!(eta(lo, beta) < eta(hi, beta));
        let back = eta_inverse(eta(a, beta), beta);
        prop_assert!((back - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn pressure_and_viscosity_are_monotone(a in 0.0..10.0f64, b in 0.0..10.0f64, gamma in 1.01..4.0f64, beta in 0.0..3.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(pressure(lo, gamma).unwrap() <= pressure(hi, gamma).unwrap());
        prop_assert!(viscosity(lo, beta).unwrap() <= viscosity(hi, beta).unwrap());
        prop_assert!(viscosity(lo, beta).unwrap() >= 1.0);
    }

    #[test]
    fn energy_and_mass_match_plain_sums((rho, u) in fields(32), gamma in 1.1..3.0f64, beta in 0.0..2.0f64) {
        let g = grid(32);
        let s = state_from(rho.clone(), u);
        let params = Params { gamma, beta, n_cells: 32, ..Params::default() };
        let n = rho.len();
        let mut kinetic = 0.0;
        let mut dissipation = 0.0;
        for i in 0..=n {
            let rf = if i == 0 { rho[0] } else if i == n { rho[n - 1] } else { (rho[i - 1] + rho[i]) / 2.0 };
            kinetic += rf * s.u[i] * s.u[i] / 2.0;
        }
        let mut internal = 0.0;
        let mut mass = 0.0;
        for j in 0..n {
            internal += rho[j].powf(gamma) / (gamma - 1.0);
            mass += rho[j];
            let d = (s.u[j + 1] - s.u[j]) / g.dx;
            dissipation += (1.0 + rho[j].powf(beta)) * d * d;
        }
        let e = (kinetic + internal) * g.dx;
        prop_assert!((energy(&s, &g, &params) - e).abs() <= 1e-13 * e.max(1.0));
        let d = dissipation * g.dx;
        prop_assert!((dissipation_rate(&s, &g, &params) - d).abs() <= 1e-13 * d.max(1.0));
        let m = mass * g.dx;
        prop_assert!((first_order_group(&s, &g, &params).mass - m).abs() <= 1e-13 * m.max(1.0));
    }

    #[test]
    fn gradient_is_exact_on_quadratics(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
        let g = grid(40);
        let f: Vec<f64> = g.centers.iter().map(|x| a + b * x + c * x * x).collect();
        let d = gradient(&f, &g, 2).unwrap();
        for (x, v) in g.centers.iter().zip(&d) {
            prop_assert!((v - (b + 2.0 * c * x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn interpolation_inequality_holds(u in prop::collection::vec(-5.0..5.0f64, 15), alpha in 2.001..2.456f64) {
        let mut faces = vec![0.0];
        faces.extend(u);
        faces.push(0.0);
        let r = interpolation_ratio(&faces, 0.37, alpha);
        prop_assert!(r.ratio <= 1.0 + 1e-6, "ratio {}", r.ratio);
    }

    #[test]
    fn ckn_ratio_is_homogeneous(c in 0.01..100.0f64, seed in 0u64..50) {
        let case = CknCase::balanced(0.7, 0.2, 2.0, 3.0, 4.0, 0.6).unwrap();
        let h = TestFunction::random_fourier(seed);
        let r0 = ckn_ratio(&case, &h).unwrap();
        let r1 = ckn_ratio(&case, &h.scaled(c)).unwrap();
        prop_assert!((r1 - r0).abs() <= 1e-12 * r0);
    }

    #[test]
    fn ckn_ratio_is_dilation_invariant(lambda in 0.1..10.0f64, a in 0.6..2.5f64) {
        let case = CknCase::hardy(a).unwrap();
        let r0 = ckn_ratio(&case, &TestFunction::Gaussian).unwrap();
        let r1 = ckn_ratio(&case, &TestFunction::Gaussian.dilated(lambda)).unwrap();
        prop_assert!((r1 - r0).abs() <= 1e-8 * r0);
    }

    #[test]
    fn one_step_conserves_mass_and_positivity((rho, u) in fields(64)) {
        let g = grid(64);
        let s = state_from(rho, u);
        let params = Params { n_cells: 64, ..Params::default() };
        let dt = stable_dt(&s, &g, &params).unwrap();
        let next = step(&s, dt, &g, &params).unwrap();
        let m0: f64 = s.rho.iter().sum();
        let m1: f64 = next.rho.iter().sum();
        prop_assert!((m1 - m0).abs() <= 1e-14 * m0.max(1.0));
        prop_assert!(next.rho.iter().all(|&r| r >= 0.0));
    }
}

#[test]
fn second_differences_are_exact_on_cubics() {
    let g = grid(50);
    let f: Vec<f64> = g.faces.iter().map(|x| 1.0 - x + 0.5 * x * x + 0.1 * x * x * x).collect();
    let (uxx, _) = ns1d::diagnostics::velocity_higher_derivatives(&f, g.dx);
    for (x, v) in g.faces.iter().zip(&uxx).skip(1).take(f.len() - 2) {
        assert!((v - (1.0 + 0.6 * x)).abs() <= 1e-9, "{v} at {x}");
    }
}

#[test]
fn admissible_scan_keeps_theta_and_coefficient_small() {
    let oracle = 1.0 + 2.0 / (1.0 + 4f64.cbrt()).cbrt();
    assert!((ALPHA_UPPER_BOUND - oracle).abs() <= 1e-13);
    for k in 1..10_000 {
        let a = 2.0 + (oracle - 2.0) * k as f64 / 10_000.0;
        let r = alpha_check(a);
        assert!(r.admissible);
        assert!(r.theta < 2.0 / 3.0);
        assert!(r.coeff < 1.0);
    }
    assert!(!alpha_check(ALPHA_UPPER_BOUND).admissible);
    assert!(!alpha_check(2.0).admissible);
}

#[test]
fn vacuum_is_a_fixed_point() {
    let g = grid(32);
    let s = State::vacuum(32);
    let params = Params { n_cells: 32, ..Params::default() };
    let next = step(&s, 0.01, &g, &params).unwrap();
    assert!(next.rho.iter().all(|&r| r == 0.0));
    assert!(next.u.iter().all(|&v| v == 0.0));
}

#[test]
fn particles_stay_put_without_flow() {
    let g = grid(64);
    let rho: Vec<f64> = g.centers.iter().map(|x| (1.0 - (x / 2.0).powi(2)).max(0.0).powi(4)).collect();
    let s = state_from(rho, vec![0.0; 63]);
    let ps = seed_particles(&s, &g, 1.0, 20);
    let moved = advect_particles(&ps, &s, &g, 0.05, 1.0);
    assert_eq!(ps.positions, moved.positions);
}
