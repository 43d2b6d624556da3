//! Gauss-Legendre quadrature on dyadic shells for integrals of the form
//! `int_0^inf x^w f(x) dx` with `f` smooth and nonnegative.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::{Error, Result};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are found by Newton iteration on `P_n` from the Chebyshev
    /// guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

fn rule16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Settings for [`weighted_half_line`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellOptions {
    /// Number of Gauss-Legendre nodes per panel.
    pub order: usize,
    /// Relative tolerance of the panel bisection.
    pub rel_tol: f64,
    pub max_depth: usize,
    /// Shells `[2^k, 2^(k+1)]` are used for `min_exp <= k < max_exp`.
    pub min_exp: i32,
    pub max_exp: i32,
}

impl Default for ShellOptions {
    fn default() -> Self {
        Self {
            order: 16,
            rel_tol: 1e-14,
            max_depth: 20,
            min_exp: -60,
            max_exp: 64,
        }
    }
}

/// Adaptive bisection: a panel is accepted when the rule on the panel and on
/// its two halves agree.
pub fn adaptive(
    rule: &GaussLegendre,
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: usize,
) -> f64 {
    let whole = rule.integrate(f, a, b);
    let abs_tol = (rel_tol * whole.abs()).max(1e-290);
    refine(rule, f, a, b, whole, rel_tol, abs_tol, max_depth)
}

fn refine(
    rule: &GaussLegendre,
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m);
    let right = rule.integrate(f, m, b);
    let split = left + right;
    if depth == 0 || (split - whole).abs() <= (rel_tol * split.abs()).max(abs_tol) {
        return split;
    }
    refine(rule, f, a, m, left, rel_tol, abs_tol, depth - 1)
        + refine(rule, f, m, b, right, rel_tol, abs_tol, depth - 1)
}

/// `int_0^inf x^w f(x) dx` for nonnegative `f`.
///
/// `f0` is `f(0)`; it feeds the closed-form contribution of `[0, 2^min_exp]`.
/// Fails with [`Error::Quadrature`] when the weight is not integrable at the
/// origin or the integrand does not decay across the shell range.
pub fn weighted_half_line(
    name: &str,
    f: &dyn Fn(f64) -> f64,
    w: f64,
    f0: f64,
    opts: &ShellOptions,
) -> Result<f64> {
    let fail = |msg: String| Error::Quadrature {
        integral: name.to_string(),
        msg,
    };
    if !w.is_finite() {
        return Err(fail(format!("weight exponent {w} is not finite")));
    }
    if w <= -1.0 && f0 != 0.0 {
        return Err(fail(format!(
            "|x|^{w} is not integrable at the origin"
        )));
    }
    let owned;
    let rule = if opts.order == 16 {
        rule16()
    } else {
        owned = GaussLegendre::new(opts.order);
        &owned
    };
    let g = |x: f64| x.powf(w) * f(x);
    let shell = |k: i32| {
        let a = 2f64.powi(k);
        adaptive(rule, &g, a, 2.0 * a, opts.rel_tol, opts.max_depth)
    };

    let mut total = 0.0;
    let mut small = 0;
    let mut last_up = 0.0;
    for k in 0.max(opts.min_exp)..opts.max_exp {
        let s = shell(k);
        if !s.is_finite() {
            return Err(fail(format!("non-finite contribution on [2^{k}, 2^{}]", k + 1)));
        }
        total += s;
        last_up = s;
        small = if s <= 1e-18 * total { small + 1 } else { 0 };
        if small >= 2 {
            break;
        }
    }
    if small < 2 && last_up > 1e-14 * total {
        return Err(fail("integrand does not decay at infinity".into()));
    }

    small = 0;
    let mut lowest = opts.min_exp;
    let mut last_down = 0.0;
    for k in (opts.min_exp..0.min(opts.max_exp)).rev() {
        let s = shell(k);
        if !s.is_finite() {
            return Err(fail(format!("non-finite contribution on [2^{k}, 2^{}]", k + 1)));
        }
        total += s;
        last_down = s;
        lowest = k;
        small = if total > 0.0 && s <= 1e-18 * total { small + 1 } else { 0 };
        if small >= 2 {
            break;
        }
    }
    if w > -1.0 {
        total += f0 * 2f64.powi(lowest).powf(w + 1.0) / (w + 1.0);
    } else if small < 2 && last_down > 1e-10 * total {
        return Err(fail("integrand does not decay at the origin".into()));
    }
    Ok(total)
}

/// `int_R |x|^w f(x) dx` for nonnegative `f`.
pub fn weighted_line(
    name: &str,
    f: &dyn Fn(f64) -> f64,
    w: f64,
    opts: &ShellOptions,
) -> Result<f64> {
    let f0 = f(0.0);
    let even = |x: f64| f(x) + f(-x);
    weighted_half_line(name, &even, w, 2.0 * f0, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights_of_small_rules() {
        let r = GaussLegendre::new(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = GaussLegendre::new(3);
        assert!((r.nodes[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.nodes[1], 0.0);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
        let r = GaussLegendre::new(16);
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_on_polynomials() {
        let r = GaussLegendre::new(16);
        let v = r.integrate(&|x| x.powi(31) + x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments() {
        let opts = ShellOptions::default();
        let v = weighted_line("g", &|x: f64| (-x * x).exp(), 0.0, &opts).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-14 * PI.sqrt());
        let v = weighted_line("g", &|x: f64| (-x * x).exp(), 2.0, &opts).unwrap();
        assert!((v - 0.5 * PI.sqrt()).abs() < 1e-14);
        // Gamma(1/4) against int |x|^(-1/2) e^(-x^2) = Gamma(1/4)
        let gamma_quarter = 3.625_609_908_221_908_3;
        let v = weighted_line("g", &|x: f64| (-x * x).exp(), -0.5, &opts).unwrap();
        assert!((v - gamma_quarter).abs() < 1e-12, "{v}");
    }

    #[test]
    fn divergence_is_reported() {
        let opts = ShellOptions::default();
        let e = weighted_line("lhs", &|x: f64| (-x * x).exp(), -1.0, &opts).unwrap_err();
        assert!(e.to_string().contains("lhs"));
        let e = weighted_line("slow", &|x: f64| 1.0 / (1.0 + x * x).sqrt(), 0.0, &opts).unwrap_err();
        assert!(e.to_string().contains("infinity"));
    }

    #[test]
    fn refinement_of_the_panel_rule_agrees() {
        let f = |x: f64| (-x * x).exp() * (1.0 + x.sin().powi(2));
        let a = weighted_line("f", &f, 0.5, &ShellOptions::default()).unwrap();
        let b = weighted_line("f", &f, 0.5, &ShellOptions { order: 32, ..Default::default() }).unwrap();
        assert!((a - b).abs() <= 1e-14 * a);
    }
}
