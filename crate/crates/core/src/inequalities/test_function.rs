use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of trigonometric terms of a random Fourier profile.
pub const FOURIER_TERMS: usize = 4;

/// Smooth, decaying profiles with analytic derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `exp(-x^2)`.
    Gaussian,
    /// `exp(-1/(1 - x^2))` on `|x| < 1`.
    Bump,
    /// `h(x/lambda)`.
    Dilated(Box<TestFunction>, f64),
    /// `c h(x)`.
    Scaled(Box<TestFunction>, f64),
    /// `exp(-x^2/2) (c + sum a_k cos(w_k x) + b_k sin(w_k x))`.
    RandomFourier {
        seed: u64,
        constant: f64,
        terms: Vec<(f64, f64, f64)>,
    },
    /// `(1 + x^2)^(-s/2) exp(-eps x^2)`.
    PowerCutoff { s: f64, eps: f64 },
}

impl TestFunction {
    pub fn random_fourier(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constant = rng.gen_range(-1.0..1.0);
        let terms = (0..FOURIER_TERMS)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.2..3.0),
                )
            })
            .collect();
        TestFunction::RandomFourier { seed, constant, terms }
    }

    pub fn dilated(self, lambda: f64) -> Self {
        TestFunction::Dilated(Box::new(self), lambda)
    }

    pub fn scaled(self, c: f64) -> Self {
        TestFunction::Scaled(Box::new(self), c)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            TestFunction::Gaussian => (-x * x).exp(),
            TestFunction::Bump => {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - x * x)).exp()
                }
            }
            TestFunction::Dilated(h, l) => h.value(x / l),
            TestFunction::Scaled(h, c) => c * h.value(x),
            TestFunction::RandomFourier { constant, terms, .. } => {
                let s: f64 = terms
                    .iter()
                    .map(|(a, b, w)| a * (w * x).cos() + b * (w * x).sin())
                    .sum();
                (-0.5 * x * x).exp() * (constant + s)
            }
            TestFunction::PowerCutoff { s, eps } => {
                (1.0 + x * x).powf(-0.5 * s) * (-eps * x * x).exp()
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            TestFunction::Gaussian => -2.0 * x * (-x * x).exp(),
            TestFunction::Bump => {
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    let q = 1.0 - x * x;
                    -2.0 * x / (q * q) * (-1.0 / q).exp()
                }
            }
            TestFunction::Dilated(h, l) => h.derivative(x / l) / l,
            TestFunction::Scaled(h, c) => c * h.derivative(x),
            TestFunction::RandomFourier { constant, terms, .. } => {
                let e = (-0.5 * x * x).exp();
                let (s, ds) = terms.iter().fold((*constant, 0.0), |(s, ds), (a, b, w)| {
                    let (sn, cs) = (w * x).sin_cos();
                    (s + a * cs + b * sn, ds + w * (b * cs - a * sn))
                });
                e * (ds - x * s)
            }
            TestFunction::PowerCutoff { s, eps } => {
                let v = self.value(x);
                v * (-s * x / (1.0 + x * x) - 2.0 * eps * x)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Gaussian => "gaussian".into(),
            TestFunction::Bump => "bump".into(),
            TestFunction::Dilated(h, l) => format!("dilated({},{l})", h.label()),
            TestFunction::Scaled(h, c) => format!("scaled({},{c})", h.label()),
            TestFunction::RandomFourier { seed, .. } => format!("random_fourier({seed})"),
            TestFunction::PowerCutoff { s, eps } => format!("power_cutoff({s},{eps})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivative(h: &TestFunction) {
        for &x in &[-2.3, -0.7, -0.1, 0.0, 0.35, 0.9, 1.7] {
            let e = 1e-6;
            let fd = (h.value(x + e) - h.value(x - e)) / (2.0 * e);
            let d = h.derivative(x);
            assert!((fd - d).abs() < 1e-7 * (1.0 + d.abs()), "{} at {x}: {fd} vs {d}", h.label());
        }
    }

    #[test]
    fn derivatives_match_differences() {
        check_derivative(&TestFunction::Gaussian);
        check_derivative(&TestFunction::Bump);
        check_derivative(&TestFunction::Gaussian.dilated(2.5));
        check_derivative(&TestFunction::Bump.dilated(3.0).scaled(-2.0));
        check_derivative(&TestFunction::random_fourier(7));
        check_derivative(&TestFunction::PowerCutoff { s: 0.6, eps: 0.01 });
    }

    #[test]
    fn random_fourier_is_seeded() {
        assert_eq!(TestFunction::random_fourier(3), TestFunction::random_fourier(3));
        assert_ne!(TestFunction::random_fourier(3), TestFunction::random_fourier(4));
    }
}
