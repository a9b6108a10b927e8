use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;


/// Scalar function signature accepted by [`FunctionSpec::Scalar`].
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function together with the information needed to evaluate it on a matrix.
#[derive(Clone)]
pub enum FunctionSpec {
    Exp,
    Sqrt,
    InvSqrt,
    Sign,
    /// `(1 - sign(z)) / 2`, i.e. one on the negative half line.
    Heaviside,
    /// `1 / (exp(beta (z - mu)) + 1)`.
    FermiDirac { beta: f64, mu: f64 },
    /// Coefficients in ascending order: `c[0] + c[1] z + ...`.
    Polynomial(Vec<f64>),
    /// `p(z) / q(z)`, both with ascending coefficients.
    Rational { num: Vec<f64>, den: Vec<f64> },
    /// Arbitrary callback. Only usable on symmetric arguments.
    Scalar(ScalarFn),
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Exp => write!(f, "Exp"),
            FunctionSpec::Sqrt => write!(f, "Sqrt"),
            FunctionSpec::InvSqrt => write!(f, "InvSqrt"),
            FunctionSpec::Sign => write!(f, "Sign"),
            FunctionSpec::Heaviside => write!(f, "Heaviside"),
            FunctionSpec::FermiDirac { beta, mu } => {
                write!(f, "FermiDirac {{ beta: {beta}, mu: {mu} }}")
            }
            FunctionSpec::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            FunctionSpec::Rational { num, den } => {
                write!(f, "Rational {{ num: {num:?}, den: {den:?} }}")
            }
            FunctionSpec::Scalar(_) => write!(f, "Scalar(<callback>)"),
        }
    }
}

impl FunctionSpec {
    pub fn fermi_dirac(beta: f64, mu: f64) -> Self {
        FunctionSpec::FermiDirac { beta, mu }
    }

    pub fn polynomial(coeffs: impl Into<Vec<f64>>) -> Self {
        FunctionSpec::Polynomial(coeffs.into())
    }

    /// The monomial `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = alloc::vec![0.0; k + 1];
        c[k] = 1.0;
        FunctionSpec::Polynomial(c)
    }

    pub fn rational(num: impl Into<Vec<f64>>, den: impl Into<Vec<f64>>) -> Self {
        FunctionSpec::Rational {
            num: num.into(),
            den: den.into(),
        }
    }

    pub fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FunctionSpec::Scalar(Arc::new(f))
    }

    /// Evaluates the scalar function. Returns NaN outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Exp => x.exp(),
            FunctionSpec::Sqrt => x.sqrt(),
            FunctionSpec::InvSqrt => 1.0 / x.sqrt(),
            FunctionSpec::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    f64::NAN
                }
            }
            FunctionSpec::Heaviside => {
                if x < 0.0 {
                    1.0
                } else if x > 0.0 {
                    0.0
                } else {
                    f64::NAN
                }
            }
            FunctionSpec::FermiDirac { beta, mu } => fermi_dirac(*beta, *mu, x),
            FunctionSpec::Polynomial(c) => horner(c, x),
            FunctionSpec::Rational { num, den } => horner(num, x) / horner(den, x),
            FunctionSpec::Scalar(f) => f(x),
        }
    }

    /// Degree if the function is a polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            FunctionSpec::Polynomial(c) => Some(c.len().saturating_sub(1)),
            _ => None,
        }
    }
}

fn fermi_dirac(beta: f64, mu: f64, x: f64) -> f64 {
    let t = beta * (x - mu);
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (t.exp() + 1.0)
    }
}

pub(crate) fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}
