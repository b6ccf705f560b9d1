use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A real function of one real variable, optionally carrying the value of
/// its classical derivative at the lattice fixed point.
#[derive(Clone)]
pub struct RealFunction {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    fixed_point_derivative: Option<f64>,
}

impl RealFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            fixed_point_derivative: None,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value).with_fixed_point_derivative(0.0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Declares `f'(omega0)`, used by the Hahn derivative at the fixed point.
    pub fn with_fixed_point_derivative(mut self, value: f64) -> Self {
        self.fixed_point_derivative = Some(value);
        self
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn fixed_point_derivative(&self) -> Option<f64> {
        self.fixed_point_derivative
    }

    /// Pointwise product. The declared fixed-point derivative is dropped.
    pub fn product(&self, other: &RealFunction) -> RealFunction {
        let (f, g) = (self.clone(), other.clone());
        RealFunction::new(move |t| f.eval(t) * g.eval(t))
    }
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction")
            .field("fixed_point_derivative", &self.fixed_point_derivative)
            .finish_non_exhaustive()
    }
}

/// Polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Polynomial { coeffs }
    }

    pub fn product(&self, other: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Polynomial::new(Vec::new());
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }

    /// Sum of `|c_k| |t|^k`, the magnitude scale of an evaluation at `t`.
    pub fn abs_eval(&self, t: f64) -> f64 {
        let t = t.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c.abs())
    }

    /// Wraps the polynomial as a [`RealFunction`] that declares its exact
    /// derivative at `omega0`.
    pub fn to_function(&self, omega0: f64) -> RealFunction {
        let d0 = self.derivative().eval(omega0);
        RealFunction::from(self.clone()).with_fixed_point_derivative(d0)
    }
}

impl From<Polynomial> for RealFunction {
    fn from(p: Polynomial) -> Self {
        RealFunction::new(move |t| p.eval(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 9.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        assert_eq!(p.product(&Polynomial::new(vec![0.0, 1.0])).eval(2.0), 18.0);
        assert_eq!(p.to_function(1.0).fixed_point_derivative(), Some(4.0));
        assert_eq!(Polynomial::new(vec![]).eval(3.0), 0.0);
    }
}
