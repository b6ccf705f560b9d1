//! Hahn quantum calculus on the lattice `h^k(x)`.
//!
//! With `h(t) = q t + omega` and fixed point `omega0 = omega / (1 - q)`,
//! the Hahn difference operator is the divided difference of `f` between
//! `t` and `h(t)`, and the Jackson-Norlund integral is the matching
//! Riemann-type sum over the orbit of the upper limit. All lattice points
//! are computed through their offset from `omega0` (`h^k(t) - omega0 =
//! q^k (t - omega0)`) so the fixed point is represented exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::sum::CompensatedSum;

/// Default relative truncation tolerance for series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
/// Hard cap on Jackson-Norlund series length.
pub const MAX_SERIES_TERMS: usize = 100_000;
/// Lattice depth cap for solution grids.
pub const MAX_GRID_DEPTH: usize = 400;
/// Target for `q^K`, the relative distance of the last grid point to `omega0`.
pub const GRID_DEPTH_RATIO: f64 = 1e-14;

/// Relative agreement required of three consecutive extrapolated quotients
/// when estimating `f'(omega0)` along the lattice.
const FIXED_POINT_LIMIT_TOL: f64 = 1e-8;
const FIXED_POINT_LIMIT_STEPS: usize = 200;
const TRUNCATION_STREAK: usize = 3;

/// The Hahn parameters `(q, omega)` and the derived fixed point `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct HahnParams {
    q: f64,
    omega: f64,
    omega0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    q: f64,
    omega: f64,
}

impl TryFrom<RawParams> for HahnParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        HahnParams::new(raw.q, raw.omega)
    }
}

impl From<HahnParams> for RawParams {
    fn from(p: HahnParams) -> Self {
        RawParams { q: p.q, omega: p.omega }
    }
}

impl HahnParams {
    pub fn new(q: f64, omega: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in the open interval (0,1), got {q}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive and finite, got {omega}"
            )));
        }
        Ok(Self {
            q,
            omega,
            omega0: omega / (1.0 - q),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// `h(t) = q t + omega`.
    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        self.omega0 + self.q * (t - self.omega0)
    }

    /// `h^{-1}(t) = (t - omega) / q`.
    #[inline]
    pub fn h_inv(&self, t: f64) -> f64 {
        self.omega0 + (t - self.omega0) / self.q
    }

    /// Absolute tolerance under which `t` is treated as the fixed point.
    pub fn fixed_point_tol(&self) -> f64 {
        1e-13 * self.omega0.abs().max(1.0)
    }

    pub fn is_fixed_point(&self, t: f64) -> bool {
        (t - self.omega0).abs() <= self.fixed_point_tol()
    }

    /// Lattice depth `K` with `q^K <= 1e-14`, capped at [`MAX_GRID_DEPTH`].
    pub fn default_depth(&self) -> usize {
        let k = (GRID_DEPTH_RATIO.ln() / self.q.ln()).ceil();
        (k as usize).clamp(1, MAX_GRID_DEPTH)
    }
}

/// `[k]_q = (1 - q^k) / (1 - q)`.
pub fn q_bracket(k: u32, q: f64) -> f64 {
    (1.0 - q.powi(k as i32)) / (1.0 - q)
}

/// The q-shifted factorial `(q;q)_k = prod_{j=1..k} (1 - q^j)`.
pub fn q_pochhammer(q: f64, k: u32) -> f64 {
    let mut qj = 1.0;
    let mut acc = 1.0;
    for _ in 0..k {
        qj *= q;
        acc *= 1.0 - qj;
    }
    acc
}

/// `h^k(t)`; negative `k` applies `h^{-1}` `|k|` times.
pub fn h_apply(params: &HahnParams, t: f64, k: i32) -> f64 {
    if k == 0 {
        return t;
    }
    params.omega0 + params.q.powi(k) * (t - params.omega0)
}

/// The orbit `t_k = h^k(anchor)`, `k = 0..=depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGrid {
    anchor: f64,
    q: f64,
    omega0: f64,
    offsets: Vec<f64>,
    points: Vec<f64>,
}

impl LatticeGrid {
    pub fn new(params: &HahnParams, anchor: f64, depth: usize) -> Result<Self> {
        if depth < 1 {
            return Err(Error::InvalidParameter("lattice depth must be >= 1".into()));
        }
        if !anchor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lattice anchor must be finite, got {anchor}"
            )));
        }
        let mut offsets = Vec::with_capacity(depth + 1);
        let mut d = anchor - params.omega0;
        for _ in 0..=depth {
            offsets.push(d);
            d *= params.q;
        }
        let points = offsets.iter().map(|d| params.omega0 + d).collect();
        Ok(Self {
            anchor,
            q: params.q,
            omega0: params.omega0,
            offsets,
            points,
        })
    }

    pub fn with_default_depth(params: &HahnParams, anchor: f64) -> Result<Self> {
        Self::new(params, anchor, params.default_depth())
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn depth(&self) -> usize {
        self.points.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `t_k - omega0`, exact up to one rounding per step.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Jackson-Norlund weight of node `k`: `t_k - t_{k+1}` for interior
    /// nodes, `t_K - omega0` for the last one (constant tail).
    pub fn weight(&self, k: usize) -> f64 {
        if k + 1 < self.points.len() {
            (1.0 - self.q) * self.offsets[k]
        } else {
            self.offsets[k]
        }
    }

    /// Index of a lattice point equal to `t` up to a few ulps.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 4.0 * f64::EPSILON * t.abs().max(self.omega0.abs()).max(1.0);
        self.points.iter().position(|&p| (p - t).abs() <= tol)
    }

    /// Jackson-Norlund sum of lattice samples from node `from` down to the
    /// fixed point, i.e. `int_{omega0}^{t_from} f d_{q,omega}t`.
    pub fn integrate(&self, values: &[f64], from: usize) -> f64 {
        debug_assert_eq!(values.len(), self.points.len());
        let mut acc = CompensatedSum::new();
        for k in (from..self.points.len()).rev() {
            acc.add(self.weight(k) * values[k]);
        }
        acc.value()
    }
}

/// Result of a truncated series together with its condition estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// `sum |term| / |sum term|`.
    pub condition: f64,
}

/// The Hahn difference operator `D_{q,omega} f(t)`.
///
/// Away from `omega0` this is the exact divided difference between `t`
/// and `h(t)`. At the fixed point it is `f'(omega0)`: the declared value
/// if `f` carries one, otherwise the limit of divided differences along
/// the lattice of `omega0 + 1`, accelerated by two Richardson steps.
pub fn hahn_derivative(f: &RealFunction, t: f64, params: &HahnParams) -> Result<f64> {
    if params.is_fixed_point(t) {
        return match f.fixed_point_derivative() {
            Some(d) => Ok(d),
            None => fixed_point_limit(f, params),
        };
    }
    let ht = params.h(t);
    Ok((f.eval(ht) - f.eval(t)) / (ht - t))
}

fn fixed_point_limit(f: &RealFunction, params: &HahnParams) -> Result<f64> {
    let q = params.q;
    let w0 = params.omega0;
    let quotient = |d: f64| {
        let (a, b) = (w0 + d, w0 + q * d);
        let (fa, fb) = (f.eval(a), f.eval(b));
        // value and its rounding level
        (
            (fb - fa) / (b - a),
            4.0 * f64::EPSILON * (fa.abs() + fb.abs()) / (a - b).abs(),
        )
    };

    let mut d = 1.0_f64;
    let (first_q, _) = quotient(d);
    let mut prev_q = first_q;
    let mut prev_r: Option<f64> = None;
    let mut extrapolated: Vec<f64> = Vec::with_capacity(FIXED_POINT_LIMIT_STEPS);
    for _ in 0..FIXED_POINT_LIMIT_STEPS {
        d *= q;
        if w0 + q * d == w0 + d {
            break;
        }
        let (next_q, noise) = quotient(d);
        // Q_k = f'(omega0) + c1 q^k + c2 q^2k + ...; eliminate both terms.
        let r = (next_q - q * prev_q) / (1.0 - q);
        prev_q = next_q;
        let Some(pr) = prev_r.replace(r) else {
            continue;
        };
        extrapolated.push((r - q * q * pr) / (1.0 - q * q));

        if let [.., r0, r1, r2] = extrapolated[..] {
            if !(r0.is_finite() && r1.is_finite() && r2.is_finite()) {
                break;
            }
            let scale = r2.abs().max(1e-3 * first_q.abs()).max(f64::MIN_POSITIVE);
            // the extrapolation amplifies rounding by about 1/(1-q)^2
            let tol = (FIXED_POINT_LIMIT_TOL * scale).max(noise / ((1.0 - q) * (1.0 - q)));
            if (r0 - r1).abs() <= tol && (r1 - r2).abs() <= tol {
                return Ok(r2);
            }
        }
    }
    Err(Error::FixedPointDerivativeUnavailable { t: w0 })
}

/// The dual operator `D_{1/q, -omega/q} f(t) = (D_{q,omega} f)(h^{-1}(t))`.
pub fn dual_derivative(f: &RealFunction, t: f64, params: &HahnParams) -> Result<f64> {
    hahn_derivative(f, params.h_inv(t), params)
}

/// `int_{omega0}^{x} f d_{q,omega}t = (x(1-q) - omega) sum_k q^k f(h^k(x))`.
///
/// The series stops once three consecutive terms fall below `tol` times the
/// accumulated magnitude.
pub fn jn_integral_from_fixed_point(f: &RealFunction, x: f64, params: &HahnParams, tol: f64) -> Result<SeriesSum> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "series tolerance must be positive, got {tol}"
        )));
    }
    let offset = x - params.omega0;
    if offset < -params.fixed_point_tol() {
        return Err(Error::InvalidParameter(format!(
            "integration limit {x} lies below omega0 = {}",
            params.omega0
        )));
    }
    if offset <= 0.0 {
        return Ok(SeriesSum {
            value: 0.0,
            terms: 0,
            condition: 1.0,
        });
    }

    let prefactor = (1.0 - params.q) * offset;
    let mut acc = CompensatedSum::new();
    let mut weight = prefactor;
    let mut d = offset;
    let mut streak = 0;
    for _ in 0..MAX_SERIES_TERMS {
        let term = weight * f.eval(params.omega0 + d);
        if !term.is_finite() {
            return Err(Error::SeriesDivergence { terms: acc.terms() });
        }
        acc.add(term);
        // `<=` so an identically vanishing integrand still terminates
        if term.abs() <= tol * acc.value().abs() {
            streak += 1;
            if streak >= TRUNCATION_STREAK {
                return Ok(SeriesSum {
                    value: acc.value(),
                    terms: acc.terms(),
                    condition: acc.condition(),
                });
            }
        } else {
            streak = 0;
        }
        weight *= params.q;
        d *= params.q;
    }
    Err(Error::SeriesDivergence { terms: acc.terms() })
}

/// The Jackson-Norlund integral `int_a^b f d_{q,omega}t = F(b) - F(a)`.
pub fn jn_integral(f: &RealFunction, a: f64, b: f64, params: &HahnParams, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fb = jn_integral_from_fixed_point(f, b, params, tol)?;
    let fa = jn_integral_from_fixed_point(f, a, params, tol)?;
    Ok(fb.value - fa.value)
}

/// `<f, g> = int_{omega0}^{a} f g d_{q,omega}t` for real-valued functions.
pub fn inner_product(f: &RealFunction, g: &RealFunction, params: &HahnParams, a: f64, tol: f64) -> Result<f64> {
    if !(a > params.omega0) {
        return Err(Error::InvalidParameter(format!(
            "inner product endpoint {a} must exceed omega0 = {}",
            params.omega0
        )));
    }
    jn_integral(&f.product(g), params.omega0, a, params, tol)
}

/// Inner product of two-component functions, `int y^T z d_{q,omega}t`.
pub fn vector_inner_product(
    y: &[RealFunction; 2],
    z: &[RealFunction; 2],
    params: &HahnParams,
    a: f64,
    tol: f64,
) -> Result<f64> {
    Ok(inner_product(&y[0], &z[0], params, a, tol)? + inner_product(&y[1], &z[1], params, a, tol)?)
}
