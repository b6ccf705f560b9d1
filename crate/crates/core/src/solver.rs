//! The q,omega-Dirac system
//!
//! ```text
//! -(1/q) D_{1/q,-omega/q} y2 + p(t) y1 = lambda y1
//!              D_{q,omega} y1 + r(t) y2 = lambda y2
//! ```
//!
//! solved on the lattice `t_k = h^k(x)` by successive approximation of its
//! Volterra form
//!
//! ```text
//! y1(t) = c1 +     int_{omega0}^t (lambda - r(s)) y2(s) ds
//! y2(t) = c2 + q * int_{omega0}^t (p(h(s)) - lambda) y1(h(s)) ds
//! ```
//!
//! Every Jackson-Norlund integral up to a lattice point collapses to a sum
//! over the deeper lattice points, so the iteration never leaves the grid.
//! The sums are truncated at depth `K` and the remainder below `t_K` is
//! taken with the integrand frozen at `t_K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::hahn::{q_pochhammer, HahnParams, LatticeGrid, DEFAULT_SERIES_TOL};
use crate::sum::CompensatedSum;
use crate::trig::{cos_qw, sin_qw};

/// Default Picard tolerance.
pub const DEFAULT_PICARD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Cap on the number of majorant terms reported by [`convergence_bound`].
const MAX_BOUND_TERMS: usize = 200;

/// The potentials `p` and `r`.
#[derive(Debug, Clone)]
pub struct Potentials {
    pub p: RealFunction,
    pub r: RealFunction,
}

impl Potentials {
    pub fn new(p: RealFunction, r: RealFunction) -> Self {
        Self { p, r }
    }

    pub fn zero() -> Self {
        Self::constant(0.0, 0.0)
    }

    pub fn constant(p0: f64, r0: f64) -> Self {
        Self::new(RealFunction::constant(p0), RealFunction::constant(r0))
    }

    /// `(sup |p|, sup |r|)` over the given points.
    pub fn sup_on(&self, points: &[f64]) -> Result<(f64, f64)> {
        let mut sp = 0.0f64;
        let mut sr = 0.0f64;
        for &t in points {
            let (pv, rv) = (self.p.eval(t), self.r.eval(t));
            if !(pv.is_finite() && rv.is_finite()) {
                return Err(Error::InvalidParameter(format!("potential is not finite at t = {t}")));
            }
            sp = sp.max(pv.abs());
            sr = sr.max(rv.abs());
        }
        Ok((sp, sr))
    }
}

/// `[[phi11, phi21], [phi12, phi22]]` with
/// `phi1 = (C(t, lambda), -sqrt(q) S(t, sqrt(q) lambda))` and
/// `phi2 = (S(t, lambda), C(t, sqrt(q) lambda))`.
pub fn fundamental_pair(t: f64, lambda: f64, params: &HahnParams, tol: f64) -> Result<[[f64; 2]; 2]> {
    let sq = params.q().sqrt();
    let c = cos_qw(t, lambda, params, tol)?.value;
    let s = sin_qw(t, lambda, params, tol)?.value;
    let c_half = cos_qw(t, sq * lambda, params, tol)?.value;
    let s_half = sin_qw(t, sq * lambda, params, tol)?.value;
    Ok([[c, s], [-sq * s_half, c_half]])
}

/// The free solution `c1 phi1 + c2 phi2` at `t`.
pub fn solve_free(c1: f64, c2: f64, t: f64, lambda: f64, params: &HahnParams) -> Result<(f64, f64)> {
    let m = fundamental_pair(t, lambda, params, DEFAULT_SERIES_TOL)?;
    Ok((c1 * m[0][0] + c2 * m[0][1], c1 * m[1][0] + c2 * m[1][1]))
}

/// Which fixed-point equation the successive approximations iterate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardForm {
    /// The compact Volterra system above.
    #[default]
    Volterra,
    /// Variation of constants around the free fundamental pair; the
    /// potentials enter only through the kernel. Kept for cross-checks.
    VariationOfConstants,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Lattice depth; `None` uses [`HahnParams::default_depth`].
    pub depth: Option<usize>,
    pub form: PicardForm,
    pub series_tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_PICARD_TOL,
            max_iter: DEFAULT_MAX_ITER,
            depth: None,
            form: PicardForm::Volterra,
            series_tol: DEFAULT_SERIES_TOL,
        }
    }
}

impl PicardOptions {
    pub fn with_tol(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            ..Self::default()
        }
    }
}

/// A solution sampled on the lattice of its anchor.
///
/// Values are stored as `y - c` (the integral parts), which keeps
/// difference quotients near `omega0` free of cancellation against the
/// initial data.
#[derive(Debug, Clone)]
pub struct VectorSolution {
    pub lambda: f64,
    pub initial: (f64, f64),
    pub grid: LatticeGrid,
    pub potentials: Potentials,
    pub iterations: usize,
    pub final_delta: f64,
    /// Largest system residual over the interior grid points.
    pub max_residual: f64,
    int1: Vec<f64>,
    int2: Vec<f64>,
}

impl VectorSolution {
    pub fn len(&self) -> usize {
        self.int1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.int1.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn y1(&self, k: usize) -> f64 {
        self.initial.0 + self.int1[k]
    }

    pub fn y2(&self, k: usize) -> f64 {
        self.initial.1 + self.int2[k]
    }

    /// `y1 - c1` at node `k`.
    pub fn int1(&self, k: usize) -> f64 {
        self.int1[k]
    }

    /// `y2 - c2` at node `k`.
    pub fn int2(&self, k: usize) -> f64 {
        self.int2[k]
    }

    pub fn y1_values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.y1(k)).collect()
    }

    pub fn y2_values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.y2(k)).collect()
    }

    /// Value at a lattice point, or the initial data at `omega0`.
    pub fn at(&self, t: f64, params: &HahnParams) -> Option<(f64, f64)> {
        if params.is_fixed_point(t) {
            return Some(self.initial);
        }
        self.grid.index_of(t).map(|k| (self.y1(k), self.y2(k)))
    }

    /// `sup_k max(|y1|, |y2|)`.
    pub fn sup_norm(&self) -> f64 {
        (0..self.len())
            .map(|k| self.y1(k).abs().max(self.y2(k).abs()))
            .fold(self.initial.0.abs().max(self.initial.1.abs()), f64::max)
    }

    /// `int_{omega0}^{t_from} (y1^2 + y2^2)` over the solution's own lattice.
    pub fn squared_norm(&self, from: usize) -> f64 {
        self.inner_product_with(self, from)
    }

    /// `int_{omega0}^{t_from} (y1 z1 + y2 z2)`; both solutions must share
    /// the lattice.
    pub fn inner_product_with(&self, other: &VectorSolution, from: usize) -> f64 {
        let values: Vec<f64> = (0..self.len())
            .map(|k| self.y1(k) * other.y1(k) + self.y2(k) * other.y2(k))
            .collect();
        self.grid.integrate(&values, from)
    }

    fn node(&self, t: f64) -> Result<usize> {
        self.grid
            .index_of(t)
            .ok_or_else(|| Error::InvalidParameter(format!("t = {t} is not a point of the solution lattice")))
    }
}

/// Majorant data for the successive approximations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub radius_ok: bool,
    /// Bound on `|psi_{m+1} - psi_m|` for `m = 1, 2, ...`, per unit initial
    /// data `|c1| + |c2| = 1`.
    pub bound_terms: Vec<f64>,
    pub sup_p: f64,
    pub sup_r: f64,
    pub sup_phi: f64,
    /// `max(sup |p|, sup |r|)`.
    pub a_const: f64,
    /// `2 sup |phi_ij|^2`.
    pub b_const: f64,
    /// `A B (1 - q) |x - omega0|`; the radius condition is `ratio < 1`.
    pub ratio: f64,
}

/// Sup norms, the majorant sequence and the radius condition for the
/// successive approximations on `[omega0, x]`.
pub fn convergence_bound(pot: &Potentials, lambda: f64, x: f64, params: &HahnParams) -> Result<ConvergenceReport> {
    let grid = LatticeGrid::with_default_depth(params, x)?;
    let (sup_p, sup_r) = pot.sup_on(grid.points())?;
    let mut sup_phi = 0.0f64;
    for &t in grid.points() {
        let m = fundamental_pair(t, lambda, params, DEFAULT_SERIES_TOL)?;
        for v in m.iter().flatten() {
            sup_phi = sup_phi.max(v.abs());
        }
    }
    // phi(omega0) is the identity
    sup_phi = sup_phi.max(1.0);
    let a_const = sup_p.max(sup_r);
    let b_const = 2.0 * sup_phi * sup_phi;
    let q = params.q();
    let span = (x - params.omega0()).abs();
    let ratio = a_const * b_const * (1.0 - q) * span;
    let k_const = (b_const / 2.0).sqrt();

    // K/2 (-1;q)_{m+1} (A B (x(1-q) - omega))^m / (q;q)_m
    let base = a_const * b_const * (1.0 - q) * span;
    let mut bound_terms = Vec::new();
    let mut minus_one = 2.0; // (-1;q)_1
    let mut peak = 0.0f64;
    for m in 1..=MAX_BOUND_TERMS {
        minus_one *= 1.0 + q.powi(m as i32);
        let term = 0.5 * k_const * minus_one * base.powi(m as i32) / q_pochhammer(q, m as u32);
        if !term.is_finite() {
            break;
        }
        bound_terms.push(term);
        peak = peak.max(term);
        let past_peak = term < peak;
        if term == 0.0 || (past_peak && term < 1e-17 * peak) {
            break;
        }
    }
    Ok(ConvergenceReport {
        radius_ok: ratio < 1.0,
        bound_terms,
        sup_p,
        sup_r,
        sup_phi,
        a_const,
        b_const,
        ratio,
    })
}

/// Successive approximations with the default options.
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    pot: &Potentials,
    c1: f64,
    c2: f64,
    lambda: f64,
    x: f64,
    params: &HahnParams,
    tol: f64,
    max_iter: usize,
) -> Result<VectorSolution> {
    picard_solve_with(pot, c1, c2, lambda, x, params, &PicardOptions::with_tol(tol, max_iter))
}

/// Successive approximations on the lattice of `x`, starting from the free
/// solution, until the sup-norm change drops below
/// `tol (1 + sup |y|)` and the system residual is within
/// `10 tol (1 + |lambda| + A)(1 + sup |y|)`.
pub fn picard_solve_with(
    pot: &Potentials,
    c1: f64,
    c2: f64,
    lambda: f64,
    x: f64,
    params: &HahnParams,
    opts: &PicardOptions,
) -> Result<VectorSolution> {
    if !(opts.tol > 0.0) || opts.max_iter < 1 {
        return Err(Error::InvalidParameter(format!(
            "Picard needs tol > 0 and max_iter >= 1, got {} and {}",
            opts.tol, opts.max_iter
        )));
    }
    if !(x > params.omega0()) || params.is_fixed_point(x) {
        return Err(Error::InvalidParameter(format!(
            "solution endpoint {x} must exceed omega0 = {}",
            params.omega0()
        )));
    }
    if ![c1, c2, lambda].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("initial data and lambda must be finite".into()));
    }
    let depth = opts.depth.unwrap_or_else(|| params.default_depth());
    let grid = LatticeGrid::new(params, x, depth)?;
    let n = grid.len();
    let last = n - 1;
    let q = params.q();
    let pts = grid.points().to_vec();
    let weights: Vec<f64> = (0..n).map(|k| grid.weight(k)).collect();

    let (sup_p, sup_r) = pot.sup_on(&pts)?;
    let a_pot = sup_p.max(sup_r);
    // lambda - r(s) at s = t_i, and q (p(h(s)) - lambda) with h(t_i) = t_{i+1}
    let r_coef: Vec<f64> = pts.iter().map(|&t| lambda - pot.r.eval(t)).collect();
    let p_coef: Vec<f64> = (0..n)
        .map(|i| q * (pot.p.eval(pts[(i + 1).min(last)]) - lambda))
        .collect();

    // free fundamental pair on the grid, including the shifted node
    let phi: Vec<[[f64; 2]; 2]> = pts
        .iter()
        .map(|&t| fundamental_pair(t, lambda, params, opts.series_tol))
        .collect::<Result<_>>()?;
    let free1: Vec<f64> = phi.iter().map(|m| c1 * m[0][0] + c2 * m[0][1] - c1).collect();
    let free2: Vec<f64> = phi.iter().map(|m| c1 * m[1][0] + c2 * m[1][1] - c2).collect();

    let mut int1 = free1.clone();
    let mut int2 = free2.clone();
    let mut next1 = vec![0.0; n];
    let mut next2 = vec![0.0; n];
    let mut delta = f64::INFINITY;

    for sweep in 1..=opts.max_iter {
        match opts.form {
            PicardForm::Volterra => {
                let mut s1 = CompensatedSum::new();
                let mut s2 = CompensatedSum::new();
                for i in (0..n).rev() {
                    let y1_shift = c1 + int1[(i + 1).min(last)];
                    let y2_here = c2 + int2[i];
                    s1.add(weights[i] * r_coef[i] * y2_here);
                    s2.add(weights[i] * p_coef[i] * y1_shift);
                    next1[i] = s1.value();
                    next2[i] = s2.value();
                }
            }
            PicardForm::VariationOfConstants => {
                // psi = psi_free + phi2(t) G1(t) - phi1(t) G2(t), where the
                // kernels pair phi at h(s) with p and phi at s with r.
                let mut g1 = CompensatedSum::new();
                let mut g2 = CompensatedSum::new();
                for i in (0..n).rev() {
                    let sh = (i + 1).min(last);
                    let u = q * pot.p.eval(pts[sh]) * (c1 + int1[sh]);
                    let v = pot.r.eval(pts[i]) * (c2 + int2[i]);
                    g1.add(weights[i] * (phi[sh][0][0] * u + phi[i][1][0] * v));
                    g2.add(weights[i] * (phi[sh][0][1] * u + phi[i][1][1] * v));
                    let (a, b) = (g1.value(), g2.value());
                    next1[i] = free1[i] + phi[i][0][1] * a - phi[i][0][0] * b;
                    next2[i] = free2[i] + phi[i][1][1] * a - phi[i][1][0] * b;
                }
            }
        }

        delta = 0.0f64;
        let mut sup_y = c1.abs().max(c2.abs());
        for k in 0..n {
            delta = delta.max((next1[k] - int1[k]).abs()).max((next2[k] - int2[k]).abs());
            sup_y = sup_y.max((c1 + next1[k]).abs()).max((c2 + next2[k]).abs());
        }
        std::mem::swap(&mut int1, &mut next1);
        std::mem::swap(&mut int2, &mut next2);
        if !delta.is_finite() {
            break;
        }

        if delta < opts.tol * (1.0 + sup_y) {
            let residuals = lattice_residuals(&int1, &int2, c1, c2, grid.offsets(), &r_coef, &p_coef, params);
            let max_residual = residuals.iter().fold(0.0f64, |m, &(a, b)| m.max(a.abs()).max(b.abs()));
            let base = 10.0 * (opts.tol + 64.0 * f64::EPSILON) * (1.0 + lambda.abs() + a_pot) * (1.0 + sup_y);
            // the variation-of-constants iterate carries the full solution's
            // rounding, which the difference quotients amplify near omega
            let stored = match opts.form {
                PicardForm::Volterra => 0.0,
                PicardForm::VariationOfConstants => sup_y,
            };
            let offs = grid.offsets();
            let within = residuals.iter().enumerate().all(|(idx, &(a, b))| {
                let j = idx + 1;
                let spacing = (offs[j] - offs[j - 1]).abs().min((offs[j + 1] - offs[j]).abs());
                let scale = stored
                    + int1[j - 1].abs().max(int1[j].abs()).max(int1[j + 1].abs())
                    + int2[j - 1].abs().max(int2[j].abs());
                let allowed = base + 64.0 * f64::EPSILON * scale / spacing;
                a.abs() <= allowed && b.abs() <= allowed
            });
            if within {
                return Ok(VectorSolution {
                    lambda,
                    initial: (c1, c2),
                    grid,
                    potentials: pot.clone(),
                    iterations: sweep,
                    final_delta: delta,
                    max_residual,
                    int1,
                    int2,
                });
            }
        }
    }
    let report = convergence_bound(pot, lambda, x, params)?;
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        final_delta: delta,
        report: Box::new(report),
    })
}

/// Residuals of both equations at the interior nodes `1..K-1`, from the
/// stored integral parts.
#[allow(clippy::too_many_arguments)]
fn lattice_residuals(
    int1: &[f64],
    int2: &[f64],
    c1: f64,
    c2: f64,
    offsets: &[f64],
    r_coef: &[f64],
    p_coef: &[f64],
    params: &HahnParams,
) -> Vec<(f64, f64)> {
    let q = params.q();
    let n = offsets.len();
    (1..n.saturating_sub(1))
        .map(|j| {
            // dual derivative of y2 at t_j is the forward quotient at t_{j-1}
            let dual = (int2[j] - int2[j - 1]) / (offsets[j] - offsets[j - 1]);
            // p(t_j) - lambda = p_coef[j-1] / q
            let first = -dual / q + p_coef[j - 1] / q * (c1 + int1[j]);
            let d1 = (int1[j + 1] - int1[j]) / (offsets[j + 1] - offsets[j]);
            let second = d1 - r_coef[j] * (c2 + int2[j]);
            (first, second)
        })
        .collect()
}

/// `W(y, z)(t) = y1(t) z2(h^{-1} t) - z1(t) y2(h^{-1} t)`.
pub fn wronskian(y: &VectorSolution, z: &VectorSolution, t: f64, params: &HahnParams) -> Result<f64> {
    check_shared_grid(y, z)?;
    let j = y.node(t)?;
    if j == 0 {
        return Err(Error::InvalidParameter(format!(
            "h^-1({t}) lies outside the solution lattice"
        )));
    }
    let _ = params;
    Ok(y.y1(j) * z.y2(j - 1) - z.y1(j) * y.y2(j - 1))
}

/// The Wronskian at every node `1..=K`.
pub fn wronskian_profile(y: &VectorSolution, z: &VectorSolution) -> Result<Vec<f64>> {
    check_shared_grid(y, z)?;
    Ok((1..y.len())
        .map(|j| y.y1(j) * z.y2(j - 1) - z.y1(j) * y.y2(j - 1))
        .collect())
}

fn check_shared_grid(y: &VectorSolution, z: &VectorSolution) -> Result<()> {
    if y.grid != z.grid {
        return Err(Error::InvalidParameter("solutions live on different lattices".into()));
    }
    Ok(())
}

/// `(-(1/q) D~ y2 + (p - lambda) y1, D y1 + (r - lambda) y2)` at an interior
/// lattice point, by exact difference quotients.
pub fn residual(y: &VectorSolution, pot: &Potentials, t: f64, params: &HahnParams) -> Result<(f64, f64)> {
    let j = y.node(t)?;
    if j == 0 || j + 1 >= y.len() {
        return Err(Error::InvalidParameter(format!(
            "residual at t = {t} needs both lattice neighbours"
        )));
    }
    let pts = y.points();
    // lattice spacings from the offsets, exact down to omega0
    let d = y.grid.offsets();
    let q = params.q();
    let lambda = y.lambda;
    let dual = (y.int2(j) - y.int2(j - 1)) / (d[j] - d[j - 1]);
    let first = -dual / q + (pot.p.eval(pts[j]) - lambda) * y.y1(j);
    let d1 = (y.int1(j + 1) - y.int1(j)) / (d[j + 1] - d[j]);
    let second = d1 + (pot.r.eval(pts[j]) - lambda) * y.y2(j);
    Ok((first, second))
}

/// Solves anchored at `t` and returns the solution value there.
pub fn solve_at(
    pot: &Potentials,
    c1: f64,
    c2: f64,
    lambda: f64,
    t: f64,
    params: &HahnParams,
    opts: &PicardOptions,
) -> Result<(f64, f64)> {
    if params.is_fixed_point(t) {
        return Ok((c1, c2));
    }
    let sol = picard_solve_with(pot, c1, c2, lambda, t, params, opts)?;
    Ok((sol.y1(0), sol.y2(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Polynomial;
    use proptest::prelude::*;

    fn params() -> HahnParams {
        HahnParams::new(0.5, 0.5).unwrap()
    }

    #[test]
    fn fundamental_pair_at_fixed_point_and_zero_lambda() {
        let p = params();
        assert_eq!(fundamental_pair(1.0, 3.7, &p, 1e-12).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
        for t in [1.5, 2.0, 3.0] {
            assert_eq!(fundamental_pair(t, 0.0, &p, 1e-12).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
        }
        assert_eq!(solve_free(1.0, 0.0, 1.0, 2.0, &p).unwrap(), (1.0, 0.0));
        assert_eq!(solve_free(0.0, 1.0, 1.0, 2.0, &p).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn free_problem_converges_in_one_sweep() {
        let p = params();
        let sol = picard_solve(&Potentials::zero(), 0.7, -0.3, 2.5, 3.0, &p, 1e-10, 50).unwrap();
        assert_eq!(sol.iterations, 1);
        for (k, &t) in sol.points().iter().enumerate() {
            let (f1, f2) = solve_free(0.7, -0.3, t, 2.5, &p).unwrap();
            assert!((sol.y1(k) - f1).abs() < 1e-12 && (sol.y2(k) - f2).abs() < 1e-12);
        }
        assert_eq!(sol.at(1.0, &p), Some((0.7, -0.3)));
    }

    #[test]
    fn zero_integrand_fixed_point() {
        let p = params();
        // r = lambda kills the first integrand
        let pot = Potentials::constant(0.4, 1.25);
        let sol = picard_solve(&pot, 2.0, 0.0, 1.25, 3.0, &p, 1e-12, 100).unwrap();
        for k in 0..sol.len() {
            assert_eq!(sol.y1(k), 2.0);
        }
        // p = r = lambda kills both
        let pot = Potentials::constant(1.25, 1.25);
        let sol = picard_solve(&pot, 2.0, 0.0, 1.25, 3.0, &p, 1e-12, 100).unwrap();
        for k in 0..sol.len() {
            assert_eq!((sol.y1(k), sol.y2(k)), (2.0, 0.0));
        }
    }

    #[test]
    fn constant_solution_of_free_system() {
        let p = params();
        let sol = picard_solve(&Potentials::zero(), 1.0, 0.0, 0.0, 3.0, &p, 1e-12, 10).unwrap();
        for &t in &sol.points()[1..sol.len() - 1] {
            assert_eq!(residual(&sol, &Potentials::zero(), t, &p).unwrap(), (0.0, 0.0));
        }
    }

    #[test]
    fn residual_of_free_solution_is_small() {
        let p = params();
        let sol = picard_solve(&Potentials::zero(), 1.0, 0.5, 3.0, 3.0, &p, 1e-12, 10).unwrap();
        for &t in &sol.points()[1..sol.len() - 1] {
            let (a, b) = residual(&sol, &Potentials::zero(), t, &p).unwrap();
            assert!(a.abs() < 1e-9 && b.abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn residual_perturbation_is_linear() {
        let p = params();
        let pot = Potentials::zero();
        let sol = picard_solve(&pot, 1.0, 0.0, 1.0, 3.0, &p, 1e-12, 10).unwrap();
        let j = 5;
        let t = sol.points()[j];
        let (_, before) = residual(&sol, &pot, t, &p).unwrap();
        let eps = 1e-3;
        let mut bumped = sol.clone();
        bumped.int1[j] += eps;
        let (_, after) = residual(&bumped, &pot, t, &p).unwrap();
        let expected = -eps / ((p.q() - 1.0) * t + p.omega());
        assert!(
            ((after - before) - expected).abs() < 1e-9 * expected.abs(),
            "{} {}",
            after - before,
            expected
        );
    }

    #[test]
    fn free_wronskian_is_one() {
        let p = params();
        let pot = Potentials::zero();
        for lambda in [-2.0, 0.3, 4.0] {
            let y = picard_solve(&pot, 1.0, 0.0, lambda, 3.0, &p, 1e-12, 10).unwrap();
            let z = picard_solve(&pot, 0.0, 1.0, lambda, 3.0, &p, 1e-12, 10).unwrap();
            for w in wronskian_profile(&y, &z).unwrap() {
                assert!((w - 1.0).abs() < 1e-9, "{w}");
            }
            assert_eq!(wronskian(&y, &y, y.points()[3], &p).unwrap(), 0.0);
            assert!(wronskian(&y, &z, y.points()[0], &p).is_err());
        }
    }

    #[test]
    fn forms_agree() {
        let p = HahnParams::new(0.7, 0.3).unwrap();
        let pot = Potentials::new(
            Polynomial::new(vec![0.3, -0.2]).into(),
            Polynomial::new(vec![-0.4, 0.0, 0.1]).into(),
        );
        let x = p.omega0() + 1.5;
        let volterra = picard_solve(&pot, 0.4, 1.1, 1.7, x, &p, 1e-13, 200).unwrap();
        let opts = PicardOptions {
            tol: 1e-13,
            max_iter: 200,
            form: PicardForm::VariationOfConstants,
            ..PicardOptions::default()
        };
        let voc = picard_solve_with(&pot, 0.4, 1.1, 1.7, x, &p, &opts).unwrap();
        for k in 0..volterra.len() {
            assert!((volterra.y1(k) - voc.y1(k)).abs() < 1e-10, "k={k}");
            assert!((volterra.y2(k) - voc.y2(k)).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn bound_for_zero_potential() {
        let p = params();
        let report = convergence_bound(&Potentials::zero(), 2.0, 3.0, &p).unwrap();
        assert_eq!(report.a_const, 0.0);
        assert!(report.bound_terms.iter().all(|&t| t == 0.0));
        assert!(report.radius_ok);
    }

    #[test]
    fn bound_radius_violated_for_large_potential() {
        let p = params();
        let report = convergence_bound(&Potentials::constant(50.0, 0.0), 0.5, 3.0, &p).unwrap();
        assert!(report.ratio > 1.0 && !report.radius_ok);
        let small = convergence_bound(&Potentials::constant(0.01, 0.0), 0.5, 1.5, &p).unwrap();
        assert!(small.radius_ok);
        let t = &small.bound_terms;
        assert!(t.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_input() {
        let p = params();
        let pot = Potentials::zero();
        assert!(picard_solve(&pot, 1.0, 0.0, 1.0, 0.5, &p, 1e-10, 10).is_err());
        assert!(picard_solve(&pot, 1.0, 0.0, 1.0, 3.0, &p, 0.0, 10).is_err());
        assert!(picard_solve(&pot, 1.0, 0.0, 1.0, 3.0, &p, 1e-10, 0).is_err());
    }

    #[test]
    fn no_convergence_reports_bound() {
        let p = params();
        let pot = Potentials::constant(40.0, -30.0);
        match picard_solve(&pot, 1.0, 0.0, 0.0, 3.0, &p, 1e-14, 2) {
            Err(Error::NoConvergence { iterations, report, .. }) => {
                assert_eq!(iterations, 2);
                assert!(!report.radius_ok);
            }
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn linear_in_initial_data(c in prop::array::uniform4(-2.0f64..2.0), al in -2.0f64..2.0, be in -2.0f64..2.0, lambda in -3.0f64..3.0) {
            let p = params();
            let pot = Potentials::new(Polynomial::new(vec![0.5, -0.25]).into(), RealFunction::constant(-0.3));
            let opts = PicardOptions::with_tol(1e-13, 200);
            let y = picard_solve_with(&pot, c[0], c[1], lambda, 3.0, &p, &opts).unwrap();
            let z = picard_solve_with(&pot, c[2], c[3], lambda, 3.0, &p, &opts).unwrap();
            let w = picard_solve_with(&pot, al * c[0] + be * c[2], al * c[1] + be * c[3], lambda, 3.0, &p, &opts).unwrap();
            let scale = 1.0 + y.sup_norm() * al.abs() + z.sup_norm() * be.abs();
            for k in 0..w.len() {
                prop_assert!((w.y1(k) - al * y.y1(k) - be * z.y1(k)).abs() <= 1e-10 * scale);
                prop_assert!((w.y2(k) - al * y.y2(k) - be * z.y2(k)).abs() <= 1e-10 * scale);
            }
        }
    }
}
