//! Eigenvalues of the boundary-value problem
//!
//! ```text
//! B1(y) = k11 y1(omega0) + k12 y2(omega0)     = 0
//! B2(y) = k21 y1(a)      + k22 y2(h^{-1}(a))  = 0
//! ```
//!
//! for the q,omega-Dirac system. The solution `phi` with
//! `phi(omega0) = (k12, -k11)` satisfies `B1` for every `lambda`, so the
//! eigenvalues are the real zeros of `Delta(lambda) = B2(phi(., lambda))`.
//! All solutions are computed on the lattice anchored at `h^{-1}(a)`, where
//! `a` is node 1 and every eigenfunction shares the same grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hahn::{HahnParams, DEFAULT_SERIES_TOL};
use crate::roots::{bisect, geometric_grid, linear_grid, Bracket, Samples};
use crate::solver::{picard_solve_with, PicardOptions, Potentials, VectorSolution, DEFAULT_MAX_ITER};
use crate::trig::{trig_series, TrigKind};

/// Largest tolerated sum of absolute series terms when evaluating the
/// characteristic function near the top requested eigenvalue.
pub const PRECISION_BUDGET: f64 = 1e12;
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Picard tolerance used for every characteristic-function evaluation.
const DELTA_PICARD_TOL: f64 = 1e-13;
const DEDUP_TOL: f64 = 1e-8;
/// Relative disagreement between full- and half-step derivative estimates
/// beyond which the finite difference is rejected.
const HALF_STEP_TOL: f64 = 1e-3;
const NOISE_FACTOR: f64 = 16.0 * f64::EPSILON;
const PREFIX_STEPS: usize = 16;
const DENSE_STEPS_PER_ROOT: usize = 400;

/// Coefficients of the two boundary conditions and the right endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub k11: f64,
    pub k12: f64,
    pub k21: f64,
    pub k22: f64,
    pub a: f64,
}

impl BoundarySpec {
    pub fn new(k11: f64, k12: f64, k21: f64, k22: f64, a: f64, params: &HahnParams) -> Result<Self> {
        let bc = Self { k11, k12, k21, k22, a };
        bc.validate(params)?;
        Ok(bc)
    }

    pub fn validate(&self, params: &HahnParams) -> Result<()> {
        if ![self.k11, self.k12, self.k21, self.k22, self.a]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter("boundary data must be finite".into()));
        }
        if self.k11 == 0.0 && self.k12 == 0.0 {
            return Err(Error::InvalidParameter("k11 and k12 cannot both vanish".into()));
        }
        if self.k21 == 0.0 && self.k22 == 0.0 {
            return Err(Error::InvalidParameter("k21 and k22 cannot both vanish".into()));
        }
        if !(self.a > params.omega0()) || params.is_fixed_point(self.a) {
            return Err(Error::InvalidParameter(format!(
                "endpoint a = {} must exceed omega0 = {}",
                self.a,
                params.omega0()
            )));
        }
        Ok(())
    }

    /// Boundary rows of a built-in zero-potential example on `[omega0, a]`.
    pub fn for_example(example: FreeExample, a: f64, params: &HahnParams) -> Result<Self> {
        match example {
            // y1(omega0) = 0, y2(h^{-1}(a)) = 0
            FreeExample::Cosine => Self::new(1.0, 0.0, 0.0, 1.0, a, params),
            // y2(omega0) = 0, y2(h^{-1}(a)) = 0
            FreeExample::Sine => Self::new(0.0, 1.0, 0.0, 1.0, a, params),
        }
    }

    /// `h^{-1}(a)`, the anchor of every solution lattice.
    pub fn anchor(&self, params: &HahnParams) -> f64 {
        params.h_inv(self.a)
    }
}

/// The two built-in zero-potential problems, named after the function whose
/// zeros give the spectrum: `Delta` is a multiple of `C(h^{-1}(a), sqrt(q) lambda)`
/// or of `S(h^{-1}(a), sqrt(q) lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeExample {
    Cosine,
    Sine,
}

impl FreeExample {
    /// Exponent offset `e` in the leading term `q^{-n+e} / ((1-q)(a-omega0))`.
    fn offset(self) -> f64 {
        match self {
            FreeExample::Cosine => 1.0,
            FreeExample::Sine => 0.5,
        }
    }
}

/// Leading asymptotic term of the `n`-th eigenvalue of a built-in example.
pub fn asymptotic_eigenvalue(n: usize, example: FreeExample, params: &HahnParams, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("eigenvalue index n must be >= 1".into()));
    }
    if !(a > params.omega0()) {
        return Err(Error::InvalidParameter(format!(
            "endpoint a = {a} must exceed omega0 = {}",
            params.omega0()
        )));
    }
    Ok(seed(n, example.offset(), params, a))
}

fn seed(n: usize, offset: f64, params: &HahnParams, a: f64) -> f64 {
    let q = params.q();
    q.powf(-(n as f64) + offset) / ((1.0 - q) * (a - params.omega0()))
}

/// Which asymptotic family seeds the scan, read off the zero pattern of the
/// boundary coefficients for zero potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "offset")]
pub enum SeedFamily {
    /// Seeds `q^{-n+offset} / ((1-q)(a-omega0))`.
    Pure(f64),
    /// No closed pattern; the scan spans the `offset = 1` and `offset = 0`
    /// families.
    Mixed,
}

impl SeedFamily {
    pub fn of(bc: &BoundarySpec) -> Self {
        match (bc.k11 == 0.0, bc.k12 == 0.0, bc.k21 == 0.0, bc.k22 == 0.0) {
            (_, true, true, _) => SeedFamily::Pure(1.0),
            (true, _, true, _) => SeedFamily::Pure(0.5),
            (_, true, _, true) => SeedFamily::Pure(0.0),
            (true, _, _, true) => SeedFamily::Pure(0.5),
            _ => SeedFamily::Mixed,
        }
    }

    fn lower(self, n: usize, params: &HahnParams, a: f64) -> f64 {
        match self {
            SeedFamily::Pure(e) => seed(n, e, params, a),
            SeedFamily::Mixed => seed(n, 1.0, params, a),
        }
    }

    fn upper(self, n: usize, params: &HahnParams, a: f64) -> f64 {
        match self {
            SeedFamily::Pure(e) => seed(n, e, params, a),
            SeedFamily::Mixed => seed(n, 0.0, params, a),
        }
    }

    fn asymptotic(self, n: usize, params: &HahnParams, a: f64) -> Option<f64> {
        match self {
            SeedFamily::Pure(e) => Some(seed(n, e, params, a)),
            SeedFamily::Mixed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub series_tol: f64,
    pub picard_tol: f64,
    pub root_tol: f64,
    pub max_iter: usize,
    /// Also scan `lambda < 0`.
    pub scan_negative: bool,
    /// Evaluate the norm identity at every located eigenvalue.
    pub norm_identity: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            series_tol: DEFAULT_SERIES_TOL,
            picard_tol: crate::solver::DEFAULT_PICARD_TOL,
            root_tol: DEFAULT_ROOT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            scan_negative: false,
            norm_identity: true,
        }
    }
}

impl SpectrumOptions {
    fn picard(&self) -> PicardOptions {
        PicardOptions {
            tol: self.picard_tol.min(DELTA_PICARD_TOL),
            max_iter: self.max_iter,
            depth: None,
            form: Default::default(),
            series_tol: self.series_tol,
        }
    }
}

/// One located eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub n: usize,
    pub lambda: f64,
    pub bracket: (f64, f64),
    pub delta_residual: f64,
    /// `(B1, B2)` of the eigenfunction.
    pub bc_residual: (f64, f64),
    /// Central-difference `Delta'(lambda)`.
    pub derivative: f64,
    /// Estimated rounding level of `Delta` near `lambda`.
    pub noise_floor: f64,
    pub simple: bool,
    pub asym_seed: Option<f64>,
    pub rel_dev_from_asym: Option<f64>,
    pub norm_identity_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDefect {
    pub i: usize,
    pub j: usize,
    pub defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Located eigenvalues and their diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Eigenpair>,
    /// `lambda = 0` when `Delta(0)` vanishes to rounding; not counted in `n`.
    pub trivial_root: Option<f64>,
    /// Negative eigenvalues, closest to zero first (only when requested).
    pub negative_eigenvalues: Vec<Eigenpair>,
    /// Parity of `Delta` detected on the scanned window.
    pub symmetry: Option<Parity>,
    pub pair_orthogonality: Vec<PairDefect>,
    pub seed_family: SeedFamily,
    pub scan_window: (f64, f64),
    pub scan_points: usize,
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }
}

/// `phi(., lambda)` with `phi(omega0) = (k12, -k11)` on the lattice of
/// `h^{-1}(a)`.
pub fn phi_solution(
    lambda: f64,
    bc: &BoundarySpec,
    pot: &Potentials,
    params: &HahnParams,
    tol: f64,
) -> Result<VectorSolution> {
    let opts = PicardOptions {
        tol,
        ..PicardOptions::default()
    };
    phi_solution_with(lambda, bc, pot, params, &opts)
}

pub fn phi_solution_with(
    lambda: f64,
    bc: &BoundarySpec,
    pot: &Potentials,
    params: &HahnParams,
    opts: &PicardOptions,
) -> Result<VectorSolution> {
    bc.validate(params)?;
    picard_solve_with(pot, bc.k12, -bc.k11, lambda, bc.anchor(params), params, opts)
}

/// `Delta(lambda) = k21 phi1(a) + k22 phi2(h^{-1}(a))`.
pub fn characteristic(lambda: f64, bc: &BoundarySpec, pot: &Potentials, params: &HahnParams, tol: f64) -> Result<f64> {
    let sol = phi_solution(lambda, bc, pot, params, tol)?;
    Ok(delta_of(&sol, bc))
}

fn delta_of(sol: &VectorSolution, bc: &BoundarySpec) -> f64 {
    bc.k21 * sol.y1(1) + bc.k22 * sol.y2(0)
}

/// `Delta` together with its rounding level.
#[derive(Debug, Clone)]
struct DeltaEval {
    value: f64,
    noise: f64,
}

struct Problem<'a> {
    bc: &'a BoundarySpec,
    pot: &'a Potentials,
    params: &'a HahnParams,
    picard: PicardOptions,
}

impl Problem<'_> {
    fn solve(&self, lambda: f64) -> Result<VectorSolution> {
        phi_solution_with(lambda, self.bc, self.pot, self.params, &self.picard)
    }

    fn eval(&self, lambda: f64) -> Result<DeltaEval> {
        let sol = self.solve(lambda)?;
        let value = delta_of(&sol, self.bc);
        Ok(DeltaEval {
            value,
            noise: self.noise(&sol, lambda)?,
        })
    }

    /// `16 eps (|k21| + |k22|) max(sup |phi|, series magnitude)` plus the
    /// last Picard change.
    fn noise(&self, sol: &VectorSolution, lambda: f64) -> Result<f64> {
        let k = self.bc.k21.abs() + self.bc.k22.abs();
        let magnitude = series_magnitude(lambda, self.bc, self.params)?;
        Ok(k * (NOISE_FACTOR * sol.sup_norm().max(magnitude) + sol.final_delta))
    }
}

/// Largest combined argument entering `Delta` at `lambda`.
fn top_argument(lambda: f64, bc: &BoundarySpec, params: &HahnParams) -> f64 {
    let q = params.q();
    let base = lambda.abs() * (1.0 - q) * (bc.a - params.omega0());
    if bc.k22 != 0.0 {
        base / q.sqrt()
    } else {
        base
    }
}

/// Sum of absolute series terms behind `Delta(lambda)`.
fn series_magnitude(lambda: f64, bc: &BoundarySpec, params: &HahnParams) -> Result<f64> {
    let z = top_argument(lambda, bc, params);
    let c = trig_series(TrigKind::Cosine, z, params.q(), DEFAULT_SERIES_TOL)?;
    let s = trig_series(TrigKind::Sine, z, params.q(), DEFAULT_SERIES_TOL)?;
    Ok(c.magnitude.max(s.magnitude))
}

/// Checks that eigenvalues up to index `n_max` are resolvable in 64-bit
/// arithmetic; returns the series magnitude at the top seed.
pub fn precision_budget(n_max: usize, bc: &BoundarySpec, params: &HahnParams) -> Result<f64> {
    let family = SeedFamily::of(bc);
    let mut top = 0.0;
    for n in 1..=n_max {
        let magnitude = series_magnitude(family.upper(n, params, bc.a), bc, params)?;
        if magnitude > PRECISION_BUDGET {
            return Err(Error::PrecisionBudgetExceeded {
                n,
                magnitude,
                budget: PRECISION_BUDGET,
            });
        }
        top = magnitude;
    }
    Ok(top)
}

/// Locates the first `n_max` positive eigenvalues.
pub fn find_eigenvalues(
    n_max: usize,
    bc: &BoundarySpec,
    pot: &Potentials,
    params: &HahnParams,
    tol: f64,
) -> Result<SpectrumResult> {
    let opts = SpectrumOptions {
        root_tol: tol,
        ..SpectrumOptions::default()
    };
    find_eigenvalues_with(n_max, bc, pot, params, &opts)
}

pub fn find_eigenvalues_with(
    n_max: usize,
    bc: &BoundarySpec,
    pot: &Potentials,
    params: &HahnParams,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    if !(opts.root_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "root tolerance must be positive, got {}",
            opts.root_tol
        )));
    }
    bc.validate(params)?;
    precision_budget(n_max, bc, params)?;

    let problem = Problem {
        bc,
        pot,
        params,
        picard: opts.picard(),
    };
    let family = SeedFamily::of(bc);
    let q = params.q();
    let anchor_grid = crate::hahn::LatticeGrid::with_default_depth(params, bc.anchor(params))?;
    let (sp, sr) = pot.sup_on(anchor_grid.points())?;
    let perturbed = sp.max(sr) > 0.0;

    let widen = if perturbed { q.powf(0.25) } else { 1.0 };
    let lo = family.lower(1, params, bc.a) * q * widen;
    let hi = family.upper(n_max, params, bc.a) / q / widen;

    let mut warnings = Vec::new();
    let at_zero = problem.eval(0.0)?;
    let trivial_root = (at_zero.value.abs() <= at_zero.noise).then_some(0.0);

    let scan = |sign: f64| -> Result<Side> {
        let mut grid = if trivial_root.is_some() {
            linear_grid(lo / PREFIX_STEPS as f64, lo, PREFIX_STEPS - 1)
        } else {
            linear_grid(0.0, lo, PREFIX_STEPS)
        };
        grid.pop();
        grid.extend(geometric_grid(lo, hi, 1.0 / q, 4));
        let mut side = Side::sample(&problem, &grid, sign)?;
        if side.brackets.len() < n_max {
            let dense = linear_grid(grid[0], hi, DENSE_STEPS_PER_ROOT * n_max);
            let escalated = Side::sample(&problem, &dense, sign)?;
            if escalated.brackets.len() > side.brackets.len() {
                side = escalated;
                side.escalated = true;
            }
        }
        Ok(side)
    };

    let positive = scan(1.0)?;
    if positive.escalated {
        warnings.push("coarse scan missed expected sign changes; used the dense linear scan".into());
    }
    if positive.brackets.len() < n_max {
        warnings.push(format!(
            "found {} of {} requested eigenvalues in [{lo:e}, {hi:e}]",
            positive.brackets.len(),
            n_max
        ));
    }

    let mut eigenvalues = refine(&problem, &positive, n_max, 1.0, family, opts, &mut warnings)?;
    let mut negative_eigenvalues = Vec::new();
    if opts.scan_negative {
        let negative = scan(-1.0)?;
        negative_eigenvalues = refine(&problem, &negative, n_max, -1.0, family, opts, &mut warnings)?;
        for e in &mut negative_eigenvalues {
            e.asym_seed = None;
            e.rel_dev_from_asym = None;
        }
    }

    // pairwise orthogonality of the eigenfunctions
    let functions: Vec<VectorSolution> = eigenvalues
        .iter()
        .map(|e| problem.solve(e.lambda))
        .collect::<Result<_>>()?;
    let mut pair_orthogonality = Vec::new();
    for i in 0..functions.len() {
        for j in i + 1..functions.len() {
            pair_orthogonality.push(PairDefect {
                i: eigenvalues[i].n,
                j: eigenvalues[j].n,
                defect: orthogonality_defect(&functions[i], &functions[j], params, bc.a)?,
            });
        }
    }

    if opts.norm_identity {
        for e in &mut eigenvalues {
            match norm_identity_with(e.lambda, bc, pot, params, &problem.picard) {
                Ok(d) => e.norm_identity_defect = Some(d),
                Err(err @ Error::DerivativeStepUnstable { .. }) => warnings.push(err.to_string()),
                Err(err) => return Err(err),
            }
        }
    }

    let symmetry = detect_parity(&problem, &positive)?;

    let result = SpectrumResult {
        eigenvalues,
        trivial_root,
        negative_eigenvalues,
        symmetry,
        pair_orthogonality,
        seed_family: family,
        scan_window: (positive.x[0], hi),
        scan_points: positive.x.len(),
        warnings,
    };

    let cutoff = if positive.brackets.len() >= n_max {
        positive.brackets[n_max - 1].hi
    } else {
        hi
    };
    if let Some(near) = positive.suspicious_dip(cutoff) {
        return Err(Error::MissedRootSuspected {
            near,
            partial: Box::new(result),
        });
    }
    Ok(result)
}

/// `Delta(sign * x)` sampled on a grid of `x > 0`.
struct Side {
    sign: f64,
    x: Vec<f64>,
    f: Vec<f64>,
    noise: Vec<f64>,
    brackets: Vec<Bracket>,
    escalated: bool,
}

impl Side {
    fn sample(problem: &Problem<'_>, grid: &[f64], sign: f64) -> Result<Self> {
        let mut f = Vec::with_capacity(grid.len());
        let mut noise = Vec::with_capacity(grid.len());
        for &x in grid {
            let e = problem.eval(sign * x)?;
            f.push(e.value);
            noise.push(e.noise);
        }
        let samples = Samples { x: grid.to_vec(), f };
        let brackets = samples.sign_changes();
        Ok(Self {
            sign,
            x: samples.x,
            f: samples.f,
            noise,
            brackets,
            escalated: false,
        })
    }

    /// A local minimum of `|Delta|` within 100x its noise floor with no sign
    /// change next to it.
    fn suspicious_dip(&self, cutoff: f64) -> Option<f64> {
        let n = self.x.len();
        for i in 1..n.saturating_sub(1) {
            if self.x[i] > cutoff {
                break;
            }
            let (a, b, c) = (self.f[i - 1], self.f[i], self.f[i + 1]);
            let is_min = b.abs() <= a.abs() && b.abs() <= c.abs();
            let same_sign = b != 0.0 && (a < 0.0) == (b < 0.0) && (b < 0.0) == (c < 0.0) && a != 0.0 && c != 0.0;
            if is_min && same_sign && b.abs() <= 100.0 * self.noise[i] {
                return Some(self.sign * self.x[i]);
            }
        }
        None
    }
}

fn refine(
    problem: &Problem<'_>,
    side: &Side,
    n_max: usize,
    sign: f64,
    family: SeedFamily,
    opts: &SpectrumOptions,
    warnings: &mut Vec<String>,
) -> Result<Vec<Eigenpair>> {
    let mut roots: Vec<(f64, Bracket)> = Vec::new();
    for bracket in side.brackets.iter().take(n_max) {
        let refined = bisect(|x| Ok(problem.eval(sign * x)?.value), *bracket, opts.root_tol, 200)?;
        let x = if refined.f_lo.abs() <= refined.f_hi.abs() {
            refined.lo
        } else {
            refined.hi
        };
        if let Some((prev, _)) = roots.last() {
            if (x - prev).abs() < DEDUP_TOL * (1.0 + x.abs()) {
                warnings.push(format!("merged two roots near lambda = {}", sign * x));
                continue;
            }
        }
        roots.push((x, refined));
    }

    let mut out = Vec::with_capacity(roots.len());
    for (idx, (x, refined)) in roots.into_iter().enumerate() {
        let n = idx + 1;
        let lambda = sign * x;
        let sol = problem.solve(lambda)?;
        let value = delta_of(&sol, problem.bc);
        let noise = problem.noise(&sol, lambda)?;
        let step = finite_step(lambda);
        let plus = problem.eval(lambda + step)?.value;
        let minus = problem.eval(lambda - step)?.value;
        let derivative = (plus - minus) / (2.0 * step);
        let strict = (refined.f_lo < 0.0 && refined.f_hi > 0.0) || (refined.f_lo > 0.0 && refined.f_hi < 0.0);
        let simple = strict && derivative.abs() > 100.0 * noise / step;
        if !simple {
            warnings.push(format!("eigenvalue #{n} at {lambda} failed the simplicity check"));
        }
        let b1 = problem.bc.k11 * sol.initial.0 + problem.bc.k12 * sol.initial.1;
        let asym = family.asymptotic(n, problem.params, problem.bc.a);
        out.push(Eigenpair {
            n,
            lambda,
            bracket: if sign > 0.0 {
                (refined.lo, refined.hi)
            } else {
                (-refined.hi, -refined.lo)
            },
            delta_residual: value.abs(),
            bc_residual: (b1, value),
            derivative,
            noise_floor: noise,
            simple,
            asym_seed: asym,
            rel_dev_from_asym: asym.map(|s| lambda / s - 1.0),
            norm_identity_defect: None,
        });
    }
    Ok(out)
}

/// `delta = max(1e-6, 1e-6 |lambda|)`.
pub fn finite_step(lambda: f64) -> f64 {
    1e-6f64.max(1e-6 * lambda.abs())
}

fn detect_parity(problem: &Problem<'_>, side: &Side) -> Result<Option<Parity>> {
    // probe where |Delta| stands farthest above its noise
    let mut idx: Vec<usize> = (0..side.x.len()).filter(|&i| side.x[i] > 0.0).collect();
    idx.sort_by(|&i, &j| {
        let ri = side.f[i].abs() / side.noise[i].max(f64::MIN_POSITIVE);
        let rj = side.f[j].abs() / side.noise[j].max(f64::MIN_POSITIVE);
        rj.total_cmp(&ri)
    });
    let mut even = true;
    let mut odd = true;
    for &i in idx.iter().take(3) {
        let mirrored = problem.eval(-side.x[i])?;
        let tol = 100.0 * (side.noise[i] + mirrored.noise);
        even &= (mirrored.value - side.f[i]).abs() <= tol;
        odd &= (mirrored.value + side.f[i]).abs() <= tol;
    }
    Ok(match (even, odd) {
        (true, false) => Some(Parity::Even),
        (false, true) => Some(Parity::Odd),
        _ => None,
    })
}

/// `<y, z> / (|y| |z|)` over `[omega0, a]`; both solutions must live on a
/// lattice containing `a`.
pub fn orthogonality_defect(y: &VectorSolution, z: &VectorSolution, params: &HahnParams, a: f64) -> Result<f64> {
    if y.grid != z.grid {
        return Err(Error::InvalidParameter("solutions live on different lattices".into()));
    }
    let _ = params;
    let from = y
        .grid
        .index_of(a)
        .ok_or_else(|| Error::InvalidParameter(format!("a = {a} is not a point of the solution lattice")))?;
    let norm = (y.squared_norm(from) * z.squared_norm(from)).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("cannot normalize a zero solution".into()));
    }
    Ok(y.inner_product_with(z, from) / norm)
}

/// Relative disagreement in the identity
///
/// ```text
/// phi2(h^{-1} a) d/dlambda phi1(a) - phi1(a) d/dlambda phi2(h^{-1} a)
///     = int_{omega0}^{a} (phi1^2 + phi2^2)
/// ```
///
/// with the `lambda`-derivatives taken by central differences.
pub fn norm_identity_defect(
    lambda: f64,
    bc: &BoundarySpec,
    pot: &Potentials,
    params: &HahnParams,
    tol: f64,
) -> Result<f64> {
    let opts = PicardOptions {
        tol: tol.min(DELTA_PICARD_TOL),
        ..PicardOptions::default()
    };
    norm_identity_with(lambda, bc, pot, params, &opts)
}

fn norm_identity_with(
    lambda: f64,
    bc: &BoundarySpec,
    pot: &Potentials,
    params: &HahnParams,
    opts: &PicardOptions,
) -> Result<f64> {
    let solve = |l: f64| phi_solution_with(l, bc, pot, params, opts);
    let centre = solve(lambda)?;
    let bracket = |step: f64| -> Result<f64> {
        let plus = solve(lambda + step)?;
        let minus = solve(lambda - step)?;
        let d1 = (plus.y1(1) - minus.y1(1)) / (2.0 * step);
        let d2 = (plus.y2(0) - minus.y2(0)) / (2.0 * step);
        Ok(centre.y2(0) * d1 - centre.y1(1) * d2)
    };
    let step = finite_step(lambda);
    let full = bracket(step)?;
    let half = bracket(0.5 * step)?;
    if (full - half).abs() > HALF_STEP_TOL * full.abs().max(half.abs()) {
        return Err(Error::DerivativeStepUnstable { lambda, full, half });
    }
    let rhs = centre.squared_norm(1);
    Ok((full - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE))
}

/// Relative defect in the Green identity
/// `(l1 - l2) int_{omega0}^{a} y.z = [y1(t) z2(h^{-1} t) - y2(h^{-1} t) z1(t)]_{omega0}^{a}`
/// for two solutions on a common lattice with `a` at node 1.
pub fn green_identity_defect(y: &VectorSolution, z: &VectorSolution) -> Result<f64> {
    if y.grid != z.grid {
        return Err(Error::InvalidParameter("solutions live on different lattices".into()));
    }
    if y.len() < 2 {
        return Err(Error::InvalidParameter("lattice too short".into()));
    }
    let dl = y.lambda - z.lambda;
    let lhs = dl * y.inner_product_with(z, 1);
    let at_a = y.y1(1) * z.y2(0) - y.y2(0) * z.y1(1);
    let at_fixed = y.initial.0 * z.initial.1 - y.initial.1 * z.initial.0;
    let rhs = at_a - at_fixed;
    let scale = dl.abs() * (y.squared_norm(1) * z.squared_norm(1)).sqrt();
    Ok((lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Polynomial;
    use crate::solver::solve_free;
    use crate::trig::{trig_zero_report, TrigKind};
    use std::f64::consts::PI;

    fn params() -> HahnParams {
        HahnParams::new(0.5, 0.5).unwrap()
    }

    #[test]
    fn boundary_validation() {
        let p = params();
        assert!(BoundarySpec::new(0.0, 0.0, 1.0, 0.0, PI, &p).is_err());
        assert!(BoundarySpec::new(1.0, 0.0, 0.0, 0.0, PI, &p).is_err());
        assert!(BoundarySpec::new(1.0, 0.0, 0.0, 1.0, 0.9, &p).is_err());
        assert!(BoundarySpec::new(1.0, 0.0, 0.0, 1.0, PI, &p).is_ok());
    }

    #[test]
    fn phi_initial_data() {
        let p = params();
        let bc = BoundarySpec::new(1.0, 0.0, 0.0, 1.0, PI, &p).unwrap();
        let sol = phi_solution(2.0, &bc, &Potentials::zero(), &p, 1e-12).unwrap();
        assert_eq!(sol.initial, (0.0, -1.0));
        assert_eq!(sol.at(p.omega0(), &p), Some((0.0, -1.0)));
        // phi = -(S(t, l), C(t, sqrt(q) l))
        for (k, &t) in sol.points().iter().enumerate() {
            let (s, c) = solve_free(0.0, 1.0, t, 2.0, &p).unwrap();
            assert!((sol.y1(k) + s).abs() < 1e-11 && (sol.y2(k) + c).abs() < 1e-11);
        }
    }

    #[test]
    fn characteristic_matches_closed_forms() {
        let p = params();
        let sq = p.q().sqrt();
        let anchor = p.h_inv(PI);
        let cos_bc = BoundarySpec::for_example(FreeExample::Cosine, PI, &p).unwrap();
        let sin_bc = BoundarySpec::for_example(FreeExample::Sine, PI, &p).unwrap();
        for lambda in [0.3, 1.1, 2.7] {
            let d = characteristic(lambda, &cos_bc, &Potentials::zero(), &p, 1e-12).unwrap();
            let c = crate::trig::cos_qw(anchor, sq * lambda, &p, 1e-14).unwrap().value;
            assert!((d + c).abs() < 1e-10 * (1.0 + c.abs()), "{d} vs {c}");
            let d = characteristic(lambda, &sin_bc, &Potentials::zero(), &p, 1e-12).unwrap();
            let s = crate::trig::sin_qw(anchor, sq * lambda, &p, 1e-14).unwrap().value;
            assert!((d + sq * s).abs() < 1e-10 * (1.0 + s.abs()), "{d} vs {s}");
        }
        assert_eq!(
            characteristic(0.0, &sin_bc, &Potentials::zero(), &p, 1e-12).unwrap(),
            0.0
        );
    }

    #[test]
    fn asymptotic_seeds() {
        let p = params();
        let l1 = asymptotic_eigenvalue(1, FreeExample::Cosine, &p, PI).unwrap();
        assert!((l1 - 1.0 / (0.5 * (PI - 1.0))).abs() < 1e-15);
        assert!((l1 - 0.933_884_413_848_52).abs() < 1e-12);
        let l2 = asymptotic_eigenvalue(2, FreeExample::Cosine, &p, PI).unwrap();
        assert!((l2 / l1 - 2.0).abs() < 1e-15);
        let s1 = asymptotic_eigenvalue(1, FreeExample::Sine, &p, PI).unwrap();
        assert!((s1 / l1 - 2f64.sqrt()).abs() < 1e-15);
        assert!(asymptotic_eigenvalue(0, FreeExample::Sine, &p, PI).is_err());
    }

    #[test]
    fn cosine_example_spectrum() {
        let p = params();
        let bc = BoundarySpec::for_example(FreeExample::Cosine, PI, &p).unwrap();
        let res = find_eigenvalues(4, &bc, &Potentials::zero(), &p, 1e-10).unwrap();
        assert_eq!(res.eigenvalues.len(), 4);
        assert_eq!(res.trivial_root, None);
        assert_eq!(res.symmetry, Some(Parity::Even));
        let scale = p.q().sqrt() / ((1.0 - p.q()) * (PI - p.omega0()));
        let zq = HahnParams::new(0.5, 1.0).unwrap();
        for e in &res.eigenvalues {
            let z = trig_zero_report(e.n, TrigKind::Cosine, &zq, 1e-14).unwrap().z;
            assert!((e.lambda / (z * scale) - 1.0).abs() < 1e-9, "n={} {}", e.n, e.lambda);
            assert!(e.simple);
            assert!(e.norm_identity_defect.unwrap() < 1e-5);
        }
        assert_eq!(res.pair_orthogonality.len(), 6);
        for d in &res.pair_orthogonality {
            assert!(d.defect.abs() < 1e-6, "{d:?}");
        }
        assert!(res.lambdas().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sine_example_has_trivial_root() {
        let p = params();
        let bc = BoundarySpec::for_example(FreeExample::Sine, PI, &p).unwrap();
        let res = find_eigenvalues(3, &bc, &Potentials::zero(), &p, 1e-10).unwrap();
        assert_eq!(res.trivial_root, Some(0.0));
        assert_eq!(res.symmetry, Some(Parity::Odd));
        assert_eq!(res.eigenvalues.len(), 3);
        assert!(res.eigenvalues[0].lambda > 0.5);
    }

    #[test]
    fn dirichlet_type_matches_sine_zeros() {
        // y1(omega0) = 0, y1(a) = 0: Delta = -S(a, lambda)
        let p = params();
        let bc = BoundarySpec::new(1.0, 0.0, 1.0, 0.0, PI, &p).unwrap();
        let res = find_eigenvalues(3, &bc, &Potentials::zero(), &p, 1e-11).unwrap();
        let zq = HahnParams::new(0.5, 1.0).unwrap();
        let scale = 1.0 / ((1.0 - p.q()) * (PI - p.omega0()));
        for e in &res.eigenvalues {
            let z = trig_zero_report(e.n, TrigKind::Sine, &zq, 1e-14).unwrap().z;
            assert!((e.lambda / (z * scale) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn budget_caps_index() {
        let p = params();
        let bc = BoundarySpec::for_example(FreeExample::Cosine, PI, &p).unwrap();
        assert!(precision_budget(6, &bc, &p).is_ok());
        assert!(matches!(
            find_eigenvalues(7, &bc, &Potentials::zero(), &p, 1e-10),
            Err(Error::PrecisionBudgetExceeded { n: 7, .. })
        ));
    }

    #[test]
    fn norm_identity_away_from_eigenvalues() {
        let p = params();
        let bc = BoundarySpec::for_example(FreeExample::Cosine, PI, &p).unwrap();
        for lambda in [0.0, 0.4, 1.7] {
            let d = norm_identity_defect(lambda, &bc, &Potentials::zero(), &p, 1e-12).unwrap();
            assert!(d < 1e-5, "lambda={lambda} defect={d}");
        }
    }

    #[test]
    fn green_identity_with_potentials() {
        let p = params();
        let pot = Potentials::new(
            Polynomial::new(vec![0.2, 0.1]).into(),
            Polynomial::new(vec![-0.3]).into(),
        );
        let bc = BoundarySpec::new(0.6, 0.8, 1.0, 0.5, PI, &p).unwrap();
        let y = phi_solution(0.7, &bc, &pot, &p, 1e-13).unwrap();
        let z = phi_solution(2.2, &bc, &pot, &p, 1e-13).unwrap();
        assert!(green_identity_defect(&y, &z).unwrap() < 1e-7);
        assert!((orthogonality_defect(&y, &y, &p, PI).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perturbed_spectrum_is_orthogonal() {
        let p = params();
        let pot = Potentials::new(
            Polynomial::new(vec![0.3, -0.1]).into(),
            Polynomial::new(vec![0.2, 0.0, 0.05]).into(),
        );
        let bc = BoundarySpec::for_example(FreeExample::Cosine, PI, &p).unwrap();
        let res = find_eigenvalues(3, &bc, &pot, &p, 1e-10).unwrap();
        assert_eq!(res.eigenvalues.len(), 3);
        for d in &res.pair_orthogonality {
            assert!(d.defect.abs() < 1e-5, "{d:?}");
        }
    }
}
