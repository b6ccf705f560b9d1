//! The q,omega-cosine and sine.
//!
//! Both are power series in the combined argument
//! `z = mu (t (1 - q) - omega) = mu (1 - q) (t - omega0)`:
//!
//! ```text
//! C(z) = sum_n (-1)^n q^{n^2}    z^{2n}   / (q;q)_{2n}
//! S(z) = sum_n (-1)^n q^{n(n+1)} z^{2n+1} / (q;q)_{2n+1}
//! ```
//!
//! Terms are generated by their closed-form ratio, so `z^{2n}` is never
//! formed on its own. For large `z` the terms grow like
//! `q^{-(log_{1/q} z)^2}` before the `q^{n^2}` factor wins, and the
//! alternating sum cancels accordingly; [`TrigEval`] carries the numbers
//! needed to judge how many digits survive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hahn::{HahnParams, DEFAULT_SERIES_TOL};
use crate::roots::{bisect, geometric_grid, linear_grid, Samples};
use crate::sum::CompensatedSum;

const MAX_TRIG_TERMS: usize = 10_000;
/// Geometric scan resolution per factor `1/q` when bracketing zeros.
const ZERO_SCAN_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    #[serde(alias = "cos")]
    Cosine,
    #[serde(alias = "sin")]
    Sine,
}

impl TrigKind {
    pub fn name(&self) -> &'static str {
        match self {
            TrigKind::Cosine => "cos",
            TrigKind::Sine => "sin",
        }
    }
}

/// A series evaluation with its error diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigEval {
    pub value: f64,
    pub terms_used: usize,
    /// `sum |term| / |value|`, with `|value|` floored at the rounding level
    /// `eps * sum |term|`.
    pub cancellation: f64,
    /// Bound on the truncated tail plus accumulated rounding.
    pub est_abs_error: f64,
    /// `sum |term|`.
    pub magnitude: f64,
}

impl TrigEval {
    fn exact(value: f64) -> Self {
        Self {
            value,
            terms_used: 1,
            cancellation: 1.0,
            est_abs_error: 0.0,
            magnitude: value.abs(),
        }
    }
}

/// Cancellation ratio above which an evaluation at tolerance `tol` is
/// rejected with [`Error::PrecisionLoss`].
pub fn precision_loss_threshold(tol: f64) -> f64 {
    1.0 / (16.0 * f64::EPSILON * tol)
}

/// `mu (1 - q) (t - omega0)`; exactly zero at `t = omega0`.
pub fn combined_argument(t: f64, mu: f64, params: &HahnParams) -> f64 {
    mu * ((1.0 - params.q()) * (t - params.omega0()))
}

/// Evaluates the series of `kind` at combined argument `z`.
pub fn trig_series(kind: TrigKind, z: f64, q: f64, tol: f64) -> Result<TrigEval> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "series tolerance must be positive, got {tol}"
        )));
    }
    if z == 0.0 {
        return Ok(TrigEval::exact(match kind {
            TrigKind::Cosine => 1.0,
            TrigKind::Sine => 0.0,
        }));
    }

    let z2 = z * z;
    let q2 = q * q;
    // q^e with e = 2n+1 (cosine) or 2n+2 (sine) for the step n -> n+1
    let (mut term, mut qe) = match kind {
        TrigKind::Cosine => (1.0, q),
        TrigKind::Sine => (z / (1.0 - q), q2),
    };
    let ratio = |qe: f64| -qe * z2 / ((1.0 - qe) * (1.0 - qe * q));

    let mut acc = CompensatedSum::new();
    acc.add(term);
    let mut rounding = 2.0 * term.abs();
    let mut n = 0usize;
    loop {
        let r = ratio(qe);
        let next = term * r;
        if !next.is_finite() {
            return Err(Error::SeriesDivergence { terms: acc.terms() });
        }
        n += 1;
        qe *= q2;
        acc.add(next);
        rounding += (4 * n + 2) as f64 * next.abs();
        term = next;

        // |ratio| decreases in n; once below one the tail is geometric
        let r_next = ratio(qe).abs();
        if r.abs() < 1.0 && next.abs() < tol * acc.value().abs() {
            let tail = next.abs() * r_next / (1.0 - r_next);
            return finish(&acc, tail, rounding, tol);
        }
        if next == 0.0 || acc.terms() >= MAX_TRIG_TERMS {
            if next == 0.0 {
                return finish(&acc, 0.0, rounding, tol);
            }
            return Err(Error::SeriesDivergence { terms: acc.terms() });
        }
    }
}

fn finish(acc: &CompensatedSum, tail: f64, rounding: f64, tol: f64) -> Result<TrigEval> {
    let value = acc.value();
    let magnitude = acc.abs_total();
    let floor = f64::EPSILON * magnitude;
    let cancellation = (magnitude / value.abs().max(floor)).max(1.0);
    let threshold = precision_loss_threshold(tol);
    if cancellation > threshold {
        return Err(Error::PrecisionLoss {
            cancellation,
            threshold,
        });
    }
    Ok(TrigEval {
        value,
        terms_used: acc.terms(),
        cancellation,
        est_abs_error: tail + f64::EPSILON * (rounding + value.abs()),
        magnitude,
    })
}

/// The q,omega-cosine `C_{q,omega}(t, mu)`.
pub fn cos_qw(t: f64, mu: f64, params: &HahnParams, tol: f64) -> Result<TrigEval> {
    trig_series(TrigKind::Cosine, combined_argument(t, mu, params), params.q(), tol)
}

/// The q,omega-sine `S_{q,omega}(t, mu)`.
pub fn sin_qw(t: f64, mu: f64, params: &HahnParams, tol: f64) -> Result<TrigEval> {
    trig_series(TrigKind::Sine, combined_argument(t, mu, params), params.q(), tol)
}

pub fn trig_qw(kind: TrigKind, t: f64, mu: f64, params: &HahnParams, tol: f64) -> Result<TrigEval> {
    trig_series(kind, combined_argument(t, mu, params), params.q(), tol)
}

/// Which asymptotic zero family a located zero sits closest to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroFamily {
    /// Combined argument near `q^{-n}`.
    IntegerPower,
    /// Combined argument near `q^{-n+1/2}`.
    HalfPower,
}

/// A located zero with its bracketing report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub n: usize,
    pub kind: TrigKind,
    /// Zero in the combined argument.
    pub z: f64,
    /// Zero in `t` for `mu = 1`.
    pub t: f64,
    pub bracket_z: (f64, f64),
    pub bracket_t: (f64, f64),
    /// `|function|` at the returned zero.
    pub residual: f64,
    /// Estimated evaluation error at the returned zero.
    pub residual_bound: f64,
    pub seed_integer: f64,
    pub seed_half: f64,
    pub matched: ZeroFamily,
    /// `z / seed_matched - 1`, equal to the relative deviation of the
    /// offset `t - omega0` from its asymptotic value.
    pub rel_dev: f64,
}

/// The `n`-th positive zero of `kind`, in `t` for `mu = 1`.
pub fn trig_zero(n: usize, kind: TrigKind, params: &HahnParams, tol: f64) -> Result<f64> {
    trig_zero_report(n, kind, params, tol).map(|r| r.t)
}

/// Locates the `n`-th positive zero by counting sign changes from `z = 0`
/// on a grid fine enough to separate neighbouring zeros (which are spaced
/// by a factor of about `1/q`), then bisects to relative `tol` in `z`.
/// Both asymptotic candidates `q^{-n}` and `q^{-n+1/2}` are reported and
/// the closer one is recorded as the match.
pub fn trig_zero_report(n: usize, kind: TrigKind, params: &HahnParams, tol: f64) -> Result<ZeroReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("zero index n must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let q = params.q();
    let seed_integer = q.powi(-(n as i32));
    let seed_half = seed_integer * q.sqrt();
    let eval = |z: f64| trig_series(kind, z, q, DEFAULT_SERIES_TOL).map(|e| e.value);

    let z_hi = seed_integer / q.sqrt();
    let geo_start = q;
    let mut grid = linear_grid(0.0, geo_start, 32);
    grid.remove(0);
    grid.pop();
    grid.extend(geometric_grid(geo_start, z_hi, 1.0 / q, ZERO_SCAN_STEPS));
    let samples = Samples::evaluate(&grid, eval)?;
    let brackets = samples.sign_changes();
    let bracket = *brackets
        .get(n - 1)
        .ok_or(Error::ZeroNotBracketed { n, lo: 0.0, hi: z_hi })?;

    let refined = bisect(eval, bracket, tol, 400)?;
    let z = if refined.f_lo.abs() <= refined.f_hi.abs() {
        refined.lo
    } else {
        refined.hi
    };
    let at_root = trig_series(kind, z, q, DEFAULT_SERIES_TOL)?;

    let dev_int = (z / seed_integer).ln().abs();
    let dev_half = (z / seed_half).ln().abs();
    let (matched, seed) = if dev_int <= dev_half {
        (ZeroFamily::IntegerPower, seed_integer)
    } else {
        (ZeroFamily::HalfPower, seed_half)
    };
    let to_t = |z: f64| params.omega0() + z / (1.0 - q);
    Ok(ZeroReport {
        n,
        kind,
        z,
        t: to_t(z),
        bracket_z: (refined.lo, refined.hi),
        bracket_t: (to_t(refined.lo), to_t(refined.hi)),
        residual: at_root.value.abs(),
        residual_bound: at_root.est_abs_error,
        seed_integer,
        seed_half,
        matched,
        rel_dev: z / seed - 1.0,
    })
}
