//! Sign-change scanning and bisection for real roots.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// An interval `[lo, hi]` whose endpoint values have opposite signs, or a
/// degenerate interval at an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Strict sign change, or an exact zero at a degenerate bracket.
    pub fn is_valid(&self) -> bool {
        (self.f_lo < 0.0 && self.f_hi > 0.0)
            || (self.f_lo > 0.0 && self.f_hi < 0.0)
            || (self.lo == self.hi && self.f_lo == 0.0)
    }
}

/// A function sampled on an increasing grid.
#[derive(Debug, Clone, Default)]
pub struct Samples {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl Samples {
    pub fn evaluate<F>(grid: &[f64], mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            x: grid.to_vec(),
            f: values,
        })
    }

    /// Sign changes between consecutive samples, in increasing order.
    /// A sample that is exactly zero yields a degenerate bracket.
    pub fn sign_changes(&self) -> Vec<Bracket> {
        let mut out = Vec::new();
        for i in 0..self.x.len() {
            if self.f[i] == 0.0 {
                out.push(Bracket {
                    lo: self.x[i],
                    hi: self.x[i],
                    f_lo: 0.0,
                    f_hi: 0.0,
                });
                continue;
            }
            if i + 1 < self.x.len() && self.f[i + 1] != 0.0 && (self.f[i] < 0.0) != (self.f[i + 1] < 0.0) {
                out.push(Bracket {
                    lo: self.x[i],
                    hi: self.x[i + 1],
                    f_lo: self.f[i],
                    f_hi: self.f[i + 1],
                });
            }
        }
        out
    }
}

/// Geometric grid from `start` to at least `end` with `steps_per_factor`
/// points per multiplicative factor `factor`.
pub fn geometric_grid(start: f64, end: f64, factor: f64, steps_per_factor: usize) -> Vec<f64> {
    debug_assert!(start > 0.0 && factor > 1.0);
    let ratio = factor.powf(1.0 / steps_per_factor as f64);
    // the small offset keeps an exact power of `factor` from adding a point
    let n = ((end / start).ln() / ratio.ln() - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Uniform grid with `n` intervals on `[start, end]`.
pub fn linear_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| start + (end - start) * k as f64 / n as f64).collect()
}

/// Bisection until `hi - lo <= rel_tol * max(|lo|, |hi|)` (or an exact
/// zero is hit).
pub fn bisect<F>(mut f: F, bracket: Bracket, rel_tol: f64, max_iter: usize) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut b = bracket;
    if b.lo == b.hi {
        return Ok(b);
    }
    for _ in 0..max_iter {
        if b.width() <= rel_tol * b.lo.abs().max(b.hi.abs()) {
            break;
        }
        let mid = b.midpoint();
        if mid <= b.lo || mid >= b.hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Bracket {
                lo: mid,
                hi: mid,
                f_lo: 0.0,
                f_hi: 0.0,
            });
        }
        if (fm < 0.0) == (b.f_lo < 0.0) {
            b.lo = mid;
            b.f_lo = fm;
        } else {
            b.hi = mid;
            b.f_hi = fm;
        }
    }
    Ok(b)
}
