//! Compensated accumulation.
//!
//! Every series in the crate is accumulated with Neumaier's variant of
//! Kahan summation (an error-free two-sum per term). The accumulator also
//! tracks `sum |term|`, which gives the condition estimate used to flag
//! cancellation in alternating series.

/// Running compensated sum with an absolute-value shadow sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
    terms: usize,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += value.abs();
        self.terms += 1;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// `sum |term|` over everything added so far.
    pub fn abs_total(&self) -> f64 {
        self.abs_sum
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// `sum |term| / |sum term|`; 1 for an empty or all-zero sum, infinite
    /// when nonzero terms cancel to exactly zero.
    pub fn condition(&self) -> f64 {
        let value = self.value().abs();
        if self.abs_sum == 0.0 {
            1.0
        } else if value == 0.0 {
            f64::INFINITY
        } else {
            (self.abs_sum / value).max(1.0)
        }
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
