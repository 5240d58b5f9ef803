//! Compensated floating-point accumulation.

/// Neumaier's variant of Kahan summation.
///
/// The running error term is kept separately so that `value()` is accurate to
/// a few ulps regardless of the number of terms or their ordering, provided the
/// terms share a sign.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// The unevaluated pair `(hi, lo)` with `hi + lo` the exact running sum to
    /// within the accumulated compensation error.
    pub fn parts(&self) -> (f64, f64) {
        let hi = self.sum + self.comp;
        let lo = self.comp - (hi - self.sum);
        (hi, lo)
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
