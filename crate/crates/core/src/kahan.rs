//! Kahan-compensated summation, used for every integral against a measure so
//! that equality fixtures hold at the 1e-12 level.

/// Compensated scalar accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum
    }
}

/// Compensated vector accumulator (one `KahanSum` per coordinate).
#[derive(Clone, Debug)]
pub(crate) struct KahanVec {
    sums: Vec<KahanSum>,
}

impl KahanVec {
    pub(crate) fn zeros(dim: usize) -> Self {
        Self {
            sums: vec![KahanSum::new(); dim],
        }
    }

    /// Accumulates `scale * v`.
    pub(crate) fn add_scaled(&mut self, v: &[f64], scale: f64) {
        debug_assert_eq!(v.len(), self.sums.len());
        for (s, &x) in self.sums.iter_mut().zip(v) {
            s.add(scale * x);
        }
    }

    pub(crate) fn add_coord(&mut self, i: usize, x: f64) {
        self.sums[i].add(x);
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.sums.into_iter().map(KahanSum::value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        // naive summation loses all 10^4 tail terms; Kahan keeps them
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn vector_accumulator_matches_scalar() {
        let mut kv = KahanVec::zeros(2);
        let mut ks = KahanSum::new();
        for i in 0..100 {
            let x = 0.1 * (i as f64) - 3.0;
            kv.add_scaled(&[x, 0.0], 0.5);
            ks.add(0.5 * x);
        }
        assert_eq!(kv.into_vec()[0], ks.value());
    }
}
