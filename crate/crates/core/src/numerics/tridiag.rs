//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

/// Real symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    off_sq: Vec<f64>,
    pivmin: f64,
}

impl SymTridiagonal {
    /// # Panics
    /// If `off.len() + 1 != diag.len()` for a non-empty matrix.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            diag.is_empty() && off.is_empty() || off.len() + 1 == diag.len(),
            "off-diagonal length must be n - 1"
        );
        let off_sq: Vec<f64> = off.iter().map(|e| e * e).collect();
        let max_sq = off_sq.iter().copied().fold(1.0_f64, f64::max);
        Self {
            diag,
            off,
            off_sq,
            pivmin: f64::MIN_POSITIVE * max_sq,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off
    }

    /// Number of eigenvalues strictly below `lambda` (negative pivots of the
    /// LDLᵀ factorisation of `T - λI`).
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut q = 0.0_f64;
        for i in 0..self.diag.len() {
            q = if i == 0 {
                self.diag[0] - lambda
            } else {
                self.diag[i] - lambda - self.off_sq[i - 1] / q
            };
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected to full precision.
    pub fn eigenvalue(&self, k: usize) -> Option<f64> {
        if k >= self.len() {
            return None;
        }
        let (g_lo, g_hi) = self.gershgorin();
        let pad = 1e-12 * g_lo.abs().max(g_hi.abs()).max(1.0);
        Some(self.bisect(k, g_lo - pad, g_hi + pad))
    }

    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        // invariant: count_below(lo) <= k < count_below(hi)
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Global indices `k` whose eigenvalues lie in `[lo, hi)`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        self.count_below(lo)..self.count_below(hi)
    }

    /// Eigenvalues with the given global indices, in order.
    pub fn eigenvalues_by_index(&self, indices: std::ops::Range<usize>) -> Vec<f64> {
        let (g_lo, g_hi) = self.gershgorin();
        let pad = 1e-12 * g_lo.abs().max(g_hi.abs()).max(1.0);
        indices
            .map(|k| self.bisect(k, g_lo - pad, g_hi + pad))
            .collect()
    }

    /// All eigenvalues in `[lo, hi)`, ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.eigenvalues_by_index(self.index_range(lo, hi))
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * v[i];
                if i > 0 {
                    y += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * v[i + 1];
                }
                y
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn discrete_laplacian_closed_form() {
        let n = 50;
        let t = laplacian(n);
        for k in 0..n {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k).unwrap() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn window_count_matches_list() {
        let t = laplacian(40);
        let vals = t.eigenvalues_in(0.5, 3.0);
        assert_eq!(vals.len(), t.count_below(3.0) - t.count_below(0.5));
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(vals.iter().all(|&v| (0.5..3.0).contains(&v)));
    }

    #[test]
    fn empty_window() {
        let t = laplacian(10);
        assert!(t.eigenvalues_in(-5.0, -1.0).is_empty());
    }

    #[test]
    fn agrees_with_dense_solver() {
        let diag: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let off: Vec<f64> = (0..11).map(|i| 0.5 + (i as f64 * 1.3).cos()).collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone());
        let mut m = nalgebra::DMatrix::<f64>::zeros(12, 12);
        for i in 0..12 {
            m[(i, i)] = diag[i];
            if i < 11 {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for (k, d) in dense.iter().enumerate() {
            assert!((t.eigenvalue(k).unwrap() - d).abs() < 1e-12);
        }
    }
}
