//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Global subdivision: the interval with the largest error estimate is split
//! until the summed estimate meets `max(abs, rel * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Requested accuracy for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadTolerance {
    pub fn absolute(abs: f64) -> Self {
        Self {
            abs,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let s = f(center - dx) + f(center + dx);
        kron += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTolerance) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrate over consecutive segments `points[0]..points[1]..`; integrand
/// singularities should sit on the breakpoints.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: QuadTolerance,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error) = kronrod(&mut f, a, b);
        evaluations += 15;
        heap.push(Segment { a, b, value, error });
    }
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if !value.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::NAN,
                requested: target,
            });
        }
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        let worst = heap.pop().expect("non-empty segment heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod(&mut f, a, b);
            evaluations += 15;
            heap.push(Segment { a, b, value, error });
        }
    }
}

/// Smooth map of `[0,1]` onto `[a,b]` with vanishing derivative at both ends.
///
/// Composing an integrand with this map turns inverse-square-root or
/// square-root endpoint behaviour into a smooth integrand.
pub fn integrate_endpoint_regular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<QuadResult> {
    let width = b - a;
    integrate(
        |u| {
            let x = a + width * u * u * (3.0 - 2.0 * u);
            let jac = 6.0 * width * u * (1.0 - u);
            if jac == 0.0 {
                0.0
            } else {
                f(x) * jac
            }
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadTolerance::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (10.0 * x).cos(), 0.0, 2.0 * PI, QuadTolerance::default()).unwrap();
        assert!(r.value.abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity_with_regular_map() {
        // ∫_0^1 dx / sqrt(1 - x^2) = π/2
        let r = integrate_endpoint_regular(
            |x| 1.0 / (1.0 - x * x).max(0.0).sqrt(),
            0.0,
            1.0,
            QuadTolerance::default(),
        )
        .unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = QuadTolerance {
            abs: 1e-14,
            rel: 0.0,
            max_intervals: 4,
        };
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
