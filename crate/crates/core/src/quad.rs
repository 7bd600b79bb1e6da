//! One-dimensional quadrature: an adaptive Gauss-Kronrod (G7, K15) rule with
//! global interval subdivision, and fixed Gauss-Legendre nodes for composite
//! rules over step-function segments.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Number of subintervals used.
    pub intervals: usize,
}

// 15-point Kronrod abscissae (positive half, descending) and weights,
// with the embedded 7-point Gauss weights.
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
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_95,
    0.417_959_183_673_469_4,
];

/// Single (G7, K15) panel on `[a, b]`: returns the Kronrod value and an error
/// estimate from the Gauss-Kronrod difference.
pub fn gauss_kronrod_panel<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = h * x;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    kronrod *= h;
    gauss *= h;
    let diff = (kronrod - gauss).abs();
    // the usual (200 d)^{3/2} rescaling is conservative for smooth integrands
    let err = if diff == 0.0 { 0.0 } else { diff.min((200.0 * diff).powf(1.5).max(diff * 1e-6)) };
    (kronrod, err)
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
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Default cap on the number of subintervals.
pub const MAX_INTERVALS: usize = 10_000;

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Splits the subinterval with the largest error estimate until the summed
/// error drops below `max(abs_tol, rel_tol * |value|)` or [`MAX_INTERVALS`]
/// is reached. Infinite or NaN panel values are treated as zero-width
/// contributions (the caller restricts integrands to their finite domain).
pub fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, intervals: 0 };
    }
    let (v, e) = gauss_kronrod_panel(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total_value = v;
    let mut total_error = e;
    while total_error > abs_tol.max(rel_tol * total_value.abs()) && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("heap nonempty");
        if worst.b - worst.a < f64::EPSILON * (worst.a.abs() + worst.b.abs()).max(1e-300) {
            // cannot split further; accept its error
            total_error -= worst.error;
            total_value -= worst.value;
            let kept = Segment { error: 0.0, ..worst };
            total_value += kept.value;
            heap.push(kept);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gauss_kronrod_panel(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_panel(f, mid, worst.b);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    QuadResult { value: total_value, error: total_error, intervals: heap.len() }
}

/// Gauss-Legendre 8-point abscissae on (-1, 1), symmetric.
pub const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
/// Gauss-Legendre 8-point weights matching [`GL8_X`].
pub const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Fixed 8-point Gauss-Legendre rule on `[a, b]`.
pub fn gl8<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Nodes and weights of the composite 8-point rule on `[a, b]`, appended to
/// `out` as `(node, weight)` pairs.
pub fn gl8_nodes(a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
        out.push((c + h * x, w * h));
    }
}

/// Tensor Gauss-Legendre nodes of arbitrary order on `[0, 1]`, computed by
/// Newton iteration on Legendre polynomials. Used by the smooth 2d/4d
/// integrals where adaptive nesting would be wasteful.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // roots of P_n via Newton from Chebyshev initial guesses
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w)); // map to [0,1], ascending later
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn adaptive_polynomial_exact() {
        let r = adaptive(&|x: f64| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 1e-12);
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        // Int_0^1 ln(y) dy = -1
        let r = adaptive(&|y: f64| if y > 0.0 { y.ln() } else { 0.0 }, 0.0, 1.0, 1e-10, 1e-10);
        assert_abs_diff_eq!(r.value, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn adaptive_oscillatory() {
        // Int_0^{2pi} cos(13 x) dx = 0, Int_0^1 e^x = e - 1
        let r = adaptive(&|x: f64| (13.0 * x).cos(), 0.0, 2.0 * std::f64::consts::PI, 1e-12, 0.0);
        assert!(r.value.abs() < 1e-10);
        let r = adaptive(&f64::exp, 0.0, 1.0, 1e-13, 1e-13);
        assert_abs_diff_eq!(r.value, std::f64::consts::E - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_moment_identity() {
        // Int_0^1 -y^k ln y dy = (k+1)^{-2}
        for &k in &[0.0, 0.4, 1.0, 5.0] {
            let r = adaptive(&|y: f64| -y.powf(k) * y.ln(), 0.0, 1.0, 1e-12, 1e-12);
            assert_abs_diff_eq!(r.value, (k + 1.0f64).powi(-2), epsilon = 1e-10);
        }
    }

    #[test]
    fn gl8_degree() {
        // exact for polynomials up to degree 15
        let f = |x: f64| x.powi(15) - 3.0 * x.powi(7) + x;
        let exact = 1.0 / 16.0 - 3.0 / 8.0 + 0.5;
        assert_abs_diff_eq!(gl8(&f, 0.0, 1.0), exact, epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_nodes_integrate() {
        for n in [4, 16, 33, 64] {
            let nodes = gauss_legendre(n);
            let s: f64 = nodes.iter().map(|(_, w)| w).sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-13);
            let v: f64 = nodes.iter().map(|(x, w)| w * x * x).sum();
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
        }
    }
}
