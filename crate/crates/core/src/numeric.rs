//! Small numerical kernels: compensated summation, adaptive Gauss–Kronrod
//! quadrature, Gauss–Legendre rules and monotone root bracketing.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `x^r` for `x >= 0`, with exact fast paths for the common orders.
#[inline]
pub fn pow_r(x: f64, r: f64) -> f64 {
    if r == 1.0 {
        x
    } else if r == 2.0 {
        x * x
    } else if r == 4.0 {
        let s = x * x;
        s * s
    } else {
        x.powf(r)
    }
}

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total
/// estimate falls below `max(abs_tol, rel_tol * |value|)`. A non-finite
/// integrand value makes the result non-finite.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, converged: true };
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let value: NeumaierSum = parts.iter().map(|p| p.2).collect();
        let value = value.value();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Quadrature { value, error: f64::INFINITY, converged: false };
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Quadrature { value, error, converged: true };
        }
        if parts.len() >= MAX_INTERVALS {
            return Quadrature { value, error, converged: false };
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // cannot subdivide further in floating point
            return Quadrature { value, error, converged: false };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over `[a, b]` split at the given interior points.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    let mut knots: Vec<f64> = splits.iter().copied().filter(|&s| s > a && s < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.insert(0, a);
    knots.push(b);
    let pieces = (knots.len() - 1) as f64;
    let mut total = NeumaierSum::default();
    let mut error = 0.0;
    let mut converged = true;
    for w in knots.windows(2) {
        let q = integrate(&mut f, w[0], w[1], abs_tol / pieces, rel_tol);
        total.add(q.value);
        error += q.error;
        converged &= q.converged;
    }
    Quadrature { value: total.value(), error, converged }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Smallest `x` in `[lo, hi]` (to within `tol`) with `pred(x)` true, for a
/// predicate that is monotone false→true. Returns `None` when `pred(hi)` is false.
pub fn bisect_threshold<P: FnMut(f64) -> bool>(
    mut pred: P,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Option<f64> {
    if !pred(hi) {
        return None;
    }
    if pred(lo) {
        return Some(lo);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
