//! One-dimensional quadrature used throughout the crate: Gauss–Legendre
//! rules, adaptive Simpson and adaptive Gauss–Kronrod, plus a principal-value
//! integral with symmetric excision.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

/// Values that can be integrated.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn mag(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self { 0.0 }
    fn mag(&self) -> f64 { self.abs() }
}

impl Scalar for C64 {
    fn zero() -> Self { C64::new(0.0, 0.0) }
    fn mag(&self) -> f64 { self.norm() }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize { self.nodes.len() }

    pub fn is_empty(&self) -> bool { self.nodes.is_empty() }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<T: Scalar>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<T: Scalar>(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> T) -> T {
        let h = (b - a) / panels as f64;
        let mut acc = T::zero();
        for p in 0..panels {
            let lo = a + h * p as f64;
            acc = acc + self.integrate(lo, lo + h, &mut f);
        }
        acc
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<T: Scalar>(a: f64, b: f64, tol: f64, mut f: impl FnMut(f64) -> T) -> T {
    if a == b {
        return T::zero();
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar>(
    f: &mut impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
) -> T {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.mag() <= 15.0 * tol {
        return left + right + delta * (1.0 / 15.0);
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Scalar>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).mag())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
/// Stops when the summed error estimate is below `abs_tol` or `rel_tol` of the
/// magnitude of the result.
pub fn gauss_kronrod<T: Scalar>(a: f64, b: f64, abs_tol: f64, rel_tol: f64, mut f: impl FnMut(f64) -> T) -> T {
    if a == b {
        return T::zero();
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut segs = vec![(a, b, v, e)];
    for _ in 0..4000 {
        let (total, err) = segs.iter().fold((T::zero(), 0.0), |(s, e), seg| (s + seg.2, e + seg.3));
        if err <= abs_tol.max(rel_tol * total.mag()) {
            return total;
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, s)| if s.3 > best.1 { (i, s.3) } else { best });
        let (lo, hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    segs.iter().fold(T::zero(), |s, seg| s + seg.2)
}

/// Integral of `f` over [a, ∞) by the substitution x = a + s/(1-s).
pub fn gauss_kronrod_to_inf<T: Scalar>(a: f64, abs_tol: f64, rel_tol: f64, mut f: impl FnMut(f64) -> T) -> T {
    gauss_kronrod(0.0, 1.0, abs_tol, rel_tol, |s| {
        if s >= 1.0 {
            return T::zero();
        }
        let u = 1.0 - s;
        f(a + s / u) * (1.0 / (u * u))
    })
}

/// Principal value of ∫ g(y)/(x - y) dy over the real line.
///
/// The pole is excised symmetrically with half-width `h`, which folds the
/// remaining integral into ∫_h^∞ [g(x-u) - g(x+u)]/u du, and the excision is
/// removed by Richardson extrapolation over h, h/2, h/4.
pub fn principal_value(g: impl Fn(f64) -> f64, x: f64, h: f64, scale: f64, tol: f64) -> f64 {
    let folded = |u: f64| (g(x - u) - g(x + u)) / u;
    // split at a point several scale lengths out so the adaptive rule sees the
    // structure near the pole and the slowly decaying tail separately
    let far = (h * 8.0).max(20.0 * scale);
    let tail = gauss_kronrod_to_inf(far, 0.1 * tol, 1e-13, &folded);
    let near = |hh: f64| gauss_kronrod(hh, far, 0.1 * tol, 1e-13, &folded);
    let i1 = near(h);
    let i2 = near(0.5 * h);
    let i4 = near(0.25 * h);
    // the excised piece is odd in u around the pole, so the error is a series
    // in h, h^3, ...
    let r1 = 2.0 * i2 - i1;
    let r2 = 2.0 * i4 - i2;
    let r = (8.0 * r2 - r1) / 7.0;
    r + tail
}
