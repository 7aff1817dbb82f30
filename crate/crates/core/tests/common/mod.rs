//! Adaptive Gauss-Kronrod quadrature used as an independent oracle.

#![allow(dead_code)]

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

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integral of `f` over `[a, b]` to absolute-or-relative tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..5000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol * total.abs().max(tol) {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// Integral of `f` over `(0, ∞)` through `y = exp(u / (1 - u²))`.
pub fn integrate_positive(mut f: impl FnMut(f64) -> f64, tol: f64) -> f64 {
    integrate(
        |u| {
            let d = 1.0 - u * u;
            let t = u / d;
            let y = t.exp();
            if !y.is_finite() || y == 0.0 {
                return 0.0;
            }
            let v = f(y) * y * (1.0 + u * u) / (d * d);
            if v.is_finite() { v } else { 0.0 }
        },
        -1.0,
        1.0,
        tol,
    )
}

/// Integral of `f` over `(lo, ∞)` through `y = lo · exp(v / (1 - v))`.
pub fn integrate_above(mut f: impl FnMut(f64) -> f64, lo: f64, tol: f64) -> f64 {
    integrate(
        |v| {
            let d = 1.0 - v;
            let y = lo * (v / d).exp();
            if !y.is_finite() {
                return 0.0;
            }
            let w = f(y) * y / (d * d);
            if w.is_finite() { w } else { 0.0 }
        },
        0.0,
        1.0,
        tol,
    )
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
