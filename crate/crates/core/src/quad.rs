//! Scalar quadrature and least-squares helpers shared by the norm and
//! propagator modules.

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
///
/// Returns the value and an error estimate. Recursion is capped; the cap is
/// generous enough for every integrand in this crate (smooth, compactly
/// supported, oscillation resolved by the initial panel split).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    // Seed panels: resolve the integrand before adapting. 16 panels is
    // enough for the bump-type integrands; oscillatory callers pre-split.
    let n0 = 16usize;
    let h = (b - a) / n0 as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for i in 0..n0 {
        let x0 = a + i as f64 * h;
        let x1 = x0 + h;
        let (v, e) = simpson_rec(
            f,
            x0,
            x1,
            f(x0),
            f(0.5 * (x0 + x1)),
            f(x1),
            tol / n0 as f64,
            40,
        );
        total += v;
        err += e;
    }
    (total, err)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let h = b - a;
    let whole = h / 6.0 * (fa + 4.0 * fm + fb);
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        (left + right + delta / 15.0, delta.abs() / 15.0)
    } else {
        let (lv, le) = simpson_rec(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1);
        let (rv, re) = simpson_rec(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
        (lv + rv, le + re)
    }
}

/// Oscillation-aware wrapper: splits `[a, b]` so each panel sees at most a
/// fraction of a period of `e^{i omega x}`, then integrates adaptively.
pub fn adaptive_simpson_oscillatory<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    omega: f64,
    tol: f64,
) -> (f64, f64) {
    let span = b - a;
    let periods = (omega.abs() * span / std::f64::consts::TAU).ceil().max(1.0);
    let panels = (4.0 * periods).min(2e5) as usize;
    let h = span / panels as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for i in 0..panels {
        let x0 = a + i as f64 * h;
        let x1 = if i + 1 == panels { b } else { x0 + h };
        let (v, e) = simpson_rec(
            f,
            x0,
            x1,
            f(x0),
            f(0.5 * (x0 + x1)),
            f(x1),
            tol / panels as f64,
            24,
        );
        total += v;
        err += e;
    }
    (total, err)
}

/// Least-squares line fit. Returns `(slope, intercept, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    (slope, intercept, r2)
}

/// Log-log slope fit of positive samples `(x, y)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, _, r2) = linear_fit(&lx, &ly);
    (slope, r2)
}
