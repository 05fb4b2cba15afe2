//! Dispersion relations `A(xi)`: purely imaginary Fourier symbols of order
//! `sigma + 1`, validated against the derivative bounds
//! `|d^k A(xi)| <= C_k <xi>^{sigma+1-k}` on a frequency grid.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::linear_fit;

type SymbolFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// A dispersion relation `A(xi)` together with its declared order data.
///
/// Immutable after construction; cheap to clone and safe to share across
/// threads.
#[derive(Clone)]
pub struct DispersionSymbol {
    name: String,
    evaluate: Arc<SymbolFn>,
    sigma: f64,
    max_validated_derivative: u32,
    preserves_reality: bool,
}

impl std::fmt::Debug for DispersionSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DispersionSymbol")
            .field("name", &self.name)
            .field("sigma", &self.sigma)
            .field("max_validated_derivative", &self.max_validated_derivative)
            .field("preserves_reality", &self.preserves_reality)
            .finish()
    }
}

impl DispersionSymbol {
    pub fn new(
        name: impl Into<String>,
        evaluate: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        sigma: f64,
        preserves_reality: bool,
    ) -> DispersionSymbol {
        assert!(sigma > 0.0, "symbol order sigma must be positive");
        DispersionSymbol {
            name: name.into(),
            evaluate: Arc::new(evaluate),
            sigma,
            max_validated_derivative: 0,
            preserves_reality,
        }
    }

    pub fn evaluate(&self, xi: f64) -> Complex64 {
        (self.evaluate)(xi)
    }

    /// Declared `sigma`; the symbol has order `sigma + 1`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether `conj(A(xi)) = A(-xi)`, so the flow preserves real fields.
    pub fn preserves_reality(&self) -> bool {
        self.preserves_reality
    }

    pub fn max_validated_derivative(&self) -> u32 {
        self.max_validated_derivative
    }
}

/// Schroedinger dispersion: `A(xi) = i xi^2`, order 2 (`sigma = 1`).
pub fn make_schrodinger() -> DispersionSymbol {
    DispersionSymbol::new("schrodinger", |xi| Complex64::new(0.0, xi * xi), 1.0, false)
}

/// Airy (KdV-type) dispersion: `A(xi) = -i xi^3`, order 3 (`sigma = 2`).
/// `conj(-i xi^3) = i xi^3 = -i (-xi)^3`, so reality is preserved.
pub fn make_airy() -> DispersionSymbol {
    DispersionSymbol::new("airy", |xi| Complex64::new(0.0, -xi * xi * xi), 2.0, true)
}

/// Polynomial symbol `A(xi) = i * sum_k c_k xi^k` (k from 1), with
/// `sigma = deg - 1`. Reality holds iff only odd powers appear.
pub fn make_poly(coeffs: &[f64]) -> Result<DispersionSymbol> {
    let deg = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .map(|p| p + 1)
        .ok_or_else(|| Error::InvalidConfig("polynomial symbol must be nonzero".into()))?;
    if deg < 2 {
        return Err(Error::InvalidConfig(
            "polynomial symbol must have degree >= 2 so that sigma > 0".into(),
        ));
    }
    let cs: Vec<f64> = coeffs[..deg].to_vec();
    let preserves = cs
        .iter()
        .enumerate()
        .all(|(i, &c)| c == 0.0 || (i + 1) % 2 == 1);
    let name = format!(
        "poly:[{}]",
        cs.iter()
            .map(|c| format!("{c}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(DispersionSymbol::new(
        name,
        move |xi| {
            let mut acc = 0.0;
            for &c in cs.iter().rev() {
                acc = acc * xi + c;
            }
            Complex64::new(0.0, acc * xi)
        },
        (deg - 1) as f64,
        preserves,
    ))
}

/// Parses a symbol name: `"schrodinger"`, `"airy"`, or `"poly:[c1,c2,...]"`.
pub fn symbol_by_name(name: &str) -> Result<DispersionSymbol> {
    match name {
        "schrodinger" => Ok(make_schrodinger()),
        "airy" => Ok(make_airy()),
        _ => {
            if let Some(body) = name.strip_prefix("poly:") {
                let body = body.trim().trim_start_matches('[').trim_end_matches(']');
                let coeffs: std::result::Result<Vec<f64>, _> =
                    body.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let coeffs = coeffs
                    .map_err(|e| Error::InvalidConfig(format!("bad poly symbol '{name}': {e}")))?;
                make_poly(&coeffs)
            } else {
                Err(Error::InvalidConfig(format!("unknown symbol '{name}'")))
            }
        }
    }
}

/// Per-order result of a derivative-bound sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub order: u32,
    /// Fitted constant: sup over the grid of `|d^k A| / <xi>^{sigma+1-k}`.
    pub c_k: f64,
    /// Grid point achieving the sup.
    pub worst_xi: f64,
}

/// Outcome of [`validate_symbol`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub symbol: String,
    pub sigma: f64,
    pub bounds: Vec<DerivativeBound>,
    /// Fitted slope of `log |A|` against `log <xi>` on the grid.
    pub growth_slope: f64,
    /// Worst `|Re A| / (1 + |A|)` seen on the grid.
    pub max_re_ratio: f64,
    pub passed: bool,
}

/// Ratio threshold above which a derivative bound is treated as unbounded.
const UNBOUNDED_RATIO: f64 = 1e6;

fn japanese_bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// Central finite difference of order `k` with step `h`.
fn central_diff(sym: &DispersionSymbol, xi: f64, k: u32, h: f64) -> Complex64 {
    if k == 0 {
        return sym.evaluate(xi);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0f64;
    for i in 0..=k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = xi + (k as f64 / 2.0 - i as f64) * h;
        acc += sign * binom * sym.evaluate(x);
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    acc / h.powi(k as i32)
}

/// Step scale for the order-`k` central difference. At k <= 2 this is the
/// 1e-4 * <xi> rule; higher orders need a larger step or the difference
/// drowns in rounding noise (the k-th difference divides by h^k).
fn diff_step(xi: f64, k: u32) -> f64 {
    let rel = f64::EPSILON.powf(1.0 / (k as f64 + 2.0)).max(1e-4);
    rel * japanese_bracket(xi)
}

/// Validates the derivative bounds of `sym` up to order `k_max` on `grid`.
///
/// Fails with [`Error::NotPurelyImaginary`] if the symbol has a real part
/// beyond tolerance anywhere on the grid, and with [`Error::OrderViolation`]
/// if `|A|` grows faster than the declared order along the grid. Ratios above
/// 1e6 mark the report as failed (interpreted as an unbounded constant).
pub fn validate_symbol(
    sym: &DispersionSymbol,
    k_max: u32,
    grid: &[f64],
) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("validation grid is empty".into()));
    }

    let mut max_re_ratio: f64 = 0.0;
    for &xi in grid {
        let a = sym.evaluate(xi);
        let ratio = a.re.abs() / (1.0 + a.norm());
        if ratio > 1e-12 {
            return Err(Error::NotPurelyImaginary { xi, re: a.re.abs() });
        }
        max_re_ratio = max_re_ratio.max(ratio);
    }

    // Growth slope of the envelope max(|A(xi)|, |A(-xi)|) against <xi>,
    // restricted to |xi| >= 4 where <xi> and |xi| agree to ~1%.
    let mut envelope: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for &xi in grid {
        let a = sym.evaluate(xi).norm();
        if xi.abs() >= 4.0 && a > 0.0 {
            let e = envelope.entry(xi.abs().to_bits()).or_insert(0.0);
            *e = e.max(a);
        }
    }
    let lx: Vec<f64> = envelope
        .keys()
        .map(|&bits| japanese_bracket(f64::from_bits(bits)).ln())
        .collect();
    let ly: Vec<f64> = envelope.values().map(|a| a.ln()).collect();
    let growth_slope = if lx.len() >= 2 {
        linear_fit(&lx, &ly).0
    } else {
        sym.sigma + 1.0
    };
    if growth_slope > sym.sigma + 1.0 + 0.1 {
        return Err(Error::OrderViolation {
            slope: growth_slope,
            declared: sym.sigma + 1.0,
        });
    }

    let mut bounds = Vec::with_capacity(k_max as usize + 1);
    let mut passed = true;
    for k in 0..=k_max {
        let mut c_k: f64 = 0.0;
        let mut worst_xi = grid[0];
        for &xi in grid {
            let h = diff_step(xi, k);
            let d = central_diff(sym, xi, k, h).norm();
            let ratio = d / japanese_bracket(xi).powf(sym.sigma + 1.0 - k as f64);
            if ratio > c_k {
                c_k = ratio;
                worst_xi = xi;
            }
        }
        if !c_k.is_finite() || c_k > UNBOUNDED_RATIO {
            passed = false;
        }
        bounds.push(DerivativeBound {
            order: k,
            c_k,
            worst_xi,
        });
    }

    Ok(ValidationReport {
        symbol: sym.name.clone(),
        sigma: sym.sigma,
        bounds,
        growth_slope,
        max_re_ratio,
        passed,
    })
}

/// The dyadic validation grid `{+/- 2^j : 0 <= j <= max_exp}`.
pub fn dyadic_grid(max_exp: u32) -> Vec<f64> {
    let mut g = Vec::new();
    for j in 0..=max_exp {
        let v = (1u64 << j) as f64;
        g.push(v);
        g.push(-v);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schrodinger_values() {
        let s = make_schrodinger();
        assert_eq!(s.evaluate(2.0), Complex64::new(0.0, 4.0));
        assert_eq!(s.evaluate(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(s.sigma(), 1.0);
        assert!(!s.preserves_reality());
    }

    #[test]
    fn airy_values() {
        let a = make_airy();
        assert_eq!(a.evaluate(1.0), Complex64::new(0.0, -1.0));
        assert_eq!(a.evaluate(-1.0), Complex64::new(0.0, 1.0));
        assert!(a.preserves_reality());
        // conj(A(xi)) = A(-xi) on a few points
        for &xi in &[0.3, 1.7, -2.4] {
            let lhs = a.evaluate(xi).conj();
            let rhs = a.evaluate(-xi);
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn sigma_matches_fitted_growth_slope() {
        // slope of log|A| vs log<xi> on [1, 1024] recovers sigma + 1
        let s = make_schrodinger();
        let rep = validate_symbol(&s, 0, &dyadic_grid(10)).unwrap();
        assert!(
            (rep.growth_slope - 2.0).abs() < 0.05,
            "slope {}",
            rep.growth_slope
        );
        let a = make_airy();
        let rep = validate_symbol(&a, 0, &dyadic_grid(10)).unwrap();
        assert!(
            (rep.growth_slope - 3.0).abs() < 0.05,
            "slope {}",
            rep.growth_slope
        );
    }

    #[test]
    fn standard_symbols_validate_to_order_six() {
        for sym in [make_schrodinger(), make_airy()] {
            for k_max in 0..=6 {
                let rep = validate_symbol(&sym, k_max, &dyadic_grid(10)).unwrap();
                assert!(
                    rep.passed,
                    "{} failed at k_max={k_max}: {rep:?}",
                    sym.name()
                );
            }
        }
    }

    #[test]
    fn schrodinger_c0_close_to_one() {
        let rep = validate_symbol(&make_schrodinger(), 3, &dyadic_grid(10)).unwrap();
        let c0 = rep.bounds[0].c_k;
        assert!((c0 - 1.0).abs() < 0.01, "C_0 = {c0}");
        for b in &rep.bounds {
            assert!(b.c_k.is_finite() && b.c_k < 1e6);
        }
    }

    #[test]
    fn real_symbol_rejected() {
        let bad = DispersionSymbol::new("bad", |xi| Complex64::new(xi * xi, 0.0), 1.0, false);
        let err = validate_symbol(&bad, 2, &dyadic_grid(4)).unwrap_err();
        assert!(matches!(err, Error::NotPurelyImaginary { .. }));
    }

    #[test]
    fn exponential_symbol_violates_order() {
        let bad = DispersionSymbol::new("exp", |xi| Complex64::new(0.0, xi.exp()), 1.0, false);
        let err = validate_symbol(&bad, 2, &dyadic_grid(6)).unwrap_err();
        assert!(matches!(err, Error::OrderViolation { .. }));
    }

    #[test]
    fn poly_symbols_parse() {
        // A(xi) = i xi^2
        let p = symbol_by_name("poly:[0,1]").unwrap();
        assert_eq!(p.sigma(), 1.0);
        assert!((p.evaluate(3.0) - Complex64::new(0.0, 9.0)).norm() < 1e-15);
        // odd powers preserve reality
        let p = symbol_by_name("poly:[2,0,-1]").unwrap();
        assert!(p.preserves_reality());
        assert!(symbol_by_name("poly:[1]").is_err());
        assert!(symbol_by_name("nope").is_err());
    }
}
