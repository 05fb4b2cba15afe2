//! Backend abstraction: operations shared by [`TrigPoly`] and [`GridField`],
//! plus the windowed-energy profile both backends expose to the norm layer.

use num_complex::Complex64;

use crate::error::Result;
use crate::gridfield::GridField;
use crate::norms::ScaledWindow;
use crate::trigpoly::TrigPoly;

/// Operations every field backend supports. Multiplier application is the
/// common interface the Littlewood-Paley layer acts through.
pub trait SpectralField: Clone + serde::Serialize {
    fn zero_like(&self) -> Self;
    fn add(&self, rhs: &Self) -> Result<Self>;
    fn sub(&self, rhs: &Self) -> Result<Self>;
    fn scale(&self, c: Complex64) -> Self;
    fn mul(&self, rhs: &Self) -> Result<Self>;
    fn conj_field(&self) -> Self;
    fn derivative(&self) -> Self;
    fn multiplier<M: Fn(f64) -> Complex64>(&self, m: M) -> Self;
    fn eval_points(&self, xs: &[f64]) -> Vec<Complex64>;
    /// Largest represented frequency magnitude.
    fn max_frequency(&self) -> f64;
    /// Certified upper bound on the sup norm (`sum` of coefficient moduli).
    fn sup_bound(&self) -> f64;
    /// Explicit coefficient pruning; returns the dropped modulus mass.
    fn prune(&self, floor: f64) -> (Self, f64);
    fn spectrum_len(&self) -> usize;
    fn is_zero(&self) -> bool;
    /// Windowed energy `y -> ||w(. - y) u||_{L^2}^2` for a scaled window.
    fn window_energy<'w>(&self, w: &'w ScaledWindow<'w>) -> EnergyProfile<'w>;
    /// `(frequency, coefficient modulus)` pairs of the active spectrum.
    fn coeff_list(&self) -> Vec<(f64, f64)>;
    /// Torus period for backends living on a compact domain.
    fn torus_period(&self) -> Option<f64>;
    /// Sampled sup of `|u|` (at most `budget` samples, locally refined) and
    /// a certified gap for the sampling within the searched window.
    fn sup_estimate(&self, budget: usize) -> (f64, f64);
    /// Backend tag used in run artifacts.
    fn backend_name(&self) -> &'static str;
}

/// Search-range hint for the sup over window centers.
#[derive(Debug, Clone, Copy)]
pub enum SpanHint {
    /// Field is zero; nothing to search.
    Zero,
    /// Profile is constant in the center (single-mode fields).
    Constant,
    /// Exact period; searching one period is complete.
    Periodic { period: f64 },
    /// Almost periodic; `slowest` is the longest beat wavelength present.
    Beat { slowest: f64 },
}

/// The function `F(y) = ||w(. - y) u||_{L^2}^2` in a form that can be
/// sampled cheaply, with a certified Lipschitz bound for `F`.
pub struct EnergyProfile<'w> {
    kind: ProfileKind<'w>,
    /// Upper bound on `|F'(y)|`.
    pub lipschitz: f64,
    pub span_hint: SpanHint,
}

enum ProfileKind<'w> {
    Zero,
    /// `F(y) = constant + 2 Re sum_k c_k e^{i kappa_k y}` over positive
    /// frequency differences of the trig polynomial.
    TrigTable {
        constant: f64,
        terms: Vec<(f64, Complex64)>,
    },
    /// Direct windowed Riemann sum over torus samples.
    Grid {
        u2dx: Vec<f64>,
        dx: f64,
        period: f64,
        window: &'w ScaledWindow<'w>,
    },
}

impl<'w> EnergyProfile<'w> {
    pub fn eval(&self, y: f64) -> f64 {
        match &self.kind {
            ProfileKind::Zero => 0.0,
            ProfileKind::TrigTable { constant, terms } => {
                let mut acc = *constant;
                for &(kappa, c) in terms {
                    let rot = Complex64::from_polar(1.0, kappa * y);
                    acc += 2.0 * (c * rot).re;
                }
                acc.max(0.0)
            }
            ProfileKind::Grid {
                u2dx,
                dx,
                period,
                window,
            } => {
                let r = window.support_radius();
                let n = u2dx.len() as i64;
                let j_lo = ((y - r) / dx).floor() as i64;
                let j_hi = ((y + r) / dx).ceil() as i64;
                let mut acc = 0.0;
                for j in j_lo..=j_hi {
                    let x = j as f64 * dx;
                    let idx = j.rem_euclid(n) as usize;
                    let w = window.sample(x - y);
                    acc += w * w * u2dx[idx];
                }
                // windows never wrap: enforced by the torus-fit precondition
                debug_assert!((j_hi - j_lo) as f64 * dx <= *period + dx);
                acc
            }
        }
    }

    /// Evaluates on `y0 + m h` for `m in 0..count` using incremental phase
    /// rotations on the trig table (one complex multiply per term per step).
    pub fn eval_grid(&self, y0: f64, h: f64, count: usize) -> Vec<f64> {
        match &self.kind {
            ProfileKind::TrigTable { constant, terms } => {
                let mut phases: Vec<Complex64> = terms
                    .iter()
                    .map(|&(k, _)| Complex64::from_polar(1.0, k * y0))
                    .collect();
                let steps: Vec<Complex64> = terms
                    .iter()
                    .map(|&(k, _)| Complex64::from_polar(1.0, k * h))
                    .collect();
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let mut acc = *constant;
                    for (&(_, c), p) in terms.iter().zip(&phases) {
                        acc += 2.0 * (c * p).re;
                    }
                    out.push(acc.max(0.0));
                    for (p, s) in phases.iter_mut().zip(&steps) {
                        *p *= *s;
                    }
                }
                out
            }
            _ => (0..count).map(|m| self.eval(y0 + m as f64 * h)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ProfileKind::Zero)
    }
}

impl SpectralField for TrigPoly {
    fn zero_like(&self) -> Self {
        TrigPoly::zero(self.module().clone())
    }

    fn add(&self, rhs: &Self) -> Result<Self> {
        TrigPoly::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Result<Self> {
        TrigPoly::sub(self, rhs)
    }

    fn scale(&self, c: Complex64) -> Self {
        TrigPoly::scale(self, c)
    }

    fn mul(&self, rhs: &Self) -> Result<Self> {
        TrigPoly::mul(self, rhs)
    }

    fn conj_field(&self) -> Self {
        TrigPoly::conj(self)
    }

    fn derivative(&self) -> Self {
        TrigPoly::derivative(self)
    }

    fn multiplier<M: Fn(f64) -> Complex64>(&self, m: M) -> Self {
        TrigPoly::multiplier(self, m)
    }

    fn eval_points(&self, xs: &[f64]) -> Vec<Complex64> {
        self.eval(xs)
    }

    fn max_frequency(&self) -> f64 {
        TrigPoly::max_frequency(self)
    }

    fn sup_bound(&self) -> f64 {
        TrigPoly::sup_bound(self)
    }

    fn prune(&self, floor: f64) -> (Self, f64) {
        TrigPoly::prune(self, floor)
    }

    fn spectrum_len(&self) -> usize {
        self.len()
    }

    fn is_zero(&self) -> bool {
        self.is_empty()
    }

    fn window_energy<'w>(&self, w: &'w ScaledWindow<'w>) -> EnergyProfile<'w> {
        if self.is_empty() {
            return EnergyProfile {
                kind: ProfileKind::Zero,
                lipschitz: 0.0,
                span_hint: SpanHint::Zero,
            };
        }
        let entries: Vec<(f64, Complex64)> = self
            .terms()
            .map(|(k, &c)| (self.module().real_value(k), c))
            .collect();
        // Group pairwise differences kappa = lambda_i - lambda_j. The weight
        // int w^2 e^{-i kappa t} dt is real and even, so only kappa > 0 is
        // kept and the constant collects the diagonal.
        let mut constant = 0.0;
        let mut groups: std::collections::BTreeMap<u64, (f64, Complex64)> =
            std::collections::BTreeMap::new();
        for (i, &(li, ci)) in entries.iter().enumerate() {
            constant += ci.norm_sqr();
            for &(lj, cj) in entries.iter().skip(i + 1) {
                let kappa = li - lj;
                let contrib = ci * cj.conj();
                let (kabs, c) = if kappa > 0.0 {
                    (kappa, contrib)
                } else {
                    (-kappa, contrib.conj())
                };
                let e = groups
                    .entry(kabs.to_bits())
                    .or_insert((kabs, Complex64::new(0.0, 0.0)));
                e.1 += c;
            }
        }
        constant *= w.weight_hat(0.0);
        let mut terms = Vec::with_capacity(groups.len());
        let mut lipschitz = 0.0;
        for (_, (kappa, c)) in groups {
            let weight = w.weight_hat(kappa);
            let cw = c * weight;
            if cw.norm() > 1e-300 {
                lipschitz += 2.0 * kappa * cw.norm();
                terms.push((kappa, cw));
            }
        }
        let span_hint = match terms.iter().map(|&(k, _)| k).fold(f64::INFINITY, f64::min) {
            k if k.is_finite() => SpanHint::Beat {
                slowest: std::f64::consts::TAU / k,
            },
            _ => SpanHint::Constant,
        };
        EnergyProfile {
            kind: ProfileKind::TrigTable { constant, terms },
            lipschitz,
            span_hint,
        }
    }

    fn coeff_list(&self) -> Vec<(f64, f64)> {
        self.terms()
            .map(|(k, c)| (self.module().real_value(k), c.norm()))
            .collect()
    }

    fn torus_period(&self) -> Option<f64> {
        None
    }

    fn sup_estimate(&self, budget: usize) -> (f64, f64) {
        if self.is_empty() {
            return (0.0, 0.0);
        }
        let entries: Vec<(f64, Complex64)> = self
            .terms()
            .map(|(k, &c)| (self.module().real_value(k), c))
            .collect();
        if entries.len() == 1 {
            return (entries[0].1.norm(), 0.0);
        }
        let lam_max = self.max_frequency().max(1e-12);
        let mut h = std::f64::consts::PI / (8.0 * lam_max);
        let window = 1e4f64.min(budget.max(16) as f64 * h);
        let count = (window / h).ceil() as usize + 1;
        let mut phases: Vec<Complex64> = entries.iter().map(|&(_, c)| c).collect();
        let steps: Vec<Complex64> = entries
            .iter()
            .map(|&(l, _)| Complex64::from_polar(1.0, l * h))
            .collect();
        let mut best = (0.0f64, 0.0f64);
        for m in 0..count {
            let v: Complex64 = phases.iter().sum();
            let a = v.norm();
            if a > best.0 {
                best = (a, m as f64 * h);
            }
            for (p, s) in phases.iter_mut().zip(&steps) {
                *p *= *s;
            }
        }
        // local refinement around the best sample
        let (mut x, mut f) = (best.1, best.0);
        for _ in 0..3 {
            let step = h / 8.0;
            for m in -8..=8 {
                let xx = x + m as f64 * step;
                let a = self.eval_one(xx).norm();
                if a > f {
                    f = a;
                    x = xx;
                }
            }
            h = step;
        }
        let deriv_bound = self.derivative().sup_bound();
        (f, 0.5 * h * deriv_bound)
    }

    fn backend_name(&self) -> &'static str {
        "trig"
    }
}

impl SpectralField for GridField {
    fn zero_like(&self) -> Self {
        GridField::zero(self.l(), self.n_points())
    }

    fn add(&self, rhs: &Self) -> Result<Self> {
        GridField::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    fn scale(&self, c: Complex64) -> Self {
        GridField::scale(self, c)
    }

    fn mul(&self, rhs: &Self) -> Result<Self> {
        GridField::mul(self, rhs)
    }

    fn conj_field(&self) -> Self {
        GridField::conj(self)
    }

    fn derivative(&self) -> Self {
        GridField::derivative(self)
    }

    fn multiplier<M: Fn(f64) -> Complex64>(&self, m: M) -> Self {
        GridField::multiplier(self, m)
    }

    fn eval_points(&self, xs: &[f64]) -> Vec<Complex64> {
        self.eval(xs)
    }

    fn max_frequency(&self) -> f64 {
        GridField::max_frequency(self)
    }

    fn sup_bound(&self) -> f64 {
        GridField::sup_bound(self)
    }

    fn prune(&self, floor: f64) -> (Self, f64) {
        GridField::prune(self, floor)
    }

    fn spectrum_len(&self) -> usize {
        GridField::spectrum_len(self)
    }

    fn is_zero(&self) -> bool {
        self.spectrum_len() == 0
    }

    fn window_energy<'w>(&self, w: &'w ScaledWindow<'w>) -> EnergyProfile<'w> {
        if self.is_zero() {
            return EnergyProfile {
                kind: ProfileKind::Zero,
                lipschitz: 0.0,
                span_hint: SpanHint::Zero,
            };
        }
        let dx = self.dx();
        let u2dx: Vec<f64> = self.samples().iter().map(|s| s.norm_sqr() * dx).collect();
        let sup = self.sup_bound();
        // |F'| <= 2 ||w'||_inf ||u||_inf ||w u||_2 |supp|^{1/2}
        //      <= 2 ||w'||_inf ||u||_inf^2 ||w||_2 |supp|^{1/2}
        let lipschitz =
            2.0 * w.deriv_sup() * sup * sup * w.l2() * (2.0 * w.support_radius()).sqrt();
        EnergyProfile {
            kind: ProfileKind::Grid {
                u2dx,
                dx,
                period: self.period(),
                window: w,
            },
            lipschitz,
            span_hint: SpanHint::Periodic {
                period: self.period(),
            },
        }
    }

    fn coeff_list(&self) -> Vec<(f64, f64)> {
        self.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(b, c)| (self.bin_freq(b), c.norm()))
            .collect()
    }

    fn torus_period(&self) -> Option<f64> {
        Some(self.period())
    }

    fn sup_estimate(&self, _budget: usize) -> (f64, f64) {
        let max = self.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
        let gap = 0.5 * self.dx() * self.derivative().sup_bound();
        (max, gap)
    }

    fn backend_name(&self) -> &'static str {
        "grid"
    }
}
