//! Littlewood-Paley projections built from a fixed smooth bump, fattened
//! projections, the paraproduct trichotomy, and the paradifferential
//! four-way split used by the energy estimates.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bump::{plateau, plateau_deriv};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms::CutoffFamily;

/// The fixed frequency bump: `phi = 1` on `|xi| <= 1`, `phi = 0` on
/// `|xi| >= 11/10`, smooth and radially non-increasing in between.
pub struct BumpProfile;

impl BumpProfile {
    pub const INNER: f64 = 1.0;
    pub const OUTER: f64 = 1.1;
}

pub fn phi(xi: f64) -> f64 {
    plateau(xi, BumpProfile::INNER, BumpProfile::OUTER)
}

pub fn phi_deriv(xi: f64) -> f64 {
    plateau_deriv(xi, BumpProfile::INNER, BumpProfile::OUTER)
}

/// Dyadic annulus bump `psi_N`: `phi` at `N = 1`, otherwise
/// `phi(xi/N) - phi(xi/(N/2))`. Written over the halved denominator so that
/// the telescoping sum cancels exactly in floating point.
pub fn psi(n: Dyadic, xi: f64) -> f64 {
    if n == Dyadic::ONE {
        phi(xi)
    } else {
        phi(xi / n.value()) - phi(xi / n.halve().value())
    }
}

/// Derivative of `psi_N` in `xi`.
pub fn psi_deriv(n: Dyadic, xi: f64) -> f64 {
    if n == Dyadic::ONE {
        phi_deriv(xi)
    } else {
        phi_deriv(xi / n.value()) / n.value()
            - phi_deriv(xi / n.halve().value()) / n.halve().value()
    }
}

/// Symbol of the fattened projection `P_{N/2} + P_N + P_{2N}`; at the lowest
/// blocks the sum telescopes into a single low-pass.
pub fn psi_fat(n: Dyadic, xi: f64) -> f64 {
    match n.exponent() {
        0 => phi(xi / 2.0),
        1 => phi(xi / 4.0),
        _ => phi(xi / (2.0 * n.value())) - phi(4.0 * xi / n.value()),
    }
}

fn real_multiplier<F: SpectralField>(u: &F, m: impl Fn(f64) -> f64) -> F {
    u.multiplier(|xi| Complex64::new(m(xi), 0.0))
}

/// Littlewood-Paley block projection `P_N`.
pub fn project<F: SpectralField>(n: Dyadic, u: &F) -> F {
    real_multiplier(u, |xi| psi(n, xi))
}

/// Low-pass projection `P_{<= N}`.
pub fn project_leq<F: SpectralField>(n: Dyadic, u: &F) -> F {
    real_multiplier(u, |xi| phi(xi / n.value()))
}

/// High-pass complement `1 - P_{<= N}`.
pub fn project_gt<F: SpectralField>(n: Dyadic, u: &F) -> F {
    real_multiplier(u, |xi| 1.0 - phi(xi / n.value()))
}

/// Fattened projection; satisfies `P~_N P_N = P_N` exactly.
pub fn project_fat<F: SpectralField>(n: Dyadic, u: &F) -> F {
    real_multiplier(u, |xi| psi_fat(n, xi))
}

/// Paraproduct threshold scale for output block `N`: `N/128`, floored at 1
/// in the low-frequency range where the inhomogeneous projections force a
/// modification.
pub fn paraproduct_threshold(n: Dyadic) -> Dyadic {
    if n.exponent() >= 7 {
        Dyadic::from_exponent(n.exponent() - 7)
    } else {
        Dyadic::ONE
    }
}

/// The three frequency-interaction components of `P_N(fg)`.
#[derive(Debug, Clone)]
pub struct Paraproduct<F> {
    /// `f` carries frequencies below the threshold, `g` above.
    pub low_high: F,
    /// `f` carries frequencies above the threshold, `g` below.
    pub high_low: F,
    /// Both factors on the same side of the threshold. At blocks `N <= 128`
    /// this includes the both-low remainder, which the inhomogeneous
    /// decomposition counts as a comparable-frequency interaction.
    pub high_high: F,
}

impl<F: SpectralField> Paraproduct<F> {
    pub fn reconstruct(&self) -> Result<F> {
        self.low_high.add(&self.high_low)?.add(&self.high_high)
    }
}

/// Splits `P_N(fg)` for every `N <= n_max` into low-high, high-low and
/// high-high components. Summing all components over `N` reproduces `fg`
/// whenever `n_max` covers the product's support.
pub fn paraproduct_decompose<F: SpectralField>(
    f: &F,
    g: &F,
    n_max: Dyadic,
) -> Result<BTreeMap<Dyadic, Paraproduct<F>>> {
    let product = f.mul(g)?;
    let limit = 1.1 * n_max.value();
    let max_freq = product.max_frequency();
    if max_freq > limit + 1e-9 {
        return Err(Error::SupportExceeded { max_freq, limit });
    }

    let mut out = BTreeMap::new();
    let mut split_cache: BTreeMap<Dyadic, (F, F, F, F)> = BTreeMap::new();
    for n in Dyadic::range_inclusive(Dyadic::ONE, n_max) {
        let l = paraproduct_threshold(n);
        let (f_lo, f_hi, g_lo, g_hi) = split_cache
            .entry(l)
            .or_insert_with(|| {
                (
                    project_leq(l, f),
                    project_gt(l, f),
                    project_leq(l, g),
                    project_gt(l, g),
                )
            })
            .clone();
        let low_high = project(n, &f_lo.mul(&g_hi)?);
        let high_low = project(n, &f_hi.mul(&g_lo)?);
        let both_high = project(n, &f_hi.mul(&g_hi)?);
        let both_low = project(n, &f_lo.mul(&g_lo)?);
        let high_high = both_high.add(&both_low)?;
        out.insert(
            n,
            Paraproduct {
                low_high,
                high_low,
                high_high,
            },
        );
    }
    Ok(out)
}

/// Summed paraproducts `(T_f g, T_g f, Pi(f, g))` over all blocks.
pub fn paraproduct_parts<F: SpectralField>(f: &F, g: &F) -> Result<(F, F, F)> {
    let n_max = Dyadic::covering(f.max_frequency() + g.max_frequency());
    let parts = paraproduct_decompose(f, g, n_max)?;
    let mut lh = f.zero_like();
    let mut hl = f.zero_like();
    let mut hh = f.zero_like();
    for p in parts.values() {
        lh = lh.add(&p.low_high)?;
        hl = hl.add(&p.high_low)?;
        hh = hh.add(&p.high_high)?;
    }
    Ok((lh, hl, hh))
}

/// Commutator `[P_N, f] g = P_N(fg) - f P_N g`.
pub fn commutator_pn<F: SpectralField>(n: Dyadic, f: &F, g: &F) -> Result<F> {
    let lhs = project(n, &f.mul(g)?);
    let rhs = f.mul(&project(n, g))?;
    lhs.sub(&rhs)
}

/// Fattening used inside the paradifferential split: the fattened annulus
/// for `N >= 8`; at `N <= 4` a low-pass wide enough that the split
/// identities stay exact with the threshold floored at 1.
fn paradiff_fat<F: SpectralField>(n: Dyadic, u: &F) -> F {
    if n.exponent() >= 3 {
        project_fat(n, u)
    } else {
        real_multiplier(u, |xi| phi(xi / (4.0 * n.value())))
    }
}

/// The paradifferential four-way split of `chi * P_N(q * dx u)` evaluated
/// at sample points: the transport term `q_lo * dx(chi u_N)`, the remaining
/// low-high pieces (cutoff commutator plus projection commutator), the
/// high-low piece, and the high-high piece. `reconstruction` carries the
/// direct evaluation of `chi * P_N(q * dx u)`; the four components sum to
/// it exactly.
#[derive(Debug, Clone)]
pub struct ParadiffSplit {
    pub t_term: Vec<Complex64>,
    pub low_high: Vec<Complex64>,
    pub high_low: Vec<Complex64>,
    pub high_high: Vec<Complex64>,
    pub reconstruction: Vec<Complex64>,
}

impl ParadiffSplit {
    /// Largest deviation between the summed components and the direct
    /// evaluation.
    pub fn max_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.reconstruction.len() {
            let sum = self.t_term[i] + self.low_high[i] + self.high_low[i] + self.high_high[i];
            worst = worst.max((sum - self.reconstruction[i]).norm());
        }
        worst
    }
}

pub fn paradiff_split_eval<F: SpectralField>(
    q: &F,
    u: &F,
    n: Dyadic,
    family: &CutoffFamily,
    center: f64,
    xs: &[f64],
) -> Result<ParadiffSplit> {
    let scale = n.window_scale(family.sigma());
    let l = paraproduct_threshold(n);

    let q_lo = project_leq(l, q);
    let q_hi = project_gt(l, q);
    let u_lo = project_leq(l, u);
    let u_hi = project_gt(l, u);
    let u_n = project(n, u);
    let du_n = u_n.derivative();

    // P_N(q_lo dx F_N u) - q_lo P_N dx F_N u, with P_N dx F_N = dx P_N
    let d_fat_u = paradiff_fat(n, u).derivative();
    let comm = project(n, &q_lo.mul(&d_fat_u)?).sub(&q_lo.mul(&du_n)?)?;
    let hl_field = project(n, &paradiff_fat(n, &q_hi).mul(&u_lo.derivative())?);
    let hh_field = project(n, &q_hi.mul(&u_hi.derivative())?);
    let recon_field = project(n, &q.mul(&u.derivative())?);

    let q_lo_v = q_lo.eval_points(xs);
    let u_n_v = u_n.eval_points(xs);
    let du_n_v = du_n.eval_points(xs);
    let comm_v = comm.eval_points(xs);
    let hl_v = hl_field.eval_points(xs);
    let hh_v = hh_field.eval_points(xs);
    let recon_v = recon_field.eval_points(xs);

    let len = xs.len();
    let mut t_term = Vec::with_capacity(len);
    let mut low_high = Vec::with_capacity(len);
    let mut high_low = Vec::with_capacity(len);
    let mut high_high = Vec::with_capacity(len);
    let mut reconstruction = Vec::with_capacity(len);
    for i in 0..len {
        let w = family.chi_scaled(xs[i] - center, scale);
        let dw = family.chi_deriv_scaled(xs[i] - center, scale);
        t_term.push(q_lo_v[i] * (dw * u_n_v[i] + w * du_n_v[i]));
        low_high.push(-q_lo_v[i] * dw * u_n_v[i] + w * comm_v[i]);
        high_low.push(w * hl_v[i]);
        high_high.push(w * hh_v[i]);
        reconstruction.push(w * recon_v[i]);
    }
    Ok(ParadiffSplit {
        t_term,
        low_high,
        high_low,
        high_high,
        reconstruction,
    })
}
