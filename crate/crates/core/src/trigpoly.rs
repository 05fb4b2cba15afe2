//! Exact arithmetic for finite trigonometric polynomials over a frequency
//! Z-module.
//!
//! Frequencies are stored as integer vectors over a declared generator list,
//! never as floats, so closure of the spectrum under products, conjugation,
//! differentiation and multipliers is an exact statement about integer
//! vectors. Real frequency values are derived on demand for multiplier
//! evaluation.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generators of a finitely generated frequency Z-module.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyModule {
    generators: Vec<f64>,
}

/// Maximum generator count; the rational-dependence scan is exhaustive and
/// its cost grows geometrically with the generator count.
const MAX_GENERATORS: usize = 4;

/// Integer combinations below this magnitude flag the generator list as
/// rationally dependent (near-collisions would alias distinct keys).
const DEPENDENCE_TOL: f64 = 1e-9;

impl FrequencyModule {
    /// Builds a module, rejecting zero generators and generator lists with a
    /// small integer combination that nearly vanishes. The scan bound shrinks
    /// with the generator count to keep construction cheap: `|n|_inf <= 64`
    /// for up to two generators, 16 for three, 8 for four.
    pub fn new(generators: Vec<f64>) -> Result<FrequencyModule> {
        if generators.is_empty() {
            return Err(Error::InvalidModule("empty generator list".into()));
        }
        if generators.len() > MAX_GENERATORS {
            return Err(Error::InvalidModule(format!(
                "at most {MAX_GENERATORS} generators supported, got {}",
                generators.len()
            )));
        }
        for &g in &generators {
            if g == 0.0 || !g.is_finite() {
                return Err(Error::InvalidModule(format!("invalid generator {g}")));
            }
        }
        let bound: i64 = match generators.len() {
            1 | 2 => 64,
            3 => 16,
            _ => 8,
        };
        let g = generators.len();
        let mut combo = vec![-bound; g];
        'outer: loop {
            if combo.iter().any(|&n| n != 0) {
                let val: f64 = combo
                    .iter()
                    .zip(&generators)
                    .map(|(&n, &w)| n as f64 * w)
                    .sum();
                if val.abs() < DEPENDENCE_TOL {
                    return Err(Error::InvalidModule(format!(
                        "generators are rationally dependent: {combo:?} . {generators:?} = {val:.3e}"
                    )));
                }
            }
            for i in 0..g {
                if combo[i] < bound {
                    combo[i] += 1;
                    continue 'outer;
                }
                combo[i] = -bound;
            }
            break;
        }
        Ok(FrequencyModule { generators })
    }

    pub fn generators(&self) -> &[f64] {
        &self.generators
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    /// Real value of an integer frequency vector.
    pub fn real_value(&self, v: &FreqVec) -> f64 {
        v.coeffs
            .iter()
            .zip(&self.generators)
            .map(|(&n, &w)| n as f64 * w)
            .sum()
    }

    /// Attempts to express `value` as an integer combination of the
    /// generators with `|n|_inf <= 64`, up to the dependence tolerance.
    fn represent(&self, value: f64) -> Option<FreqVec> {
        // Search greedily over the last generator and recurse; dimension <= 4
        // and bound 64 keep this exact search small for the supported cases.
        fn go(gens: &[f64], value: f64, acc: &mut Vec<i64>, out: &mut Option<Vec<i64>>) {
            if out.is_some() {
                return;
            }
            if gens.is_empty() {
                if value.abs() < DEPENDENCE_TOL {
                    *out = Some(acc.clone());
                }
                return;
            }
            let w = gens[0];
            if gens.len() == 1 {
                let n = (value / w).round();
                if n.abs() <= 64.0 && (value - n * w).abs() < DEPENDENCE_TOL {
                    acc.push(n as i64);
                    *out = Some(acc.clone());
                    acc.pop();
                }
                return;
            }
            for n in -64i64..=64 {
                acc.push(n);
                go(&gens[1..], value - n as f64 * w, acc, out);
                acc.pop();
                if out.is_some() {
                    return;
                }
            }
        }
        let mut out = None;
        go(&self.generators, value, &mut Vec::new(), &mut out);
        out.map(|coeffs| FreqVec { coeffs })
    }
}

/// Integer frequency vector over a module's generators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FreqVec {
    coeffs: Vec<i64>,
}

impl FreqVec {
    pub fn new(coeffs: Vec<i64>) -> FreqVec {
        FreqVec { coeffs }
    }

    pub fn zero(dim: usize) -> FreqVec {
        FreqVec {
            coeffs: vec![0; dim],
        }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&n| n == 0)
    }

    fn add(&self, other: &FreqVec) -> FreqVec {
        FreqVec {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn neg(&self) -> FreqVec {
        FreqVec {
            coeffs: self.coeffs.iter().map(|&n| -n).collect(),
        }
    }
}

/// Finite trigonometric polynomial `sum_lambda a_lambda e^{i lambda x}` with
/// frequencies in a Z-module. Immutable; operations return new values.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    module: Arc<FrequencyModule>,
    terms: BTreeMap<FreqVec, Complex64>,
}

/// Coefficients below this are dropped when building terms; exact zeros only,
/// pruning is explicit via [`TrigPoly::prune`].
fn insert_term(terms: &mut BTreeMap<FreqVec, Complex64>, key: FreqVec, c: Complex64) {
    if c == Complex64::new(0.0, 0.0) {
        return;
    }
    use std::collections::btree_map::Entry;
    match terms.entry(key) {
        Entry::Vacant(e) => {
            e.insert(c);
        }
        Entry::Occupied(mut e) => {
            let v = *e.get() + c;
            if v == Complex64::new(0.0, 0.0) {
                e.remove();
            } else {
                *e.get_mut() = v;
            }
        }
    }
}

impl TrigPoly {
    /// The zero polynomial over `module`.
    pub fn zero(module: Arc<FrequencyModule>) -> TrigPoly {
        TrigPoly {
            module,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        module: Arc<FrequencyModule>,
        terms: impl IntoIterator<Item = (FreqVec, Complex64)>,
    ) -> Result<TrigPoly> {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            if k.coeffs.len() != module.dimension() {
                return Err(Error::InvalidModule(format!(
                    "key dimension {} does not match module dimension {}",
                    k.coeffs.len(),
                    module.dimension()
                )));
            }
            insert_term(&mut map, k, c);
        }
        Ok(TrigPoly { module, terms: map })
    }

    /// Single term `c * e^{i lambda x}` where `lambda` is the key's value.
    pub fn monomial(module: Arc<FrequencyModule>, key: FreqVec, c: Complex64) -> TrigPoly {
        TrigPoly::from_terms(module, [(key, c)]).expect("monomial key dimension")
    }

    /// `cos(w x)` over a single-generator module `{w}` would be built with
    /// keys +/-1; this helper builds it over an arbitrary module given the
    /// generator index.
    pub fn cosine(module: Arc<FrequencyModule>, generator: usize) -> TrigPoly {
        let dim = module.dimension();
        let mut plus = vec![0i64; dim];
        plus[generator] = 1;
        let mut minus = vec![0i64; dim];
        minus[generator] = -1;
        let half = Complex64::new(0.5, 0.0);
        TrigPoly::from_terms(
            module,
            [(FreqVec::new(plus), half), (FreqVec::new(minus), half)],
        )
        .expect("cosine keys")
    }

    pub fn module(&self) -> &Arc<FrequencyModule> {
        &self.module
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FreqVec, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: &FreqVec) -> Complex64 {
        self.terms
            .get(key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    fn check_same_module(&self, other: &TrigPoly) -> Result<()> {
        if Arc::ptr_eq(&self.module, &other.module) || self.module == other.module {
            Ok(())
        } else {
            Err(Error::ModuleMismatch)
        }
    }

    /// Coefficientwise sum.
    pub fn add(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check_same_module(other)?;
        let mut terms = self.terms.clone();
        for (k, &c) in &other.terms {
            insert_term(&mut terms, k.clone(), c);
        }
        Ok(TrigPoly {
            module: self.module.clone(),
            terms,
        })
    }

    pub fn sub(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> TrigPoly {
        if c == Complex64::new(0.0, 0.0) {
            return TrigPoly::zero(self.module.clone());
        }
        TrigPoly {
            module: self.module.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, &v)| (k.clone(), v * c))
                .collect(),
        }
    }

    /// Convolution of coefficient maps; keys add as integer vectors.
    pub fn mul(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check_same_module(other)?;
        let mut terms = BTreeMap::new();
        for (k1, &c1) in &self.terms {
            for (k2, &c2) in &other.terms {
                insert_term(&mut terms, k1.add(k2), c1 * c2);
            }
        }
        Ok(TrigPoly {
            module: self.module.clone(),
            terms,
        })
    }

    /// Complex conjugate: negated keys, conjugated coefficients.
    pub fn conj(&self) -> TrigPoly {
        TrigPoly {
            module: self.module.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.neg(), c.conj()))
                .collect(),
        }
    }

    /// Spatial derivative: each coefficient multiplied by `i lambda`.
    pub fn derivative(&self) -> TrigPoly {
        let mut terms = BTreeMap::new();
        for (k, &c) in &self.terms {
            let lambda = self.module.real_value(k);
            insert_term(&mut terms, k.clone(), c * Complex64::new(0.0, lambda));
        }
        TrigPoly {
            module: self.module.clone(),
            terms,
        }
    }

    /// Fourier multiplier: each coefficient multiplied by `m(lambda)`.
    pub fn multiplier<M: Fn(f64) -> Complex64>(&self, m: M) -> TrigPoly {
        let mut terms = BTreeMap::new();
        for (k, &c) in &self.terms {
            let lambda = self.module.real_value(k);
            insert_term(&mut terms, k.clone(), c * m(lambda));
        }
        TrigPoly {
            module: self.module.clone(),
            terms,
        }
    }

    /// Removes terms with `|a_lambda| < floor`; returns the pruned
    /// polynomial and the summed modulus of what was dropped (an upper bound
    /// on the induced sup-norm perturbation).
    pub fn prune(&self, floor: f64) -> (TrigPoly, f64) {
        assert!(floor >= 0.0);
        if floor == 0.0 {
            return (self.clone(), 0.0);
        }
        let mut terms = BTreeMap::new();
        let mut dropped = 0.0;
        for (k, &c) in &self.terms {
            if c.norm() < floor {
                dropped += c.norm();
            } else {
                terms.insert(k.clone(), c);
            }
        }
        (
            TrigPoly {
                module: self.module.clone(),
                terms,
            },
            dropped,
        )
    }

    /// Keys with nonzero coefficient.
    pub fn spectrum(&self) -> Vec<FreqVec> {
        self.terms.keys().cloned().collect()
    }

    /// Real frequency values present, sorted ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut fs: Vec<f64> = self
            .terms
            .keys()
            .map(|k| self.module.real_value(k))
            .collect();
        fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        fs
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms
            .keys()
            .map(|k| self.module.real_value(k).abs())
            .fold(0.0, f64::max)
    }

    /// Upper bound on the sup norm: `sum |a_lambda|`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Direct evaluation `u(x) = sum a_lambda e^{i lambda x}`.
    pub fn eval(&self, points: &[f64]) -> Vec<Complex64> {
        let entries: Vec<(f64, Complex64)> = self
            .terms
            .iter()
            .map(|(k, &c)| (self.module.real_value(k), c))
            .collect();
        points
            .iter()
            .map(|&x| {
                entries
                    .iter()
                    .map(|&(lambda, c)| c * Complex64::from_polar(1.0, lambda * x))
                    .sum()
            })
            .collect()
    }

    pub fn eval_one(&self, x: f64) -> Complex64 {
        self.eval(&[x])[0]
    }

    /// Exact containment of every frequency of `self` in the integer span of
    /// `target`'s generators. For matching modules this is immediate; for
    /// distinct generator lists each generator of `self` is expressed as an
    /// integer combination of `target`'s generators (search bound 64).
    pub fn span_contained_in(&self, target: &FrequencyModule) -> bool {
        if self.module.as_ref() == target {
            return true;
        }
        let images: Option<Vec<FreqVec>> = self
            .module
            .generators()
            .iter()
            .map(|&g| target.represent(g))
            .collect();
        images.is_some()
    }
}

/// JSON form: `{ "generators": [...], "terms": [{"n": [...], "re": .., "im": ..}] }`.
#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    generators: Vec<f64>,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    n: Vec<i64>,
    re: f64,
    im: f64,
}

impl Serialize for TrigPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = TrigPolyRepr {
            generators: self.module.generators().to_vec(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| TermRepr {
                    n: k.coeffs.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TrigPolyRepr::deserialize(d)?;
        let module = FrequencyModule::new(repr.generators).map_err(serde::de::Error::custom)?;
        TrigPoly::from_terms(
            Arc::new(module),
            repr.terms
                .into_iter()
                .map(|t| (FreqVec::new(t.n), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn module_1_sqrt2() -> Arc<FrequencyModule> {
        Arc::new(FrequencyModule::new(vec![1.0, std::f64::consts::SQRT_2]).unwrap())
    }

    fn e_ix(module: &Arc<FrequencyModule>) -> TrigPoly {
        TrigPoly::monomial(
            module.clone(),
            FreqVec::new(vec![1, 0]),
            Complex64::new(1.0, 0.0),
        )
    }

    fn e_isqrt2x(module: &Arc<FrequencyModule>) -> TrigPoly {
        TrigPoly::monomial(
            module.clone(),
            FreqVec::new(vec![0, 1]),
            Complex64::new(1.0, 0.0),
        )
    }

    #[test]
    fn module_rejects_dependent_generators() {
        assert!(FrequencyModule::new(vec![1.0, 0.5]).is_err());
        assert!(FrequencyModule::new(vec![1.0, 3.0]).is_err());
        assert!(FrequencyModule::new(vec![0.0]).is_err());
        assert!(FrequencyModule::new(vec![1.0, std::f64::consts::SQRT_2]).is_ok());
        // near-collision below tolerance
        assert!(FrequencyModule::new(vec![1.0, 1.0 + 1e-12]).is_err());
    }

    #[test]
    fn add_is_coefficientwise() {
        let m = module_1_sqrt2();
        let u = e_ix(&m);
        let two_u = u.add(&u).unwrap();
        assert_eq!(two_u.len(), 1);
        assert_eq!(
            two_u.coefficient(&FreqVec::new(vec![1, 0])),
            Complex64::new(2.0, 0.0)
        );
        // u + 0 = u
        let z = TrigPoly::zero(m.clone());
        let same = u.add(&z).unwrap();
        assert_eq!(same.len(), 1);
        assert_eq!(
            same.coefficient(&FreqVec::new(vec![1, 0])),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn cos_plus_cos_sqrt2_has_four_terms() {
        let m = module_1_sqrt2();
        let u = TrigPoly::cosine(m.clone(), 0)
            .add(&TrigPoly::cosine(m.clone(), 1))
            .unwrap();
        assert_eq!(u.len(), 4);
        for key in [vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]] {
            assert_eq!(u.coefficient(&FreqVec::new(key)), Complex64::new(0.5, 0.0));
        }
        let spec = u.spectrum();
        assert_eq!(spec.len(), 4);
    }

    #[test]
    fn mul_adds_keys() {
        let m = module_1_sqrt2();
        let p = e_ix(&m).mul(&e_isqrt2x(&m)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(
            p.coefficient(&FreqVec::new(vec![1, 1])),
            Complex64::new(1.0, 0.0)
        );
        // (cos x)^2 = 1/2 + 1/4 e^{2ix} + 1/4 e^{-2ix}
        let c = TrigPoly::cosine(m.clone(), 0);
        let sq = c.mul(&c).unwrap();
        assert_eq!(
            sq.coefficient(&FreqVec::new(vec![0, 0])),
            Complex64::new(0.5, 0.0)
        );
        assert_eq!(
            sq.coefficient(&FreqVec::new(vec![2, 0])),
            Complex64::new(0.25, 0.0)
        );
        assert_eq!(
            sq.coefficient(&FreqVec::new(vec![-2, 0])),
            Complex64::new(0.25, 0.0)
        );
        // u * 1 = u
        let one = TrigPoly::monomial(m.clone(), FreqVec::zero(2), Complex64::new(1.0, 0.0));
        let u = c.mul(&one).unwrap();
        assert_eq!(
            u.coefficient(&FreqVec::new(vec![1, 0])),
            Complex64::new(0.5, 0.0)
        );
    }

    #[test]
    fn module_mismatch_detected() {
        let m1 = module_1_sqrt2();
        let m2 = Arc::new(FrequencyModule::new(vec![1.0, std::f64::consts::PI]).unwrap());
        let u = e_ix(&m1);
        let v = TrigPoly::monomial(m2, FreqVec::new(vec![1, 0]), Complex64::new(1.0, 0.0));
        assert!(matches!(u.add(&v), Err(Error::ModuleMismatch)));
        assert!(matches!(u.mul(&v), Err(Error::ModuleMismatch)));
    }

    #[test]
    fn conj_negates_keys() {
        let m = module_1_sqrt2();
        let u = e_ix(&m);
        let c = u.conj();
        assert_eq!(
            c.coefficient(&FreqVec::new(vec![-1, 0])),
            Complex64::new(1.0, 0.0)
        );
        assert!(c.coefficient(&FreqVec::new(vec![1, 0])).norm() == 0.0);
    }

    #[test]
    fn derivative_is_eigen_on_monomials() {
        let m = module_1_sqrt2();
        let u = e_isqrt2x(&m);
        let d = u.derivative();
        let expected = Complex64::new(0.0, std::f64::consts::SQRT_2);
        assert!((d.coefficient(&FreqVec::new(vec![0, 1])) - expected).norm() < 1e-15);
    }

    #[test]
    fn prune_reports_dropped_mass() {
        let m = module_1_sqrt2();
        let u = e_ix(&m)
            .add(&TrigPoly::monomial(
                m.clone(),
                FreqVec::new(vec![0, 1]),
                Complex64::new(1e-15, 0.0),
            ))
            .unwrap();
        let (p, dropped) = u.prune(1e-12);
        assert_eq!(p.len(), 1);
        assert!((dropped - 1e-15).abs() < 1e-20);
        let (q, zero_dropped) = u.prune(0.0);
        assert_eq!(q.len(), 2);
        assert_eq!(zero_dropped, 0.0);
    }

    #[test]
    fn eval_matches_closed_forms() {
        let m = module_1_sqrt2();
        let c = TrigPoly::cosine(m.clone(), 0);
        assert!((c.eval_one(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let u = e_ix(&m);
        assert!((u.eval_one(std::f64::consts::PI) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let both = TrigPoly::cosine(m.clone(), 0)
            .add(&TrigPoly::cosine(m.clone(), 1))
            .unwrap();
        let expected = 1f64.cos() + std::f64::consts::SQRT_2.cos();
        assert!((both.eval_one(1.0).re - expected).abs() < 1e-12);
        assert!(both.eval_one(1.0).im.abs() < 1e-12);
    }

    #[test]
    fn span_containment() {
        let m = module_1_sqrt2();
        let u = e_ix(&m).mul(&e_isqrt2x(&m)).unwrap();
        assert!(u.span_contained_in(&m));
        // module generated by {2, sqrt2} embeds in {1, sqrt2}
        let m2 = Arc::new(FrequencyModule::new(vec![2.0, std::f64::consts::SQRT_2]).unwrap());
        let v = TrigPoly::monomial(m2, FreqVec::new(vec![1, 1]), Complex64::new(1.0, 0.0));
        assert!(v.span_contained_in(&m));
        // pi is not in span{1, sqrt2} within the search bound
        let m3 = Arc::new(FrequencyModule::new(vec![std::f64::consts::PI]).unwrap());
        let w = TrigPoly::monomial(m3, FreqVec::new(vec![1]), Complex64::new(1.0, 0.0));
        assert!(!w.span_contained_in(&m));
    }

    #[test]
    fn serde_roundtrip() {
        let m = module_1_sqrt2();
        let u = TrigPoly::cosine(m.clone(), 0).add(&e_isqrt2x(&m)).unwrap();
        let json = serde_json::to_string(&u).unwrap();
        let back: TrigPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), u.len());
        for (k, c) in u.terms() {
            assert_eq!(back.coefficient(k), *c);
        }
        assert!(json.contains("generators"));
    }
}
