//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use lochs::trigpoly::{FreqVec, FrequencyModule, TrigPoly};
use lochs::C64;

const STRIDE: i64 = 7919;

/// Deterministic trig polynomial with `n_terms` modes spread over blocks up
/// to ~`max_int`.
pub fn fixture_trigpoly(n_terms: usize, max_int: i64) -> TrigPoly {
    let module = Arc::new(FrequencyModule::new(vec![1.0, std::f64::consts::SQRT_2]).unwrap());
    let terms = (0..n_terms).map(|i| {
        let m = ((i as i64 * STRIDE) % (2 * max_int + 1)) - max_int;
        let e = (i as i64 % 3) - 1;
        let phase = i as f64 * 2.39996;
        (FreqVec::new(vec![m, e]), C64::from_polar(0.7, phase))
    });
    TrigPoly::from_terms(module, terms).unwrap()
}
