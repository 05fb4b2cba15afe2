//! Small statistics helpers for the verification harness.

use serde::{Deserialize, Serialize};

/// Summary of a sequence of nonnegative ratios.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RatioStats {
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

impl RatioStats {
    pub fn from_samples(mut xs: Vec<f64>) -> RatioStats {
        assert!(!xs.is_empty(), "no ratio samples collected");
        xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN ratio"));
        let max = *xs.last().unwrap();
        let median = if xs.len() % 2 == 1 {
            xs[xs.len() / 2]
        } else {
            0.5 * (xs[xs.len() / 2 - 1] + xs[xs.len() / 2])
        };
        RatioStats {
            max,
            median,
            count: xs.len(),
        }
    }
}
