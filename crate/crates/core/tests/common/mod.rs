//! Shared test support: an adaptive Dormand-Prince integrator and
//! brute-force coefficient-ODE oracles, independent of the solver under
//! test (no Picard iteration, no composite quadrature, no spectral
//! projections beyond evaluating the multiplier symbols pointwise).

use std::sync::Arc;

use num_complex::Complex64;

use lochs::symbols::DispersionSymbol;
use lochs::trigpoly::{FreqVec, FrequencyModule, TrigPoly};

type C64 = Complex64;

/// Adaptive Dormand-Prince 5(4) on a complex state vector.
pub fn rk45<F>(rhs: F, mut y: Vec<C64>, t0: f64, t1: f64, rtol: f64, atol: f64) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // embedded 4th-order weights
    const E1: f64 = 5179.0 / 57600.0;
    const E3: f64 = 7571.0 / 16695.0;
    const E4: f64 = 393.0 / 640.0;
    const E5: f64 = -92097.0 / 339200.0;
    const E6: f64 = 187.0 / 2100.0;
    const E7: f64 = 1.0 / 40.0;

    let n = y.len();
    let axpy = |out: &mut [C64], a: f64, x: &[C64]| {
        for (o, &v) in out.iter_mut().zip(x) {
            *o += a * v;
        }
    };

    let mut t = t0;
    let mut h = (t1 - t0) / 64.0;
    let mut k1 = rhs(t, &y);
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let stage = |coeffs: &[(f64, &[C64])]| -> Vec<C64> {
            let mut s = y.clone();
            for &(a, k) in coeffs {
                axpy(&mut s, a * h, k);
            }
            s
        };
        let k2 = rhs(t + h / 5.0, &stage(&[(A21, &k1)]));
        let k3 = rhs(t + 3.0 * h / 10.0, &stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + 4.0 * h / 5.0,
            &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + 8.0 * h / 9.0,
            &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let mut y5 = y.clone();
        axpy(&mut y5, B1 * h, &k1);
        axpy(&mut y5, B3 * h, &k3);
        axpy(&mut y5, B4 * h, &k4);
        axpy(&mut y5, B5 * h, &k5);
        axpy(&mut y5, B6 * h, &k6);
        let k7 = rhs(t + h, &y5);
        let mut y4 = y.clone();
        axpy(&mut y4, E1 * h, &k1);
        axpy(&mut y4, E3 * h, &k3);
        axpy(&mut y4, E4 * h, &k4);
        axpy(&mut y4, E5 * h, &k5);
        axpy(&mut y4, E6 * h, &k6);
        axpy(&mut y4, E7 * h, &k7);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let scale = atol + rtol * y[i].norm().max(y5[i].norm());
            err = err.max((y5[i] - y4[i]).norm() / scale);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7;
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        assert!(h > 1e-14, "oracle step size underflow at t = {t}");
    }
    y
}

/// Brute-force oracle for `d_t u + A u = -i |u|^2 u` with two-mode data
/// `amp (e^{ix} + e^{i sqrt2 x})`: integrates the truncated coefficient
/// system over the frequency lattice `{m + n sqrt2 : |m|+|n| <= depth}`
/// (parity-odd keys, matching the cubic closure) with adaptive RK.
pub struct CubicLatticeOracle {
    pub module: Arc<FrequencyModule>,
    keys: Vec<(i64, i64)>,
    lambdas: Vec<f64>,
    /// index triples (i, j, k) contributing a_i a_j conj(a_k) to each output
    interactions: Vec<Vec<(usize, usize, usize)>>,
}

impl CubicLatticeOracle {
    pub fn new(depth: i64) -> CubicLatticeOracle {
        let module = Arc::new(FrequencyModule::new(vec![1.0, std::f64::consts::SQRT_2]).unwrap());
        let mut keys = Vec::new();
        for m in -depth..=depth {
            for n in -depth..=depth {
                if (m.abs() + n.abs()) <= depth && (m + n).rem_euclid(2) == 1 {
                    keys.push((m, n));
                }
            }
        }
        let index = |m: i64, n: i64| keys.iter().position(|&k| k == (m, n));
        let mut interactions = vec![Vec::new(); keys.len()];
        for (i, &(m1, n1)) in keys.iter().enumerate() {
            for (j, &(m2, n2)) in keys.iter().enumerate() {
                for (k, &(m3, n3)) in keys.iter().enumerate() {
                    if let Some(out) = index(m1 + m2 - m3, n1 + n2 - n3) {
                        interactions[out].push((i, j, k));
                    }
                }
            }
        }
        let lambdas = keys
            .iter()
            .map(|&(m, n)| m as f64 + n as f64 * std::f64::consts::SQRT_2)
            .collect();
        CubicLatticeOracle {
            module,
            keys,
            lambdas,
            interactions,
        }
    }

    pub fn initial(&self, amp: f64) -> Vec<C64> {
        self.keys
            .iter()
            .map(|&(m, n)| {
                if (m, n) == (1, 0) || (m, n) == (0, 1) {
                    C64::new(amp, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    pub fn integrate(&self, sym: &DispersionSymbol, y0: Vec<C64>, t1: f64) -> Vec<C64> {
        let a: Vec<C64> = self.lambdas.iter().map(|&l| sym.evaluate(l)).collect();
        rk45(
            |_, y: &[C64]| {
                let mut dy: Vec<C64> = (0..y.len()).map(|i| -a[i] * y[i]).collect();
                for (out, triples) in self.interactions.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for &(i, j, k) in triples {
                        acc += y[i] * y[j] * y[k].conj();
                    }
                    dy[out] += C64::new(0.0, -1.0) * acc;
                }
                dy
            },
            y0,
            0.0,
            t1,
            1e-11,
            1e-14,
        )
    }

    pub fn to_trigpoly(&self, coeffs: &[C64]) -> TrigPoly {
        TrigPoly::from_terms(
            self.module.clone(),
            self.keys
                .iter()
                .zip(coeffs)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(&(m, n), &c)| (FreqVec::new(vec![m, n]), c)),
        )
        .unwrap()
    }
}

/// Brute-force oracle for the regularized gauge-covariant equation
/// `d_t u + A u + |u|^2 dx(R_M u) = 0` on the integer lattice `|m| <= m_max`
/// with `R_M` the squared low-pass at level `M`.
pub struct DnlsIntegerOracle {
    pub module: Arc<FrequencyModule>,
    keys: Vec<i64>,
}

impl DnlsIntegerOracle {
    pub fn new(m_max: i64) -> DnlsIntegerOracle {
        let module = Arc::new(FrequencyModule::new(vec![1.0]).unwrap());
        DnlsIntegerOracle {
            module,
            keys: (-m_max..=m_max).collect(),
        }
    }

    pub fn initial(&self, amp: f64) -> Vec<C64> {
        self.keys
            .iter()
            .map(|&m| {
                if m == 1 || m == 2 {
                    C64::new(amp, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    pub fn integrate(
        &self,
        sym: &DispersionSymbol,
        reg_level: f64,
        y0: Vec<C64>,
        t1: f64,
    ) -> Vec<C64> {
        let n = self.keys.len();
        let a: Vec<C64> = self.keys.iter().map(|&m| sym.evaluate(m as f64)).collect();
        // derivative of the doubled low-pass, evaluated per mode
        let dreg: Vec<C64> = self
            .keys
            .iter()
            .map(|&m| {
                let p = lochs::lp::phi(m as f64 / reg_level);
                C64::new(0.0, m as f64) * p * p
            })
            .collect();
        let offset = self.keys[0];
        rk45(
            |_, y: &[C64]| {
                let mut dy: Vec<C64> = (0..n).map(|i| -a[i] * y[i]).collect();
                for i in 0..n {
                    if y[i].norm() == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        if y[j].norm() == 0.0 {
                            continue;
                        }
                        for k in 0..n {
                            if y[k].norm() == 0.0 {
                                continue;
                            }
                            let m_out = self.keys[i] - self.keys[j] + self.keys[k];
                            let idx = m_out - offset;
                            if idx >= 0 && (idx as usize) < n {
                                dy[idx as usize] -= y[i] * y[j].conj() * (dreg[k] * y[k]);
                            }
                        }
                    }
                }
                dy
            },
            y0,
            0.0,
            t1,
            1e-11,
            1e-14,
        )
    }

    pub fn to_trigpoly(&self, coeffs: &[C64]) -> TrigPoly {
        TrigPoly::from_terms(
            self.module.clone(),
            self.keys
                .iter()
                .zip(coeffs)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(&m, &c)| (FreqVec::new(vec![m]), c)),
        )
        .unwrap()
    }
}
