//! Periodic-torus proxy fields with discrete Fourier coefficients.
//!
//! The domain is `[0, 2*pi*L)`; represented frequencies are `k / L` for
//! integer `k` with `|k| <= n/2`. Sample and coefficient arrays are kept in
//! lockstep, so every operation can pick whichever side is cheaper.

use std::io::{Read, Write};
use std::sync::Mutex;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn fft(buf: &mut [Complex64], forward: bool) {
    let plan = {
        let mut guard = PLANNER.lock().unwrap();
        let planner = guard.get_or_insert_with(FftPlanner::new);
        if forward {
            planner.plan_fft_forward(buf.len())
        } else {
            planner.plan_fft_inverse(buf.len())
        }
    };
    plan.process(buf);
}

/// Modulus law for randomly drawn band coefficients.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum AmplitudeLaw {
    /// `|c| = amp` on the whole band.
    Flat { amp: f64 },
    /// `|c| = amp * |xi|^exponent` (with `|c| = amp` at `xi = 0`).
    Power { amp: f64, exponent: f64 },
}

impl AmplitudeLaw {
    fn modulus(&self, xi: f64) -> f64 {
        match *self {
            AmplitudeLaw::Flat { amp } => amp,
            AmplitudeLaw::Power { amp, exponent } => {
                if xi == 0.0 {
                    amp
                } else {
                    amp * xi.abs().powf(exponent)
                }
            }
        }
    }
}

/// Sampled periodic field with its discrete Fourier coefficients.
#[derive(Debug, Clone)]
pub struct GridField {
    l: f64,
    n_points: usize,
    samples: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl GridField {
    /// Builds from coefficient bins (length `n_points`, bin `b` holding the
    /// frequency `k/L` with `k = b` for `b < n/2` and `k = b - n` otherwise).
    pub fn from_coeffs(l: f64, coeffs: Vec<Complex64>) -> GridField {
        let n = coeffs.len();
        assert!(n.is_power_of_two(), "n_points must be a power of two");
        assert!(l > 0.0);
        let mut samples = coeffs.clone();
        fft(&mut samples, false);
        GridField {
            l,
            n_points: n,
            samples,
            coeffs,
        }
    }

    pub fn from_samples(l: f64, samples: Vec<Complex64>) -> GridField {
        let n = samples.len();
        assert!(n.is_power_of_two(), "n_points must be a power of two");
        assert!(l > 0.0);
        let mut coeffs = samples.clone();
        fft(&mut coeffs, true);
        let scale = 1.0 / n as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        GridField {
            l,
            n_points: n,
            samples,
            coeffs,
        }
    }

    pub fn zero(l: f64, n_points: usize) -> GridField {
        assert!(n_points.is_power_of_two());
        GridField {
            l,
            n_points,
            samples: vec![Complex64::new(0.0, 0.0); n_points],
            coeffs: vec![Complex64::new(0.0, 0.0); n_points],
        }
    }

    /// Samples a trigonometric polynomial onto the grid, rounding each
    /// frequency to the nearest representable `k/L`. Returns the field and
    /// the largest rounding error `|lambda - k/L|`.
    pub fn from_trigpoly(u: &TrigPoly, l: f64, n_points: usize) -> Result<(GridField, f64)> {
        assert!(n_points.is_power_of_two());
        let half = n_points as i64 / 2;
        let max_repr = (half - 1) as f64 / l;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_points];
        let mut max_err = 0.0f64;
        for (key, &c) in u.terms() {
            let lambda = u.module().real_value(key);
            let k = (lambda * l).round() as i64;
            if k.abs() > half - 1 {
                return Err(Error::FrequencyOutOfRange {
                    freq: lambda,
                    max: max_repr,
                });
            }
            max_err = max_err.max((lambda - k as f64 / l).abs());
            let bin = if k >= 0 {
                k as usize
            } else {
                (k + n_points as i64) as usize
            };
            coeffs[bin] += c;
        }
        Ok((GridField::from_coeffs(l, coeffs), max_err))
    }

    /// Seeded random band-limited field: independent uniform phases and the
    /// given modulus law on bins with `band.0 <= |xi| <= band.1`.
    pub fn random_bandlimited(
        seed: u64,
        l: f64,
        n_points: usize,
        band: (f64, f64),
        law: AmplitudeLaw,
    ) -> GridField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = n_points as i64 / 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_points];
        for k in -(half - 1)..=(half - 1) {
            let xi = k as f64 / l;
            if xi.abs() >= band.0 && xi.abs() <= band.1 {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let bin = if k >= 0 {
                    k as usize
                } else {
                    (k + n_points as i64) as usize
                };
                coeffs[bin] = Complex64::from_polar(law.modulus(xi), theta);
            }
        }
        GridField::from_coeffs(l, coeffs)
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Torus period `2 pi L`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU * self.l
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        self.period() / self.n_points as f64
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Frequency of coefficient bin `b`.
    pub fn bin_freq(&self, b: usize) -> f64 {
        let n = self.n_points as i64;
        let k = if (b as i64) < n / 2 {
            b as i64
        } else {
            b as i64 - n
        };
        k as f64 / self.l
    }

    fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.l == other.l && self.n_points == other.n_points {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(L={}, n={}) vs (L={}, n={})",
                self.l, self.n_points, other.l, other.n_points
            )))
        }
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(GridField::from_coeffs(self.l, coeffs))
    }

    pub fn scale(&self, c: Complex64) -> GridField {
        GridField::from_coeffs(self.l, self.coeffs.iter().map(|&v| v * c).collect())
    }

    /// Pointwise product with spectral de-aliasing by zero-padding (factor 2,
    /// enough for products of two fields; the nonlinearity evaluators compose
    /// binary products, so each stage stays alias-free). Product content
    /// above the representable range is truncated.
    pub fn mul(&self, other: &GridField) -> Result<GridField> {
        self.check_same_grid(other)?;
        let n = self.n_points;
        let n_pad = 2 * n;
        let pad = |coeffs: &[Complex64]| {
            let mut p = vec![Complex64::new(0.0, 0.0); n_pad];
            for b in 0..n {
                let k = if b < n / 2 {
                    b as i64
                } else {
                    b as i64 - n as i64
                };
                let pb = if k >= 0 {
                    k as usize
                } else {
                    (k + n_pad as i64) as usize
                };
                p[pb] = coeffs[b];
            }
            p
        };
        let mut fa = pad(&self.coeffs);
        let mut fb = pad(&other.coeffs);
        fft(&mut fa, false);
        fft(&mut fb, false);
        let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(a, b)| a * b).collect();
        fft(&mut prod, true);
        let scale = 1.0 / n_pad as f64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for k in -(n as i64 / 2)..(n as i64 / 2) {
            let pb = if k >= 0 {
                k as usize
            } else {
                (k + n_pad as i64) as usize
            };
            let b = if k >= 0 {
                k as usize
            } else {
                (k + n as i64) as usize
            };
            coeffs[b] = prod[pb] * scale;
        }
        Ok(GridField::from_coeffs(self.l, coeffs))
    }

    pub fn conj(&self) -> GridField {
        GridField::from_samples(self.l, self.samples.iter().map(|c| c.conj()).collect())
    }

    /// Fourier multiplier acting on coefficients at `xi = k/L`.
    pub fn multiplier<M: Fn(f64) -> Complex64>(&self, m: M) -> GridField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(b, &c)| c * m(self.bin_freq(b)))
            .collect();
        GridField::from_coeffs(self.l, coeffs)
    }

    pub fn derivative(&self) -> GridField {
        self.multiplier(|xi| Complex64::new(0.0, xi))
    }

    /// `int |u|^2 dx` over one period (Plancherel on the grid).
    pub fn l2_norm_sq(&self) -> f64 {
        self.period() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn max_frequency(&self) -> f64 {
        let mut max = 0.0f64;
        for (b, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                max = max.max(self.bin_freq(b).abs());
            }
        }
        max
    }

    /// Upper bound on the sup norm: `sum |c_k|`.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Evaluation at arbitrary points by direct coefficient summation.
    pub fn eval(&self, points: &[f64]) -> Vec<Complex64> {
        let active: Vec<(f64, Complex64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(b, &c)| (self.bin_freq(b), c))
            .collect();
        points
            .iter()
            .map(|&x| {
                active
                    .iter()
                    .map(|&(xi, c)| c * Complex64::from_polar(1.0, xi * x))
                    .sum()
            })
            .collect()
    }

    /// Drops coefficients with modulus below `floor`; returns the summed
    /// modulus of what was dropped.
    pub fn prune(&self, floor: f64) -> (GridField, f64) {
        if floor == 0.0 {
            return (self.clone(), 0.0);
        }
        let mut dropped = 0.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| {
                if c.norm() < floor && c.norm_sqr() > 0.0 {
                    dropped += c.norm();
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect();
        (GridField::from_coeffs(self.l, coeffs), dropped)
    }

    /// Count of nonzero coefficient bins.
    pub fn spectrum_len(&self) -> usize {
        self.coeffs.iter().filter(|c| c.norm_sqr() > 0.0).count()
    }

    /// Writes the sample array as little-endian interleaved re/im `f64`
    /// pairs next to a JSON sidecar `{ "L": .., "n_points": .. }`.
    pub fn save_binary(&self, path_prefix: &std::path::Path) -> Result<()> {
        let bin_path = path_prefix.with_extension("f64");
        let mut w = std::io::BufWriter::new(std::fs::File::create(bin_path)?);
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        w.flush()?;
        let sidecar = serde_json::json!({ "L": self.l, "n_points": self.n_points });
        std::fs::write(
            path_prefix.with_extension("json"),
            serde_json::to_string_pretty(&sidecar)?,
        )?;
        Ok(())
    }

    pub fn load_binary(path_prefix: &std::path::Path) -> Result<GridField> {
        let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(
            path_prefix.with_extension("json"),
        )?)?;
        let l = sidecar["L"]
            .as_f64()
            .ok_or_else(|| Error::InvalidConfig("sidecar missing L".into()))?;
        let n = sidecar["n_points"]
            .as_u64()
            .ok_or_else(|| Error::InvalidConfig("sidecar missing n_points".into()))?
            as usize;
        let mut bytes = Vec::new();
        std::fs::File::open(path_prefix.with_extension("f64"))?.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * n {
            return Err(Error::InvalidConfig(format!(
                "binary dump has {} bytes, expected {}",
                bytes.len(),
                16 * n
            )));
        }
        let samples = bytes
            .chunks_exact(16)
            .map(|ch| {
                Complex64::new(
                    f64::from_le_bytes(ch[..8].try_into().unwrap()),
                    f64::from_le_bytes(ch[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(GridField::from_samples(l, samples))
    }
}

impl Serialize for GridField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            l: f64,
            n_points: usize,
            coeffs_re: Vec<f64>,
            coeffs_im: Vec<f64>,
            #[serde(skip)]
            _p: &'a (),
        }
        Repr {
            l: self.l,
            n_points: self.n_points,
            coeffs_re: self.coeffs.iter().map(|c| c.re).collect(),
            coeffs_im: self.coeffs.iter().map(|c| c.im).collect(),
            _p: &(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            l: f64,
            n_points: usize,
            coeffs_re: Vec<f64>,
            coeffs_im: Vec<f64>,
        }
        let r = Repr::deserialize(d)?;
        if r.coeffs_re.len() != r.n_points || r.coeffs_im.len() != r.n_points {
            return Err(serde::de::Error::custom(
                "coefficient array length mismatch",
            ));
        }
        let coeffs = r
            .coeffs_re
            .iter()
            .zip(&r.coeffs_im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(GridField::from_coeffs(r.l, coeffs))
    }
}
