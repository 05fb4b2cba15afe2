//! The C-infinity step underlying both the frequency bump `phi` and the
//! spatial cutoff `chi`.

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`,
/// `e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        let s = a + b;
        a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s)
    }
}

/// Smooth plateau profile: 1 on `|x| <= inner`, 0 on `|x| >= outer`,
/// monotone non-increasing in `|x|`.
pub fn plateau(x: f64, inner: f64, outer: f64) -> f64 {
    let r = x.abs();
    if r <= inner {
        1.0
    } else if r >= outer {
        0.0
    } else {
        smooth_step((outer - r) / (outer - inner))
    }
}

/// Radial derivative of [`plateau`] with respect to `x` (signed).
pub fn plateau_deriv(x: f64, inner: f64, outer: f64) -> f64 {
    let r = x.abs();
    if r <= inner || r >= outer {
        0.0
    } else {
        let d = -smooth_step_deriv((outer - r) / (outer - inner)) / (outer - inner);
        if x >= 0.0 {
            d
        } else {
            -d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        // s(t) + s(1-t) = 1
        for &t in &[0.1, 0.25, 0.4, 0.73] {
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn step_derivative_matches_finite_difference() {
        let h = 1e-6;
        for &t in &[0.2, 0.5, 0.8] {
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert!((fd - smooth_step_deriv(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn plateau_profile() {
        assert_eq!(plateau(0.2, 0.25, 0.75), 1.0);
        assert_eq!(plateau(-0.25, 0.25, 0.75), 1.0);
        assert_eq!(plateau(0.8, 0.25, 0.75), 0.0);
        let mid = plateau(0.5, 0.25, 0.75);
        assert!(mid > 0.0 && mid < 1.0);
        // monotone non-increasing in |x|
        let mut prev = 1.0;
        let mut x = 0.0;
        while x < 1.0 {
            let v = plateau(x, 0.25, 0.75);
            assert!(v <= prev + 1e-15);
            prev = v;
            x += 0.01;
        }
    }
}
