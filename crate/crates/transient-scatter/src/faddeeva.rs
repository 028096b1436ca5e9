//! Faddeeva function w(z) = e^{-z^2} erfc(-iz).
//!
//! Three evaluation regions, each tuned against a 40-digit reference:
//! a Maclaurin double series for |z| <= 3.5 (valid in both half planes, and
//! the only region that must handle the zeros of w near |z| = 2.4), the
//! Weideman rational approximation (N = 40) for the upper-half mid range
//! 3.5 < |z| < 7, and the Laplace continued fraction for |z| >= 7 with a
//! depth schedule that shrinks as |z| grows. For Im z < 0 outside the series
//! disc the reflection w(z) = 2 e^{-z^2} - w(-z) is used; when |e^{-z^2}|
//! would overflow that is reported as an error, and when it underflows the
//! continued fraction applies directly (it represents the same asymptotic
//! series in both half planes away from the real axis).

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::{Error, Result};

const SQRT_PI: f64 = 1.7724538509055159;
/// Series disc radius; beyond it the rational/CF forms take over.
const SERIES_RADIUS: f64 = 3.5;
/// Weideman outer radius; beyond it the continued fraction is cheaper and accurate.
const MID_RADIUS: f64 = 7.0;
const WEIDEMAN_N: usize = 40;
/// Weideman scale L = sqrt(N/sqrt(2)) for N = 40.
const WEIDEMAN_L: f64 = 5.3182958969449885;

/// One evaluation with a conservative accuracy estimate.
#[derive(Debug, Clone, Copy)]
pub struct WEvaluation {
    pub z: Complex64,
    pub w: Complex64,
    /// Absolute error bound estimate for this region and input.
    pub est_error: f64,
}

/// w(z) with the error estimate attached.
pub fn w_eval(z: Complex64) -> Result<WEvaluation> {
    if !(z.norm() <= 1e6) {
        return Err(Error::Input(format!(
            "w(z) supports |z| <= 1e6, got z = {} + {}i",
            z.re, z.im
        )));
    }
    let (w, est_error) = eval(z)?;
    Ok(WEvaluation { z, w, est_error })
}

/// w(z) alone.
pub fn w(z: Complex64) -> Result<Complex64> {
    Ok(w_eval(z)?.w)
}

fn eval(z: Complex64) -> Result<(Complex64, f64)> {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        let v = series(z);
        // Worst case sits at the w-zeros where the series cancels to ~1e-11.
        return Ok((v, 5e-11));
    }
    if z.im >= 0.0 {
        let v = upper_half(z, r);
        return Ok((v, 1e-13 * v.norm().max(1e-2)));
    }
    // Lower half plane, |z| > 3.5: reflect through 2 e^{-z^2}.
    let q = z.im * z.im - z.re * z.re; // ln|e^{-z^2}|
    if q > 709.0 {
        return Err(Error::Numerical(format!(
            "w(z) overflows: |exp(-z^2)| = exp({q:.1}) at z = {} + {}i",
            z.re, z.im
        )));
    }
    if q < -750.0 {
        // Reflection term underflows entirely; CF works directly here because
        // q < -750 forces |Re z| > 27, far into the asymptotic regime.
        let v = continued_fraction(z, r);
        return Ok((v, 1e-13 * v.norm().max(1e-2)));
    }
    let refl = 2.0 * (-z * z).exp();
    let inner = upper_half(-z, r);
    let v = refl - inner;
    Ok((v, 1e-13 * refl.norm() + 1e-13 * inner.norm().max(1e-2)))
}

fn upper_half(z: Complex64, r: f64) -> Complex64 {
    if r < MID_RADIUS {
        weideman(z)
    } else {
        continued_fraction(z, r)
    }
}

/// Maclaurin series w(z) = sum (iz)^n / Gamma(n/2 + 1), split into even and
/// odd chains so each advances by a simple ratio.
fn series(z: Complex64) -> Complex64 {
    let iz = Complex64::new(-z.im, z.re);
    let iz2 = iz * iz;
    let mut even = Complex64::new(1.0, 0.0); // (iz)^{2k} / k!
    let mut odd = iz * (2.0 / SQRT_PI); // (iz)^{2k+1} / Gamma(k + 3/2)
    let mut sum = even + odd;
    for k in 0..200 {
        even *= iz2 / (k as f64 + 1.0);
        odd *= iz2 / (k as f64 + 1.5);
        sum += even + odd;
        if even.norm() + odd.norm() < 1e-17 * (1.0 + sum.norm()) {
            break;
        }
    }
    sum
}

/// Weideman coefficients: a_m = [f_0 + 2 sum_k f_k cos(pi k m / M)] / 2M with
/// t_k = L tan(k pi / 2M), f_k = e^{-t_k^2} (L^2 + t_k^2), M = 2N.
fn weideman_coeffs() -> &'static [f64; WEIDEMAN_N] {
    static COEFFS: OnceLock<[f64; WEIDEMAN_N]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let m = 2 * WEIDEMAN_N;
        let l = WEIDEMAN_L;
        let mut f = vec![0.0; m];
        f[0] = l * l;
        for (k, fk) in f.iter_mut().enumerate().skip(1) {
            let t = l * (k as f64 * std::f64::consts::PI / (2 * m) as f64).tan();
            *fk = (-t * t).exp() * (l * l + t * t);
        }
        let mut a = [0.0; WEIDEMAN_N];
        for (n, an) in a.iter_mut().enumerate() {
            let mm = (n + 1) as f64;
            let mut s = f[0];
            for (k, fk) in f.iter().enumerate().skip(1) {
                s += 2.0 * fk * (std::f64::consts::PI * k as f64 * mm / m as f64).cos();
            }
            *an = s / (2 * m) as f64;
        }
        a
    })
}

/// Weideman (1994) rational approximation, valid for Im z >= 0.
fn weideman(z: Complex64) -> Complex64 {
    let a = weideman_coeffs();
    let l = Complex64::new(WEIDEMAN_L, 0.0);
    let iz = Complex64::new(-z.im, z.re);
    let denom = l - iz;
    let big_z = (l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in a.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + (1.0 / SQRT_PI) / denom
}

/// Laplace continued fraction, evaluated backwards from a depth chosen by |z|.
fn continued_fraction(z: Complex64, r: f64) -> Complex64 {
    let depth = if r >= 1e4 {
        2
    } else if r >= 200.0 {
        5
    } else if r >= 50.0 {
        8
    } else if r >= 20.0 {
        12
    } else if r >= 12.0 {
        16
    } else {
        22
    };
    let mut f = z;
    for n in (1..=depth).rev() {
        f = z - (n as f64 / 2.0) / f;
    }
    Complex64::new(0.0, 1.0 / SQRT_PI) / f
}

/// Real complementary error function via erfc(x) = e^{-x^2} Re w(ix), x >= 0.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x > 26.7 {
        // e^{-x^2} underflows past all subnormals.
        return 0.0;
    }
    let wv = series_or_cf_imag_axis(x);
    (-x * x).exp() * wv
}

/// w(ix) for real x >= 0 is real; reuse the region dispatch (no error paths
/// arise on the positive imaginary axis).
fn series_or_cf_imag_axis(x: f64) -> f64 {
    let z = Complex64::new(0.0, x);
    if x <= SERIES_RADIUS {
        series(z).re
    } else {
        upper_half(z, x).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(got: Complex64, want: Complex64, tol: f64, label: &str) {
        let err = (got - want).norm();
        assert!(err < tol, "{label}: got {got}, want {want}, |err| = {err:.3e}");
    }

    #[test]
    fn weideman_coefficients_frozen() {
        let a = weideman_coeffs();
        assert!((a[0] - 2.899624509389705).abs() < 1e-14);
        assert!((a[1] - 2.6160541527618597).abs() < 1e-14);
        assert!((a[2] - 2.201513794878312).abs() < 1e-14);
        // a[39] has cancelled to the summation noise floor; only its
        // magnitude (and thus the decay of the expansion) is checkable.
        assert!((a[39] - -1.7356980998791865e-15).abs() < 5e-15);
    }

    // Reference values from a 40-digit evaluation of e^{-z^2} erfc(-iz).
    #[test]
    fn frozen_values_series_region() {
        assert_close(w(c(0.0, 0.0)).unwrap(), c(1.0, 0.0), 1e-15, "w(0)");
        assert_close(w(c(0.0, 1.0)).unwrap(), c(0.4275835761558070, 0.0), 5e-14, "w(i)");
        assert_close(
            w(c(1.0, 0.0)).unwrap(),
            c(0.3678794411714423340, 0.6071577058413937245),
            5e-14,
            "w(1)",
        );
        assert_close(
            w(c(2.0, 3.0)).unwrap(),
            c(0.1307574696698485806, 0.08111265047745665202),
            5e-14,
            "w(2+3i)",
        );
        assert_close(
            w(c(0.1, 0.9)).unwrap(),
            c(0.45473063069245524453, 0.030566362199109650962),
            5e-14,
            "w(0.1+0.9i)",
        );
        // Lower half plane inside the series disc: no reflection needed.
        assert_close(
            w(c(3.0, -0.5)).unwrap(),
            c(-0.03744011710042426111, 0.1930284794273171012),
            5e-11,
            "w(3-0.5i)",
        );
        assert_close(
            w(c(0.5, -1.2)).unwrap(),
            c(2.030863755704234830, 6.230771715358500273),
            5e-13,
            "w(0.5-1.2i)",
        );
        assert_close(
            w(c(2.2, -1.1)).unwrap(),
            c(-0.1165274442867652027, 0.1510907814638338398),
            5e-11,
            "w(2.2-1.1i)",
        );
    }

    #[test]
    fn frozen_values_mid_region() {
        assert_close(
            w(c(5.1, 0.01)).unwrap(),
            c(2.308211125520714274e-4, 0.1128878876493268485),
            1e-13,
            "w(5.1+0.01i)",
        );
        assert_close(
            w(c(-6.0, 0.5)).unwrap(),
            c(8.124885586462517531e-3, -0.09468791486012624603),
            1e-13,
            "w(-6+0.5i)",
        );
        assert_close(
            w(c(-3.6, 0.1)).unwrap(),
            c(0.0049948196126083266311, -0.16349782487902217114),
            1e-13,
            "w(-3.6+0.1i)",
        );
    }

    #[test]
    fn frozen_values_lower_half_reflection() {
        assert_close(
            w(c(5.0, -2.0)).unwrap(),
            c(-0.040643675714632995539, 0.09798731254106442805),
            1e-10,
            "w(5-2i)",
        );
        assert_close(
            w(c(-4.0, -3.0)).unwrap(),
            c(-0.069017359275733461344, -0.087688439086944436614),
            1e-9,
            "w(-4-3i)",
        );
        assert_close(
            w(c(8.0, -0.3)).unwrap(),
            c(-0.0027051565495498397845, 0.070984152401429020379),
            1e-12,
            "w(8-0.3i)",
        );
    }

    #[test]
    fn frozen_values_cf_region() {
        assert_close(
            w(c(100.0, 1.0)).unwrap(),
            c(5.642177916144133385e-5, 5.641613670145866934e-3),
            1e-15,
            "w(100+i)",
        );
    }

    #[test]
    fn overflow_reported_with_offending_z() {
        let err = w(c(1.0, -30.0)).unwrap_err();
        match err {
            Error::Numerical(msg) => {
                assert!(msg.contains("-30"), "message should name z: {msg}");
            }
            other => panic!("expected numerical error, got {other:?}"),
        }
    }

    #[test]
    fn precondition_magnitude() {
        assert!(matches!(w(c(2e6, 0.0)), Err(Error::Input(_))));
    }

    #[test]
    fn deep_lower_half_direct_cf() {
        // q = Im^2 - Re^2 < -750: reflection term underflows, CF applies.
        let z = c(40.0, -1.0);
        let v = w(z).unwrap();
        // Compare against the conjugation identity w(conj z) = conj w(-z)
        // routed through the upper half plane.
        let upper = w(c(40.0, 1.0)).unwrap();
        let refl = 2.0 * (-z * z).exp() - w(c(-40.0, 1.0)).unwrap();
        assert!((v - refl).norm() / v.norm() < 1e-12);
        let _ = upper;
    }

    #[test]
    fn est_error_bounds_hold_on_supported_rectangle() {
        // |Re z|, |Im z| <= 30 away from the overflow wedge: estimate must
        // satisfy the advertised 1e-10 abs / 1e-8 rel envelope.
        for i in 0..20 {
            for j in 0..20 {
                let z = c(-30.0 + 3.16 * i as f64, 0.05 + 1.5 * j as f64);
                let ev = w_eval(z).unwrap();
                let ok = ev.est_error <= 1e-10 || ev.est_error <= 1e-8 * ev.w.norm();
                assert!(ok, "estimate too large at {z}: {}", ev.est_error);
            }
        }
    }

    #[test]
    fn erfc_frozen_values() {
        assert!((erfc(0.5) - 0.47950012218695346232).abs() < 1e-15);
        assert!((erfc(1.0) - 0.15729920705028513066).abs() < 1e-15);
        // The Maclaurin series alternates with terms up to e^{x^2} ~ 250, so
        // ~1e-16 absolute noise on w maps to ~1e-16 here; tolerance above it.
        assert!((erfc(2.34558) - 0.00090940436901548153721).abs() < 5e-16);
        assert!((erfc(5.0) - 1.5374597944280348502e-12).abs() < 1e-24);
        assert!((erfc(-1.3) - 1.9340079449406524366).abs() < 1e-15);
        assert_eq!(erfc(30.0), 0.0);
    }
}
