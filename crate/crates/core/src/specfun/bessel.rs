//! Modified Bessel function of the second kind, K_ν.
//!
//! Half-integer orders use the terminating closed form. Other orders use
//! Temme's method: a series for |z| < 2, Steed's continued fraction
//! otherwise, then upward recurrence from ν - round(ν). The complex
//! variant is used on inversion contours, where z stays in the right
//! half-plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::temme_gammas;
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const MAXIT: usize = 100_000;

/// Order ν ≥ 0 of K_ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(domain("bessel_k", format!("order must be >= 0, got {nu}")));
        }
        Ok(Self(nu))
    }

    /// Order d/2 - 1 attached to spatial dimension d ≥ 2.
    pub fn for_dimension(d: u32) -> Result<Self> {
        Self::new(d as f64 / 2.0 - 1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Some(n) when ν = n + 1/2.
    pub fn half_integer(self) -> Option<u32> {
        let two_nu = 2.0 * self.0;
        (two_nu == two_nu.round() && two_nu.round() as i64 % 2 == 1).then_some((self.0 - 0.5) as u32)
    }
}

/// K_ν(z) for real ν ≥ 0 and z > 0.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    let order = BesselOrder::new(nu)?;
    if !(z > 0.0) {
        return Err(domain("bessel_k", format!("argument must be > 0, got {z}")));
    }
    let v = match order.half_integer() {
        Some(n) => bessel_k_half_integer(n, Complex64::new(z, 0.0)).re,
        None => bessel_k_temme(nu, Complex64::new(z, 0.0))?.re,
    };
    if !v.is_finite() {
        return Err(Error::Overflow { func: "bessel_k" });
    }
    Ok(v)
}

/// K_ν(z) for complex z with Re z > 0 (or z > 0 real).
pub fn bessel_k_complex(nu: f64, z: Complex64) -> Result<Complex64> {
    let order = BesselOrder::new(nu)?;
    if z.re < 0.0 || z.norm() == 0.0 {
        return Err(domain(
            "bessel_k",
            format!("argument must satisfy Re z >= 0, z != 0, got {z}"),
        ));
    }
    let v = match order.half_integer() {
        Some(n) => bessel_k_half_integer(n, z),
        None => bessel_k_temme(nu, z)?,
    };
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Overflow { func: "bessel_k" });
    }
    Ok(v)
}

/// K_{n+1/2}(z) = sqrt(π/2z) e^{-z} Σ_k (n+k)! / (k! (n-k)!) (2z)^{-k}.
pub fn bessel_k_half_integer(n: u32, z: Complex64) -> Complex64 {
    let inv2z = (2.0 * z).inv();
    let mut coeff = 1.0;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        sum += pow * coeff;
        // (n+k+1)! / ((k+1)! (n-k-1)!) from (n+k)! / (k! (n-k)!)
        let kf = k as f64;
        let nf = n as f64;
        coeff *= (nf + kf + 1.0) * (nf - kf) / (kf + 1.0);
        pow *= inv2z;
    }
    (Complex64::new(PI / 2.0, 0.0) / z).sqrt() * (-z).exp() * sum
}

/// Temme's algorithm for arbitrary ν ≥ 0.
pub fn bessel_k_temme(nu: f64, z: Complex64) -> Result<Complex64> {
    let nl = (nu + 0.5).floor();
    let xmu = nu - nl;
    let xmu2 = xmu * xmu;
    let xi = z.inv();
    let xi2 = 2.0 * xi;
    let one = Complex64::new(1.0, 0.0);

    let (mut rkmu, mut rk1);
    if z.norm() < 2.0 {
        let x2 = 0.5 * z;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.norm() < EPS { one } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = one;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.norm() < sum.norm() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                func: "bessel_k",
                msg: "Temme series".into(),
            });
        }
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        let mut b = 2.0 * (one + z);
        let mut d = b.inv();
        let mut delh = d;
        let mut h = d;
        let mut q1 = Complex64::new(0.0, 0.0);
        let mut q2 = one;
        let a1 = 0.25 - xmu2;
        let mut q = Complex64::new(a1, 0.0);
        let mut c = a1;
        let mut a = -a1;
        let mut s = one + q * delh;
        let mut converged = false;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = (b + a * d).inv();
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).norm() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                func: "bessel_k",
                msg: "Steed continued fraction".into(),
            });
        }
        h *= a1;
        rkmu = (Complex64::new(PI / 2.0, 0.0) * xi).sqrt() * (-z).exp() / s;
        rk1 = rkmu * (xmu + z + 0.5 - h) * xi;
    }
    for i in 1..=(nl as usize) {
        let rktemp = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    Ok(rkmu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma_fn, EULER_GAMMA};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_form() {
        // K_{1/2}(1) = sqrt(π/2) e^{-1}
        let want = (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!(rel(bessel_k(0.5, 1.0).unwrap(), want) < 1e-15);
        assert!((bessel_k(0.5, 1.0).unwrap() - 0.461_068_5).abs() < 1e-7);
    }

    #[test]
    fn temme_agrees_with_half_integer_forms() {
        for n in 0..6u32 {
            let nu = n as f64 + 0.5;
            for &z in &[1e-6, 1e-3, 0.3, 1.0, 1.99, 2.01, 5.0, 20.0, 50.0] {
                let zc = Complex64::new(z, 0.0);
                let a = bessel_k_half_integer(n, zc).re;
                let b = bessel_k_temme(nu, zc).unwrap().re;
                assert!(rel(b, a) < 1e-12, "nu={nu} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn k0_small_argument_expansion() {
        let z = 1e-3;
        let want = -(z / 2.0f64).ln() - EULER_GAMMA;
        let got = bessel_k(0.0, z).unwrap();
        assert!(rel(got, want) < 1e-5, "{got} vs {want}");
        // Known reference values (Abramowitz & Stegun table 9.8).
        assert!(rel(bessel_k(0.0, 2.0).unwrap(), 0.113_893_872_749_533_4) < 1e-12);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-12);
        assert!(rel(bessel_k(0.0, 1.0).unwrap(), 0.421_024_438_240_708_3) < 1e-12);
    }

    #[test]
    fn z_times_k1_tends_to_one() {
        for &z in &[1e-4, 1e-6] {
            assert!((z * bessel_k(1.0, z).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn small_z_power_law() {
        for &nu in &[0.3, 1.0, 1.5, 2.7, 4.0] {
            for &z in &[1e-4, 1e-5] {
                let lhs = bessel_k(nu, z).unwrap() * z.powf(nu);
                let rhs = 2f64.powf(nu - 1.0) * gamma_fn(nu);
                assert!(rel(lhs, rhs) < 0.01, "nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn recurrence_consistency() {
        // K_{ν+1}(z) = K_{ν-1}(z) + (2ν/z) K_ν(z)
        for &nu in &[0.7, 1.3, 3.2, 8.9] {
            for &z in &[0.5, 3.0, 12.0] {
                let lhs = bessel_k(nu + 1.0, z).unwrap();
                let rhs = bessel_k((nu - 1.0f64).abs(), z).unwrap() + 2.0 * nu / z * bessel_k(nu, z).unwrap();
                assert!(rel(lhs, rhs) < 1e-12, "nu={nu} z={z}");
            }
        }
    }

    #[test]
    fn complex_argument_matches_integral_representation() {
        // K_ν(z) = ∫_0^∞ e^{-z cosh u} cosh(νu) du, Re z > 0
        for &(nu, z) in &[
            (0.0, Complex64::new(0.7, 1.1)),
            (1.0, Complex64::new(3.0, -2.0)),
            (2.0, Complex64::new(1.5, 0.4)),
        ] {
            let re = crate::quad::integrate(
                |u: f64| ((-z * u.cosh()).exp() * (nu * u).cosh()).re,
                0.0,
                12.0,
                Default::default(),
            )
            .unwrap()
            .value;
            let im = crate::quad::integrate(
                |u: f64| ((-z * u.cosh()).exp() * (nu * u).cosh()).im,
                0.0,
                12.0,
                Default::default(),
            )
            .unwrap()
            .value;
            let got = bessel_k_complex(nu, z).unwrap();
            assert!(
                (got - Complex64::new(re, im)).norm() < 1e-11 * got.norm(),
                "nu={nu} z={z}: {got}"
            );
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(-1.0, 1.0).is_err());
        assert!(matches!(bessel_k(10.0, 1e-300), Err(Error::Overflow { .. })));
    }
}
