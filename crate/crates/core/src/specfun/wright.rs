//! M-Wright function and the one-sided stable law it is tied to.
//!
//! For z ≤ 1 the entire power series is used. Beyond that the series
//! cancels badly, so M_θ is obtained from Zolotarev's integral for the
//! standard one-sided stable density g_θ (Laplace transform e^{-s^θ})
//! through g_θ(x) = θ x^{-1-θ} M_θ(x^{-θ}):
//!
//!   M_θ(z) = z^{θ/(1-θ)} / (π(1-θ)) ∫_0^π A(φ) exp(-z^{1/(1-θ)} A(φ)) dφ,
//!   A(φ) = (sin θφ / sin φ)^{1/(1-θ)} sin((1-θ)φ) / sin θφ.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_breaks, QuadConfig};

/// Kanter's function A(φ) on (0, π).
pub fn kanter_factor(theta: f64, phi: f64) -> f64 {
    let s = (theta * phi).sin();
    (s / phi.sin()).powf(1.0 / (1.0 - theta)) * ((1.0 - theta) * phi).sin() / s
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(domain("m_wright", format!("theta must lie in (0, 1), got {theta}")));
    }
    Ok(())
}

/// M_θ(z) for θ ∈ (0, 1), z ≥ 0.
pub fn m_wright(theta: f64, z: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(z >= 0.0) {
        return Err(domain("m_wright", format!("z must be >= 0, got {z}")));
    }
    if z <= 1.0 {
        // For θ near 1 the series terms barely decay close to z = 1.
        match series(theta, z) {
            Err(Error::Convergence { .. }) => zolotarev(theta, z),
            other => other,
        }
    } else {
        zolotarev(theta, z)
    }
}

fn series(theta: f64, z: f64) -> Result<f64> {
    let mut sum = 0.0;
    let lz = z.ln();
    for n in 0..400usize {
        let nf = n as f64;
        // 1/Γ(1 - θ(n+1)) by reflection: sin(πy) Γ(1-y) / π with 1 - y = θ(n+1).
        let y = 1.0 - theta * (nf + 1.0);
        let rg_sign;
        let rg_log;
        if y > 0.0 {
            rg_sign = 1.0;
            rg_log = -ln_gamma(y);
        } else {
            let nearest = y.round();
            if (y - nearest).abs() < 1e-14 {
                continue;
            }
            let s = (PI * y).sin() / PI;
            rg_sign = s.signum();
            rg_log = s.abs().ln() + ln_gamma(1.0 - y);
        }
        let mag = if n == 0 {
            rg_log
        } else {
            nf * lz - ln_gamma(nf + 1.0) + rg_log
        };
        if z == 0.0 && n > 0 {
            break;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 } * rg_sign;
        let term = sign * mag.exp();
        sum += term;
        if n > 5 && term.abs() < 1e-18 * sum.abs().max(1e-300) {
            return Ok(sum);
        }
    }
    if z == 0.0 {
        return Ok(sum);
    }
    Err(Error::Convergence {
        func: "m_wright",
        msg: format!("series at z = {z}"),
    })
}

fn zolotarev(theta: f64, z: f64) -> Result<f64> {
    let big = z.powf(1.0 / (1.0 - theta));
    let pre_log = theta / (1.0 - theta) * z.ln() - (PI * (1.0 - theta)).ln();
    let a0 = kanter_factor(theta, 1e-8);
    // Everything below e^{-745} relative to the prefactor is exactly zero.
    if big * a0 - pre_log > 745.0 {
        return Ok(0.0);
    }
    let f = |phi: f64| {
        let a = kanter_factor(theta, phi);
        let v = a * (pre_log - big * a).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // For θ near 1 the integrand peaks within O(1-θ) of π.
    let mut edges = vec![0.0];
    for c in [16.0, 8.0, 4.0, 2.0, 1.0, 0.5, 0.25] {
        let phi = PI * (1.0 - c * (1.0 - theta));
        if phi > *edges.last().expect("nonempty") {
            edges.push(phi);
        }
    }
    edges.push(PI);
    let r = integrate_breaks(f, &edges, QuadConfig::new(1e-15, 1e-13))?;
    if r.abs_error > 1e-9 {
        return Err(Error::AccuracyLoss {
            func: "m_wright",
            value: r.value,
            error: r.abs_error,
        });
    }
    Ok(r.value)
}

/// W_θ(y) = ∫_y^∞ M_θ(z) z^{-1/θ} dz for y > 0.
///
/// Gives the Cesaro-averaged density of the θ-stable inverse subordinator:
/// (1/t) ∫_0^t G_s(τ) ds = τ^{1/θ-1} W_θ(τ t^{-θ}) / (tθ).
pub fn m_wright_tail_weight(theta: f64, y: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(y > 0.0) {
        return Err(domain("m_wright_tail_weight", format!("y must be > 0, got {y}")));
    }
    // Beyond z_max the Zolotarev exponent exceeds 700.
    let z_max = (700.0 / ((1.0 - theta) * theta.powf(theta / (1.0 - theta)))).powf(1.0 - theta);
    if y >= z_max {
        return Ok(0.0);
    }
    let mut edges = vec![y];
    if y < 1.0 {
        edges.extend(crate::quad::log_panels(y, 1.0, 4));
    }
    let w = (1.0 - theta).sqrt();
    edges.extend((-8..=8).map(|k| 1.0 + k as f64 * w / 2.0));
    edges.push(z_max);
    edges.retain(|&z| z >= y && z <= z_max);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let r = crate::quad::try_integrate_breaks(
        |z| Ok(m_wright(theta, z)? * z.powf(-1.0 / theta)),
        &edges,
        QuadConfig::new(1e-300, 1e-12),
    )?;
    Ok(r.value)
}

/// Density of the standard one-sided θ-stable law, E e^{-sS} = e^{-s^θ}.
pub fn stable_density(theta: f64, x: f64) -> Result<f64> {
    check_theta(theta)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(theta * x.powf(-1.0 - theta) * m_wright(theta, x.powf(-theta))?)
}

/// P(S ≤ x) for the standard one-sided θ-stable law.
pub fn stable_cdf(theta: f64, x: f64) -> Result<f64> {
    check_theta(theta)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let w = x.powf(-theta / (1.0 - theta));
    let r = integrate(
        |phi: f64| (-w * kanter_factor(theta, phi)).exp(),
        0.0,
        PI,
        QuadConfig::new(1e-14, 1e-12),
    )?;
    Ok(r.value / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_to_inf;
    use crate::specfun::{gamma_fn, mittag_leffler};

    fn half_closed_form(z: f64) -> f64 {
        (-z * z / 4.0).exp() / PI.sqrt()
    }

    #[test]
    fn examples() {
        assert!((m_wright(0.5, 0.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((m_wright(0.5, 1.0).unwrap() - 0.439_391_3).abs() < 1e-7);
        assert!((m_wright(0.3, 0.0).unwrap() - 1.0 / gamma_fn(0.7)).abs() < 1e-14);
        assert!((m_wright(0.3, 0.0).unwrap() - 0.770_383).abs() < 1e-6);
    }

    #[test]
    fn half_order_matches_gaussian_on_range() {
        let mut z = 0.0;
        while z <= 10.0 {
            let got = m_wright(0.5, z).unwrap();
            assert!((got - half_closed_form(z)).abs() < 1e-9, "z={z}");
            z += 0.1;
        }
    }

    #[test]
    fn both_representations_agree() {
        for &theta in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &z in &[0.6, 1.0, 1.4] {
                let a = series(theta, z).unwrap();
                let b = zolotarev(theta, z).unwrap();
                assert!((a - b).abs() < 1e-11, "theta={theta} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn laplace_pair_with_mittag_leffler() {
        for &theta in &[0.3, 0.5, 0.7] {
            for &x in &[0.5, 1.0, 2.0] {
                let lt = integrate_to_inf(
                    |tau: f64| (-x * tau).exp() * m_wright(theta, tau).unwrap(),
                    0.0,
                    1.0,
                    QuadConfig::new(1e-13, 1e-11),
                )
                .unwrap()
                .value;
                let ml = mittag_leffler(theta, x).unwrap();
                assert!((lt - ml).abs() < 1e-6, "theta={theta} x={x}");
            }
        }
    }

    #[test]
    fn nonnegative_unit_mass() {
        for &theta in &[0.2, 0.5, 0.8] {
            let mass = integrate_to_inf(
                |z: f64| m_wright(theta, z).unwrap(),
                0.0,
                1.0,
                QuadConfig::new(1e-13, 1e-11),
            )
            .unwrap()
            .value;
            assert!((mass - 1.0).abs() < 1e-6, "theta={theta}: {mass}");
            for i in 0..200 {
                assert!(m_wright(theta, i as f64 * 0.05).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn stable_cdf_levy_case() {
        // θ = 1/2: S = 1/(4G²), P(S ≤ x) = erfc(1/(2√x))
        let cases = [
            (0.05, 0.001_565_402_258_002_548_8),
            (0.3, 0.196_705_602_458_946_9),
            (1.0, 0.479_500_122_186_953_5),
            (4.0, 0.723_673_609_831_763_1),
            (50.0, 0.920_344_325_445_942),
        ];
        for (x, want) in cases {
            let got = stable_cdf(0.5, x).unwrap();
            assert!((got - want).abs() < 1e-11, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn stable_density_integrates_to_cdf() {
        let theta = 0.7;
        let mass = crate::quad::integrate(
            |x: f64| stable_density(theta, x).unwrap(),
            0.0,
            2.0,
            QuadConfig::new(1e-12, 1e-10),
        )
        .unwrap()
        .value;
        assert!((mass - stable_cdf(theta, 2.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn near_unit_index_moments() {
        for theta in [0.99, 0.999] {
            let w = (1.0f64 - theta).sqrt();
            let mut e = vec![0.0, 0.5];
            e.extend((-40..=40).map(|k| 1.0 + k as f64 * w * 0.1));
            e.push(3.0);
            e.retain(|x| *x >= 0.0);
            e.sort_by(f64::total_cmp);
            e.dedup();
            let cfg = QuadConfig::new(1e-12, 1e-10);
            let m0 = crate::quad::integrate_breaks(|z| m_wright(theta, z).unwrap(), &e, cfg)
                .unwrap()
                .value;
            let m1 = crate::quad::integrate_breaks(|z| z * m_wright(theta, z).unwrap(), &e, cfg)
                .unwrap()
                .value;
            assert!((m0 - 1.0).abs() < 1e-10, "theta={theta}: {m0}");
            assert!(
                (m1 - crate::specfun::rgamma(1.0 + theta)).abs() < 1e-10,
                "theta={theta}: {m1}"
            );
        }
    }

    #[test]
    fn tail_weight_at_one_half() {
        // M_{1/2}(z) = e^{-z²/4}/√π, so W(y) = ∫_y^∞ e^{-z²/4} z^{-2} dz / √π
        //   = (e^{-y²/4}/y - (√π/2) erfc(y/2)) / √π.
        for y in [0.1, 0.5, 1.0, 3.0] {
            let want =
                ((-y * y / 4.0f64).exp() / y - 0.5 * PI.sqrt() * statrs::function::erf::erfc(y / 2.0)) / PI.sqrt();
            let got = m_wright_tail_weight(0.5, y).unwrap();
            assert!((got - want).abs() < 1e-9 * want.max(1e-3), "y={y}: {got} vs {want}");
        }
    }
}
