use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `zeta(kappa, tau) = sqrt(-kappa) tau coth(sqrt(-kappa) tau)` for `kappa < 0`, else 1.
///
/// Always `>= 1` and nondecreasing in `tau`.
pub fn zeta(kappa: f64, tau: f64) -> f64 {
    if kappa >= 0.0 {
        return 1.0;
    }
    let x = (-kappa).sqrt() * tau.max(0.0);
    if x < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 3.0 - x2 * x2 / 45.0
    } else {
        x / x.tanh()
    }
}

/// `sigma(K, tau) = sqrt(K) tau cot(sqrt(K) tau)` for `K > 0`, else 1.
///
/// Defined for `sqrt(K) tau < pi`; in `(-inf, 1]`, positive below `pi/2`.
pub fn sigma(k_upper: f64, tau: f64) -> Result<f64> {
    if k_upper <= 0.0 {
        return Ok(1.0);
    }
    let x = k_upper.sqrt() * tau.max(0.0);
    if x >= PI {
        return Err(Error::Domain(format!(
            "sigma needs sqrt(K) tau < pi, got {x:.6}"
        )));
    }
    if x < 1e-4 {
        let x2 = x * x;
        Ok(1.0 - x2 / 3.0 - x2 * x2 / 45.0)
    } else {
        Ok(x / x.tan())
    }
}

/// Upper Jacobi comparison function `s(kappa, t)`: `sinh(sqrt(-kappa) t)/sqrt(-kappa)` or `t`.
pub fn jacobi_s_upper(kappa: f64, t: f64) -> f64 {
    if kappa < 0.0 {
        let r = (-kappa).sqrt();
        (r * t).sinh() / r
    } else {
        t
    }
}

/// Lower Jacobi comparison function `S(K, t)`: `sin(sqrt(K) t)/sqrt(K)` or `t`.
pub fn jacobi_s_lower(k_upper: f64, t: f64) -> f64 {
    if k_upper > 0.0 {
        let r = k_upper.sqrt();
        (r * t).sin() / r
    } else {
        t
    }
}

/// `s(kappa, t) / S(K, t)` on `0 <= t <= 1/sqrt(K_m)`; at most 3 there.
pub fn jacobi_ratio(kappa: f64, k_upper: f64, t: f64) -> Result<f64> {
    let k_m = kappa.abs().max(k_upper.abs());
    if t < 0.0 || (k_m > 0.0 && t > 1.0 / k_m.sqrt()) {
        return Err(Error::Domain(format!(
            "jacobi ratio needs 0 <= t <= 1/sqrt(K_m), got t = {t}"
        )));
    }
    if k_upper > 0.0 && k_upper.sqrt() * t >= PI {
        return Err(Error::Domain("t beyond the first conjugate point".into()));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    // both functions share the factor t; divide it out for small t
    let upper = if kappa < 0.0 {
        crate::manifold::sinhc((-kappa).sqrt() * t)
    } else {
        1.0
    };
    let lower = if k_upper > 0.0 {
        crate::manifold::sinc(k_upper.sqrt() * t)
    } else {
        1.0
    };
    Ok(upper / lower)
}

/// Curvature and problem constants plus the step sizes derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryBounds {
    pub kappa: f64,
    pub k_upper: f64,
    /// `max(|kappa|, |K|)`.
    pub k_m: f64,
    /// Bound on the initial distance to the solution.
    pub d: f64,
    /// Lipschitz constant of the field.
    pub l: f64,
    /// Norm bound of the field on the region.
    pub g: f64,
    /// `zeta(kappa, 7D/5)`.
    pub zeta_bar: f64,
    /// `sigma(K, 91D/81)`.
    pub sigma_bar: f64,
}

impl GeometryBounds {
    pub fn derive(kappa: f64, k_upper: f64, d: f64, l: f64, g: f64) -> Result<Self> {
        if kappa > k_upper {
            return Err(Error::Domain(format!(
                "curvature interval is empty: [{kappa}, {k_upper}]"
            )));
        }
        if !(d > 0.0 && l > 0.0 && g >= 0.0) || !d.is_finite() || !l.is_finite() || !g.is_finite()
        {
            return Err(Error::Domain(format!(
                "need D > 0, L > 0, G >= 0 (got D = {d}, L = {l}, G = {g})"
            )));
        }
        if k_upper > 0.0 {
            let cap = 4.0 * PI / (9.0 * k_upper.sqrt());
            if d > cap {
                return Err(Error::Domain(format!(
                    "D = {d} exceeds 4 pi / (9 sqrt K) = {cap}"
                )));
            }
        }
        Ok(GeometryBounds {
            kappa,
            k_upper,
            k_m: kappa.abs().max(k_upper.abs()),
            d,
            l,
            g,
            zeta_bar: zeta(kappa, 7.0 * d / 5.0),
            sigma_bar: sigma(k_upper, 91.0 * d / 81.0)?,
        })
    }

    /// Radius of the region that iterates provably stay in: `6D/5`.
    pub fn region_radius(&self) -> f64 {
        1.2 * self.d
    }

    /// REG step size
    /// `min{1/sqrt(8L^2 + 306 K_m G^2), sigma/(56 sqrt(K_m) D L + 8 zeta L + sigma L)}`.
    pub fn step_size_reg(&self) -> f64 {
        let GeometryBounds { k_m, d, l, g, zeta_bar, sigma_bar, .. } = *self;
        let a = 1.0 / (8.0 * l * l + 306.0 * k_m * g * g).sqrt();
        let b = sigma_bar / (56.0 * k_m.sqrt() * d * l + 8.0 * zeta_bar * l + sigma_bar * l);
        a.min(b)
    }

    /// RPEG step size for monotone fields
    /// `min{sigma/(152 L D sqrt(K_m) + 35 zeta L), 1/sqrt(36L^2 + 648 K_m G^2 + 72 sqrt(2 K_m) G L)}`.
    pub fn step_size_rpeg(&self) -> f64 {
        let GeometryBounds { k_m, d, l, zeta_bar, sigma_bar, .. } = *self;
        let a = sigma_bar / (152.0 * l * d * k_m.sqrt() + 35.0 * zeta_bar * l);
        a.min(self.rpeg_norm_cap())
    }

    /// RPEG step size under which the saddle-gap rates hold; the curvature
    /// term uses `192 L D sqrt(2 K_m)` instead of `152 L D sqrt(K_m)`.
    pub fn step_size_rpeg_saddle(&self) -> f64 {
        let GeometryBounds { k_m, d, l, zeta_bar, sigma_bar, .. } = *self;
        let a = sigma_bar / (192.0 * l * d * (2.0 * k_m).sqrt() + 35.0 * zeta_bar * l);
        a.min(self.rpeg_norm_cap())
    }

    fn rpeg_norm_cap(&self) -> f64 {
        let GeometryBounds { k_m, l, g, .. } = *self;
        1.0 / (36.0 * l * l + 648.0 * k_m * g * g + 72.0 * (2.0 * k_m).sqrt() * g * l).sqrt()
    }

    /// RCEG step size `sqrt(sigma'/(4 zeta' L^2))` with both constants at `3D/2`.
    pub fn step_size_rceg(&self) -> Result<f64> {
        let tau = 1.5 * self.d;
        let s = sigma(self.k_upper, tau)?;
        let z = zeta(self.kappa, tau);
        if s <= 0.0 {
            return Err(Error::Domain("sigma(K, 3D/2) is not positive".into()));
        }
        Ok((s / (4.0 * z * self.l * self.l)).sqrt())
    }

    /// Lyapunov weight `sigma/16`.
    pub fn lyapunov_lambda(&self) -> f64 {
        self.sigma_bar / 16.0
    }

    /// Coefficient of the transported half-step difference in the RPEG norm recursion,
    /// `(24 L^2 + 432 K_m G^2 + 48 G L sqrt(2 K_m)) eta^2 - 2/3`.
    pub fn rho(&self, eta: f64) -> f64 {
        let GeometryBounds { k_m, l, g, .. } = *self;
        (24.0 * l * l + 432.0 * k_m * g * g + 48.0 * g * l * (2.0 * k_m).sqrt()) * eta * eta
            - 2.0 / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert_eq!(zeta(0.5, 3.0), 1.0);
        assert!((zeta(-1.0, 1e-9) - 1.0).abs() < 1e-15);
        assert!((zeta(-1.0, 1.0) - 1.313_035_285_499_331_3).abs() < 1e-15);
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(-2.0, 5.0).unwrap(), 1.0);
        assert!((sigma(1.0, PI / 4.0).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((sigma(1.0, 1.0).unwrap() - 0.642_092_615_934_330_7).abs() < 1e-15);
        assert!(sigma(1.0, PI).is_err());
    }

    #[test]
    fn zeta_and_sigma_are_monotone_on_dense_grids() {
        for kappa in [-4.0, -1.0, -0.5, 0.0] {
            let mut prev = zeta(kappa, 0.0);
            for i in 1..=2000 {
                let z = zeta(kappa, i as f64 * 0.0025);
                assert!(z >= prev - 1e-15 && z >= 1.0);
                prev = z;
            }
        }
        for k in [0.0f64, 0.5, 1.0, 4.0] {
            let limit = if k > 0.0 { PI / k.sqrt() } else { 5.0 };
            let mut prev = sigma(k, 0.0).unwrap();
            for i in 1..2000 {
                let s = sigma(k, limit * i as f64 / 2000.0).unwrap();
                assert!(s <= prev + 1e-15 && s <= 1.0);
                prev = s;
            }
        }
    }

    #[test]
    fn series_branches_join_smoothly() {
        for x in [0.99e-4, 1.01e-4] {
            assert!((zeta(-1.0, x) - x / x.tanh()).abs() < 1e-14);
            assert!((sigma(1.0, x).unwrap() - x / x.tan()).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_ratio_values() {
        for t in [0.0, 0.3, 2.0] {
            assert_eq!(jacobi_ratio(0.0, 0.0, t).unwrap(), 1.0);
        }
        let r = jacobi_ratio(-1.0, 1.0, 1.0).unwrap();
        assert!((r - 1.396_603_346_830_899_7).abs() < 1e-14);
        assert!((jacobi_ratio(-1.0, 1.0, 1e-8).unwrap() - 1.0).abs() < 1e-12);
        assert!(jacobi_ratio(-1.0, 1.0, 1.01).is_err());
        assert!(jacobi_ratio(-1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn jacobi_ratio_never_exceeds_three() {
        for (kappa, k) in [(-1.0f64, 1.0f64), (-1.0, 0.0), (0.0, 1.0)] {
            let k_m: f64 = f64::max(kappa.abs(), k.abs());
            let t_max = 1.0 / k_m.sqrt();
            for i in 0..=1000 {
                let r = jacobi_ratio(kappa, k, t_max * i as f64 / 1000.0).unwrap();
                assert!(r <= 3.0 + 1e-12);
            }
        }
    }

    #[test]
    fn flat_bounds() {
        let b = GeometryBounds::derive(0.0, 0.0, 2.0, 3.0, 7.0).unwrap();
        assert_eq!((b.zeta_bar, b.sigma_bar, b.k_m), (1.0, 1.0, 0.0));
    }

    #[test]
    fn curved_bounds_use_the_inflated_radii() {
        let b = GeometryBounds::derive(-1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((b.zeta_bar - 1.581_292_589_043_855).abs() < 1e-14);
        assert_eq!(b.sigma_bar, 1.0);
        let b = GeometryBounds::derive(0.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert!((b.sigma_bar - 0.892_539_196_772_736_1).abs() < 1e-14);
    }

    #[test]
    fn invalid_inputs_are_domain_errors() {
        assert!(GeometryBounds::derive(0.0, 1.0, 1.6, 1.0, 1.0).is_err());
        assert!(GeometryBounds::derive(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(GeometryBounds::derive(0.0, 0.0, 1.0, 0.0, 1.0).is_err());
        assert!(GeometryBounds::derive(0.0, 0.0, 1.0, 1.0, -1.0).is_err());
        assert!(GeometryBounds::derive(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(GeometryBounds::derive(0.0, 1.0, 4.0 * PI / 9.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn flat_step_sizes() {
        let b = GeometryBounds::derive(0.0, 0.0, 5.0, 1.0, 3.0).unwrap();
        assert!((b.step_size_reg() - 1.0 / 9.0).abs() < 1e-16);
        assert!((b.step_size_rpeg() - 1.0 / 35.0).abs() < 1e-16);
        for c in [0.5, 2.0, 10.0] {
            let bc = GeometryBounds::derive(0.0, 0.0, 5.0, c, 3.0).unwrap();
            assert!((bc.step_size_rpeg() - b.step_size_rpeg() / c).abs() < 1e-16);
        }
    }

    /// Independent re-evaluation of both formulas with hand-written coth.
    #[test]
    fn curved_step_sizes_match_an_independent_evaluation() {
        let b = GeometryBounds::derive(-1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let x: f64 = 1.4;
        let coth = (x.exp() + (-x).exp()) / (x.exp() - (-x).exp());
        let zb = x * coth;
        let reg = f64::min(1.0 / (8.0f64 + 306.0).sqrt(), 1.0 / (56.0 + 8.0 * zb + 1.0));
        let rpeg = f64::min(
            1.0 / (152.0 + 35.0 * zb),
            1.0 / (36.0 + 648.0 + 72.0 * 2.0f64.sqrt()).sqrt(),
        );
        assert!((b.step_size_reg() - reg).abs() < 1e-15);
        assert!((b.step_size_rpeg() - rpeg).abs() < 1e-15);
    }

    #[test]
    fn step_sizes_shrink_as_constants_grow() {
        let base = (-1.0, 0.0, 0.5, 1.0, 1.0);
        let eval = |k: f64, d: f64, l: f64, g: f64| {
            let b = GeometryBounds::derive(k, 0.0, d, l, g).unwrap();
            (b.step_size_reg(), b.step_size_rpeg(), b.step_size_rpeg_saddle())
        };
        let (k0, _, d0, l0, g0) = base;
        let r0 = eval(k0, d0, l0, g0);
        for scale in [1.5, 3.0, 10.0] {
            for r in [
                eval(k0 * scale, d0, l0, g0),
                eval(k0, d0 * scale, l0, g0),
                eval(k0, d0, l0 * scale, g0),
                eval(k0, d0, l0, g0 * scale),
            ] {
                assert!(r.0 <= r0.0 && r.1 <= r0.1 && r.2 <= r0.2);
            }
        }
        let mut prev = f64::INFINITY;
        for l in [1.0, 10.0, 100.0, 1e4, 1e8] {
            let s = GeometryBounds::derive(0.0, 0.0, 1.0, l, 1.0).unwrap().step_size_reg();
            assert!(s < prev);
            prev = s;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn rceg_step_in_flat_space_is_half_over_l() {
        let b = GeometryBounds::derive(0.0, 0.0, 1.0, 2.0, 1.0).unwrap();
        assert!((b.step_size_rceg().unwrap() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn rho_is_negative_under_the_rpeg_step() {
        for (k, d) in [(-1.0, 1.0), (0.0, 3.0), (-0.5, 2.0)] {
            let b = GeometryBounds::derive(k, 0.0, d, 1.3, 2.0).unwrap();
            assert!(b.rho(b.step_size_rpeg()) < 0.0);
        }
    }
}
