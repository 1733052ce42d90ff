//! Closed-form transition probabilities and bath quantities.
//!
//! These serve as reference values for the dynamical solvers. All
//! expressions are in natural units (`hbar = omega = k_B = 1`).

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_velocity<T: Real>(v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveVelocity(v.to_f64().unwrap_or(f64::NAN)))
    }
}

fn check_underdamped<T: Real>(gamma: T) -> Result<()> {
    if gamma >= T::lit(2.0) || gamma < T::zero() {
        Err(Error::Overdamped(gamma.to_f64().unwrap_or(f64::NAN)))
    } else {
        Ok(())
    }
}

/// Level splitting of the avoided crossing between `|up,n>` and `|down,n+1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSplitting<T> {
    pub n: usize,
    pub delta: T,
}

impl<T: Real> CrossingSplitting<T> {
    /// `Delta_n = 2 g sqrt(n + 1)`.
    pub fn new(n: usize, g: T) -> Self {
        CrossingSplitting {
            n,
            delta: T::lit(2.0) * g * T::count(n + 1).sqrt(),
        }
    }
}

/// Two-level Landau-Zener probability to stay diabatic, `exp(-pi Delta^2 / 2v)`.
pub fn standard_lz<T: Real>(delta: T, v: T) -> Result<T> {
    check_velocity(v)?;
    Ok((-T::PI() * delta * delta / (T::lit(2.0) * v)).exp())
}

/// Zero-temperature, undamped spin-flip probability `1 - exp(-2 pi g^2 / v)`.
pub fn lz_generalized<T: Real>(g: T, v: T) -> Result<T> {
    check_velocity(v)?;
    Ok(-(-T::lit(2.0) * T::PI() * g * g / v).exp_m1())
}

/// Probability that `|up,n>` ends with the qubit up, treating both avoided
/// crossings as independent two-level transitions.
///
/// For `n = 0` the path through `|down,n-1>` does not exist and contributes zero.
pub fn path_prob_up<T: Real>(n: usize, g: T, v: T) -> Result<T> {
    let w = |k: usize| standard_lz(T::lit(2.0) * g * T::count(k).sqrt(), v);
    let direct = w(n)? * w(n + 1)?;
    let via_lower = if n == 0 {
        T::zero()
    } else {
        (T::one() - w(n)?) * (T::one() - w(n - 1)?)
    };
    Ok(direct + via_lower)
}

/// Thermal occupation `p_n` of the oscillator at temperature `temperature`.
pub fn boltzmann_weight<T: Real>(n: usize, temperature: T) -> T {
    if temperature <= T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    let beta = temperature.recip();
    -(-beta).exp_m1() * (-beta * T::count(n)).exp()
}

/// Truncation used by [`thermal_avg_direct`] when none is given: `ceil(40 T) + 10`.
pub fn default_n_max<T: Real>(temperature: T) -> usize {
    (T::lit(40.0) * temperature).ceil().to_usize().unwrap_or(0) + 10
}

/// Spin-flip probability from the explicit thermal sum `1 - sum_n p_n P_{up,n->up}`.
pub fn thermal_avg_direct<T: Real>(g: T, v: T, temperature: T, n_max: usize) -> Result<T> {
    check_velocity(v)?;
    if temperature <= T::zero() {
        return Ok(T::one() - path_prob_up(0, g, v)?);
    }
    let mut stay = T::zero();
    for n in 0..=n_max.max(1) {
        stay += boltzmann_weight(n, temperature) * path_prob_up(n, g, v)?;
    }
    Ok(T::one() - stay)
}

/// Temperature factor `B(x) = (1 - e^{-1/T}) / (1 - e^{-(1/T + 2 pi x)})`; 1 at `T = 0`.
pub fn b_function<T: Real>(x: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::one();
    }
    let beta = temperature.recip();
    let num = -(-beta).exp_m1();
    let den = -(-(beta + T::lit(2.0) * T::PI() * x)).exp_m1();
    num / den
}

/// Finite-temperature spin-flip probability in the independent-crossing picture,
/// the geometric-series closed form of [`thermal_avg_direct`].
pub fn pud_finite_t<T: Real>(g: T, v: T, temperature: T) -> Result<T> {
    check_velocity(v)?;
    let x = g * g / v;
    let b1 = b_function(x, temperature);
    let b2 = b_function(x + x, temperature);
    let decay = (-T::lit(2.0) * T::PI() * x).exp();
    Ok(b1 - b2 * decay + (b1 - b2) / decay)
}

/// Effective dissipation strength `alpha = (4/pi) g^2 gamma` seen by the qubit.
pub fn alpha<T: Real>(g: T, gamma: T) -> T {
    T::lit(4.0) / T::PI() * g * g * gamma
}

/// Peaked effective spectral density of oscillator plus bath,
/// `J_eff(w) = 2 alpha w / ((1 - w^2)^2 + (gamma w)^2)`.
pub fn jeff_spectral_density<T: Real>(w: T, g: T, gamma: T) -> T {
    let detune = T::one() - w * w;
    let width = gamma * w;
    T::lit(2.0) * alpha(g, gamma) * w / (detune * detune + width * width)
}

/// Closed form of `sum_k c_k^2` for the normal-mode couplings of the damped oscillator.
///
/// `atan2` handles the `gamma -> 0` limit, where the sum is 1.
pub fn sum_ck2<T: Real>(gamma: T) -> Result<T> {
    check_underdamped(gamma)?;
    let two = T::lit(2.0);
    let y = two - gamma * gamma;
    let x = gamma * (T::lit(4.0) - gamma * gamma).sqrt();
    Ok((y.atan2(x) + T::FRAC_PI_2()) / T::PI())
}

/// Exact zero-temperature spin-flip probability of the dissipative model,
/// `1 - exp(-2 pi g^2 sum_ck2(gamma) / v)`.
pub fn pud_zero_t_dissipative<T: Real>(g: T, v: T, gamma: T) -> Result<T> {
    check_velocity(v)?;
    let s = sum_ck2(gamma)?;
    Ok(-(-T::lit(2.0) * T::PI() * g * g * s / v).exp_m1())
}

/// `int_0^inf J_eff(w) dw`, split at the resonance `w = 1` and integrated adaptively.
pub fn jeff_integral(g: f64, gamma: f64, abs_tol: f64) -> Result<f64> {
    let f = |w: f64| jeff_spectral_density(w, g, gamma);
    let lower = crate::quadrature::adaptive_gk(&f, 0.0, 1.0, abs_tol / 2.0)?;
    let upper = crate::quadrature::adaptive_gk_to_infinity(&f, 1.0, abs_tol / 2.0)?;
    Ok(lower + upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn standard_lz_values() {
        assert_eq!(standard_lz(0.0, 0.3).unwrap(), 1.0);
        // exp(-0.32 pi), 30-digit reference
        assert_abs_diff_eq!(standard_lz(0.08, 0.01).unwrap(), 0.365_931_306_941_293_3, epsilon = 1e-15);
        assert!(standard_lz(0.1, 0.0).is_err());
        assert!(standard_lz(0.1, -1.0).is_err());
    }

    #[test]
    fn lz_generalized_values() {
        assert_eq!(lz_generalized(0.0, 0.01).unwrap(), 0.0);
        assert_abs_diff_eq!(lz_generalized(0.04, 0.01).unwrap(), 0.634_068_693_058_706_7, epsilon = 1e-15);
        let mut prev = 1.0;
        for k in 0..40 {
            let p = lz_generalized(0.04, 0.001 * 1.5f64.powi(k)).unwrap();
            assert!(p < prev);
            prev = p;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn path_probabilities() {
        let (g, v) = (0.04, 0.01);
        let w = |d: f64| standard_lz(d, v).unwrap();
        assert_abs_diff_eq!(path_prob_up(0, g, v).unwrap(), w(2.0 * g), epsilon = 1e-15);
        assert_abs_diff_eq!(
            path_prob_up(1, g, v).unwrap(),
            w(2.0 * g) * w(2.0 * g * 2f64.sqrt()),
            epsilon = 1e-15
        );
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        let expect = w(0.08 * s2) * w(0.08 * s3) + (1.0 - w(0.08 * s2)) * (1.0 - w(0.08));
        assert_abs_diff_eq!(path_prob_up(2, g, v).unwrap(), expect, epsilon = 1e-15);
    }

    #[test]
    fn splitting_grows() {
        let d: Vec<f64> = (0..5).map(|n| CrossingSplitting::new(n, 0.04).delta).collect();
        assert_abs_diff_eq!(d[0], 0.08, epsilon = 1e-15);
        assert!(d.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn thermal_average_limits() {
        let (g, v) = (0.04, 0.01);
        assert_abs_diff_eq!(
            thermal_avg_direct(g, v, 0.0, 10).unwrap(),
            lz_generalized(g, v).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(boltzmann_weight(0, 0.5), 0.864_665, epsilon = 5e-7);
        let direct = thermal_avg_direct(g, v, 0.5, 200).unwrap();
        let closed = pud_finite_t(g, v, 0.5).unwrap();
        assert_abs_diff_eq!(direct, closed, epsilon = 1e-10);
        assert_eq!(default_n_max(0.5), 30);
        assert_eq!(default_n_max(0.0), 10);
    }

    #[test]
    fn b_function_values() {
        assert_eq!(b_function(0.7, 0.0), 1.0);
        assert_abs_diff_eq!(b_function(0.0, 3.0), 1.0, epsilon = 1e-15);
        // (1 - e^-1) / (1 - e^-(1 + 0.32 pi))
        assert_abs_diff_eq!(b_function(0.16, 1.0), 0.730_453_141_545_588_4, epsilon = 1e-15);
        assert!(b_function(0.16, 1e6) < 1e-5);
    }

    #[test]
    fn finite_temperature_limits() {
        let (g, v) = (0.04, 0.01);
        assert_abs_diff_eq!(
            pud_finite_t(g, v, 0.0).unwrap(),
            lz_generalized(g, v).unwrap(),
            epsilon = 1e-14
        );
        assert!(pud_finite_t(g, v, 1e5f64).unwrap().abs() < 1e-4);

        let grid: Vec<f64> = (0..40).map(|k| 0.01 + 0.05 * k as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| pud_finite_t(g, v, t).unwrap()).collect();
        let (imax, vmax) = vals
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        assert!(imax > 0 && imax < vals.len() - 1);
        assert!(vmax > vals[0] && vmax > vals[vals.len() - 1]);
    }

    #[test]
    fn spectral_density_and_alpha() {
        assert_eq!(jeff_spectral_density(0.0, 0.04, 0.02), 0.0);
        assert_abs_diff_eq!(alpha(0.04, 0.02), 4.074e-5, epsilon = 5e-9);
    }

    #[test]
    fn sum_ck2_values() {
        assert_abs_diff_eq!(sum_ck2(0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sum_ck2(1e-9).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sum_ck2(2f64.sqrt()).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sum_ck2(0.02).unwrap(), 0.993_633_696_168_253_9, epsilon = 1e-15);
        assert!(sum_ck2(2.0).is_err());

        let s = 2f64.sqrt();
        let below = sum_ck2(s - 1e-9).unwrap();
        let above = sum_ck2(s + 1e-9).unwrap();
        assert!((below - above).abs() < 1e-8);

        let vals: Vec<f64> = (1..400).map(|k| sum_ck2(k as f64 * 0.005).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_temperature_dissipative() {
        let (g, v) = (0.04, 0.01);
        assert_abs_diff_eq!(
            pud_zero_t_dissipative(g, v, 0.0).unwrap(),
            lz_generalized(g, v).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(pud_zero_t_dissipative(g, v, 0.02).unwrap(), 0.631_719_183_122_667_4, epsilon = 1e-14);
        let vals: Vec<f64> = (0..100)
            .map(|k| pud_zero_t_dissipative(g, v, 0.019 * k as f64).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    /// With `alpha` as defined, the integrated spectral weight equals
    /// `4 g^2 sum_ck2 / sqrt(1 - gamma^2/4)`; the elementary antiderivative of
    /// `w / ((1 - w^2)^2 + gamma^2 w^2)` gives this independently.
    #[test]
    fn jeff_weight_against_antiderivative() {
        for &gamma in &[0.01, 0.1, 1.0] {
            let g = 0.04;
            let q = jeff_integral(g, gamma, 1e-8).unwrap();
            let root = gamma * (4.0 - gamma * gamma).sqrt();
            let elementary = (std::f64::consts::FRAC_PI_2 + ((2.0 - gamma * gamma) / root).atan()) / root;
            let expect = 2.0 * alpha(g, gamma) * elementary;
            assert!((q - expect).abs() < 1e-8 * expect.max(1.0), "gamma={gamma}: {q} vs {expect}");
            let kappa = 1.0 / (1.0 - gamma * gamma / 4.0).sqrt();
            let ratio = q / (g * g * sum_ck2(gamma).unwrap());
            assert!((ratio - 4.0 * kappa).abs() < 1e-6, "gamma={gamma}: ratio {ratio}");
        }
    }

    proptest! {
        #[test]
        fn probabilities_in_unit_interval(
            g in 0.0f64..0.1, v in 0.005f64..0.2, t in 0.0f64..5.0, gamma in 0.0f64..1.99
        ) {
            let ps = [
                lz_generalized(g, v).unwrap(),
                standard_lz(2.0 * g, v).unwrap(),
                path_prob_up(3, g, v).unwrap(),
                thermal_avg_direct(g, v, t, default_n_max(t)).unwrap(),
                pud_finite_t(g, v, t).unwrap(),
                pud_zero_t_dissipative(g, v, gamma).unwrap(),
            ];
            for p in ps {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "{p}");
            }
        }

        #[test]
        fn generalized_matches_standard(g in 0.0f64..1.0, v in 1e-3f64..10.0) {
            let a = 1.0 - standard_lz(2.0 * g, v).unwrap();
            let b = lz_generalized(g, v).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn closed_form_matches_sum(g in 0.0f64..0.1, v in 0.005f64..0.2, t in 0.05f64..3.0) {
            let n_max = default_n_max(t);
            let direct = thermal_avg_direct(g, v, t, n_max).unwrap();
            let closed = pud_finite_t(g, v, t).unwrap();
            let tail = (-(n_max as f64) / t).exp();
            prop_assert!((direct - closed).abs() < 1e-12 + 4.0 * tail);
        }
    }
}
