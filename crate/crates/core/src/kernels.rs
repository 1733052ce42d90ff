//! Bath-derived coefficients of the master equation.

use crate::params::{DxpPolicy, SystemParams};
use crate::scalar::{coth, Cplx, Real};

/// Momentum diffusion `coth(1/2T)`; exactly 1 at `T = 0`.
pub fn dpp<T: Real>(temperature: T) -> T {
    if temperature <= T::zero() {
        T::one()
    } else {
        coth((temperature + temperature).recip())
    }
}

/// Result of the cross-diffusion evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DxpEstimate<T> {
    pub value: T,
    /// Estimated error of the truncated sum after the tail correction.
    pub residual: T,
    /// False when `residual` exceeds `1e-10` of `|value|`.
    pub converged: bool,
}

/// `f(nu) = (1 - nu w) / ((nu + w)(nu^2 + 1)) = 1/(nu + w) - nu/(nu^2 + 1)`.
fn matsubara_term<T: Real>(nu: T, cutoff: T) -> T {
    (nu + cutoff).recip() - nu / (nu * nu + T::one())
}

/// `int f(nu) dnu` antiderivative, used for the tail beyond the last retained term.
fn matsubara_primitive<T: Real>(nu: T, cutoff: T) -> T {
    (nu + cutoff).ln() - T::lit(0.5) * (nu * nu + T::one()).ln()
}

/// Cross diffusion from the symmetric Matsubara sum with Drude cutoff `cutoff`.
///
/// The sum runs over `|n| <= terms` with `nu_n = 2 pi |n| T`; the remainder is
/// replaced by the midpoint integral of the summand. At `T = 0` the sum becomes
/// its integral, `-(w^2/(w^2 + 1)) ln w`.
pub fn dxp<T: Real>(temperature: T, cutoff: T, terms: usize, policy: DxpPolicy) -> DxpEstimate<T> {
    let zero = DxpEstimate {
        value: T::zero(),
        residual: T::zero(),
        converged: true,
    };
    if policy == DxpPolicy::Zero {
        return zero;
    }
    let w2 = cutoff * cutoff;
    let shape = w2 / (w2 + T::one());
    if temperature <= T::zero() {
        return DxpEstimate {
            value: -shape * cutoff.ln(),
            ..zero
        };
    }
    let nu1 = T::lit(2.0) * T::PI() * temperature;
    let mut sum = T::zero();
    // smallest terms first
    for n in (1..=terms).rev() {
        sum += matsubara_term(nu1 * T::count(n), cutoff);
    }
    let edge = nu1 * (T::count(terms) + T::lit(0.5));
    let tail = -matsubara_primitive(edge, cutoff) / nu1;
    let total = matsubara_term(T::zero(), cutoff) + T::lit(2.0) * (sum + tail);
    let value = T::lit(0.5) * nu1 * shape * total;

    // midpoint-rule error of the tail: |F'(M + 1/2)| / 24 on each side, F(n) = f(nu1 n)
    let slope = {
        let d1 = (edge + cutoff).powi(2).recip();
        let e2 = edge * edge;
        let d2 = (T::one() - e2) / (e2 + T::one()).powi(2);
        (-d1 - d2).abs()
    };
    let residual = T::lit(0.5) * nu1 * shape * T::lit(2.0) * nu1 * slope / T::lit(24.0);
    DxpEstimate {
        value,
        residual,
        converged: residual <= T::lit(1e-10) * value.abs(),
    }
}

/// `h(w) = w coth(w s)` with `s = 1/2T`, and its first three derivatives.
fn thermal_energy_derivatives<T: Real>(w: T, s: T) -> [T; 4] {
    let c = coth(s * w);
    let c1 = T::one() - c * c;
    let c2 = -T::lit(2.0) * c * c1;
    let c3 = c1 * (T::lit(6.0) * c * c - T::lit(2.0));
    let h = w * c;
    let h1 = c + s * w * c1;
    let h2 = T::lit(2.0) * s * c1 + s * s * w * c2;
    let h3 = T::lit(3.0) * s * s * c2 + s * s * s * w * c3;
    [h, h1, h2, h3]
}

/// `w coth(w/2T)`, even in `w`; `|w|` at `T = 0` and `2T (1 + y^2/3)` for tiny `y = w/2T`.
fn thermal_energy<T: Real>(w: T, temperature: T) -> T {
    let w = w.abs();
    if temperature <= T::zero() {
        return w;
    }
    let s = (temperature + temperature).recip();
    let y = s * w;
    if y < T::lit(1e-4) {
        return (temperature + temperature) * (T::one() + y * y / T::lit(3.0));
    }
    w * coth(y)
}

/// Radius around `|w| = 1` inside which [`dsigma`] uses its series expansion.
pub const DSIGMA_SERIES_RADIUS: f64 = 1e-3;

/// Qubit-dependent force `g / (2(1 - w^2)) [w coth(w/2T) - coth(1/2T)]`
/// at instantaneous qubit frequency `omega_j`.
pub fn dsigma<T: Real>(omega_j: T, temperature: T, g: T) -> T {
    let w = omega_j.abs();
    let delta = w - T::one();
    let half_g = T::lit(0.5) * g;
    if delta.abs() < T::lit(DSIGMA_SERIES_RADIUS) {
        // 1 - w^2 = -delta (2 + delta); expand h(1 + delta) - h(1) in delta
        let slope = if temperature <= T::zero() {
            T::one()
        } else {
            let s = (temperature + temperature).recip();
            let [_, h1, h2, h3] = thermal_energy_derivatives(T::one(), s);
            h1 + h2 * delta / T::lit(2.0) + h3 * delta * delta / T::lit(6.0)
        };
        return -half_g * slope / (T::lit(2.0) + delta);
    }
    let bracket = thermal_energy(w, temperature) - thermal_energy(T::one(), temperature);
    half_g * bracket / (T::one() - w * w)
}

/// Radius in `b - a` inside which [`ic_is`] uses its series expansion.
pub const IC_IS_SERIES_RADIUS: f64 = 1e-6;

/// Auxiliary functions of the Heisenberg solution:
/// `Ic = a (cos at - cos bt) / (a^2 - b^2)` and `Is = (b sin at - a sin bt) / (a^2 - b^2)`.
pub fn ic_is<T: Real>(a: T, b: T, t: T) -> (T, T) {
    // Ic is odd in a and even in b; Is is odd in both.
    let sa = if a < T::zero() { -T::one() } else { T::one() };
    let sb = if b < T::zero() { -T::one() } else { T::one() };
    let (a, b) = (a.abs(), b.abs());
    let eps = b - a;
    let (ic, is) = if eps.abs() < T::lit(IC_IS_SERIES_RADIUS) {
        let den = a + b;
        if den == T::zero() {
            return (T::zero(), T::zero());
        }
        let (s, c) = (a * t).sin_cos();
        let half = T::lit(0.5);
        let sixth = T::lit(1.0 / 6.0);
        let q1 = -t * s;
        let q2 = -t * t * c;
        let q3 = t * t * t * s;
        let r1 = s - a * t * c;
        let r2 = a * t * t * s;
        let r3 = a * t * t * t * c;
        let ic = a * (q1 + q2 * eps * half + q3 * eps * eps * sixth) / den;
        let is = -(r1 + r2 * eps * half + r3 * eps * eps * sixth) / den;
        (ic, is)
    } else {
        let den = a * a - b * b;
        let ic = a * ((a * t).cos() - (b * t).cos()) / den;
        let is = (b * (a * t).sin() - a * (b * t).sin()) / den;
        (ic, is)
    };
    (sa * ic, sa * sb * is)
}

/// Diffusion constants for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionCoefficients<T> {
    pub dpp: T,
    pub dxp: T,
    /// Equilibrium variance of `X`: `dpp + gamma * dxp`.
    pub d_combined: T,
    pub dxp_converged: bool,
}

impl<T: Real> DiffusionCoefficients<T> {
    pub fn from_params(p: &SystemParams<T>) -> Self {
        let cross = dxp(p.temperature, p.drude_cutoff, p.matsubara_terms, p.dxp_policy);
        let d = dpp(p.temperature);
        DiffusionCoefficients {
            dpp: d,
            dxp: cross.value,
            d_combined: d + p.gamma * cross.value,
            dxp_converged: cross.converged,
        }
    }
}

/// Constants of the damped-oscillator Liouvillian eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenbasisSpec<T> {
    pub gamma: T,
    /// `-gamma/2 + i sqrt(1 - gamma^2/4)`.
    pub lambda: Cplx<T>,
    /// `D / (lambda^2 - 1)`.
    pub sigma_a: Cplx<T>,
    /// `1 / sqrt(1 - gamma^2/4)`.
    pub kappa: T,
    /// Equilibrium variances of the stationary Gaussian: `<x^2> = D`, `<p^2> = Dpp`.
    pub var_x: T,
    pub var_p: T,
}

impl<T: Real> EigenbasisSpec<T> {
    pub fn new(gamma: T, diff: &DiffusionCoefficients<T>) -> Self {
        let omega = (T::one() - gamma * gamma / T::lit(4.0)).sqrt();
        let lambda = Cplx::new(-gamma / T::lit(2.0), omega);
        let mu = (lambda * lambda - Cplx::new(T::one(), T::zero())).inv();
        EigenbasisSpec {
            gamma,
            lambda,
            sigma_a: mu * diff.d_combined,
            kappa: omega.recip(),
            var_x: diff.d_combined,
            var_p: diff.dpp,
        }
    }

    pub fn from_params(p: &SystemParams<T>) -> Self {
        Self::new(p.gamma, &DiffusionCoefficients::from_params(p))
    }

    /// `mu = 1/(lambda^2 - 1)`.
    pub fn mu(&self) -> Cplx<T> {
        (self.lambda * self.lambda - Cplx::new(T::one(), T::zero())).inv()
    }

    /// Eigenvalue `n lambda + n' lambda*` of the eigenfunction `(n, n')`.
    pub fn eigenvalue(&self, n: usize, np: usize) -> Cplx<T> {
        self.lambda * T::count(n) + self.lambda.conj() * T::count(np)
    }
}
