//! Dimensionless model parameters and their validation.
//!
//! Units are natural throughout: `hbar = 1`, the oscillator frequency is the
//! unit of frequency (`omega = 1`), time is measured in `1/omega`, sweep
//! velocities in `omega^2` and temperatures as `k_B T / (hbar omega)`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result, Violation};
use crate::scalar::Real;

/// How the cross-diffusion coefficient enters the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DxpPolicy {
    /// Drop cross diffusion; the equilibrium position variance is then `coth(1/2T)`.
    #[default]
    Zero,
    /// Evaluate the Drude-regularised Matsubara sum.
    MatsubaraSum,
}

impl DxpPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            DxpPolicy::Zero => "zero",
            DxpPolicy::MatsubaraSum => "matsubara_sum",
        }
    }
}

impl FromStr for DxpPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(DxpPolicy::Zero),
            "matsubara_sum" | "matsubarasum" => Ok(DxpPolicy::MatsubaraSum),
            other => Err(format!("unknown dxp_policy `{other}` (expected zero | matsubara_sum)")),
        }
    }
}

/// Model parameters of the qubit-oscillator-bath sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    /// Qubit-oscillator coupling.
    pub g: T,
    /// Oscillator frequency; must be 1 in natural units.
    pub omega: T,
    /// Sweep velocity of the qubit bias, `E_J(t) = v t`.
    pub v: T,
    /// Oscillator-bath damping rate.
    pub gamma: T,
    /// Bath temperature `k_B T`.
    pub temperature: T,
    /// Drude cutoff frequency (only used by [`DxpPolicy::MatsubaraSum`]).
    pub drude_cutoff: T,
    /// Oscillator basis truncation `N`.
    pub n_trunc: usize,
    pub t_start: T,
    pub t_end: T,
    /// Number of positive Matsubara frequencies retained.
    pub matsubara_terms: usize,
    pub dxp_policy: DxpPolicy,
}

impl<T: Real> Default for SystemParams<T> {
    fn default() -> Self {
        let g = T::lit(0.04);
        let v = T::lit(0.01);
        let (t_start, t_end) = default_window(g, v);
        SystemParams {
            g,
            omega: T::one(),
            v,
            gamma: T::zero(),
            temperature: T::zero(),
            drude_cutoff: T::lit(50.0),
            n_trunc: 16,
            t_start,
            t_end,
            matsubara_terms: 10_000,
            dxp_policy: DxpPolicy::Zero,
        }
    }
}

impl<T: Real> SystemParams<T> {
    /// Parameters for coupling `g` and velocity `v` with every other field at
    /// its default, including the sweep window.
    pub fn new(g: T, v: T) -> Self {
        SystemParams { g, v, ..Default::default() }.with_default_window()
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_temperature(mut self, temperature: T) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_n_trunc(mut self, n: usize) -> Self {
        self.n_trunc = n;
        self
    }

    /// Reset `t_start`/`t_end` to the symmetric default window for the current `g` and `v`.
    pub fn with_default_window(mut self) -> Self {
        let (a, b) = default_window(self.g, self.v);
        self.t_start = a;
        self.t_end = b;
        self
    }

    /// Times of the two avoided crossings, `-omega/v` and `+omega/v`.
    pub fn crossing_times(&self) -> (T, T) {
        let t = self.omega / self.v;
        (-t, t)
    }
}

/// Symmetric sweep window `[-t0, t0]` with `t0 = max(20/v, 10 tau_LZ)` and
/// `tau_LZ = max(1, Delta_0/sqrt(v)) / sqrt(v)`, `Delta_0 = 2g`.
pub fn default_window<T: Real>(g: T, v: T) -> (T, T) {
    if !(v > T::zero()) {
        return (-T::one(), T::one());
    }
    let sv = v.sqrt();
    let delta0 = T::lit(2.0) * g;
    let tau_lz = T::one().max(delta0 / sv) / sv;
    let t0 = (T::lit(20.0) / v).max(T::lit(10.0) * tau_lz);
    (-t0, t0)
}

/// Non-fatal conditions detected during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Warnings {
    /// `k_B T >= omega^2 / g`: thermally occupied levels violate the
    /// independent-crossing condition, so the closed-form finite-temperature
    /// result is not trustworthy.
    pub independent_crossing_invalid: bool,
    /// `n_trunc < 4 + 6 T`: thermal tail may be cut by the basis truncation.
    pub thermal_truncation_risk: bool,
}

impl Warnings {
    pub fn any(&self) -> bool {
        self.independent_crossing_invalid || self.thermal_truncation_risk
    }

    pub fn messages(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.independent_crossing_invalid {
            out.push("temperature >= omega^2/g: independent-crossing formula untrustworthy");
        }
        if self.thermal_truncation_risk {
            out.push("n_trunc < 4 + 6*temperature: thermal tail truncation risk");
        }
        out
    }
}

/// Parameters that passed [`validate`], together with any warnings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams<T> {
    params: SystemParams<T>,
    pub warnings: Warnings,
}

impl<T> std::ops::Deref for ValidatedParams<T> {
    type Target = SystemParams<T>;

    fn deref(&self) -> &SystemParams<T> {
        &self.params
    }
}

impl<T: Copy> ValidatedParams<T> {
    pub fn params(&self) -> SystemParams<T> {
        self.params
    }
}

/// Check every invariant of [`SystemParams`], reporting each violation with its field.
pub fn validate<T: Real>(p: &SystemParams<T>) -> Result<ValidatedParams<T>> {
    let mut errs = Vec::new();
    let mut bad = |field: &'static str, message: String| errs.push(Violation { field, message });
    let finite = |x: T| x.is_finite();

    if !finite(p.g) || p.g < T::zero() {
        bad("g", format!("must be finite and >= 0, got {}", p.g));
    }
    if p.omega != T::one() {
        bad("omega", format!("natural units require omega = 1, got {}", p.omega));
    }
    if !finite(p.v) || p.v <= T::zero() {
        bad("v", format!("must be finite and > 0, got {}", p.v));
    }
    if !finite(p.gamma) || p.gamma < T::zero() {
        bad("gamma", format!("must be finite and >= 0, got {}", p.gamma));
    } else if p.gamma >= T::lit(2.0) * p.omega {
        bad("gamma", format!("overdamped regime excluded (gamma = {} >= 2 omega)", p.gamma));
    }
    if !finite(p.temperature) || p.temperature < T::zero() {
        bad("temperature", format!("must be finite and >= 0, got {}", p.temperature));
    }
    if p.n_trunc < 2 {
        bad("n_trunc", format!("must be >= 2, got {}", p.n_trunc));
    }
    if !(p.t_start < T::zero()) {
        bad("t_start", format!("must be < 0, got {}", p.t_start));
    }
    if !(p.t_end > T::zero()) {
        bad("t_end", format!("must be > 0, got {}", p.t_end));
    }
    if p.v > T::zero() {
        let margin = T::lit(10.0) * p.omega;
        if (p.v * p.t_start).abs() < margin {
            bad("t_start", format!("|v t_start| = {} must be >= 10 omega", (p.v * p.t_start).abs()));
        }
        if (p.v * p.t_end).abs() < margin {
            bad("t_end", format!("|v t_end| = {} must be >= 10 omega", (p.v * p.t_end).abs()));
        }
    }
    if p.dxp_policy == DxpPolicy::MatsubaraSum {
        if !(p.drude_cutoff >= T::lit(10.0) * p.omega) {
            bad("drude_cutoff", format!("must be >= 10 omega for matsubara_sum, got {}", p.drude_cutoff));
        }
        if p.matsubara_terms == 0 {
            bad("matsubara_terms", "must be >= 1 for matsubara_sum".to_string());
        }
    }

    if !errs.is_empty() {
        return Err(Error::InvalidParams(errs));
    }

    let warnings = Warnings {
        independent_crossing_invalid: p.g > T::zero() && p.temperature >= p.omega * p.omega / p.g,
        thermal_truncation_risk: T::count(p.n_trunc) < T::lit(4.0) + T::lit(6.0) * p.temperature,
    };
    Ok(ValidatedParams { params: *p, warnings })
}

const KEYS: [&str; 11] = [
    "g",
    "omega",
    "v",
    "gamma",
    "temperature",
    "drude_cutoff",
    "n_trunc",
    "t_start",
    "t_end",
    "matsubara_terms",
    "dxp_policy",
];

/// Parse the flat `key = value` configuration format.
///
/// Keys are the field names of [`SystemParams`]; `#` starts a comment.
/// Missing keys keep their defaults, and a missing window is derived from
/// `g` and `v`. Unknown or repeated keys are errors. The result is not yet
/// validated.
pub fn parse_config<T: Real>(text: &str) -> Result<SystemParams<T>> {
    let mut p = SystemParams::<T>::default();
    let mut seen = [false; KEYS.len()];
    let mut window_given = (false, false);

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cfg_err = |message: String| Error::Config { line: line_no, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| cfg_err(format!("unknown key `{key}`")))?;
        if seen[slot] {
            return Err(cfg_err(format!("duplicate key `{key}`")));
        }
        seen[slot] = true;

        let real = |v: &str| -> Result<T> {
            v.parse::<f64>()
                .map(T::lit)
                .map_err(|e| cfg_err(format!("`{key}`: {e}")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|e| cfg_err(format!("`{key}`: {e}")))
        };
        match key {
            "g" => p.g = real(value)?,
            "omega" => p.omega = real(value)?,
            "v" => p.v = real(value)?,
            "gamma" => p.gamma = real(value)?,
            "temperature" => p.temperature = real(value)?,
            "drude_cutoff" => p.drude_cutoff = real(value)?,
            "n_trunc" => p.n_trunc = count(value)?,
            "t_start" => {
                p.t_start = real(value)?;
                window_given.0 = true;
            }
            "t_end" => {
                p.t_end = real(value)?;
                window_given.1 = true;
            }
            "matsubara_terms" => p.matsubara_terms = count(value)?,
            "dxp_policy" => p.dxp_policy = value.parse().map_err(cfg_err)?,
            _ => unreachable!(),
        }
    }

    let (a, b) = default_window(p.g, p.v);
    if !window_given.0 {
        p.t_start = a;
    }
    if !window_given.1 {
        p.t_end = b;
    }
    Ok(p)
}

/// Render parameters in the configuration format accepted by [`parse_config`].
pub fn to_config_string<T: Real>(p: &SystemParams<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "g = {}", p.g);
    let _ = writeln!(s, "omega = {}", p.omega);
    let _ = writeln!(s, "v = {}", p.v);
    let _ = writeln!(s, "gamma = {}", p.gamma);
    let _ = writeln!(s, "temperature = {}", p.temperature);
    let _ = writeln!(s, "drude_cutoff = {}", p.drude_cutoff);
    let _ = writeln!(s, "n_trunc = {}", p.n_trunc);
    let _ = writeln!(s, "t_start = {}", p.t_start);
    let _ = writeln!(s, "t_end = {}", p.t_end);
    let _ = writeln!(s, "matsubara_terms = {}", p.matsubara_terms);
    let _ = writeln!(s, "dxp_policy = {}", p.dxp_policy.as_str());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemParams<f64> {
        SystemParams {
            n_trunc: 8,
            t_start: -2000.0,
            t_end: 2000.0,
            ..SystemParams::new(0.04, 0.01)
        }
    }

    #[test]
    fn reference_point_is_valid_without_warnings() {
        let v = validate(&base()).unwrap();
        assert!(!v.warnings.any());
    }

    #[test]
    fn overdamped_rejected() {
        let err = validate(&base().with_gamma(2.5)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gamma"), "{msg}");
        assert!(msg.contains("overdamped regime excluded"), "{msg}");
    }

    #[test]
    fn high_temperature_warns() {
        // omega^2/g = 25 < 30
        let v = validate(&base().with_temperature(30.0).with_n_trunc(200)).unwrap();
        assert!(v.warnings.independent_crossing_invalid);
        assert!(!v.warnings.thermal_truncation_risk);
        let v = validate(&base().with_temperature(24.9).with_n_trunc(200)).unwrap();
        assert!(!v.warnings.independent_crossing_invalid);
        let v = validate(&base().with_temperature(25.0).with_n_trunc(200)).unwrap();
        assert!(v.warnings.independent_crossing_invalid);
    }

    #[test]
    fn truncation_warning_threshold() {
        let v = validate(&base().with_temperature(1.0).with_n_trunc(9)).unwrap();
        assert!(v.warnings.thermal_truncation_risk);
        let v = validate(&base().with_temperature(1.0).with_n_trunc(10)).unwrap();
        assert!(!v.warnings.thermal_truncation_risk);
    }

    #[test]
    fn every_violation_reported() {
        let p = SystemParams {
            g: -1.0,
            v: 0.0,
            temperature: -0.1,
            n_trunc: 1,
            t_start: 5.0,
            ..base()
        };
        match validate(&p) {
            Err(Error::InvalidParams(v)) => {
                let fields: Vec<_> = v.iter().map(|x| x.field).collect();
                for f in ["g", "v", "temperature", "n_trunc", "t_start"] {
                    assert!(fields.contains(&f), "missing {f} in {fields:?}");
                }
            }
            other => panic!("expected InvalidParams, got {other:?}"),
        }
    }

    #[test]
    fn window_must_cover_crossings() {
        let p = SystemParams { t_start: -500.0, ..base() };
        assert!(validate(&p).is_err());
    }

    #[test]
    fn matsubara_requires_cutoff() {
        let p = SystemParams {
            dxp_policy: DxpPolicy::MatsubaraSum,
            drude_cutoff: 5.0,
            ..base()
        };
        let msg = validate(&p).unwrap_err().to_string();
        assert!(msg.contains("drude_cutoff"));
    }

    #[test]
    fn default_window_values() {
        let (a, b) = default_window(0.04, 0.01);
        assert_eq!((a, b), (-2000.0, 2000.0));
        // strong coupling, slow sweep: tau_LZ dominates
        let (a, _) = default_window(1.0, 0.001);
        let tau = (2.0 / 0.001f64.sqrt()) / 0.001f64.sqrt();
        assert!((a + (20.0f64 / 0.001).max(10.0 * tau)).abs() < 1e-9);
    }

    #[test]
    fn validate_is_idempotent() {
        let v1 = validate(&base().with_temperature(0.7)).unwrap();
        let v2 = validate(&v1).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn config_round_trip_and_errors() {
        let p = base().with_gamma(0.01).with_temperature(0.5);
        let text = to_config_string(&p);
        let q: SystemParams<f64> = parse_config(&text).unwrap();
        assert_eq!(p, q);

        let e = parse_config::<f64>("g = 0.1\nfoo = 3\n").unwrap_err();
        assert!(e.to_string().contains("unknown key `foo`"));
        assert!(parse_config::<f64>("g = 0.1\ng = 0.2\n").is_err());
        assert!(parse_config::<f64>("g 0.1\n").is_err());

        let q: SystemParams<f64> = parse_config("# comment\n v = 0.05 # inline\n").unwrap();
        assert_eq!(q.v, 0.05);
        assert_eq!(q.t_end, 400.0);
    }
}
