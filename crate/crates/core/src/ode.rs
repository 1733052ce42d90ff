//! Adaptive Dormand-Prince 5(4) integration of complex linear systems with dense output.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
    /// Largest step the controller may take. Keeps modes near the stability
    /// boundary from growing up to the error tolerance.
    pub h_max: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            rtol: T::lit(1e-8),
            atol: T::lit(1e-10),
            max_steps: 50_000_000,
            h_max: T::infinity(),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// `rtol = 1e-10`, `atol = 1e-12`: keeps the accumulated norm error of a
    /// window of a few thousand periods below 1e-8.
    pub fn tight() -> Self {
        Tolerances {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            ..Self::default()
        }
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Coefficients<T> {
    c: [T; 4],
    a: [T; 15],
    b: [T; 5],
    e: [T; 6],
    d: [T; 6],
}

impl<T: Real> Coefficients<T> {
    fn new() -> Self {
        let l = T::lit;
        Coefficients {
            c: [l(C2), l(C3), l(C4), l(C5)],
            a: [
                l(A21),
                l(A31),
                l(A32),
                l(A41),
                l(A42),
                l(A43),
                l(A51),
                l(A52),
                l(A53),
                l(A54),
                l(A61),
                l(A62),
                l(A63),
                l(A64),
                l(A65),
            ],
            b: [l(B1), l(B3), l(B4), l(B5), l(B6)],
            e: [l(E1), l(E3), l(E4), l(E5), l(E6), l(E7)],
            d: [l(D1), l(D3), l(D4), l(D5), l(D6), l(D7)],
        }
    }
}

fn weighted_rms<T: Real>(v: &[Cplx<T>], scale: impl Fn(usize) -> T) -> T {
    if v.is_empty() {
        return T::zero();
    }
    let mut acc = T::zero();
    for (i, x) in v.iter().enumerate() {
        let r = x.norm() / scale(i);
        acc += r * r;
    }
    (acc / T::count(v.len())).sqrt()
}

/// Integrate `dy/dt = f(t, y)` from `t0` through the ascending sample times `samples`,
/// calling `observe(t, y)` at each sample with the dense-output state.
///
/// `y` holds the initial state on entry and the state at the last sample on return.
/// `observe` may abort the integration by returning an error.
pub fn dopri5<T, F, O>(
    mut f: F,
    t0: T,
    y: &mut [Cplx<T>],
    samples: &[T],
    tol: &Tolerances<T>,
    mut observe: O,
) -> Result<StepStats>
where
    T: Real,
    F: FnMut(T, &[Cplx<T>], &mut [Cplx<T>]),
    O: FnMut(T, &[Cplx<T>]) -> Result<()>,
{
    let mut stats = StepStats::default();
    let Some(&t_end) = samples.last() else {
        return Ok(stats);
    };
    let dim = y.len();
    let k = Coefficients::<T>::new();
    let zero = Cplx::new(T::zero(), T::zero());
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut k5 = vec![zero; dim];
    let mut k6 = vec![zero; dim];
    let mut k7 = vec![zero; dim];
    let mut ytmp = vec![zero; dim];
    let mut ynew = vec![zero; dim];
    let mut err = vec![zero; dim];
    let mut dense = vec![zero; dim];

    let mut next_sample = 0;
    while next_sample < samples.len() && samples[next_sample] <= t0 {
        observe(samples[next_sample], y)?;
        next_sample += 1;
    }
    let mut t = t0;
    if next_sample == samples.len() {
        return Ok(stats);
    }

    f(t, y, &mut k1);
    stats.rhs_evals += 1;

    let scale_of = |a: &[Cplx<T>], b: &[Cplx<T>], i: usize| tol.atol + tol.rtol * a[i].norm().max(b[i].norm());

    // initial step (Hairer-Norsett-Wanner heuristic)
    let mut h = {
        let d0 = weighted_rms(y, |i| scale_of(y, y, i));
        let d1 = weighted_rms(&k1, |i| scale_of(y, y, i));
        let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        for i in 0..dim {
            ytmp[i] = y[i] + k1[i] * h0;
        }
        f(t + h0, &ytmp, &mut k2);
        stats.rhs_evals += 1;
        let diff: Vec<Cplx<T>> = k2.iter().zip(&k1).map(|(a, b)| (a - b) / h0).collect();
        let d2 = weighted_rms(&diff, |i| scale_of(y, y, i));
        let h1 = if d1.max(d2) <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
        };
        (T::lit(100.0) * h0).min(h1).min(t_end - t).min(tol.h_max)
    };

    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(10.0);
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::TooManySteps {
                t: t.to_f64().unwrap_or(f64::NAN),
                max_steps: tol.max_steps,
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let h_floor = T::epsilon() * T::lit(16.0) * t.abs().max(T::one());
        if h < h_floor {
            return Err(Error::StepSizeUnderflow {
                t: t.to_f64().unwrap_or(f64::NAN),
                h: h.to_f64().unwrap_or(f64::NAN),
            });
        }
        let a = &k.a;
        for i in 0..dim {
            ytmp[i] = y[i] + k1[i] * (h * a[0]);
        }
        f(t + k.c[0] * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + (k1[i] * a[1] + k2[i] * a[2]) * h;
        }
        f(t + k.c[1] * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + (k1[i] * a[3] + k2[i] * a[4] + k3[i] * a[5]) * h;
        }
        f(t + k.c[2] * h, &ytmp, &mut k4);
        for i in 0..dim {
            ytmp[i] = y[i] + (k1[i] * a[6] + k2[i] * a[7] + k3[i] * a[8] + k4[i] * a[9]) * h;
        }
        f(t + k.c[3] * h, &ytmp, &mut k5);
        for i in 0..dim {
            ytmp[i] = y[i] + (k1[i] * a[10] + k2[i] * a[11] + k3[i] * a[12] + k4[i] * a[13] + k5[i] * a[14]) * h;
        }
        let t_new = t + h;
        f(t_new, &ytmp, &mut k6);
        let b = &k.b;
        for i in 0..dim {
            ynew[i] = y[i] + (k1[i] * b[0] + k3[i] * b[1] + k4[i] * b[2] + k5[i] * b[3] + k6[i] * b[4]) * h;
        }
        f(t_new, &ynew, &mut k7);
        stats.rhs_evals += 6;

        let e = &k.e;
        for i in 0..dim {
            err[i] = (k1[i] * e[0] + k3[i] * e[1] + k4[i] * e[2] + k5[i] * e[3] + k6[i] * e[4] + k7[i] * e[5]) * h;
        }
        let enorm = weighted_rms(&err, |i| scale_of(y, &ynew, i));

        if enorm <= T::one() {
            stats.accepted += 1;
            // dense output on [t, t_new]
            if next_sample < samples.len() && samples[next_sample] <= t_new {
                let d = &k.d;
                for i in 0..dim {
                    dense[i] = (k1[i] * d[0]
                        + k3[i] * d[1]
                        + k4[i] * d[2]
                        + k5[i] * d[3]
                        + k6[i] * d[4]
                        + k7[i] * d[5])
                        * h;
                }
                while next_sample < samples.len() && samples[next_sample] <= t_new {
                    let ts = samples[next_sample];
                    let theta = (ts - t) / h;
                    let one_m = T::one() - theta;
                    for i in 0..dim {
                        let r1 = y[i];
                        let r2 = ynew[i] - y[i];
                        let r3 = k1[i] * h - r2;
                        let r4 = r2 - k7[i] * h - r3;
                        let r5 = dense[i];
                        ytmp[i] = r1 + (r2 + (r3 + (r4 + r5 * one_m) * theta) * one_m) * theta;
                    }
                    observe(ts, &ytmp)?;
                    next_sample += 1;
                }
            }
            y.copy_from_slice(&ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = t_new;
            let mut fac = safety * enorm.max(T::lit(1e-10)).powf(T::lit(-0.2));
            fac = fac.max(fac_min).min(if last_rejected { T::one() } else { fac_max });
            h = (h * fac).min(tol.h_max);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (safety * enorm.powf(T::lit(-0.2))).max(fac_min);
            h = h * fac;
            last_rejected = true;
        }
    }
    Ok(stats)
}
