//! Qubit and damped oscillator evolved in the Liouvillian eigenbasis.
//!
//! The density operator's Wigner function is expanded as
//! `W = sum_{nn'} c_{nn'} phi_{nn'}(x, p)` with 2x2 qubit matrices `c_{nn'}`.
//! The Hamiltonian is `H = (v t / 2) sigma_z + g sigma_x X + a^dag a`, so the qubit
//! starts in its lower level `|up>` at large negative times and the first avoided
//! crossing (`|up,n>` with `|down,n-1>`) is passed at `t = -1/v`.

use crate::error::{Error, Result};
use crate::kernels::{dsigma, DiffusionCoefficients, EigenbasisSpec};
use crate::observables::{EigenTables, FockWeights};
use crate::ode::{dopri5, StepStats, Tolerances};
use crate::params::{validate, SystemParams, Warnings};
use crate::scalar::{Cplx, Real};

/// Qubit matrix entries in the order `up-up, up-down, down-up, down-down`.
pub type QubitBlock<T> = [Cplx<T>; 4];

pub const UU: usize = 0;
pub const UD: usize = 1;
pub const DU: usize = 2;
pub const DD: usize = 3;

/// Spin labels used by population queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Expansion coefficients `c_{nn'}` on an `N x N` grid, plus the time they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientState<T> {
    n: usize,
    pub t: T,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CoefficientState<T> {
    pub fn zeros(n_trunc: usize, t: T) -> Self {
        CoefficientState {
            n: n_trunc,
            t,
            data: vec![Cplx::new(T::zero(), T::zero()); 4 * n_trunc * n_trunc],
        }
    }

    pub fn from_vec(n_trunc: usize, t: T, data: Vec<Cplx<T>>) -> Result<Self> {
        if data.len() != 4 * n_trunc * n_trunc {
            return Err(Error::Dimension {
                expected: 4 * n_trunc * n_trunc,
                got: data.len(),
            });
        }
        Ok(CoefficientState { n: n_trunc, t, data })
    }

    pub fn n_trunc(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, a: usize, b: usize) -> usize {
        4 * (a * self.n + b)
    }

    pub fn get(&self, a: usize, b: usize) -> QubitBlock<T> {
        let o = self.offset(a, b);
        [self.data[o], self.data[o + 1], self.data[o + 2], self.data[o + 3]]
    }

    pub fn set(&mut self, a: usize, b: usize, block: QubitBlock<T>) {
        let o = self.offset(a, b);
        self.data[o..o + 4].copy_from_slice(&block);
    }

    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Cplx<T>] {
        &mut self.data
    }

    /// `|tr c_00 - 1|`.
    pub fn trace_residual(&self) -> T {
        let c = self.get(0, 0);
        (c[UU] + c[DD] - Cplx::new(T::one(), T::zero())).norm()
    }

    /// `max |c_{nn'}^{ij} - conj(c_{n'n}^{ji})|`.
    pub fn hermiticity_residual(&self) -> T {
        hermiticity_residual(self.n, &self.data)
    }

    /// Largest coefficient block norm on the truncation edge `n = N-1` or `n' = N-1`.
    pub fn spill(&self) -> T {
        let last = self.n - 1;
        let mut worst = T::zero();
        for k in 0..self.n {
            for blk in [self.get(last, k), self.get(k, last)] {
                for v in blk {
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }
}

fn hermiticity_residual<T: Real>(n: usize, data: &[Cplx<T>]) -> T {
    let mut worst = T::zero();
    for a in 0..n {
        for b in a..n {
            let x = 4 * (a * n + b);
            let y = 4 * (b * n + a);
            for (i, j) in [(UU, UU), (UD, DU), (DU, UD), (DD, DD)] {
                worst = worst.max((data[x + i] - data[y + j].conj()).norm());
            }
        }
    }
    worst
}

/// Reduced qubit density matrix `(c_00 + c_00^dag) / 2`, row-major.
pub fn qubit_reduced<T: Real>(state: &CoefficientState<T>) -> [[Cplx<T>; 2]; 2] {
    let c = state.get(0, 0);
    let half = T::lit(0.5);
    let off = (c[UD] + c[DU].conj()) * half;
    [
        [Cplx::new(c[UU].re, T::zero()), off],
        [off.conj(), Cplx::new(c[DD].re, T::zero())],
    ]
}

/// Smallest eigenvalue of a 2x2 hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &[[Cplx<T>; 2]; 2]) -> T {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let half = T::lit(0.5);
    let mid = (a + d) * half;
    let rad = (((a - d) * half).powi(2) + m[0][1].norm_sqr()).sqrt();
    mid - rad
}

/// Oscillator in its stationary (thermal) Gaussian and qubit up: only `c_00` is nonzero.
pub fn initial_state<T: Real>(params: &SystemParams<T>) -> CoefficientState<T> {
    let mut s = CoefficientState::zeros(params.n_trunc, params.t_start);
    let mut c = [Cplx::new(T::zero(), T::zero()); 4];
    c[UU] = Cplx::new(T::one(), T::zero());
    s.set(0, 0, c);
    s
}

/// Right-hand side of the coefficient equations of motion.
///
/// ```text
/// dc_{nn'}/dt = (n lambda + n' lambda*) c - i (v t / 2) [sz, c] + [sx, Y] + {sx, Z}
/// Y = i g S1 - i g S2 + gamma Dsigma(v t) kappa S3,   Z = -(i g kappa / 2) S3
/// S1 = c_{n+1,n'} + c_{n,n'+1}
/// S2 = sigma_a n c_{n-1,n'} + sigma_a* n' c_{n,n'-1}
/// S3 = n c_{n-1,n'} - n' c_{n,n'-1}
/// ```
/// Indices outside `0..N` contribute zero.
#[derive(Debug, Clone)]
pub struct CoefficientRhs<T> {
    n: usize,
    g: T,
    v: T,
    gamma: T,
    temperature: T,
    kappa: T,
    lambda: Cplx<T>,
    sigma_a: Cplx<T>,
}

#[inline]
fn scale_block<T: Real>(b: &[Cplx<T>], s: Cplx<T>) -> QubitBlock<T> {
    [b[0] * s, b[1] * s, b[2] * s, b[3] * s]
}

impl<T: Real> CoefficientRhs<T> {
    pub fn new(params: &SystemParams<T>, spec: &EigenbasisSpec<T>) -> Self {
        CoefficientRhs {
            n: params.n_trunc,
            g: params.g,
            v: params.v,
            gamma: params.gamma,
            temperature: params.temperature,
            kappa: spec.kappa,
            lambda: spec.lambda,
            sigma_a: spec.sigma_a,
        }
    }

    pub fn eval(&self, t: T, y: &[Cplx<T>], dy: &mut [Cplx<T>]) {
        let n = self.n;
        let zero = Cplx::new(T::zero(), T::zero());
        let i_unit = Cplx::new(T::zero(), T::one());
        let ig = i_unit * self.g;
        let force = self.gamma * dsigma(self.v * t, self.temperature, self.g) * self.kappa;
        let z_pref = -ig * (self.kappa * T::lit(0.5));
        let half_sweep = self.v * t * T::lit(0.5);
        let sa = self.sigma_a;
        let sac = sa.conj();
        let lam = self.lambda;
        let lamc = lam.conj();
        let blk = |a: usize, b: usize| -> &[Cplx<T>] {
            let o = 4 * (a * n + b);
            &y[o..o + 4]
        };
        for a in 0..n {
            for b in 0..n {
                let c = blk(a, b);
                let mut s1 = [zero; 4];
                if a + 1 < n {
                    let u = blk(a + 1, b);
                    for q in 0..4 {
                        s1[q] += u[q];
                    }
                }
                if b + 1 < n {
                    let u = blk(a, b + 1);
                    for q in 0..4 {
                        s1[q] += u[q];
                    }
                }
                let mut s2 = [zero; 4];
                let mut s3 = [zero; 4];
                if a > 0 {
                    let fa = T::count(a);
                    let u = blk(a - 1, b);
                    let sv = sa * fa;
                    for q in 0..4 {
                        s2[q] += u[q] * sv;
                        s3[q] += u[q] * fa;
                    }
                }
                if b > 0 {
                    let fb = T::count(b);
                    let u = blk(a, b - 1);
                    let sv = sac * fb;
                    for q in 0..4 {
                        s2[q] += u[q] * sv;
                        s3[q] -= u[q] * fb;
                    }
                }
                let mut yv = [zero; 4];
                let mut zv = [zero; 4];
                for q in 0..4 {
                    yv[q] = (s1[q] - s2[q]) * ig + s3[q] * force;
                    zv[q] = s3[q] * z_pref;
                }
                let diag = lam * T::count(a) + lamc * T::count(b);
                let mut out = scale_block(c, diag);
                // -i (vt/2) [sz, c] = -i vt/2 * [[0, 2 c_ud], [-2 c_du, 0]]
                let rot = i_unit * (half_sweep + half_sweep);
                out[UD] -= rot * c[UD];
                out[DU] += rot * c[DU];
                // [sx, Y]
                out[UU] += yv[DU] - yv[UD];
                out[UD] += yv[DD] - yv[UU];
                out[DU] += yv[UU] - yv[DD];
                out[DD] += yv[UD] - yv[DU];
                // {sx, Z}
                let od = zv[UD] + zv[DU];
                let dg = zv[UU] + zv[DD];
                out[UU] += od;
                out[UD] += dg;
                out[DU] += dg;
                out[DD] += od;
                let o = 4 * (a * n + b);
                dy[o..o + 4].copy_from_slice(&out);
            }
        }
    }
}

/// Convenience wrapper: the time derivative of `state` at its own time.
pub fn rhs<T: Real>(state: &CoefficientState<T>, params: &SystemParams<T>, spec: &EigenbasisSpec<T>) -> CoefficientState<T> {
    let mut out = CoefficientState::zeros(state.n, state.t);
    CoefficientRhs::new(params, spec).eval(state.t, &state.data, &mut out.data);
    out
}

/// Edge-coefficient size below which a run counts as converged in the truncation.
///
/// At `gamma = 0` and `k_B T` near `omega` the edge coefficients can grow large
/// while the populations stay converged, so spill is a diagnostic, not a gate.
pub const SPILL_TOLERANCE: f64 = 1e-6;

/// Invariant tolerances and sampling for one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions<T> {
    pub tolerances: Tolerances<T>,
    /// Number of uniformly spaced output samples, endpoints included.
    pub samples: usize,
    pub trace_tol: T,
    pub hermiticity_tol: T,
    /// Fock populations recorded at every sample.
    pub fock_probes: Vec<(Spin, usize)>,
}

impl<T: Real> Default for IntegrateOptions<T> {
    fn default() -> Self {
        IntegrateOptions {
            tolerances: Tolerances::default(),
            samples: 2001,
            trace_tol: T::lit(1e-9),
            hermiticity_tol: T::lit(1e-9),
            fock_probes: vec![(Spin::Up, 0), (Spin::Up, 1)],
        }
    }
}

/// Population time series of one `|spin, m>` state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSeries<T> {
    pub spin: Spin,
    pub m: usize,
    pub values: Vec<T>,
}

/// Output of [`integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub times: Vec<T>,
    pub p_up: Vec<T>,
    pub p_down: Vec<T>,
    pub p_fock: Vec<FockSeries<T>>,
    /// Per-sample invariant residuals.
    pub trace_series: Vec<T>,
    pub hermiticity_series: Vec<T>,
    /// Maxima over the run.
    pub trace_residual: T,
    pub hermiticity_residual: T,
    pub spill: T,
    pub min_qubit_eigenvalue: T,
    pub p_flip_final: T,
    pub stats: StepStats,
    pub warnings: Warnings,
    pub dxp_converged: bool,
    pub final_state: CoefficientState<T>,
}

impl<T: Real> SweepResult<T> {
    /// Whether the truncation-edge coefficients stayed below [`SPILL_TOLERANCE`].
    pub fn spill_within_tolerance(&self) -> bool {
        self.spill <= T::lit(SPILL_TOLERANCE)
    }

    pub fn fock(&self, spin: Spin, m: usize) -> Option<&[T]> {
        self.p_fock.iter().find(|s| s.spin == spin && s.m == m).map(|s| s.values.as_slice())
    }
}

/// Uniform grid of `count` points on `[a, b]` with exact endpoints.
pub fn uniform_grid<T: Real>(a: T, b: T, count: usize) -> Vec<T> {
    let count = count.max(2);
    let last = T::count(count - 1);
    (0..count)
        .map(|k| if k + 1 == count { b } else { a + (b - a) * T::count(k) / last })
        .collect()
}

/// Sweep the qubit through both avoided crossings and record populations.
pub fn integrate<T: Real>(params: &SystemParams<T>, opts: &IntegrateOptions<T>) -> Result<SweepResult<T>> {
    let checked = validate(params)?;
    let p = checked.params();
    let diff = DiffusionCoefficients::from_params(&p);
    let spec = EigenbasisSpec::new(p.gamma, &diff);
    let m_max = opts.fock_probes.iter().map(|x| x.1).max();
    let weights = m_max.map(|m| FockWeights::new(&EigenTables::new(spec, p.n_trunc), m));

    let times = uniform_grid(p.t_start, p.t_end, opts.samples.max(2000));
    let mut state = initial_state(&p);
    let rhs_fn = CoefficientRhs::new(&p, &spec);

    let cap = times.len();
    let mut p_up = Vec::with_capacity(cap);
    let mut p_down = Vec::with_capacity(cap);
    let mut trace_series = Vec::with_capacity(cap);
    let mut herm_series = Vec::with_capacity(cap);
    let mut fock: Vec<FockSeries<T>> = opts
        .fock_probes
        .iter()
        .map(|&(spin, m)| FockSeries {
            spin,
            m,
            values: Vec::with_capacity(cap),
        })
        .collect();
    let mut spill = T::zero();
    let mut min_eig = T::infinity();
    let n = p.n_trunc;
    let trace_limit = opts.trace_tol * T::lit(10.0);
    let herm_limit = opts.hermiticity_tol * T::lit(10.0);

    let mut probe = CoefficientState::zeros(n, p.t_start);
    let stats = dopri5(
        |t, y, dy| rhs_fn.eval(t, y, dy),
        p.t_start,
        state.as_mut_slice(),
        &times,
        &opts.tolerances,
        |t, y| {
            probe.data.copy_from_slice(y);
            probe.t = t;
            let c = probe.get(0, 0);
            p_up.push(c[UU].re);
            p_down.push(c[DD].re);
            let tr = probe.trace_residual();
            let he = hermiticity_residual(n, y);
            trace_series.push(tr);
            herm_series.push(he);
            spill = spill.max(probe.spill());
            min_eig = min_eig.min(min_eigenvalue(&qubit_reduced(&probe)));
            if let Some(w) = &weights {
                for s in fock.iter_mut() {
                    s.values.push(w.population(&probe, s.spin.index(), s.m).re);
                }
            }
            let breach = |what, value: T, limit: T| Error::InvariantBreach {
                t: t.to_f64().unwrap_or(f64::NAN),
                what,
                value: value.to_f64().unwrap_or(f64::NAN),
                limit: limit.to_f64().unwrap_or(f64::NAN),
            };
            if !(tr <= trace_limit) {
                return Err(breach("trace", tr, trace_limit));
            }
            if !(he <= herm_limit) {
                return Err(breach("hermiticity", he, herm_limit));
            }
            Ok(())
        },
    )?;
    state.t = p.t_end;
    let p_flip_final = T::one() - state.get(0, 0)[UU].re;
    let max_of = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(SweepResult {
        trace_residual: max_of(&trace_series),
        hermiticity_residual: max_of(&herm_series),
        times,
        p_up,
        p_down,
        p_fock: fock,
        trace_series,
        hermiticity_series: herm_series,
        spill,
        min_qubit_eigenvalue: min_eig,
        p_flip_final,
        stats,
        warnings: checked.warnings,
        dxp_converged: diff.dxp_converged,
        final_state: state,
    })
}
