//! Liouvillian eigenfunctions in phase space and the weights that turn
//! expansion coefficients into expectation values.
//!
//! Phase-space variables `(x, p)` are the Weyl variables of `X = a + a^dag` and
//! `P = i (a^dag - a)`, so `[X, P] = 2i` and the vacuum has `<x^2> = <p^2> = 1`.
//! Wigner functions integrate to one and `<A> = int A_W W dx dp` for a Weyl symbol `A_W`.

use crate::error::{Error, Result};
use crate::kernels::EigenbasisSpec;
use crate::phase_space::CoefficientState;
use crate::quadrature::gauss_hermite;
use crate::scalar::{Cplx, Real};

/// Bivariate polynomial with complex coefficients; entry `(i, j)` multiplies `x^i p^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    deg: usize,
    c: Vec<Cplx<T>>,
}

impl<T: Real> Poly<T> {
    /// Zero polynomial with room for total degree `deg`.
    pub fn zero(deg: usize) -> Self {
        Poly {
            deg,
            c: vec![Cplx::new(T::zero(), T::zero()); (deg + 1) * (deg + 1)],
        }
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, Cplx::new(T::one(), T::zero()))
    }

    pub fn monomial(i: usize, j: usize, coeff: Cplx<T>) -> Self {
        let mut p = Self::zero(i + j);
        p.set(i, j, coeff);
        p
    }

    /// Capacity in total degree.
    pub fn capacity(&self) -> usize {
        self.deg
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        if i > self.deg || j > self.deg {
            Cplx::new(T::zero(), T::zero())
        } else {
            self.c[i * (self.deg + 1) + j]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Cplx<T>) {
        let d = self.deg + 1;
        self.c[i * d + j] = v;
    }

    #[inline]
    fn add_at(&mut self, i: usize, j: usize, v: Cplx<T>) {
        let d = self.deg + 1;
        self.c[i * d + j] += v;
    }

    /// Nonzero terms as `(i, j, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Cplx<T>)> + '_ {
        let d = self.deg + 1;
        self.c
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != T::zero() || v.im != T::zero())
            .map(move |(k, v)| (k / d, k % d, *v))
    }

    /// Highest total degree with a coefficient above `tol` in modulus.
    pub fn degree(&self, tol: T) -> Option<usize> {
        self.terms().filter(|(_, _, v)| v.norm() > tol).map(|(i, j, _)| i + j).max()
    }

    pub fn eval(&self, x: T, p: T) -> Cplx<T> {
        let mut acc = Cplx::new(T::zero(), T::zero());
        let mut xi = T::one();
        for i in 0..=self.deg {
            let mut pj = T::one();
            for j in 0..=(self.deg - i) {
                acc += self.get(i, j) * (xi * pj);
                pj *= p;
            }
            xi *= x;
        }
        acc
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        Poly {
            deg: self.deg,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Poly {
            deg: self.deg,
            c: self.c.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.deg.max(other.deg));
        for (i, j, v) in self.terms().chain(other.terms()) {
            out.add_at(i, j, v);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.deg + other.deg);
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                out.add_at(i + k, j + l, a * b);
            }
        }
        out
    }

    /// `a x P + b p P + c dP/dx + d dP/dp`, the generic first-order operator used by
    /// every ladder construction.
    fn first_order(&self, a: Cplx<T>, b: Cplx<T>, c: Cplx<T>, d: Cplx<T>) -> Self {
        let mut out = Self::zero(self.deg + 1);
        for (i, j, v) in self.terms() {
            out.add_at(i + 1, j, v * a);
            out.add_at(i, j + 1, v * b);
            if i > 0 {
                out.add_at(i - 1, j, v * (c * T::count(i)));
            }
            if j > 0 {
                out.add_at(i, j - 1, v * (d * T::count(j)));
            }
        }
        out
    }
}

/// Even moments of a centred normal variable: `E[x^k] = var^{k/2} (k - 1)!!`.
fn normal_moments<T: Real>(var: T, kmax: usize) -> Vec<T> {
    let mut m = vec![T::zero(); kmax + 1];
    m[0] = T::one();
    for k in (2..=kmax).step_by(2) {
        m[k] = m[k - 2] * var * T::count(k - 1);
    }
    m
}

/// `int P(x,p) N(x; var_x) N(p; var_p) dx dp` for normalized centred Gaussians.
pub fn gaussian_expectation<T: Real>(poly: &Poly<T>, var_x: T, var_p: T) -> Cplx<T> {
    let mx = normal_moments(var_x, poly.deg);
    let mp = normal_moments(var_p, poly.deg);
    poly.terms()
        .fold(Cplx::new(T::zero(), T::zero()), |acc, (i, j, v)| acc + v * (mx[i] * mp[j]))
}

/// Polynomial times the normalized Gaussian with independent variances `var_x`, `var_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePolynomialGaussian<T> {
    pub poly: Poly<T>,
    pub var_x: T,
    pub var_p: T,
}

impl<T: Real> PhasePolynomialGaussian<T> {
    pub fn gaussian(var_x: T, var_p: T) -> Self {
        PhasePolynomialGaussian {
            poly: Poly::one(),
            var_x,
            var_p,
        }
    }

    pub fn gaussian_factor(&self, x: T, p: T) -> T {
        let two = T::lit(2.0);
        let norm = two * T::PI() * (self.var_x * self.var_p).sqrt();
        (-(x * x) / (two * self.var_x) - p * p / (two * self.var_p)).exp() / norm
    }

    pub fn eval(&self, x: T, p: T) -> Cplx<T> {
        self.poly.eval(x, p) * self.gaussian_factor(x, p)
    }

    /// `int f dx dp`.
    pub fn integral(&self) -> Cplx<T> {
        gaussian_expectation(&self.poly, self.var_x, self.var_p)
    }

    /// `int q f dx dp` for a polynomial `q`.
    pub fn pair(&self, q: &Poly<T>) -> Cplx<T> {
        gaussian_expectation(&q.mul(&self.poly), self.var_x, self.var_p)
    }

    /// Apply `d/dx + s d/dp` to the whole function.
    fn raise(&self, s: Cplx<T>) -> Self {
        let one = Cplx::new(T::one(), T::zero());
        PhasePolynomialGaussian {
            poly: self.poly.first_order(
                Cplx::new(-self.var_x.recip(), T::zero()),
                -s / self.var_p,
                one,
                s,
            ),
            var_x: self.var_x,
            var_p: self.var_p,
        }
    }
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::count(k))
}

/// Right eigenfunction `phi_{n n'} = (c+)^n (c+*)^{n'} phi_00 / (n! n'!)` with
/// `c+ = d/dx + lambda d/dp`; its Liouvillian eigenvalue is `n lambda + n' lambda*`.
pub fn right_eigenfunction<T: Real>(n: usize, np: usize, spec: &EigenbasisSpec<T>) -> PhasePolynomialGaussian<T> {
    let mut f = PhasePolynomialGaussian::gaussian(spec.var_x, spec.var_p);
    for _ in 0..np {
        f = f.raise(spec.lambda.conj());
    }
    for _ in 0..n {
        f = f.raise(spec.lambda);
    }
    let norm = (factorial::<T>(n) * factorial::<T>(np)).recip();
    f.poly = f.poly.scale(Cplx::new(norm, T::zero()));
    f
}

/// Left eigenfunction `psi_{n n'}`, a polynomial of degree `n + n'` biorthonormal to
/// the right eigenfunctions. Generated from `psi_00 = 1` by
/// `mu (x - lambda p - D d/dx + lambda Dpp d/dp)` and its conjugate.
pub fn left_eigenfunction<T: Real>(n: usize, np: usize, spec: &EigenbasisSpec<T>) -> Poly<T> {
    let mu = spec.mu();
    let d = Cplx::new(spec.var_x, T::zero());
    let dpp = spec.var_p;
    let raise = |q: &Poly<T>, mu: Cplx<T>, lambda: Cplx<T>| {
        q.first_order(mu, -mu * lambda, -mu * d, mu * lambda * dpp)
    };
    let mut q = Poly::one();
    for _ in 0..np {
        q = raise(&q, mu.conj(), spec.lambda.conj());
    }
    for _ in 0..n {
        q = raise(&q, mu, spec.lambda);
    }
    q
}

/// Polynomial part of the Wigner function of `|m><k|`, relative to the vacuum
/// density `exp(-(x^2 + p^2)/2) / 2 pi`.
pub fn fock_wigner<T: Real>(m: usize, k: usize) -> Poly<T> {
    let half = T::lit(0.5);
    let one = T::one();
    let mut q = Poly::one();
    // a^dag rho -> (x - i p + i d/dp - d/dx) W / 2
    for _ in 0..m {
        q = q.first_order(Cplx::new(one, T::zero()), Cplx::new(T::zero(), -one), Cplx::new(-half, T::zero()), Cplx::new(T::zero(), half));
    }
    // rho a -> (x + i p - i d/dp - d/dx) W / 2
    for _ in 0..k {
        q = q.first_order(Cplx::new(one, T::zero()), Cplx::new(T::zero(), one), Cplx::new(-half, T::zero()), Cplx::new(T::zero(), -half));
    }
    let norm = (factorial::<T>(m) * factorial::<T>(k)).sqrt().recip();
    q.scale(Cplx::new(norm, T::zero()))
}

/// Weyl symbol `2 (-1)^n L_n(x^2 + p^2) exp(-(x^2 + p^2)/2)` of `|n><n|`.
pub fn fock_projector_symbol<T: Real>(n: usize, x: T, p: T) -> T {
    let r2 = x * x + p * p;
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    T::lit(2.0) * sign * crate::quadrature::laguerre(n, r2) * (-r2 / T::lit(2.0)).exp()
}

/// `int q(x,p) W0 phi dx dp` where `W0` is the vacuum Gaussian and `phi` is a
/// polynomial-Gaussian: both Gaussians merge into one with reduced variances.
fn vacuum_weighted_pair<T: Real>(q: &Poly<T>, phi: &PhasePolynomialGaussian<T>) -> Cplx<T> {
    let vx = (T::one() + phi.var_x.recip()).recip();
    let vp = (T::one() + phi.var_p.recip()).recip();
    let two_pi = T::lit(2.0) * T::PI();
    // N(x;1) N(x;v) = N(x; v') / sqrt(2 pi (1 + v))
    let merge = (two_pi * (T::one() + phi.var_x)).sqrt().recip() * (two_pi * (T::one() + phi.var_p)).sqrt().recip();
    gaussian_expectation(&q.mul(&phi.poly), vx, vp) * merge
}

/// Precomputed eigenfunctions and observable weights for one eigenbasis.
#[derive(Debug, Clone)]
pub struct EigenTables<T> {
    pub spec: EigenbasisSpec<T>,
    pub n_trunc: usize,
    right: Vec<PhasePolynomialGaussian<T>>,
    left: Vec<Poly<T>>,
}

impl<T: Real> EigenTables<T> {
    pub fn new(spec: EigenbasisSpec<T>, n_trunc: usize) -> Self {
        let mut right = Vec::with_capacity(n_trunc * n_trunc);
        let mut left = Vec::with_capacity(n_trunc * n_trunc);
        for n in 0..n_trunc {
            for np in 0..n_trunc {
                right.push(right_eigenfunction(n, np, &spec));
                left.push(left_eigenfunction(n, np, &spec));
            }
        }
        EigenTables {
            spec,
            n_trunc,
            right,
            left,
        }
    }

    pub fn right(&self, n: usize, np: usize) -> &PhasePolynomialGaussian<T> {
        &self.right[n * self.n_trunc + np]
    }

    pub fn left(&self, n: usize, np: usize) -> &Poly<T> {
        &self.left[n * self.n_trunc + np]
    }

    /// `int psi_{mm'} phi_{nn'}`.
    pub fn gram(&self, m: usize, mp: usize, n: usize, np: usize) -> Cplx<T> {
        self.right(n, np).pair(self.left(m, mp))
    }

    /// Weight `O_{nn'} = int O phi_{nn'}` of the Fock projector `|m><m|`, exact.
    pub fn fock_projector_weight(&self, m: usize, n: usize, np: usize) -> Cplx<T> {
        // Weyl symbol = 4 pi W_{|m><m|}
        let q = fock_wigner::<T>(m, m);
        vacuum_weighted_pair(&q, self.right(n, np)) * (T::lit(4.0) * T::PI())
    }

    /// Expansion coefficient of the operator `|m><k|`: `int psi_{nn'} W_{|m><k|}`.
    pub fn fock_operator_coefficient(&self, n: usize, np: usize, m: usize, k: usize) -> Cplx<T> {
        let q = fock_wigner::<T>(m, k).mul(self.left(n, np));
        gaussian_expectation(&q, T::one(), T::one())
    }
}

/// Table of Fock-projector weights for populations `m <= m_max`.
#[derive(Debug, Clone)]
pub struct FockWeights<T> {
    pub n_trunc: usize,
    pub m_max: usize,
    w: Vec<Cplx<T>>,
}

impl<T: Real> FockWeights<T> {
    pub fn new(tables: &EigenTables<T>, m_max: usize) -> Self {
        let n = tables.n_trunc;
        let mut w = Vec::with_capacity((m_max + 1) * n * n);
        for m in 0..=m_max {
            for a in 0..n {
                for b in 0..n {
                    w.push(tables.fock_projector_weight(m, a, b));
                }
            }
        }
        FockWeights { n_trunc: n, m_max, w }
    }

    pub fn weight(&self, m: usize, n: usize, np: usize) -> Cplx<T> {
        self.w[(m * self.n_trunc + n) * self.n_trunc + np]
    }

    /// Population of `|spin, m>`; `spin` is 0 for up and 1 for down.
    pub fn population(&self, state: &CoefficientState<T>, spin: usize, m: usize) -> Cplx<T> {
        let n = self.n_trunc.min(state.n_trunc());
        let mut acc = Cplx::new(T::zero(), T::zero());
        for a in 0..n {
            for b in 0..n {
                acc += self.weight(m, a, b) * state.get(a, b)[spin * 3];
            }
        }
        acc
    }
}

/// `int O(x,p) phi_{nn'}(x,p) dx dp` for a general symbol, by Gauss-Hermite quadrature
/// matched to the stationary Gaussian. The order doubles from 16 until successive
/// results differ by less than `1e-10`.
pub fn weyl_weight<T: Real, F: Fn(T, T) -> Cplx<T>>(symbol: F, n: usize, np: usize, tables: &EigenTables<T>) -> Result<Cplx<T>> {
    let phi = tables.right(n, np);
    let mut order = 16;
    let mut prev: Option<Cplx<T>> = None;
    while order <= 512 {
        let val = hermite_pair(&symbol, phi, order);
        if let Some(p) = prev {
            if (val - p).norm() < T::lit(1e-10) {
                return Ok(val);
            }
        }
        prev = Some(val);
        order *= 2;
    }
    Err(Error::Quadrature(format!(
        "weight of ({n}, {np}) did not settle by Gauss-Hermite order 512"
    )))
}

fn hermite_pair<T: Real, F: Fn(T, T) -> Cplx<T>>(symbol: &F, phi: &PhasePolynomialGaussian<T>, order: usize) -> Cplx<T> {
    let (nodes, weights) = gauss_hermite(order);
    let sx = (T::lit(2.0) * phi.var_x).sqrt();
    let sp = (T::lit(2.0) * phi.var_p).sqrt();
    let deg = phi.poly.capacity();
    // moment table M_ij = (1/pi) sum_kl w_k w_l O(x_k, p_l) x_k^i p_l^j
    let mut table = vec![Cplx::new(T::zero(), T::zero()); (deg + 1) * (deg + 1)];
    let xs: Vec<T> = nodes.iter().map(|&u| sx * T::lit(u)).collect();
    let ws: Vec<T> = weights.iter().map(|&w| T::lit(w)).collect();
    let mut xpow = vec![T::zero(); deg + 1];
    let mut ppow = vec![T::zero(); deg + 1];
    for (kx, &x) in xs.iter().enumerate() {
        powers(x, &mut xpow);
        for (kp, &u) in nodes.iter().enumerate() {
            let p = sp * T::lit(u);
            powers(p, &mut ppow);
            let o = symbol(x, p) * (ws[kx] * ws[kp]);
            for i in 0..=deg {
                for j in 0..=(deg - i) {
                    table[i * (deg + 1) + j] += o * (xpow[i] * ppow[j]);
                }
            }
        }
    }
    let inv_pi = T::FRAC_1_PI();
    phi.poly
        .terms()
        .fold(Cplx::new(T::zero(), T::zero()), |acc, (i, j, v)| acc + v * table[i * (deg + 1) + j])
        * inv_pi
}

fn powers<T: Real>(x: T, out: &mut [T]) {
    let mut v = T::one();
    for o in out.iter_mut() {
        *o = v;
        v *= x;
    }
}
