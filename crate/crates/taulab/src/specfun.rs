//! Special functions entering the model kernels.
//!
//! Two families live here. For the diffusive model there are the Hermite
//! functions `phi_n`/`phibar_n`. For the lattice models the kernel factors
//! are Taylor coefficients of explicit generating functions (a loop integral
//! around the origin is exactly a series coefficient), and every one of them
//! reduces to a finite convolution of binomial and exponential series, so
//! the values returned are exact up to rounding.

use crate::error::{Error, Result};

/// Recurrence guard for Hermite evaluation.
pub const HERMITE_N_MAX: u32 = 60;

/// Probabilists' Hermite polynomial `H_n(x)`:
/// `H_0 = 1`, `H_1 = x`, `H_{n+1} = x H_n - n H_{n-1}`.
pub fn hermite(n: u32, x: f64) -> Result<f64> {
    if n > HERMITE_N_MAX {
        return Err(Error::Guard(format!(
            "hermite order {n} above guard {HERMITE_N_MAX}"
        )));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = x;
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbmKind {
    Phi,
    PhiBar,
}

/// Heat-kernel Hermite function
/// `phi_n(t, x) = t^{-n/2} (2πt)^{-1/2} e^{-x²/2t} H_n(x/√t)`.
pub fn rbm_phi(n: i64, t: f64, x: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Config(format!("rbm_phi needs t > 0, got {t}")));
    }
    if n < 0 {
        return Err(Error::Config(format!("rbm_phi needs n >= 0, got {n}")));
    }
    let z = x / t.sqrt();
    let h = hermite(n as u32, z)?;
    Ok(t.powf(-(n as f64) / 2.0) / (2.0 * std::f64::consts::PI * t).sqrt()
        * (-x * x / (2.0 * t)).exp()
        * h)
}

/// Dual polynomial family `phibar_n(t, x) = t^{n/2} H_n(x/√t) / n!`.
///
/// Negative order returns 0; that convention encodes the `τ < n` cutoffs of
/// the epigraph expectations uniformly.
pub fn rbm_phibar(n: i64, t: f64, x: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Config(format!("rbm_phibar needs t > 0, got {t}")));
    }
    if n < 0 {
        return Ok(0.0);
    }
    let z = x / t.sqrt();
    let h = hermite(n as u32, z)?;
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    Ok(t.powf(n as f64 / 2.0) * h / fact)
}

/// Generalized binomial coefficient `C(n, k)` with integer (possibly
/// negative) upper argument.
pub fn binom(n: i64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `[w^k] (1-w)^n` for any integer `n`: `(-1)^k C(n, k)`.
fn coef_one_minus_w(n: i64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * binom(n, k)
}

/// `[w^k] (c0 + c1 w)^s` for integer `s`: `C(s, k) c0^{s-k} c1^k`.
fn coef_affine_pow(s: i64, c0: f64, c1: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if s >= 0 && k > s {
        return 0.0;
    }
    binom(s, k) * c0.powi((s - k) as i32) * c1.powi(k as i32)
}

/// `[w^k] e^{β w}`: `β^k / k!`.
fn coef_exp(beta: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= beta / i as f64;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeModel {
    Tasep,
    PushTasep,
    Parallel,
    Blocking,
    Pushing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Psi,
    PhiBar,
}

/// Identifies one kernel-factor generating function together with the index
/// data that selects a coefficient of it.
///
/// `arg` is the lattice argument of the factor (`u` for `Psi`, `v` for
/// `PhiBar`); `t` must be a non-negative integer for the discrete-time
/// models; `p_or_q` is the jump probability (`p` for parallel/blocking, `q`
/// for pushing; ignored by the continuous-time models).
#[derive(Debug, Clone, Copy)]
pub struct GenFunSpec {
    pub model: LatticeModel,
    pub kind: Kind,
    pub t: f64,
    pub p_or_q: f64,
    pub n: i64,
    pub a: i64,
    pub arg: i64,
}

impl GenFunSpec {
    fn validate(&self) -> Result<()> {
        match self.model {
            LatticeModel::Tasep | LatticeModel::PushTasep => {
                if self.t < 0.0 {
                    return Err(Error::Config("continuous time must be >= 0".into()));
                }
            }
            _ => {
                if self.t < 0.0 || self.t.fract() != 0.0 {
                    return Err(Error::Config(format!(
                        "discrete-time models need integer t >= 0, got {}",
                        self.t
                    )));
                }
                if !(0.0 < self.p_or_q && self.p_or_q < 1.0) {
                    return Err(Error::Config(format!(
                        "jump probability must lie in (0,1), got {}",
                        self.p_or_q
                    )));
                }
            }
        }
        Ok(())
    }

    /// Coefficient power selected by `(a, n, arg)` for this factor.
    pub fn power(&self) -> i64 {
        match (self.model, self.kind) {
            (LatticeModel::PushTasep, Kind::Psi) => self.arg - self.a,
            (LatticeModel::Pushing, Kind::Psi) => self.a - self.arg + self.n + self.t as i64,
            (_, Kind::Psi) => self.a - self.arg + self.n,
            (_, Kind::PhiBar) => self.n - 1,
        }
    }
}

/// Smallest series length that certifies `t^k/k!` is negligible; the default
/// truncation bound handed to [`series_coefficient`].
pub fn default_trunc(t: f64) -> usize {
    let cap = 1e-16 * f64::max(1.0, t.exp());
    let mut term = 1.0f64;
    let mut k = 0usize;
    while term >= cap && k < 4000 {
        k += 1;
        term *= t / k as f64;
    }
    (k + 8).max(64)
}

/// Exact `[w^power]` of the spec's generating-function product.
///
/// The product is always (i) a binomial factor and (ii) an entire factor;
/// one coefficient of the product is a finite convolution, so the result is
/// exact and `trunc` only guards against runaway index requests. A negative
/// power returns 0.
pub fn series_coefficient(spec: &GenFunSpec, power: i64, trunc: usize) -> Result<f64> {
    spec.validate()?;
    if power < 0 {
        return Ok(0.0);
    }
    if power as usize > trunc {
        return Err(Error::Truncation {
            tail: f64::INFINITY,
            tol: 0.0,
        });
    }
    let t = spec.t;
    let n = spec.n;
    let val = match (spec.model, spec.kind) {
        // (1-w)^n e^{t(w-1/2)}
        (LatticeModel::Tasep, Kind::Psi) => {
            let mut acc = 0.0;
            for j in 0..=n.min(power) {
                acc += coef_one_minus_w(n, j) * coef_exp(t, power - j);
            }
            acc * (-t / 2.0).exp()
        }
        // (1-w)^{a-v+n-1} e^{t(w-1/2)}
        (LatticeModel::Tasep, Kind::PhiBar) => {
            let m_exp = self_m(spec);
            let mut acc = 0.0;
            for j in 0..=power {
                acc += coef_one_minus_w(m_exp, j) * coef_exp(t, power - j);
            }
            acc * (-t / 2.0).exp()
        }
        // (s-1)^n e^{ts} e^{-2t}, written in s = 1/w
        (LatticeModel::PushTasep, Kind::Psi) => {
            let mut acc = 0.0;
            for j in 0..=n.min(power) {
                let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
                acc += binom(n, j) * sign * coef_exp(t, power - j);
            }
            acc * (-2.0 * t).exp()
        }
        // (1-w)^{a-v+n-1} e^{2t - t/(1-w)}; expand e^{-tw/(1-w)}
        (LatticeModel::PushTasep, Kind::PhiBar) => {
            let m_exp = self_m(spec);
            let mut acc = 0.0;
            for k in 0..=power {
                acc += coef_exp(-t, k) * coef_one_minus_w(m_exp - k, power - k);
            }
            acc * t.exp()
        }
        // (1-w)^n (q+pw)^{t-n+1}
        (LatticeModel::Parallel, Kind::Psi) => {
            let p = spec.p_or_q;
            let q = 1.0 - p;
            let s = t as i64 - (n - 1);
            convolve_binomials(n, s, q, p, power)
        }
        // (1-w)^{a-v+n-1} (1-pw)^{-(t-n+1)}
        (LatticeModel::Parallel, Kind::PhiBar) => {
            let p = spec.p_or_q;
            let s = -(t as i64 - (n - 1));
            convolve_binomials(self_m(spec), s, 1.0, -p, power)
        }
        // (1-w)^n (q+pw)^t
        (LatticeModel::Blocking, Kind::Psi) => {
            let p = spec.p_or_q;
            convolve_binomials(n, t as i64, 1.0 - p, p, power)
        }
        // (1-w)^{a-v+n-1} (1-pw)^{-t}
        (LatticeModel::Blocking, Kind::PhiBar) => {
            let p = spec.p_or_q;
            convolve_binomials(self_m(spec), -(t as i64), 1.0, -p, power)
        }
        // (1-w)^n (q+pw)^t, power already shifted by +t for the w^{-t} factor
        (LatticeModel::Pushing, Kind::Psi) => {
            let q = spec.p_or_q;
            convolve_binomials(n, t as i64, q, 1.0 - q, power)
        }
        // (1-w)^{a-v+n-1+t} (1-pw)^{-t}
        (LatticeModel::Pushing, Kind::PhiBar) => {
            let q = spec.p_or_q;
            convolve_binomials(self_m(spec) + t as i64, -(t as i64), 1.0, -(1.0 - q), power)
        }
    };
    Ok(val)
}

fn self_m(spec: &GenFunSpec) -> i64 {
    spec.a - spec.arg + spec.n - 1
}

/// `[w^power] (1-w)^{n1} (c0 + c1 w)^{s2}`.
fn convolve_binomials(n1: i64, s2: i64, c0: f64, c1: f64, power: i64) -> f64 {
    let mut acc = 0.0;
    let j_hi = if n1 >= 0 { n1.min(power) } else { power };
    for j in 0..=j_hi {
        let other = coef_affine_pow(s2, c0, c1, power - j);
        if other != 0.0 {
            acc += coef_one_minus_w(n1, j) * other;
        }
    }
    acc
}

/// Full kernel factor: coefficient at the model's power index times the
/// `2^{±(..)}` prefactor and the model normalization.
pub fn model_basis(spec: &GenFunSpec) -> Result<f64> {
    spec.validate()?;
    let power = spec.power();
    if spec.kind == Kind::PhiBar && spec.n <= 0 {
        return Ok(0.0);
    }
    let coeff = series_coefficient(spec, power, default_trunc(spec.t).max(power.max(0) as usize))?;
    Ok(prefactor(spec) * coeff)
}

fn prefactor(spec: &GenFunSpec) -> f64 {
    let two: f64 = 2.0;
    let base = match spec.kind {
        Kind::Psi => two.powi((spec.arg - spec.a) as i32),
        Kind::PhiBar => two.powi((spec.a - spec.arg) as i32),
    };
    let t = spec.t;
    let n = spec.n;
    match (spec.model, spec.kind) {
        (LatticeModel::Tasep, _) | (LatticeModel::PushTasep, _) => base,
        (LatticeModel::Parallel, Kind::Psi) => {
            let q = 1.0 - spec.p_or_q;
            let norm = q + spec.p_or_q / 2.0;
            base * q.powi((n - 1) as i32) * norm.powi(-(t as i32))
        }
        (LatticeModel::Parallel, Kind::PhiBar) => {
            let q = 1.0 - spec.p_or_q;
            let norm = q + spec.p_or_q / 2.0;
            base * q.powi(-(n as i32 - 1)) * norm.powi(t as i32)
        }
        (LatticeModel::Blocking, Kind::Psi) => {
            let q = 1.0 - spec.p_or_q;
            base * (q + spec.p_or_q / 2.0).powi(-(t as i32))
        }
        (LatticeModel::Blocking, Kind::PhiBar) => {
            let q = 1.0 - spec.p_or_q;
            base * (q + spec.p_or_q / 2.0).powi(t as i32)
        }
        (LatticeModel::Pushing, Kind::Psi) => {
            let q = spec.p_or_q;
            base * (1.0 + q).powi(-(t as i32))
        }
        (LatticeModel::Pushing, Kind::PhiBar) => {
            let q = spec.p_or_q;
            base * (1.0 + q).powi(t as i32)
        }
    }
}

/// Analytic `∂_t` of the kernel factor, for the continuous-time models.
///
/// Differentiating the exponential factor multiplies the integrand by
/// `(w - 1/2)` (TASEP) or `(1/w - 2)` / `(2 - 1/(1-w))` (Push-TASEP), which
/// shifts or resums coefficient indices; everything stays exact.
pub fn model_basis_dt(spec: &GenFunSpec) -> Result<f64> {
    spec.validate()?;
    if spec.kind == Kind::PhiBar && spec.n <= 0 {
        return Ok(0.0);
    }
    let power = spec.power();
    let trunc = default_trunc(spec.t).max(power.max(0) as usize + 2);
    let pre = prefactor(spec);
    match (spec.model, spec.kind) {
        (LatticeModel::Tasep, _) => {
            // multiply by (w - 1/2)
            let c1 = series_coefficient(spec, power - 1, trunc)?;
            let c0 = series_coefficient(spec, power, trunc)?;
            Ok(pre * (c1 - 0.5 * c0))
        }
        (LatticeModel::PushTasep, Kind::Psi) => {
            // in the s variable: multiply by (s - 2)
            let c1 = series_coefficient(spec, power - 1, trunc)?;
            let c0 = series_coefficient(spec, power, trunc)?;
            Ok(pre * (c1 - 2.0 * c0))
        }
        (LatticeModel::PushTasep, Kind::PhiBar) => {
            // multiply by (2 - 1/(1-w)): second term lowers the binomial
            // exponent by one
            let c0 = series_coefficient(spec, power, trunc)?;
            let lowered = GenFunSpec {
                a: spec.a - 1,
                ..*spec
            };
            let c1 = series_coefficient(&lowered, power, trunc)?;
            Ok(pre * (2.0 * c0 - c1))
        }
        _ => Err(Error::Config(
            "analytic d/dt applies to continuous-time models only".into(),
        )),
    }
}
