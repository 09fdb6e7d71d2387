//! Kernel assembly, Fredholm determinants `F = det(I - K)`, resolvent inner
//! products and analytic parameter derivatives.
//!
//! Every model kernel has the shape `K = Σ_r ψ_r ⊗ φ_r` (a sum or integral
//! of rank-one terms over `r ≤ a`). Columns vanish identically below `y_n`,
//! so the lattice determinants reduce exactly to a finite window; the upper
//! window edge and the `r` cutoff carry certified tails recorded with each
//! assembly.

use crate::closed_form;
use crate::error::{Error, Result};
use crate::grid::{Axis, GridField};
use crate::linalg::{det_i_minus, PivotedLu};
use crate::quad::{gauss_legendre, Panels};
use crate::specfun::{self, GenFunSpec, Kind, LatticeModel};
use crate::walkfun::{
    absorbed_events_discrete, absorbed_measure_continuous, InitialData, WalkLaw, WalkQuad,
};
use ndarray::{Array1, Array2, Array3};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Rbm,
    Tasep,
    PushTasep,
    Parallel { p: f64 },
    Blocking { p: f64 },
    Pushing { q: f64 },
}

impl Model {
    pub fn lattice_kind(&self) -> Option<LatticeModel> {
        match self {
            Model::Rbm => None,
            Model::Tasep => Some(LatticeModel::Tasep),
            Model::PushTasep => Some(LatticeModel::PushTasep),
            Model::Parallel { .. } => Some(LatticeModel::Parallel),
            Model::Blocking { .. } => Some(LatticeModel::Blocking),
            Model::Pushing { .. } => Some(LatticeModel::Pushing),
        }
    }

    pub fn p_or_q(&self) -> f64 {
        match self {
            Model::Parallel { p } | Model::Blocking { p } => *p,
            Model::Pushing { q } => *q,
            _ => 0.0,
        }
    }

    pub fn discrete_time(&self) -> bool {
        matches!(
            self,
            Model::Parallel { .. } | Model::Blocking { .. } | Model::Pushing { .. }
        )
    }

    /// Membership in the model's validity region `V` (where the one-point
    /// function is a nondegenerate survival probability).
    pub fn in_validity(&self, y: &InitialData, t: f64, a: f64, n: i64) -> bool {
        if n < 1 {
            return true; // boundary extension F ≡ 1
        }
        if (y.len() as i64) < n {
            return false;
        }
        let yn = y.level(n);
        match self {
            Model::Rbm => t > 0.0,
            Model::Tasep => t >= 0.0,
            Model::PushTasep => a < yn,
            Model::Parallel { .. } | Model::Blocking { .. } => a < yn + t,
            Model::Pushing { .. } => a < yn,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Model::Rbm => "rbm",
            Model::Tasep => "tasep",
            Model::PushTasep => "push-tasep",
            Model::Parallel { .. } => "parallel",
            Model::Blocking { .. } => "blocking",
            Model::Pushing { .. } => "pushing",
        }
    }
}

/// Lattice discretization controls.
#[derive(Debug, Clone, Copy)]
pub struct LatticeDisc {
    /// Starting margin above `max(a + n, y_1 + n)` for the column window.
    pub margin: i64,
    /// Certified-tail target for the dropped columns and `r` cutoff.
    pub tail_tol: f64,
}

impl Default for LatticeDisc {
    fn default() -> Self {
        LatticeDisc {
            margin: 16,
            tail_tol: 1e-12,
        }
    }
}

/// Quadrature controls for the diffusive kernel.
#[derive(Debug, Clone, Copy)]
pub struct RbmDisc {
    /// Target total Gauss–Legendre nodes over the `u`/`v` window.
    pub uv_nodes: usize,
    /// Nodes for the rank-one integral over `r`.
    pub r_nodes: usize,
    /// Window and `r` half-width in units of `max(√t, 1)`.
    pub sigmas: f64,
    pub walk: WalkQuad,
}

impl Default for RbmDisc {
    fn default() -> Self {
        RbmDisc {
            uv_nodes: 64,
            r_nodes: 48,
            sigmas: 7.0,
            walk: WalkQuad::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Disc {
    Lattice(LatticeDisc),
    Rbm(RbmDisc),
}

impl Disc {
    pub fn default_for(model: Model) -> Disc {
        match model {
            Model::Rbm => Disc::Rbm(RbmDisc::default()),
            _ => Disc::Lattice(LatticeDisc::default()),
        }
    }

    fn lattice(&self) -> Result<LatticeDisc> {
        match self {
            Disc::Lattice(d) => Ok(*d),
            _ => Err(Error::Config("lattice discretization expected".into())),
        }
    }

    fn rbm(&self) -> Result<RbmDisc> {
        match self {
            Disc::Rbm(d) => Ok(*d),
            _ => Err(Error::Config("quadrature discretization expected".into())),
        }
    }
}

/// Truncation metadata recorded with every assembly.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncationRecord {
    pub window: (f64, f64),
    pub r_lo: f64,
    /// Certified bound on everything dropped (border column sum with a
    /// geometric-ratio closure).
    pub tail: f64,
}

/// Discretized kernel: node set, weights and the weighted matrix
/// `M_{ij} = K(u_i, u_j) w_j` whose `det(I - M)` approximates `F`.
pub struct KernelAssembly {
    pub model: Model,
    pub t: f64,
    pub a: f64,
    pub n: i64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: Array2<f64>,
    pub trunc: TruncationRecord,
    y: InitialData,
    walk: Option<WalkQuad>,
}

pub struct DetResult {
    pub value: f64,
    pub log_abs: f64,
    pub sign: f64,
    pub near_singular: bool,
}

pub fn assemble_kernel(
    model: Model,
    y: &InitialData,
    t: f64,
    a: f64,
    n: i64,
    disc: &Disc,
) -> Result<KernelAssembly> {
    if n < 1 {
        return Err(Error::Config("kernel level n must be ≥ 1".into()));
    }
    if (y.len() as i64) < n {
        return Err(Error::Config(format!(
            "initial data has {} levels, kernel needs {n}",
            y.len()
        )));
    }
    match model {
        Model::Rbm => assemble_rbm(y, t, a, n, &disc.rbm()?),
        _ => {
            if a.fract() != 0.0 {
                return Err(Error::Config("lattice models need integer a".into()));
            }
            if model.discrete_time() && (t < 0.0 || t.fract() != 0.0) {
                return Err(Error::Config("discrete-time models need integer t ≥ 0".into()));
            }
            assemble_lattice(model, y, t, a as i64, n, &disc.lattice()?, None)
        }
    }
}

/// Like [`assemble_kernel`] but on an explicit lattice column window;
/// used when two kernels at different levels must share a node set.
pub fn assemble_kernel_on_window(
    model: Model,
    y: &InitialData,
    t: f64,
    a: i64,
    n: i64,
    window: (i64, i64),
    disc: &LatticeDisc,
) -> Result<KernelAssembly> {
    assemble_lattice(model, y, t, a, n, disc, Some(window))
}

/// Smallest `L` with `(c·max(t,1))^L / L! < 1e-18`; bounds factorially
/// decaying expansions.
fn factorial_cut(c: f64, t: f64) -> i64 {
    let base = c * t.max(1.0);
    let mut term = 1.0f64;
    let mut l = 0i64;
    while term >= 1e-18 && l < 2000 {
        l += 1;
        term *= base / l as f64;
    }
    l + 4
}

fn assemble_lattice(
    model: Model,
    y: &InitialData,
    t: f64,
    a: i64,
    n: i64,
    disc: &LatticeDisc,
    window: Option<(i64, i64)>,
) -> Result<KernelAssembly> {
    let lm = model.lattice_kind().unwrap();
    let p_or_q = model.p_or_q();
    let law = WalkLaw::for_model(lm, p_or_q);
    let v_lo = window.map(|w| w.0).unwrap_or(y.level_int(n) + 1);
    let y1 = y.level_int(1);

    let mut attempt_margin = disc.margin;
    for _ in 0..6 {
        let v_hi = match window {
            Some(w) => w.1,
            None => (a + n).max(y1 + n).max(v_lo) + attempt_margin,
        };
        let r_lo = match lm {
            LatticeModel::Tasep | LatticeModel::Parallel | LatticeModel::Blocking => v_lo - n,
            LatticeModel::Pushing => v_lo - n - t as i64,
            LatticeModel::PushTasep => v_lo - n - factorial_cut(2.2, t),
        };
        let width = (v_hi - v_lo + 1) as usize;
        let rs: Vec<i64> = (r_lo..=a).collect();

        // ψ_{t,r,n}(u) table
        let mut psi = Array2::<f64>::zeros((rs.len(), width));
        for (k, &r) in rs.iter().enumerate() {
            for i in 0..width {
                let u = v_lo + i as i64;
                psi[[k, i]] = specfun::model_basis(&GenFunSpec {
                    model: lm,
                    kind: Kind::Psi,
                    t,
                    p_or_q,
                    n,
                    a: r,
                    arg: u,
                })?;
            }
        }
        // φ̄_{t,r,m}(x) table for all absorbed positions
        let mut phibar = vec![Array2::<f64>::zeros((rs.len(), width)); (n + 1) as usize];
        for m in 1..=n {
            for (k, &r) in rs.iter().enumerate() {
                for i in 0..width {
                    let x = v_lo + i as i64;
                    phibar[m as usize][[k, i]] = specfun::model_basis(&GenFunSpec {
                        model: lm,
                        kind: Kind::PhiBar,
                        t,
                        p_or_q,
                        n: m,
                        a: r,
                        arg: x,
                    })?;
                }
            }
        }
        // φ^y_{t,r,n}(v_j) for every column and r
        let mut phi = Array2::<f64>::zeros((width, rs.len()));
        for j in 0..width {
            let v = v_lo + j as i64;
            let events = absorbed_events_discrete(law, y, n, v)?;
            for (k, _) in rs.iter().enumerate() {
                let mut acc = 0.0;
                for ev in &events {
                    acc += ev.mass * phibar[(n - ev.step) as usize][[k, (ev.pos - v_lo) as usize]];
                }
                phi[[j, k]] = acc;
            }
        }
        let mut matrix = Array2::<f64>::zeros((width, width));
        for i in 0..width {
            for j in 0..width {
                let mut acc = 0.0;
                for k in 0..rs.len() {
                    acc += psi[[k, i]] * phi[[j, k]];
                }
                matrix[[i, j]] = acc;
            }
        }
        // certified tail: border column sums must be small and decaying
        let col_sum = |j: usize| (0..width).map(|i| matrix[[i, j]].abs()).sum::<f64>();
        let border = col_sum(width - 1);
        let prev = col_sum(width - 2).max(1e-300);
        let ratio = (border / prev).min(0.9);
        let tail = 2.0 * border / (1.0 - ratio);
        if window.is_some() || tail < disc.tail_tol || border == 0.0 {
            return Ok(KernelAssembly {
                model,
                t,
                a: a as f64,
                n,
                nodes: (v_lo..=v_hi).map(|v| v as f64).collect(),
                weights: vec![1.0; width],
                matrix,
                trunc: TruncationRecord {
                    window: (v_lo as f64, v_hi as f64),
                    r_lo: r_lo as f64,
                    tail,
                },
                y: y.clone(),
                walk: None,
            });
        }
        attempt_margin *= 2;
    }
    Err(Error::Truncation {
        tail: f64::NAN,
        tol: disc.tail_tol,
    })
}

fn rbm_psi(n: i64, t: f64, u: f64, r: f64) -> Result<f64> {
    Ok((u - r).exp() * specfun::rbm_phi(n, t, u - r)?)
}

fn rbm_phi_epi_from_events(
    events: &crate::walkfun::ContinuousEvents,
    v: f64,
    r: f64,
    t: f64,
    n: i64,
) -> Result<f64> {
    let mut acc = 0.0;
    if events.atom {
        acc += (r - v).exp() * specfun::rbm_phibar(n - 1, t, v - r)?;
    }
    for &(step, pos, mass) in &events.nodes {
        acc += mass * (r - pos).exp() * specfun::rbm_phibar(n - step - 1, t, pos - r)?;
    }
    Ok(acc)
}

fn rbm_uv_panels(y: &InitialData, n: i64, lo: f64, hi: f64, target_nodes: usize) -> Panels {
    let mut breaks = vec![lo, hi];
    for k in 1..=n {
        let lv = y.level(k);
        if lv > lo && lv < hi {
            breaks.push(lv);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let n_panels = (breaks.len() - 1).max(1);
    let order = (target_nodes / n_panels).max(12);
    Panels::new(breaks, order)
}

fn assemble_rbm(y: &InitialData, t: f64, a: f64, n: i64, disc: &RbmDisc) -> Result<KernelAssembly> {
    if t <= 0.0 {
        return Err(Error::OutsideValidity(format!(
            "diffusive kernel needs t > 0, got {t}"
        )));
    }
    let reach = disc.sigmas * t.sqrt().max(1.0);
    let lo = y.level(n);
    let hi = a + reach;
    let tail_scale = (-(reach * reach) / (2.0 * t)).exp();
    if hi <= lo + 1e-9 {
        // the kernel mass lives below the column support; F = 1 up to tails
        return Ok(KernelAssembly {
            model: Model::Rbm,
            t,
            a,
            n,
            nodes: Vec::new(),
            weights: Vec::new(),
            matrix: Array2::zeros((0, 0)),
            trunc: TruncationRecord {
                window: (lo, lo),
                r_lo: a - reach,
                tail: tail_scale,
            },
            y: y.clone(),
            walk: Some(disc.walk),
        });
    }
    let uv = rbm_uv_panels(y, n, lo, hi, disc.uv_nodes);
    let (r_ref, w_ref) = gauss_legendre(disc.r_nodes);
    let (r_a, r_b) = (a - reach, a);
    let r_nodes: Vec<f64> = r_ref
        .iter()
        .map(|x| 0.5 * (r_a + r_b) + 0.5 * (r_b - r_a) * x)
        .collect();
    let r_weights: Vec<f64> = w_ref.iter().map(|w| 0.5 * (r_b - r_a) * w).collect();

    let width = uv.nodes.len();
    let mut psi = Array2::<f64>::zeros((r_nodes.len(), width));
    for (k, &r) in r_nodes.iter().enumerate() {
        for i in 0..width {
            psi[[k, i]] = rbm_psi(n, t, uv.nodes[i], r)?;
        }
    }
    let mut phi = Array2::<f64>::zeros((width, r_nodes.len()));
    for j in 0..width {
        let v = uv.nodes[j];
        let events = absorbed_measure_continuous(y, n, v, &disc.walk)?;
        for (k, &r) in r_nodes.iter().enumerate() {
            phi[[j, k]] = rbm_phi_epi_from_events(&events, v, r, t, n)?;
        }
    }
    let mut matrix = Array2::<f64>::zeros((width, width));
    for i in 0..width {
        for j in 0..width {
            let mut acc = 0.0;
            for k in 0..r_nodes.len() {
                acc += r_weights[k] * psi[[k, i]] * phi[[j, k]];
            }
            matrix[[i, j]] = acc * uv.weights[j];
        }
    }
    // diagonal tail estimate at the window edge: Gaussian factor only,
    // since the exponential tilt cancels on the diagonal
    let tail = tail_scale * (1.0 + t.sqrt()) * (n as f64);
    Ok(KernelAssembly {
        model: Model::Rbm,
        t,
        a,
        n,
        nodes: uv.nodes.clone(),
        weights: uv.weights.clone(),
        matrix,
        trunc: TruncationRecord {
            window: (lo, hi),
            r_lo: r_a,
            tail,
        },
        y: y.clone(),
        walk: Some(disc.walk),
    })
}

/// `det(I - M)` of the assembled kernel, via pivoted LU with one step of
/// iterative refinement inside the solver path.
pub fn det_fredholm(k: &KernelAssembly) -> Result<DetResult> {
    if k.nodes.is_empty() {
        return Ok(DetResult {
            value: 1.0,
            log_abs: 0.0,
            sign: 1.0,
            near_singular: false,
        });
    }
    let (value, log_abs, sign) = det_i_minus(&k.matrix)?;
    Ok(DetResult {
        value,
        log_abs,
        sign,
        near_singular: value.abs() < 1e-13,
    })
}

/// `⟨(I-K)⁻¹ f, g⟩` under the discretization inner product.
pub fn resolvent_inner(k: &KernelAssembly, f: &[f64], g: &[f64]) -> Result<f64> {
    resolvent_inner_guarded(k, f, g, 1e13)
}

pub fn resolvent_inner_guarded(
    k: &KernelAssembly,
    f: &[f64],
    g: &[f64],
    cond_guard: f64,
) -> Result<f64> {
    let nn = k.nodes.len();
    assert_eq!(f.len(), nn);
    assert_eq!(g.len(), nn);
    if nn == 0 {
        return Ok(0.0);
    }
    let mut m = Array2::from_shape_fn((nn, nn), |(i, j)| -k.matrix[[i, j]]);
    for i in 0..nn {
        m[[i, i]] += 1.0;
    }
    let lu = PivotedLu::new(&m)?;
    lu.check_solvable()?;
    let cond = lu.cond_1_estimate();
    if cond > cond_guard {
        return Err(Error::IllConditioned {
            cond,
            guard: cond_guard,
        });
    }
    let x = lu.solve(&Array1::from_vec(f.to_vec()));
    Ok(x
        .iter()
        .zip(g.iter())
        .zip(k.weights.iter())
        .map(|((xi, gi), wi)| xi * gi * wi)
        .sum())
}

/// `F` together with the analytic parameter derivatives of the relevant
/// model (no numerical differencing; the rank-one derivative formulas of
/// each kernel family are registered here).
#[derive(Debug, Clone, Copy)]
pub struct Partials {
    pub f: f64,
    pub df_dt: Option<f64>,
    pub df_da: Option<f64>,
    pub d2f_da2: Option<f64>,
}

impl KernelAssembly {
    /// ψ_{t,a,k} sampled on the assembly nodes (level `k`, boundary slot `a`).
    fn psi_vec(&self, k_level: i64, a: f64) -> Result<Vec<f64>> {
        match self.model {
            Model::Rbm => self
                .nodes
                .iter()
                .map(|&u| rbm_psi(k_level, self.t, u, a))
                .collect(),
            _ => {
                let lm = self.model.lattice_kind().unwrap();
                self.nodes
                    .iter()
                    .map(|&u| {
                        specfun::model_basis(&GenFunSpec {
                            model: lm,
                            kind: Kind::Psi,
                            t: self.t,
                            p_or_q: self.model.p_or_q(),
                            n: k_level,
                            a: a as i64,
                            arg: u as i64,
                        })
                    })
                    .collect()
            }
        }
    }

    /// φ^y_{t,a,k} sampled on the assembly nodes.
    fn phi_vec(&self, k_level: i64, a: f64) -> Result<Vec<f64>> {
        match self.model {
            Model::Rbm => {
                let walk = self.walk.unwrap();
                self.nodes
                    .iter()
                    .map(|&v| {
                        let ev = absorbed_measure_continuous(&self.y, k_level, v, &walk)?;
                        rbm_phi_epi_from_events(&ev, v, a, self.t, k_level)
                    })
                    .collect()
            }
            _ => {
                let lm = self.model.lattice_kind().unwrap();
                self.nodes
                    .iter()
                    .map(|&v| {
                        crate::walkfun::phi_epi_discrete(
                            lm,
                            &self.y,
                            self.t,
                            self.model.p_or_q(),
                            a as i64,
                            k_level,
                            v as i64,
                        )
                    })
                    .collect()
            }
        }
    }
}

pub fn analytic_partials(
    model: Model,
    y: &InitialData,
    t: f64,
    a: f64,
    n: i64,
    disc: &Disc,
) -> Result<Partials> {
    if n < 1 {
        // boundary extension: F ≡ 1 with vanishing derivatives
        return Ok(Partials {
            f: 1.0,
            df_dt: Some(0.0),
            df_da: Some(0.0),
            d2f_da2: Some(0.0),
        });
    }
    let k = assemble_kernel(model, y, t, a, n, disc)?;
    let f = det_fredholm(&k)?.value;
    if k.nodes.is_empty() {
        return Ok(Partials {
            f,
            df_dt: Some(0.0),
            df_da: Some(0.0),
            d2f_da2: Some(0.0),
        });
    }
    match model {
        Model::Rbm => {
            // ∂_t F = -F/2 (⟨Rψ_{n+1}, φ_n⟩ + ⟨Rψ_n, φ_{n-1}⟩)
            // ∂_a F = -F ⟨Rψ_n, φ_n⟩
            // ∂_a²F = -F (⟨Rψ_{n+1}, φ_n⟩ - ⟨Rψ_n, φ_{n-1}⟩)
            let psi_n = k.psi_vec(n, a)?;
            let psi_n1 = k.psi_vec(n + 1, a)?;
            let phi_n = k.phi_vec(n, a)?;
            let phi_nm1 = k.phi_vec(n - 1, a)?;
            let r_up = resolvent_inner(&k, &psi_n1, &phi_n)?;
            let r_dn = resolvent_inner(&k, &psi_n, &phi_nm1)?;
            let r_aa = resolvent_inner(&k, &psi_n, &phi_n)?;
            Ok(Partials {
                f,
                df_dt: Some(-0.5 * f * (r_up + r_dn)),
                df_da: Some(-f * r_aa),
                d2f_da2: Some(-f * (r_up - r_dn)),
            })
        }
        Model::Tasep => {
            // ∂_t K = -½ ψ_{t,a,n} ⊗ φ_{t,a+1,n}  ⇒  ∂_t F = F/2 ⟨Rψ, φ_{a+1}⟩
            let psi_n = k.psi_vec(n, a)?;
            let phi_shift = k.phi_vec(n, a + 1.0)?;
            let inner = resolvent_inner(&k, &psi_n, &phi_shift)?;
            Ok(Partials {
                f,
                df_dt: Some(0.5 * f * inner),
                df_da: None,
                d2f_da2: None,
            })
        }
        Model::PushTasep => {
            // ∂_t K = 2 ψ_{t,a+1,n} ⊗ φ_{t,a,n}  ⇒  ∂_t F = -2F ⟨Rψ_{a+1}, φ⟩
            let psi_shift = k.psi_vec(n, a + 1.0)?;
            let phi_n = k.phi_vec(n, a)?;
            let inner = resolvent_inner(&k, &psi_shift, &phi_n)?;
            Ok(Partials {
                f,
                df_dt: Some(-2.0 * f * inner),
                df_da: None,
                d2f_da2: None,
            })
        }
        _ => Ok(Partials {
            f,
            df_dt: None,
            df_da: None,
            d2f_da2: None,
        }),
    }
}

/// Single determinant value (`F ≡ 1` for `n ≤ 0` by the extension rule).
pub fn f_point(model: Model, y: &InitialData, t: f64, a: f64, n: i64, disc: &Disc) -> Result<f64> {
    if n < 1 {
        return Ok(1.0);
    }
    let k = assemble_kernel(model, y, t, a, n, disc)?;
    Ok(det_fredholm(&k)?.value)
}

/// Per-point tail certificate recorded by [`f_field`].
#[derive(Debug, Clone, Serialize)]
pub struct PointCert {
    pub t: f64,
    pub a: f64,
    pub n: i64,
    pub window: (f64, f64),
    pub r_lo: f64,
    pub tail: f64,
}

/// Batch evaluation over a `(t, a, n)` box; every point must lie in the
/// model's validity region `V`.
pub fn f_field(
    model: Model,
    y: &InitialData,
    t_grid: &[f64],
    a_grid: &[f64],
    n_range: &[i64],
    disc: &Disc,
) -> Result<(GridField, Vec<PointCert>)> {
    for &t in t_grid {
        for &a in a_grid {
            for &n in n_range {
                if !model.in_validity(y, t, a, n) {
                    return Err(Error::OutsideValidity(format!(
                        "{} at (t={t}, a={a}, n={n})",
                        model.name()
                    )));
                }
            }
        }
    }
    let points: Vec<(usize, usize, usize)> = (0..t_grid.len())
        .flat_map(|i| {
            (0..a_grid.len()).flat_map(move |j| (0..n_range.len()).map(move |k| (i, j, k)))
        })
        .collect();
    let computed: Result<Vec<(usize, usize, usize, f64, Option<PointCert>)>> = points
        .par_iter()
        .map(|&(i, j, k)| {
            let (t, a, n) = (t_grid[i], a_grid[j], n_range[k]);
            if n < 1 {
                return Ok((i, j, k, 1.0, None));
            }
            let ka = assemble_kernel(model, y, t, a, n, disc)?;
            let f = det_fredholm(&ka)?.value;
            Ok((
                i,
                j,
                k,
                f,
                Some(PointCert {
                    t,
                    a,
                    n,
                    window: ka.trunc.window,
                    r_lo: ka.trunc.r_lo,
                    tail: ka.trunc.tail,
                }),
            ))
        })
        .collect();
    let computed = computed?;
    let mut values = Array3::<f64>::zeros((t_grid.len(), a_grid.len(), n_range.len()));
    let mut certs = Vec::new();
    for (i, j, k, f, cert) in computed {
        values[[i, j, k]] = f;
        if let Some(c) = cert {
            certs.push(c);
        }
    }
    let dt = if t_grid.len() > 1 {
        t_grid[1] - t_grid[0]
    } else {
        1.0
    };
    let da = if a_grid.len() > 1 {
        a_grid[1] - a_grid[0]
    } else {
        1.0
    };
    let axes = [
        if model.discrete_time() {
            Axis::discrete(t_grid[0] as i64)
        } else {
            Axis::continuous(t_grid[0], dt)
        },
        if matches!(model, Model::Rbm) {
            Axis::continuous(a_grid[0], da)
        } else {
            Axis::discrete(a_grid[0] as i64)
        },
        Axis::discrete(n_range[0]),
    ];
    Ok((GridField::new(values, axes)?, certs))
}

/// Gaussian / Poisson / binomial one-particle anchors for `n = 1`.
pub fn one_particle_survival(model: Model, y1: f64, t: f64, a: f64) -> f64 {
    match model {
        Model::Rbm => closed_form::normal_cdf((y1 - a) / t.sqrt()),
        Model::Tasep => closed_form::poisson_survival(t, (a - y1) as i64),
        Model::PushTasep => {
            // jumps left at rate one: P(y1 - N_t > a) = P(N_t < y1 - a)
            1.0 - closed_form::poisson_survival(t, (y1 - a) as i64 - 1)
        }
        Model::Parallel { p } | Model::Blocking { p } => {
            closed_form::binomial_survival(t as u64, p, (a - y1) as i64)
        }
        Model::Pushing { q } => {
            1.0 - closed_form::binomial_survival(t as u64, q, (y1 - a) as i64 - 1)
        }
    }
}
