//! Epigraph-hitting-walk expectations.
//!
//! The kernel of every model carries one factor of the form
//! `E_{B_0=v}[ w(B_τ, τ) 1_{τ<n} ]`, where `B` is a strictly downward random
//! walk and `τ` is the first step at which the walk rises above the initial
//! configuration profile. For lattice walks the geometric steps and the hard
//! support cutoff at `y_n` make forward dynamic programming exact. For the
//! Exp(1) walk of the diffusive model the same recursion runs on composite
//! Gauss–Legendre panels split at the levels of `y`.

use crate::error::{Error, Result};
use crate::quad::Panels;
use crate::specfun::{self, GenFunSpec, Kind, LatticeModel};

/// One-sided initial configuration `y_1 ≥ y_2 ≥ …` (strict for the
/// exclusion models). `y_m = +∞` for `m < 1` by the extension rule.
#[derive(Debug, Clone)]
pub struct InitialData {
    values: Vec<f64>,
}

impl InitialData {
    /// Strictly decreasing integer configuration.
    pub fn lattice(y: &[i64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Config("initial data must be nonempty".into()));
        }
        if y.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config(
                "exclusion initial data must be strictly decreasing".into(),
            ));
        }
        Ok(InitialData {
            values: y.iter().map(|&v| v as f64).collect(),
        })
    }

    /// Weakly decreasing real configuration.
    pub fn real(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Config("initial data must be nonempty".into()));
        }
        if y.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "initial data must be weakly decreasing".into(),
            ));
        }
        Ok(InitialData {
            values: y.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `y_k`, 1-based, `+∞` below 1.
    pub fn level(&self, k: i64) -> f64 {
        if k < 1 {
            f64::INFINITY
        } else {
            self.values[(k - 1) as usize]
        }
    }

    pub fn level_int(&self, k: i64) -> i64 {
        self.level(k) as i64
    }

    pub fn span(&self) -> f64 {
        self.values[0] - self.values[self.values.len() - 1]
    }
}

/// Step law of the downward lattice walks.
#[derive(Debug, Clone, Copy)]
pub enum WalkLaw {
    /// `P(step = -k) = 2^{-k}`, `k ≥ 1`.
    Geometric,
    /// The parallel-update walk: `P(-1) = q/(1+q)`, `P(-k) = 2^{-(k-1)}/(1+q)`.
    ParallelGeom { p: f64 },
}

impl WalkLaw {
    pub fn for_model(model: LatticeModel, p_or_q: f64) -> WalkLaw {
        match model {
            LatticeModel::Parallel => WalkLaw::ParallelGeom { p: p_or_q },
            _ => WalkLaw::Geometric,
        }
    }

    fn weight(&self, k: i64) -> f64 {
        debug_assert!(k >= 1);
        match self {
            WalkLaw::Geometric => 0.5f64.powi(k as i32),
            WalkLaw::ParallelGeom { p } => {
                let q = 1.0 - p;
                if k == 1 {
                    q / (1.0 + q)
                } else {
                    0.5f64.powi(k as i32 - 1) / (1.0 + q)
                }
            }
        }
    }
}

/// Absorption record: the walk first rose above the profile at `step`,
/// sitting at `pos`, carrying probability `mass`.
#[derive(Debug, Clone, Copy)]
pub struct AbsorbEvent {
    pub step: i64,
    pub pos: i64,
    pub mass: f64,
}

/// All absorption events with `τ < n` for the lattice walk started at `v`.
///
/// Exact: live survivor mass sits strictly above `y_n` on a finite window,
/// and mass at or below `y_n` can never be absorbed, so no tail is dropped.
pub fn absorbed_events_discrete(
    law: WalkLaw,
    y: &InitialData,
    n: i64,
    v: i64,
) -> Result<Vec<AbsorbEvent>> {
    if n <= 0 {
        return Ok(Vec::new());
    }
    if (y.len() as i64) < n {
        return Err(Error::Config(format!(
            "initial data has {} levels, need {n}",
            y.len()
        )));
    }
    if v > y.level_int(1) {
        return Ok(vec![AbsorbEvent {
            step: 0,
            pos: v,
            mass: 1.0,
        }]);
    }
    let lo = y.level_int(n) + 1;
    if v < lo {
        return Ok(Vec::new());
    }
    let width = (v - lo + 1) as usize;
    let at = |pos: i64| (pos - lo) as usize;
    let mut surv = vec![0.0f64; width];
    surv[at(v)] = 1.0;
    let mut top = v; // strict upper bound on next positions is current max
    let mut events = Vec::new();
    for m in 1..n {
        let barrier = y.level_int(m + 1);
        let mut next = vec![0.0f64; width];
        for z in lo..=top {
            let mass = surv[at(z)];
            if mass == 0.0 {
                continue;
            }
            // jump from z to any x < z; x < lo is dead mass, dropped exactly
            for x in lo..z {
                next[at(x)] += mass * law.weight(z - x);
            }
            // the x < lo bucket: only needed implicitly, never contributes
        }
        let new_top = top - 1;
        for x in lo..=new_top.min(v) {
            let g = next[at(x)];
            if g == 0.0 {
                continue;
            }
            if x > barrier {
                events.push(AbsorbEvent {
                    step: m,
                    pos: x,
                    mass: g,
                });
                next[at(x)] = 0.0;
            }
        }
        surv = next;
        top = new_top.min(barrier);
        if top < lo {
            break;
        }
    }
    Ok(events)
}

/// `φ^y_{t,a,n}(v) = E_{B_0=v}[ φ̄_{t,a,n-τ}(B_τ) 1_{τ<n} ]` for a lattice
/// model, assembled from the absorption events.
pub fn phi_epi_discrete(
    model: LatticeModel,
    y: &InitialData,
    t: f64,
    p_or_q: f64,
    a: i64,
    n: i64,
    v: i64,
) -> Result<f64> {
    let events = absorbed_events_discrete(WalkLaw::for_model(model, p_or_q), y, n, v)?;
    let mut acc = 0.0;
    for ev in &events {
        let spec = GenFunSpec {
            model,
            kind: Kind::PhiBar,
            t,
            p_or_q,
            n: n - ev.step,
            a,
            arg: ev.pos,
        };
        acc += ev.mass * specfun::model_basis(&spec)?;
    }
    Ok(acc)
}

/// Quadrature controls for the Exp(1) walk recursion.
#[derive(Debug, Clone, Copy)]
pub struct WalkQuad {
    /// Gauss–Legendre nodes inside each inter-level panel.
    pub nodes_per_panel: usize,
    /// Maximum recursion depth (steps of the walk).
    pub n_guard: i64,
    /// Maximum allowed span `y_1 - y_n`.
    pub span_guard: f64,
}

impl Default for WalkQuad {
    fn default() -> Self {
        WalkQuad {
            nodes_per_panel: 24,
            n_guard: 6,
            span_guard: 4.0,
        }
    }
}

/// Absorption measure of the continuous walk: an optional `τ = 0` atom at
/// `v` plus weighted nodes for the later steps.
#[derive(Debug, Clone)]
pub struct ContinuousEvents {
    pub atom: bool,
    pub nodes: Vec<(i64, f64, f64)>, // (step, position, mass = density × weight)
}

/// Forward quadrature recursion for the Exp(1) downward walk.
///
/// Each step maps the survivor density `f` to
/// `g(x) = ∫_{z>x} f(z) e^{x-z} dz = e^x (M(c) - M(x))`,
/// a cumulative integral that the panel antiderivative evaluates directly.
pub fn absorbed_measure_continuous(
    y: &InitialData,
    n: i64,
    v: f64,
    quad: &WalkQuad,
) -> Result<ContinuousEvents> {
    if n <= 0 {
        return Ok(ContinuousEvents {
            atom: false,
            nodes: Vec::new(),
        });
    }
    if (y.len() as i64) < n {
        return Err(Error::Config(format!(
            "initial data has {} levels, need {n}",
            y.len()
        )));
    }
    if n > quad.n_guard {
        return Err(Error::Guard(format!(
            "continuous recursion limited to n ≤ {}, got {n}",
            quad.n_guard
        )));
    }
    if y.span() > quad.span_guard {
        return Err(Error::Guard(format!(
            "initial-data span {} above guard {}",
            y.span(),
            quad.span_guard
        )));
    }
    if v >= y.level(1) {
        return Ok(ContinuousEvents {
            atom: true,
            nodes: Vec::new(),
        });
    }
    let y_n = y.level(n);
    if v <= y_n {
        return Ok(ContinuousEvents {
            atom: false,
            nodes: Vec::new(),
        });
    }
    // master breakpoints: the levels y_n..y_1 clipped to (y_n, v], plus v
    let mut breaks: Vec<f64> = vec![y_n, v];
    for k in 2..=n {
        let lv = y.level(k);
        if lv > y_n && lv < v {
            breaks.push(lv);
        }
    }
    let order = quad.nodes_per_panel.max(4);
    let mut events = Vec::new();

    // survivor support upper bound after deciding step m: min(v, y_{m+1})
    let clip = |upper: f64| -> Option<Panels> {
        if upper <= y_n + 1e-14 {
            return None;
        }
        let mut b: Vec<f64> = breaks.iter().copied().filter(|&x| x < upper).collect();
        b.push(upper);
        b.push(y_n);
        Some(Panels::new(b, order))
    };

    // step 1 from the point mass at v: density e^{x-v} below v
    let barrier1 = y.level(2);
    let absorb_hi = v;
    if n >= 2 && absorb_hi > barrier1 {
        let panels = Panels::new(
            breaks
                .iter()
                .copied()
                .filter(|&x| x >= barrier1 && x <= absorb_hi)
                .chain([barrier1, absorb_hi])
                .collect(),
            order,
        );
        for (x, w) in panels.nodes.iter().zip(&panels.weights) {
            events.push((1i64, *x, w * (x - v).exp()));
        }
    }
    let mut surv_panels = match clip(v.min(barrier1)) {
        Some(p) => p,
        None => {
            return Ok(ContinuousEvents {
                atom: false,
                nodes: events,
            })
        }
    };
    let mut surv: Vec<f64> = surv_panels
        .nodes
        .iter()
        .map(|x| (x - v).exp())
        .collect();

    for m in 2..n {
        // density after step m from survivors of step m-1
        let weighted: Vec<f64> = surv_panels
            .nodes
            .iter()
            .zip(&surv)
            .map(|(z, f)| f * (-z).exp())
            .collect();
        let cum = surv_panels.cumulative(&weighted);
        let total = cum.total();
        let g = |x: f64| (total - cum.eval(x)) * x.exp();

        let barrier = y.level(m + 1);
        let prev_hi = *surv_panels.breaks.last().unwrap();
        if prev_hi > barrier {
            let absorb = Panels::new(
                breaks
                    .iter()
                    .copied()
                    .filter(|&x| x >= barrier && x <= prev_hi)
                    .chain([barrier, prev_hi])
                    .collect(),
                order,
            );
            for (x, w) in absorb.nodes.iter().zip(&absorb.weights) {
                events.push((m, *x, w * g(*x)));
            }
        }
        let next_panels = match clip(prev_hi.min(barrier)) {
            Some(p) => p,
            None => break,
        };
        let next: Vec<f64> = next_panels.nodes.iter().map(|x| g(*x)).collect();
        surv_panels = next_panels;
        surv = next;
    }
    Ok(ContinuousEvents {
        atom: false,
        nodes: events,
    })
}

/// `φ^y_{t,a,n}(v) = E_{B_0=v}[ e^{a-B_τ} φ̄_{n-τ-1}(t, B_τ - a) 1_{τ<n} ]`
/// for the diffusive model.
pub fn phi_epi_continuous(
    y: &InitialData,
    t: f64,
    a: f64,
    n: i64,
    v: f64,
    quad: &WalkQuad,
) -> Result<f64> {
    let events = absorbed_measure_continuous(y, n, v, quad)?;
    let mut acc = 0.0;
    if events.atom {
        acc += (a - v).exp() * specfun::rbm_phibar(n - 1, t, v - a)?;
    }
    for &(step, pos, mass) in &events.nodes {
        acc += mass * (a - pos).exp() * specfun::rbm_phibar(n - step - 1, t, pos - a)?;
    }
    Ok(acc)
}
