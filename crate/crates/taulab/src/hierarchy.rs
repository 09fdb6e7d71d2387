//! Level-by-level solution of the bilinear hierarchies from indicator
//! initial data.
//!
//! The continuous-time equations are rearranged to isolate `∂_t F_n` given
//! the already-evolving level `n-1` (boundary level ≡ 1), then integrated
//! with RK4 — method of lines on the integer lattice for the exclusion
//! models, central differences for the diffusive one. The discrete-time
//! equations are exact arithmetic recursions.

use crate::closed_form;
use crate::error::{Error, Result};
use crate::grid::{Axis, GridField};
use crate::mc::Wall;
use crate::walkfun::InitialData;
use ndarray::{Array2, Array3};

/// Continuous-time hierarchies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousEq {
    Rbm,
    Tasep,
    PushTasep,
}

/// Discrete-time hierarchies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscreteEq {
    Parallel { p: f64 },
    Blocking { p: f64 },
    Pushing { q: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuousScheme {
    /// RK4 time step.
    pub dt: f64,
    /// Spatial grid spacing (diffusive model only).
    pub h: f64,
    /// Start time: indicator data is smoothed by the exact level profile at
    /// `t0` (heat / transport closed forms) before the PDE takes over.
    pub t0: f64,
    /// Division guard: stencil points whose lower-level value is below this
    /// floor freeze at zero instead of being extrapolated.
    pub floor: f64,
}

impl Default for ContinuousScheme {
    fn default() -> Self {
        ContinuousScheme {
            dt: 2e-3,
            h: 0.02,
            t0: 0.01,
            floor: 1e-8,
        }
    }
}

/// Output field with a validity mask (stencil staircase at the window edge,
/// division-guard clipping and wall interiors are marked invalid).
pub struct SolvedField {
    pub field: GridField,
    pub valid: Array3<bool>,
}

impl SolvedField {
    /// Level values at one output time (indexes follow the field axes).
    pub fn value(&self, it: usize, ia: usize, n: usize) -> f64 {
        self.field.values[[it, ia, n]]
    }
}

/// Output grid request for the continuous solvers.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub t_end: f64,
    pub snapshots: usize,
}

fn rk4_weights() -> [f64; 4] {
    [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]
}

fn snapshot_steps(steps: usize, snapshots: usize) -> Vec<usize> {
    if snapshots <= 1 {
        return vec![steps];
    }
    (0..snapshots)
        .map(|i| ((steps as f64) * i as f64 / (snapshots - 1) as f64).round() as usize)
        .collect()
}

/// TASEP / Push-TASEP hierarchy: method of lines on the integer lattice,
/// exact indicator initial data at `t = 0` (no spatial discretization
/// error), all levels advanced together so staged lower-level time
/// derivatives stay consistent.
fn evolve_lattice(
    eq: ContinuousEq,
    y: &InitialData,
    a_lo: i64,
    a_hi: i64,
    n_max: usize,
    grid: &TimeGrid,
    scheme: &ContinuousScheme,
) -> Result<SolvedField> {
    let width = (a_hi - a_lo + 1) as usize;
    let levels = n_max + 1;
    if (y.len() as i64) < n_max as i64 {
        return Err(Error::Config("initial data shorter than n_max".into()));
    }
    if eq == ContinuousEq::Tasep && a_lo > y.level_int(n_max as i64) {
        return Err(Error::Config(
            "window must start at or below y_{n_max} so the left boundary is exact".into(),
        ));
    }
    if eq == ContinuousEq::PushTasep && a_hi < y.level_int(1) {
        return Err(Error::Config(
            "window must reach y_1 so the right boundary is exactly zero".into(),
        ));
    }
    let steps = (grid.t_end / scheme.dt).ceil() as usize;
    let dt = grid.t_end / steps as f64;
    let at = |a: i64| (a - a_lo) as usize;

    // indicator data at t = 0
    let mut state = Array2::<f64>::zeros((levels, width));
    for ia in 0..width {
        state[[0, ia]] = 1.0;
    }
    for n in 1..=n_max {
        let yn = y.level_int(n as i64);
        for a in a_lo..=a_hi {
            state[[n, at(a)]] = if yn > a { 1.0 } else { 0.0 };
        }
    }

    // right-edge staircase (TASEP): level n needs level n-1 one site right.
    // Push-TASEP instead pads the window top with its exact zeros
    // (positions never exceed y_n), so no staircase there.
    let valid_hi = |n: usize| -> i64 {
        match eq {
            ContinuousEq::Tasep => a_hi - (n as i64 - 1).max(0),
            _ => a_hi,
        }
    };

    let floor = scheme.floor;
    let rhs = |f: &Array2<f64>, df: &mut Array2<f64>| {
        df.fill(0.0);
        for n in 1..=n_max {
            let hi = valid_hi(n);
            for a in a_lo..=hi {
                let ia = at(a);
                match eq {
                    ContinuousEq::Tasep => {
                        let f_n = f[[n, ia]];
                        let f_nm = f[[n - 1, ia]];
                        let f_left = if a == a_lo { 1.0 } else { f[[n, ia - 1]] };
                        let vlog = if n == 1 {
                            0.0
                        } else if f_nm >= floor {
                            df[[n - 1, ia]] / f_nm
                        } else {
                            0.0
                        };
                        let ratio = if n == 1 {
                            1.0
                        } else if f_nm >= floor {
                            f[[n - 1, ia + 1]] / f_nm
                        } else {
                            0.0
                        };
                        df[[n, ia]] = f_n * vlog + f_left * ratio - f_n;
                    }
                    ContinuousEq::PushTasep => {
                        // F_{a+1,n-1} ∂_t F_{a,n} = F_{a,n} ∂_t F_{a+1,n-1}
                        //   + F_{a+1,n} F_{a,n-1} - F_{a,n} F_{a+1,n-1}
                        let f_n = f[[n, ia]];
                        let top = ia + 1 >= width;
                        let f_right_nm = if n == 1 {
                            1.0
                        } else if top {
                            0.0
                        } else {
                            f[[n - 1, ia + 1]]
                        };
                        let f_right_n = if top { 0.0 } else { f[[n, ia + 1]] };
                        if f_right_nm >= floor {
                            let vlog = if n == 1 || top {
                                0.0
                            } else {
                                df[[n - 1, ia + 1]] / f_right_nm
                            };
                            let ratio = f[[n - 1, ia]] / f_right_nm;
                            df[[n, ia]] = f_n * vlog + f_right_n * ratio - f_n;
                        }
                    }
                    ContinuousEq::Rbm => unreachable!(),
                }
            }
        }
    };

    let out_steps = snapshot_steps(steps, grid.snapshots);
    let mut out = Array3::<f64>::zeros((grid.snapshots, width, levels));
    let snap = |s: usize, f: &Array2<f64>, out: &mut Array3<f64>| {
        for (oi, &os) in out_steps.iter().enumerate() {
            if os == s {
                for n in 0..levels {
                    for ia in 0..width {
                        out[[oi, ia, n]] = f[[n, ia]];
                    }
                }
            }
        }
    };
    snap(0, &state, &mut out);

    let w = rk4_weights();
    let mut k = vec![Array2::<f64>::zeros((levels, width)); 4];
    let mut tmp = state.clone();
    for s in 0..steps {
        rhs(&state, &mut k[0]);
        tmp.assign(&state);
        tmp.scaled_add(0.5 * dt, &k[0]);
        rhs(&tmp, &mut k[1]);
        tmp.assign(&state);
        tmp.scaled_add(0.5 * dt, &k[1]);
        rhs(&tmp, &mut k[2]);
        tmp.assign(&state);
        tmp.scaled_add(dt, &k[2]);
        rhs(&tmp, &mut k[3]);
        for (ki, wi) in k.iter().zip(w.iter()) {
            state.scaled_add(dt * wi, ki);
        }
        snap(s + 1, &state, &mut out);
    }

    let mut valid = Array3::<bool>::from_elem((grid.snapshots, width, levels), false);
    for oi in 0..grid.snapshots {
        for n in 0..levels {
            let hi = if n == 0 { a_hi } else { valid_hi(n) };
            for a in a_lo..=hi {
                valid[[oi, at(a), n]] = true;
            }
        }
    }
    let t_spacing = if grid.snapshots > 1 {
        grid.t_end / (grid.snapshots - 1) as f64
    } else {
        1.0
    };
    let axes = [
        Axis::continuous(0.0, t_spacing),
        Axis::discrete(a_lo),
        Axis::discrete(0),
    ];
    Ok(SolvedField {
        field: GridField::new(out, axes)?,
        valid,
    })
}

/// Diffusive hierarchy on a continuous `a` grid with optional moving-wall
/// Dirichlet condition (`F = 0` at and above the wall).
fn evolve_rbm(
    y: &InitialData,
    wall: Option<&Wall>,
    a_lo: f64,
    a_hi: f64,
    n_max: usize,
    grid: &TimeGrid,
    scheme: &ContinuousScheme,
) -> Result<SolvedField> {
    let h = scheme.h;
    let width = ((a_hi - a_lo) / h).round() as usize + 1;
    let levels = n_max + 1;
    if scheme.dt > 1.25 * h * h {
        return Err(Error::Guard(format!(
            "CFL violation: dt = {} above stability bound {:.3e} for h = {h}",
            scheme.dt,
            1.25 * h * h
        )));
    }
    let t0 = scheme.t0;
    if t0 <= 0.0 || t0 >= grid.t_end {
        return Err(Error::Config("need 0 < t0 < t_end".into()));
    }
    let steps = ((grid.t_end - t0) / scheme.dt).ceil() as usize;
    let dt = (grid.t_end - t0) / steps as f64;
    let a_of = |ia: usize| a_lo + h * ia as f64;

    // wall slope for the exact level-1 bootstrap (linear walls only)
    let wall_slope = wall.map(|w| w.value(grid.t_end) / grid.t_end);
    let packed = y.span() == 0.0;

    let mut state = Array2::<f64>::zeros((levels, width));
    for ia in 0..width {
        state[[0, ia]] = 1.0;
    }
    for n in 1..=n_max {
        let yn = y.level(n as i64);
        for ia in 0..width {
            let a = a_of(ia);
            state[[n, ia]] = match (wall_slope, packed, n) {
                (Some(d), true, 1) => closed_form::rbm_wall_linear_survival(t0, d, a),
                _ => closed_form::normal_cdf((yn - a) / t0.sqrt()),
            };
        }
    }
    let clip_wall = |f: &mut Array2<f64>, t: f64| {
        if let Some(w) = wall {
            let b = w.value(t);
            for n in 1..=n_max {
                for ia in 0..width {
                    if a_of(ia) >= b {
                        f[[n, ia]] = 0.0;
                    }
                }
            }
        }
    };
    clip_wall(&mut state, t0);

    let floor = scheme.floor;
    let h2 = h * h;
    let rhs = |f: &Array2<f64>, df: &mut Array2<f64>| {
        df.fill(0.0);
        for n in 1..=n_max {
            for ia in 1..width - 1 {
                let f_n = f[[n, ia]];
                let lap = (f[[n, ia + 1]] - 2.0 * f_n + f[[n, ia - 1]]) / h2;
                if n == 1 {
                    df[[1, ia]] = 0.5 * lap;
                    continue;
                }
                let f_m = f[[n - 1, ia]];
                if f_m < floor {
                    continue;
                }
                let da_n = (f[[n, ia + 1]] - f[[n, ia - 1]]) / (2.0 * h);
                let da_m = (f[[n - 1, ia + 1]] - f[[n - 1, ia - 1]]) / (2.0 * h);
                let lap_m = (f[[n - 1, ia + 1]] - 2.0 * f_m + f[[n - 1, ia - 1]]) / h2;
                df[[n, ia]] =
                    0.5 * lap - da_n * da_m / f_m + f_n * (df[[n - 1, ia]] + 0.5 * lap_m) / f_m;
            }
        }
    };

    let out_steps = snapshot_steps(steps, grid.snapshots);
    let mut out = Array3::<f64>::zeros((grid.snapshots, width, levels));
    let snap = |s: usize, f: &Array2<f64>, out: &mut Array3<f64>| {
        for (oi, &os) in out_steps.iter().enumerate() {
            if os == s {
                for n in 0..levels {
                    for ia in 0..width {
                        out[[oi, ia, n]] = f[[n, ia]];
                    }
                }
            }
        }
    };
    snap(0, &state, &mut out);

    let w = rk4_weights();
    let mut k = vec![Array2::<f64>::zeros((levels, width)); 4];
    let mut tmp;
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        rhs(&state, &mut k[0]);
        tmp = &state + &(&k[0] * (0.5 * dt));
        clip_wall(&mut tmp, t + 0.5 * dt);
        rhs(&tmp, &mut k[1]);
        tmp = &state + &(&k[1] * (0.5 * dt));
        clip_wall(&mut tmp, t + 0.5 * dt);
        rhs(&tmp, &mut k[2]);
        tmp = &state + &(&k[2] * dt);
        clip_wall(&mut tmp, t + dt);
        rhs(&tmp, &mut k[3]);
        for (ki, wi) in k.iter().zip(w.iter()) {
            state.scaled_add(dt * wi, ki);
        }
        clip_wall(&mut state, t + dt);
        snap(s + 1, &state, &mut out);
    }

    // interior validity: one node in from each edge; wall side marked
    // invalid at and above the wall
    let mut valid = Array3::<bool>::from_elem((grid.snapshots, width, levels), false);
    for (oi, &os) in out_steps.iter().enumerate() {
        let t = t0 + os as f64 * dt;
        let b = wall.map(|w| w.value(t)).unwrap_or(f64::INFINITY);
        for n in 0..levels {
            for ia in 1..width - 1 {
                valid[[oi, ia, n]] = a_of(ia) < b || n == 0;
            }
        }
    }
    let t_spacing = if grid.snapshots > 1 {
        (grid.t_end - t0) / (grid.snapshots - 1) as f64
    } else {
        1.0
    };
    let axes = [
        Axis::continuous(t0, t_spacing),
        Axis::continuous(a_lo, h),
        Axis::discrete(0),
    ];
    Ok(SolvedField {
        field: GridField::new(out, axes)?,
        valid,
    })
}

/// Continuous hierarchies.
///
/// * TASEP / Push-TASEP run on the lattice from the exact indicator at
///   `t = 0` (walls unsupported here).
/// * The diffusive equation starts from the analytic level profile at
///   `scheme.t0` (exact heat profile for separated levels; the exact
///   linear-wall closed form for packed data at the wall).
pub fn evolve_continuous(
    eq: ContinuousEq,
    y: &InitialData,
    wall: Option<&Wall>,
    a_lo: f64,
    a_hi: f64,
    n_max: usize,
    grid: &TimeGrid,
    scheme: &ContinuousScheme,
) -> Result<SolvedField> {
    match eq {
        ContinuousEq::Rbm => evolve_rbm(y, wall, a_lo, a_hi, n_max, grid, scheme),
        _ => {
            if wall.is_some() {
                return Err(Error::Config(
                    "lattice hierarchies do not support walls".into(),
                ));
            }
            evolve_lattice(eq, y, a_lo as i64, a_hi as i64, n_max, grid, scheme)
        }
    }
}

/// Exact arithmetic recursion for the discrete-time equations.
///
/// The output covers `t = 0..=t_max` and levels `0..=n_max`; points whose
/// stencil would divide by a vanishing lower-level value (the validity-
/// region boundary for packed steps) are marked invalid.
pub fn recurse_discrete(
    eq: DiscreteEq,
    y: &InitialData,
    a_lo: i64,
    a_hi: i64,
    n_max: usize,
    t_max: usize,
    floor: f64,
) -> Result<SolvedField> {
    if (y.len() as i64) < n_max as i64 {
        return Err(Error::Config("initial data shorter than n_max".into()));
    }
    let width = (a_hi - a_lo + 1) as usize;
    let levels = n_max + 1;
    let mut f = Array3::<f64>::zeros((t_max + 1, width, levels));
    let mut valid = Array3::<bool>::from_elem((t_max + 1, width, levels), true);
    let at = |a: i64| (a - a_lo) as usize;

    // exact values outside the computed window, from the hard support of
    // the dynamics (None in the moving front band, which must stay inside)
    let outside = |t: i64, a: i64, n: i64| -> Option<f64> {
        if n <= 0 {
            return Some(1.0);
        }
        let yn = y.level_int(n);
        match eq {
            DiscreteEq::Parallel { .. } | DiscreteEq::Blocking { .. } => {
                if a < yn {
                    Some(1.0)
                } else if a >= yn + t {
                    Some(0.0)
                } else {
                    None
                }
            }
            DiscreteEq::Pushing { .. } => {
                if a < yn - t {
                    Some(1.0)
                } else if a >= yn {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    };
    let get = |f: &Array3<f64>, valid: &Array3<bool>, t: i64, a: i64, n: i64| -> Option<f64> {
        if n <= 0 {
            return Some(1.0);
        }
        if a < a_lo || a > a_hi {
            return outside(t, a, n);
        }
        if valid[[t as usize, at(a), n as usize]] {
            Some(f[[t as usize, at(a), n as usize]])
        } else {
            None
        }
    };

    // t = 0: indicator
    for n in 1..=n_max as i64 {
        let yn = y.level_int(n);
        for a in a_lo..=a_hi {
            f[[0, at(a), n as usize]] = if yn > a { 1.0 } else { 0.0 };
        }
    }
    for a in a_lo..=a_hi {
        for t in 0..=t_max {
            f[[t, at(a), 0]] = 1.0;
        }
    }

    // the parallel two-step recursion needs a second exact layer: after one
    // update each particle moved independently, blocked only by the frozen
    // time-0 neighbour, so the 2^n enumeration collapses to a product form
    if let DiscreteEq::Parallel { p } = eq {
        if t_max >= 1 {
            for n in 1..=n_max as i64 {
                let yn = y.level_int(n);
                let blocked = n > 1 && y.level_int(n - 1) == yn + 1;
                let move_p = if blocked { 0.0 } else { p };
                for a in a_lo..=a_hi {
                    let ind_hi = if yn + 1 > a { 1.0 } else { 0.0 };
                    let ind_lo = if yn > a { 1.0 } else { 0.0 };
                    f[[1, at(a), n as usize]] = move_p * ind_hi + (1.0 - move_p) * ind_lo;
                }
            }
        }
    }

    let t_start = match eq {
        DiscreteEq::Parallel { .. } => 1i64,
        _ => 0i64,
    };
    for t in t_start..t_max as i64 {
        for n in 1..=n_max as i64 {
            for a in a_lo..=a_hi {
                // stencil values (per equation) and the divisor
                let pieces: Option<(f64, f64)> = match eq {
                    DiscreteEq::Parallel { p } => (|| {
                        let denom = get(&f, &valid, t - 1, a, n - 1)?;
                        let num = p * get(&f, &valid, t, a - 1, n)?
                            * get(&f, &valid, t, a + 1, n - 1)?
                            + (1.0 - p) * get(&f, &valid, t, a, n)? * get(&f, &valid, t, a, n - 1)?;
                        Some((num, denom))
                    })(),
                    DiscreteEq::Blocking { p } => (|| {
                        let denom = get(&f, &valid, t, a, n - 1)?;
                        let num = p * get(&f, &valid, t, a - 1, n)?
                            * get(&f, &valid, t + 1, a + 1, n - 1)?
                            + (1.0 - p) * get(&f, &valid, t, a, n)?
                                * get(&f, &valid, t + 1, a, n - 1)?;
                        Some((num, denom))
                    })(),
                    DiscreteEq::Pushing { q } => (|| {
                        let denom = get(&f, &valid, t, a + 1, n - 1)?;
                        let num = q * get(&f, &valid, t, a + 1, n)?
                            * get(&f, &valid, t + 1, a, n - 1)?
                            + (1.0 - q) * get(&f, &valid, t, a, n)?
                                * get(&f, &valid, t + 1, a + 1, n - 1)?;
                        Some((num, denom))
                    })(),
                };
                let target = [(t + 1) as usize, at(a), n as usize];
                match pieces {
                    Some((num, denom)) if denom.abs() >= floor => {
                        f[target] = num / denom;
                    }
                    _ => {
                        // stencil clipped at the validity-region boundary:
                        // fall back to the exact support value when known
                        match outside(t + 1, a, n) {
                            Some(ext) => f[target] = ext,
                            None => valid[target] = false,
                        }
                    }
                }
            }
        }
    }
    let axes = [Axis::discrete(0), Axis::discrete(a_lo), Axis::discrete(0)];
    Ok(SolvedField {
        field: GridField::new(f, axes)?,
        valid,
    })
}
