//! Exact stochastic simulators for the six models (plus moving-wall
//! variants) and empirical one-point distribution estimation.
//!
//! Reproducibility contract: every run draws from counter-keyed substreams
//! (`seed`, `run`, `particle`, domain), so an ensemble gives bit-identical
//! results for any thread count; reductions are ordered by run index.

use crate::error::{Error, Result};
use crate::fredholm::Model;
use crate::rng::substream;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

/// Deterministic wall particle.
#[derive(Debug, Clone)]
pub enum Wall {
    /// Piecewise-linear continuous path `b(t)` with `b(0) = 0` (diffusive
    /// model): sample times and values.
    Continuous { times: Vec<f64>, values: Vec<f64> },
    /// Lattice wall jumping one unit rightward at `s_1 < s_2 < …`,
    /// starting at 0.
    JumpTimes { times: Vec<f64> },
}

impl Wall {
    fn validate(&self) -> Result<()> {
        match self {
            Wall::Continuous { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::Config("wall needs matching sample arrays".into()));
                }
                if times[0] != 0.0 || values[0] != 0.0 {
                    return Err(Error::Config("wall must start at b(0) = 0".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("wall sample times must increase".into()));
                }
                Ok(())
            }
            Wall::JumpTimes { times } => {
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("wall jump times must increase".into()));
                }
                Ok(())
            }
        }
    }

    /// Continuous wall value by linear interpolation.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Wall::Continuous { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
            Wall::JumpTimes { times } => times.partition_point(|&s| s <= t) as f64,
        }
    }

    /// Linear wall `b(t) = slope · t` sampled on a uniform grid.
    pub fn linear(slope: f64, horizon: f64, samples: usize) -> Wall {
        let times: Vec<f64> = (0..=samples)
            .map(|i| horizon * i as f64 / samples as f64)
            .collect();
        let values = times.iter().map(|&t| slope * t).collect();
        Wall::Continuous { times, values }
    }
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub model: Model,
    pub y: Vec<f64>,
    pub wall: Option<Wall>,
    /// Horizon `T` (a non-negative integer for the discrete-time models).
    pub horizon: f64,
    /// Euler step for the diffusive model.
    pub dt: f64,
    pub n_max: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.y.len() < self.n_max {
            return Err(Error::Config(format!(
                "need n_max ≥ 1 initial positions, have {} for n_max {}",
                self.y.len(),
                self.n_max
            )));
        }
        match self.model {
            Model::Rbm => {
                if self.dt <= 0.0 {
                    return Err(Error::Config("dt must be positive".into()));
                }
                if self.y.windows(2).any(|w| w[0] < w[1]) {
                    return Err(Error::Config("y must be weakly decreasing".into()));
                }
            }
            _ => {
                if self.y.windows(2).any(|w| w[0] <= w[1]) {
                    return Err(Error::Config("y must be strictly decreasing".into()));
                }
                if self.y.iter().any(|v| v.fract() != 0.0) {
                    return Err(Error::Config("lattice y must be integer".into()));
                }
            }
        }
        if self.model.discrete_time() && self.horizon.fract() != 0.0 {
            return Err(Error::Config("discrete-time horizon must be integer".into()));
        }
        if let Some(w) = &self.wall {
            w.validate()?;
            let ok = matches!(
                (&self.model, w),
                (Model::Rbm, Wall::Continuous { .. }) | (Model::Tasep, Wall::JumpTimes { .. })
            );
            if !ok {
                return Err(Error::Config(
                    "walls are supported for the diffusive model (continuous) and TASEP (jump times)"
                        .into(),
                ));
            }
        }
        Ok(())
    }
}

/// Positions of particles `1..=n_max` at each query time, one run.
pub fn simulate(cfg: &ModelConfig, run: u64, query_times: &[f64]) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    match cfg.model {
        Model::Rbm => simulate_rbm(cfg, run, query_times),
        Model::Tasep => simulate_tasep(cfg, run, query_times),
        Model::PushTasep => simulate_push_tasep(cfg, run, query_times),
        Model::Parallel { p } => Ok(simulate_discrete(cfg, run, query_times, Update::Parallel(p))),
        Model::Blocking { p } => Ok(simulate_discrete(cfg, run, query_times, Update::Blocking(p))),
        Model::Pushing { q } => Ok(simulate_discrete(cfg, run, query_times, Update::Pushing(q))),
    }
}

fn snapshot_times(query_times: &[f64], horizon: f64) -> Result<Vec<f64>> {
    if query_times.iter().any(|&t| t < 0.0 || t > horizon) {
        return Err(Error::Config("query times must lie in [0, horizon]".into()));
    }
    Ok(query_times.to_vec())
}

/// Skorokhod reflection on a shared Euler grid with incrementally
/// maintained running suprema.
fn simulate_rbm(cfg: &ModelConfig, run: u64, query_times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let queries = snapshot_times(query_times, cfg.horizon)?;
    let n = cfg.n_max;
    let steps = (cfg.horizon / cfg.dt).ceil() as usize;
    let dt = cfg.horizon / steps as f64;
    let sqdt = dt.sqrt();
    let mut rngs: Vec<_> = (1..=n)
        .map(|k| substream(cfg.seed, run, k as u64, 0))
        .collect();

    let mut free: Vec<f64> = cfg.y[..n].to_vec(); // y_k + B_k(t)
    let mut smax: Vec<f64> = vec![f64::NEG_INFINITY; n];
    let mut pos: Vec<f64> = cfg.y[..n].to_vec();
    let wall_at = |t: f64| cfg.wall.as_ref().map(|w| w.value(t));

    let mut out = vec![Vec::new(); queries.len()];
    let record = |time: f64, pos: &Vec<f64>, out: &mut Vec<Vec<f64>>| {
        for (qi, &q) in queries.iter().enumerate() {
            if out[qi].is_empty() && time >= q - 1e-12 {
                out[qi] = pos.clone();
            }
        }
    };

    // settle t = 0 (reflection of the initial condition under the wall)
    let mut upper = wall_at(0.0).unwrap_or(f64::INFINITY);
    for k in 0..n {
        let g = free[k] - upper;
        smax[k] = smax[k].max(g);
        pos[k] = free[k] - smax[k].max(0.0);
        upper = pos[k];
    }
    record(0.0, &pos, &mut out);

    for s in 1..=steps {
        let t = s as f64 * dt;
        let mut upper = wall_at(t).unwrap_or(f64::INFINITY);
        for k in 0..n {
            let z: f64 = rngs[k].sample(StandardNormal);
            free[k] += sqdt * z;
            let g = free[k] - upper;
            smax[k] = smax[k].max(g);
            pos[k] = free[k] - smax[k].max(0.0);
            debug_assert!(pos[k] <= upper + 1e-12, "ordering violated");
            upper = pos[k];
        }
        record(t, &pos, &mut out);
    }
    Ok(out)
}

/// Continuous-time exclusion walkers driven by independent rate-one clocks.
fn simulate_tasep(cfg: &ModelConfig, run: u64, query_times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let queries = snapshot_times(query_times, cfg.horizon)?;
    let n = cfg.n_max;
    let exp = Exp::new(1.0).unwrap();
    let mut rngs: Vec<_> = (1..=n)
        .map(|k| substream(cfg.seed, run, k as u64, 1))
        .collect();
    let mut pos: Vec<i64> = cfg.y[..n].iter().map(|&v| v as i64).collect();
    let mut next: Vec<f64> = rngs.iter_mut().map(|r| exp.sample(r)).collect();
    let wall_pos = |t: f64| -> Option<i64> {
        cfg.wall.as_ref().map(|w| w.value(t) as i64)
    };

    let mut out = vec![Vec::new(); queries.len()];
    let mut t_now = 0.0f64;
    loop {
        let (who, &t_ev) = match next
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        {
            Some(x) => x,
            None => break,
        };
        // snapshots strictly before the event
        for (qi, &q) in queries.iter().enumerate() {
            if out[qi].is_empty() && q < t_ev && q >= t_now - 1e-12 {
                out[qi] = pos.iter().map(|&x| x as f64).collect();
            }
        }
        if t_ev > cfg.horizon {
            break;
        }
        t_now = t_ev;
        let dest = pos[who] + 1;
        let blocked_by_prev = who > 0 && pos[who - 1] == dest;
        let blocked_by_wall = who == 0 && wall_pos(t_ev).is_some_and(|w| w == dest);
        if !blocked_by_prev && !blocked_by_wall {
            pos[who] += 1;
        }
        if who > 0 {
            debug_assert!(pos[who] < pos[who - 1], "exclusion violated");
        }
        next[who] = t_ev + exp.sample(&mut rngs[who]);
    }
    for (qi, &q) in queries.iter().enumerate() {
        if out[qi].is_empty() && q <= cfg.horizon {
            out[qi] = pos.iter().map(|&x| x as f64).collect();
        }
    }
    Ok(out)
}

/// Left jumps with instantaneous pushing cascades.
fn simulate_push_tasep(cfg: &ModelConfig, run: u64, query_times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let queries = snapshot_times(query_times, cfg.horizon)?;
    let n = cfg.n_max;
    let exp = Exp::new(1.0).unwrap();
    let mut rngs: Vec<_> = (1..=n)
        .map(|k| substream(cfg.seed, run, k as u64, 2))
        .collect();
    let mut pos: Vec<i64> = cfg.y[..n].iter().map(|&v| v as i64).collect();
    let mut next: Vec<f64> = rngs.iter_mut().map(|r| exp.sample(r)).collect();

    let mut out = vec![Vec::new(); queries.len()];
    let mut t_now = 0.0f64;
    loop {
        let (who, &t_ev) = next
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        for (qi, &q) in queries.iter().enumerate() {
            if out[qi].is_empty() && q < t_ev && q >= t_now - 1e-12 {
                out[qi] = pos.iter().map(|&x| x as f64).collect();
            }
        }
        if t_ev > cfg.horizon {
            break;
        }
        t_now = t_ev;
        pos[who] -= 1;
        // push any left neighbours occupying the landing sites
        let mut m = who + 1;
        while m < n && pos[m] == pos[m - 1] {
            pos[m] -= 1;
            m += 1;
        }
        next[who] = t_ev + exp.sample(&mut rngs[who]);
    }
    for (qi, &q) in queries.iter().enumerate() {
        if out[qi].is_empty() && q <= cfg.horizon {
            out[qi] = pos.iter().map(|&x| x as f64).collect();
        }
    }
    Ok(out)
}

enum Update {
    Parallel(f64),
    Blocking(f64),
    Pushing(f64),
}

/// Discrete-time updates: synchronous (parallel) or right-to-left
/// sequential (blocking / pushing).
fn simulate_discrete(
    cfg: &ModelConfig,
    run: u64,
    query_times: &[f64],
    update: Update,
) -> Vec<Vec<f64>> {
    let n = cfg.n_max;
    let horizon = cfg.horizon as i64;
    let mut rngs: Vec<_> = (1..=n)
        .map(|k| substream(cfg.seed, run, k as u64, 3))
        .collect();
    let mut pos: Vec<i64> = cfg.y[..n].iter().map(|&v| v as i64).collect();
    let mut out = vec![Vec::new(); query_times.len()];
    let record = |t: i64, pos: &Vec<i64>, out: &mut Vec<Vec<f64>>| {
        for (qi, &q) in query_times.iter().enumerate() {
            if out[qi].is_empty() && (q as i64) == t {
                out[qi] = pos.iter().map(|&x| x as f64).collect();
            }
        }
    };
    record(0, &pos, &mut out);
    for t in 1..=horizon {
        match update {
            Update::Parallel(p) => {
                let old = pos.clone();
                for k in 0..n {
                    let coin = rngs[k].gen::<f64>() < p;
                    let free = k == 0 || old[k - 1] > old[k] + 1;
                    if coin && free {
                        pos[k] += 1;
                    }
                }
            }
            Update::Blocking(p) => {
                for k in 0..n {
                    let coin = rngs[k].gen::<f64>() < p;
                    let free = k == 0 || pos[k - 1] > pos[k] + 1;
                    if coin && free {
                        pos[k] += 1;
                    }
                }
            }
            Update::Pushing(q) => {
                for k in 0..n {
                    let coin = rngs[k].gen::<f64>() < q;
                    let forced = k > 0 && pos[k - 1] == pos[k];
                    if coin || forced {
                        pos[k] -= 1;
                    }
                }
            }
        }
        debug_assert!(pos.windows(2).all(|w| w[0] > w[1]), "exclusion violated");
        record(t, &pos, &mut out);
    }
    out
}

/// Empirical survival function at fixed `(t, n)` with binomial error bars.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleCdf {
    pub a_grid: Vec<f64>,
    pub f_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: usize,
}

/// `F̂(a) = #{Y_n(t) > a} / runs`, deterministic for a given seed no matter
/// how the ensemble is scheduled.
pub fn empirical_cdf(
    cfg: &ModelConfig,
    n: usize,
    t: f64,
    a_grid: &[f64],
    runs: usize,
) -> Result<EnsembleCdf> {
    if runs < 2 {
        return Err(Error::Config("need at least 2 runs".into()));
    }
    if n == 0 || n > cfg.n_max {
        return Err(Error::Config(format!("level {n} outside 1..={}", cfg.n_max)));
    }
    cfg.validate()?;
    let samples: Result<Vec<f64>> = (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            let snap = simulate(cfg, run, &[t])?;
            Ok(snap[0][n - 1])
        })
        .collect();
    let samples = samples?;
    let mut f_hat = Vec::with_capacity(a_grid.len());
    let mut stderr = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let count = samples.iter().filter(|&&y| y > a).count();
        let p = count as f64 / runs as f64;
        f_hat.push(p);
        stderr.push((p * (1.0 - p) / runs as f64).sqrt());
    }
    Ok(EnsembleCdf {
        a_grid: a_grid.to_vec(),
        f_hat,
        stderr,
        runs,
    })
}

/// Trajectory dump rows `(run, particle, t, position)`.
pub fn trajectories(
    cfg: &ModelConfig,
    runs: usize,
    times: &[f64],
) -> Result<Vec<(usize, usize, f64, f64)>> {
    let mut rows = Vec::new();
    for run in 0..runs {
        let snaps = simulate(cfg, run as u64, times)?;
        for (ti, &t) in times.iter().enumerate() {
            for (k, &x) in snaps[ti].iter().enumerate() {
                rows.push((run, k + 1, t, x));
            }
        }
    }
    Ok(rows)
}
