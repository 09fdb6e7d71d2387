//! Randomized property suite: determinant lemmas, flow identities,
//! odd-order annihilation, commutator identities and seed determinism.
//! Shared between the test suite and the command-line `selftest`.

use crate::fredholm::Model;
use crate::linalg::{det_i_minus, PivotedLu};
use crate::specfun::{self, GenFunSpec, Kind, LatticeModel};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub max_dev: f64,
    pub tol: f64,
    pub instances: usize,
}

fn outcome(name: &str, max_dev: f64, tol: f64, instances: usize) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        pass: max_dev <= tol,
        max_dev,
        tol,
        instances,
    }
}

fn small_matrix(r: &mut impl Rng, n: usize, m: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| scale * (r.gen::<f64>() - 0.5))
}

fn vecn(r: &mut impl Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| r.gen::<f64>() - 0.5)
}

fn inner(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.dot(b)
}

fn resolvent_apply(b: &Array2<f64>, f: &Array1<f64>) -> Array1<f64> {
    let n = b.nrows();
    let mut m = Array2::from_shape_fn((n, n), |(i, j)| -b[[i, j]]);
    for i in 0..n {
        m[[i, i]] += 1.0;
    }
    PivotedLu::new(&m).unwrap().solve(f)
}

/// `det(I - AB) = det(I - BA)` on random rectangular factors.
pub fn check_cyclicity(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev: f64 = 0.0;
    for _ in 0..instances {
        let n = 3 + (r.gen::<u64>() % 6) as usize;
        let k = 2 + (r.gen::<u64>() % 6) as usize;
        let a = small_matrix(&mut r, n, k, 0.8);
        let b = small_matrix(&mut r, k, n, 0.8);
        let d1 = det_i_minus(&a.dot(&b)).unwrap().0;
        let d2 = det_i_minus(&b.dot(&a)).unwrap().0;
        max_dev = max_dev.max((d1 - d2).abs());
    }
    outcome("cyclicity det(I-AB) = det(I-BA)", max_dev, 1e-12, instances)
}

/// `∂_z det(I - K_z) = -det(I - K_z) tr(R_z ∂_z K_z)` against central
/// differences for a rank-one pencil `K_z = K_0 + z ψ⊗φ`.
pub fn check_parameter_differentiation(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let mut max_dev: f64 = 0.0;
    for _ in 0..instances {
        let n = 4 + (r.gen::<u64>() % 5) as usize;
        let k0 = small_matrix(&mut r, n, n, 0.4);
        let psi = vecn(&mut r, n);
        let phi = vecn(&mut r, n);
        let z0 = 0.3 * (r.gen::<f64>() - 0.5);
        let kz = |z: f64| {
            let mut k = k0.clone();
            for i in 0..n {
                for j in 0..n {
                    k[[i, j]] += z * psi[i] * phi[j];
                }
            }
            k
        };
        let det = |z: f64| det_i_minus(&kz(z)).unwrap().0;
        let f = det(z0);
        // tr(R ψ⊗φ) = ⟨Rψ, φ⟩
        let rk = resolvent_apply(&kz(z0), &psi);
        let analytic = -f * inner(&rk, &phi);
        let h = 1e-5;
        let fd = (det(z0 + h) - det(z0 - h)) / (2.0 * h);
        max_dev = max_dev.max((analytic - fd).abs());
    }
    outcome(
        "parameter differentiation vs finite differences",
        max_dev,
        1e-6,
        instances,
    )
}

/// `F_A/F_B = 1 - ⟨R_B ψ, φ⟩` and `F_B/F_A = 1 + ⟨R_A ψ, φ⟩`.
pub fn check_rank_one_perturbations(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
    let mut max_dev: f64 = 0.0;
    for _ in 0..instances {
        let n = 4 + (r.gen::<u64>() % 5) as usize;
        let b = small_matrix(&mut r, n, n, 0.4);
        let psi = vecn(&mut r, n);
        let phi = vecn(&mut r, n);
        let mut a = b.clone();
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] += psi[i] * phi[j];
            }
        }
        let fa = det_i_minus(&a).unwrap().0;
        let fb = det_i_minus(&b).unwrap().0;
        let rb_psi = resolvent_apply(&b, &psi);
        let ra_psi = resolvent_apply(&a, &psi);
        max_dev = max_dev.max((fa / fb - (1.0 - inner(&rb_psi, &phi))).abs());
        max_dev = max_dev.max((fb / fa - (1.0 + inner(&ra_psi, &phi))).abs());
    }
    outcome("rank-one perturbation ratios", max_dev, 1e-10, instances)
}

/// `⟨R_A f, g⟩ = ⟨R_B f, g⟩ + (F_B/F_A) ⟨R_B ψ, g⟩ ⟨R_B f, φ⟩` and the
/// specialization `⟨R_A ψ, g⟩ = (F_B/F_A) ⟨R_B ψ, g⟩`.
pub fn check_rank_one_resolvent(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
    let mut max_dev: f64 = 0.0;
    for _ in 0..instances {
        let n = 4 + (r.gen::<u64>() % 5) as usize;
        let b = small_matrix(&mut r, n, n, 0.4);
        let psi = vecn(&mut r, n);
        let phi = vecn(&mut r, n);
        let f = vecn(&mut r, n);
        let g = vecn(&mut r, n);
        let mut a = b.clone();
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] += psi[i] * phi[j];
            }
        }
        let fa = det_i_minus(&a).unwrap().0;
        let fb = det_i_minus(&b).unwrap().0;
        let ra_f = resolvent_apply(&a, &f);
        let rb_f = resolvent_apply(&b, &f);
        let rb_psi = resolvent_apply(&b, &psi);
        let ra_psi = resolvent_apply(&a, &psi);
        let lhs = inner(&ra_f, &g);
        let rhs = inner(&rb_f, &g) + fb / fa * inner(&rb_psi, &g) * inner(&rb_f, &phi);
        max_dev = max_dev.max((lhs - rhs).abs());
        let lhs = inner(&ra_psi, &g);
        let rhs = fb / fa * inner(&rb_psi, &g);
        max_dev = max_dev.max((lhs - rhs).abs());
    }
    outcome("rank-one resolvent identity", max_dev, 1e-10, instances)
}

/// All eight §-style flow identities of the kernel factor families, at
/// randomized indices.
pub fn check_flow_identities(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
    let mut max_dev: f64 = 0.0;
    let basis = |model, kind, t: f64, p: f64, n: i64, a: i64, arg: i64| {
        specfun::model_basis(&GenFunSpec {
            model,
            kind,
            t,
            p_or_q: p,
            n,
            a,
            arg,
        })
        .unwrap()
    };
    for _ in 0..instances {
        let n = 1 + (r.gen::<u64>() % 3) as i64;
        let a = (r.gen::<u64>() % 5) as i64 - 2;
        let u = (r.gen::<u64>() % 7) as i64 - 3;
        let tc = 0.3 + 1.5 * r.gen::<f64>();
        let ti = (1 + (r.gen::<u64>() % 3)) as f64;
        let p = 0.2 + 0.6 * r.gen::<f64>();

        // continuous-time: ∇_n⁺ψ = 2∇_a⁺ψ and the analytic t-flows
        for model in [LatticeModel::Tasep, LatticeModel::PushTasep] {
            let f = |nn, aa| basis(model, Kind::Psi, tc, 0.0, nn, aa, u);
            max_dev = max_dev.max(((f(n + 1, a) - f(n, a)) - 2.0 * (f(n, a + 1) - f(n, a))).abs());
            let fb = |nn, aa| basis(model, Kind::PhiBar, tc, 0.0, nn, aa, u);
            max_dev =
                max_dev.max(((fb(n, a) - fb(n - 1, a)) - 2.0 * (fb(n, a) - fb(n, a - 1))).abs());
            let dt = specfun::model_basis_dt(&GenFunSpec {
                model,
                kind: Kind::Psi,
                t: tc,
                p_or_q: 0.0,
                n,
                a,
                arg: u,
            })
            .unwrap();
            let rhs = match model {
                LatticeModel::Tasep => -0.5 * (f(n, a) - f(n, a - 1)),
                _ => 2.0 * (f(n, a + 1) - f(n, a)),
            };
            max_dev = max_dev.max((dt - rhs).abs());
        }
        // discrete-time t-flows
        let q = 1.0 - p;
        let gamma = 1.0 / (q + p / 2.0);
        let beta_par = -(p / 2.0) / (q + p / 2.0);
        let fpar = |tt: f64, nn, aa| basis(LatticeModel::Parallel, Kind::Psi, tt, p, nn, aa, u);
        max_dev = max_dev.max(
            ((fpar(ti + 1.0, n, a) - fpar(ti, n, a))
                - beta_par * (fpar(ti, n, a) - fpar(ti, n, a - 1)))
            .abs(),
        );
        max_dev = max_dev.max(
            ((fpar(ti, n + 1, a) - fpar(ti, n, a))
                - (2.0 * fpar(ti, n, a + 1) - fpar(ti, n, a) - gamma * fpar(ti - 1.0, n, a)))
            .abs(),
        );
        let fblk = |tt: f64, nn, aa| basis(LatticeModel::Blocking, Kind::Psi, tt, p, nn, aa, u);
        max_dev = max_dev.max(
            ((fblk(ti + 1.0, n, a) - fblk(ti, n, a))
                - beta_par * (fblk(ti, n, a) - fblk(ti, n, a - 1)))
            .abs(),
        );
        let beta_push = q / (q + p / 2.0);
        let fpsh = |tt: f64, nn, aa| basis(LatticeModel::Pushing, Kind::Psi, tt, q, nn, aa, u);
        max_dev = max_dev.max(
            ((fpsh(ti + 1.0, n, a) - fpsh(ti, n, a))
                - beta_push * (fpsh(ti, n, a + 1) - fpsh(ti, n, a)))
            .abs(),
        );
    }
    outcome("kernel-factor flow identities", max_dev, 1e-10, instances)
}

/// Hermite ladder identities against finite differences.
pub fn check_hermite_ladders(seed: u64, instances: usize) -> CheckOutcome {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
    let mut max_dev: f64 = 0.0;
    let h = 1e-3;
    // fourth-order central difference keeps truncation below roundoff
    let d4 = |f: &dyn Fn(f64) -> f64, x: f64| {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    };
    // deviations are relative to the ladder value: the functions grow like
    // t^{-n/2} H_n at small t, so an absolute bound would be meaningless
    let mut rel = |lhs: f64, rhs: f64| {
        let dev = (lhs - rhs).abs() / rhs.abs().max(1.0);
        if dev > max_dev {
            max_dev = dev;
        }
    };
    for _ in 0..instances {
        let n = (r.gen::<u64>() % 6) as i64;
        let t = 0.4 + 1.2 * r.gen::<f64>();
        let x = 3.0 * (r.gen::<f64>() - 0.5);
        let dphib = d4(&|z| specfun::rbm_phibar(n, t, z).unwrap(), x);
        rel(dphib, specfun::rbm_phibar(n - 1, t, x).unwrap());
        let dphi = d4(&|z| specfun::rbm_phi(n, t, z).unwrap(), x);
        rel(dphi, -specfun::rbm_phi(n + 1, t, x).unwrap());
        let dt = d4(&|s| specfun::rbm_phi(n, s, x).unwrap(), t);
        rel(dt, 0.5 * specfun::rbm_phi(n + 2, t, x).unwrap());
        let dtb = d4(&|s| specfun::rbm_phibar(n, s, x).unwrap(), t);
        rel(dtb, -0.5 * specfun::rbm_phibar(n - 2, t, x).unwrap());
    }
    outcome("Hermite ladder identities (differenced)", max_dev, 1e-8, instances)
}

/// Odd total Hirota order annihilates `f·f` to stencil roundoff.
pub fn check_odd_order_annihilation(seed: u64, instances: usize) -> CheckOutcome {
    use crate::grid::{Axis, GridField};
    use crate::hirota::{hirota_derivative, StencilOrder};
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x66);
    let mut max_dev: f64 = 0.0;
    for _ in 0..instances {
        let (c1, c2, c3) = (r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>());
        let axes = [
            Axis::continuous(-0.4, 0.1),
            Axis::continuous(-0.4, 0.1),
            Axis::continuous(-0.4, 0.1),
        ];
        let f = GridField::from_fn([9, 9, 9], axes, |t, a, n| {
            (c1 * t + c2 * a * a - c3 * n).exp() + 0.5
        })
        .unwrap();
        for order in [1u8, 3] {
            for axis in 0..3 {
                let d =
                    hirota_derivative(&f, &f, axis, order, [4, 4, 4], StencilOrder::Second)
                        .unwrap();
                max_dev = max_dev.max(d.abs());
            }
        }
    }
    outcome("odd Hirota order annihilates f·f", max_dev, 1e-9, instances)
}

/// Identity-level commutator checks on random data.
pub fn check_zc_identities(seed: u64, instances: usize) -> CheckOutcome {
    use crate::laxzc::*;
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
    let mut max_rel: f64 = 0.0;
    for _ in 0..instances {
        let s = RbmStack {
            n_lo: 0,
            f: (0..7).map(|_| 0.5 + r.gen::<f64>()).collect(),
            ft: (0..7).map(|_| r.gen::<f64>() - 0.5).collect(),
            fa: (0..7).map(|_| r.gen::<f64>() - 0.5).collect(),
            faa: (0..7).map(|_| r.gen::<f64>() - 0.5).collect(),
        };
        let rep = zc_equivalence_rbm(&s).unwrap();
        max_rel = max_rel.max(rep.max_identity_dev / rep.max_entry_abs.max(1.0));
        let sheet = TasepSheet {
            a_lo: 0,
            n_lo: 0,
            f: Array2::from_shape_fn((6, 5), |_| 0.5 + r.gen::<f64>()),
            ft: Array2::from_shape_fn((6, 5), |_| r.gen::<f64>() - 0.5),
        };
        let rep = zc_equivalence_tasep(&sheet).unwrap();
        max_rel = max_rel.max(rep.max_identity_dev / rep.max_entry_abs.max(1.0));
        let b = ParallelBox {
            t_lo: 0,
            a_lo: 0,
            n_lo: 0,
            f: ndarray::Array3::from_shape_fn((5, 6, 4), |_| 0.5 + r.gen::<f64>()),
        };
        let rep = zc_equivalence_parallel(&b, 0.2 + 0.6 * r.gen::<f64>()).unwrap();
        max_rel = max_rel.max(rep.max_identity_dev / rep.max_entry_abs.max(1.0));
    }
    outcome("commutator entry identities (random data)", max_rel, 1e-10, instances)
}

/// Byte-identical ensembles across 1- and 8-way parallel execution.
pub fn check_seed_determinism(seed: u64) -> CheckOutcome {
    use crate::mc::{empirical_cdf, ModelConfig};
    let cfg = ModelConfig {
        model: Model::Tasep,
        y: vec![-1.0, -2.0],
        wall: None,
        horizon: 1.0,
        dt: 1e-3,
        n_max: 2,
        seed,
    };
    let grid: Vec<f64> = (-3..=3).map(|a| a as f64).collect();
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let c1 = pool1.install(|| empirical_cdf(&cfg, 2, 1.0, &grid, 300).unwrap());
    let c8 = pool8.install(|| empirical_cdf(&cfg, 2, 1.0, &grid, 300).unwrap());
    let same = c1
        .f_hat
        .iter()
        .zip(&c8.f_hat)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    CheckOutcome {
        name: "seed determinism across 1/8-way pools".to_string(),
        pass: same,
        max_dev: if same { 0.0 } else { 1.0 },
        tol: 0.0,
        instances: 2,
    }
}

/// The full suite at standard instance counts.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_cyclicity(seed, 100),
        check_parameter_differentiation(seed, 100),
        check_rank_one_perturbations(seed, 100),
        check_rank_one_resolvent(seed, 100),
        check_flow_identities(seed, 60),
        check_hermite_ladders(seed, 100),
        check_odd_order_annihilation(seed, 20),
        check_zc_identities(seed, 100),
        check_seed_determinism(seed),
    ]
}
