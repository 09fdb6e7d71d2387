use taulab::closed_form::poisson_survival;
use taulab::grid::{Axis, GridField};
use taulab::hirota::{equation, residual_at, EquationId, StencilOrder, partial};

fn main() {
    let ht = 0.005;
    let axes = [
        Axis::continuous(0.5, ht),
        Axis::discrete(-2),
        Axis::discrete(0),
    ];
    let f = GridField::from_fn([41, 10, 2], axes, |t, a, n| {
        if n < 0.5 { 1.0 } else { poisson_survival(t, a as i64) }
    }).unwrap();
    let eq = equation(EquationId::Tasep);
    for j in 1..9usize {
        let point = [20, j, 1];
        let (raw, norm) = residual_at(&eq, &f, point, StencilOrder::Second).unwrap();
        let c = f.coords(point);
        let dt = partial(&f, point, [1,0,0], StencilOrder::Second).unwrap();
        let exact_dt = {
            let t = c[0]; let a = c[1] as i64;
            if a >= 0 { (-t as f64).exp()*t.powi(a as i32)/(1..=a).map(|k| k as f64).product::<f64>().max(1.0) } else {0.0}
        };
        println!("a={} raw={:.3e} norm={:.3e} dt={:.6e} exact={:.6e}", c[1], raw, norm, dt, exact_dt);
    }
}
