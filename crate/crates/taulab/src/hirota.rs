//! Bilinear operators: exponential shifts, Hirota derivatives, and the
//! residual fields of the model equations.
//!
//! A bilinear equation is a sum of terms; each term carries a coefficient,
//! an antisymmetric index shift applied to the pair, and Hirota-derivative
//! orders for the continuous axes. The equation registry covers the six
//! model equations, KP, the three-term exponential-shift equation (HBDE),
//! the semi-discrete Toda form, and the single-index variants used by the
//! scaling checks.

use crate::error::{Error, Result};
use crate::grid::{Axis, AxisKind, GridField};
use ndarray::Array3;
use serde::Serialize;

/// Finite-difference accuracy for continuous Hirota derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    #[default]
    Second,
    Fourth,
}

/// Central-difference coefficients `(offsets, weights)` for `d^m/dx^m`.
fn stencil(m: u8, order: StencilOrder) -> (&'static [i64], &'static [f64]) {
    const D1_2: ([i64; 3], [f64; 3]) = ([-1, 0, 1], [-0.5, 0.0, 0.5]);
    const D2_2: ([i64; 3], [f64; 3]) = ([-1, 0, 1], [1.0, -2.0, 1.0]);
    const D3_2: ([i64; 5], [f64; 5]) = ([-2, -1, 0, 1, 2], [-0.5, 1.0, 0.0, -1.0, 0.5]);
    const D4_2: ([i64; 5], [f64; 5]) = ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]);
    const D1_4: ([i64; 5], [f64; 5]) = (
        [-2, -1, 0, 1, 2],
        [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
    );
    const D2_4: ([i64; 5], [f64; 5]) = (
        [-2, -1, 0, 1, 2],
        [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
    );
    const D3_4: ([i64; 7], [f64; 7]) = (
        [-3, -2, -1, 0, 1, 2, 3],
        [0.125, -1.0, 1.625, 0.0, -1.625, 1.0, -0.125],
    );
    const D4_4: ([i64; 7], [f64; 7]) = (
        [-3, -2, -1, 0, 1, 2, 3],
        [
            -1.0 / 6.0,
            2.0,
            -6.5,
            28.0 / 3.0,
            -6.5,
            2.0,
            -1.0 / 6.0,
        ],
    );
    match (m, order) {
        (0, _) => (&[0][..], &[1.0][..]),
        (1, StencilOrder::Second) => (&D1_2.0[..], &D1_2.1[..]),
        (2, StencilOrder::Second) => (&D2_2.0[..], &D2_2.1[..]),
        (3, StencilOrder::Second) => (&D3_2.0[..], &D3_2.1[..]),
        (4, StencilOrder::Second) => (&D4_2.0[..], &D4_2.1[..]),
        (1, StencilOrder::Fourth) => (&D1_4.0[..], &D1_4.1[..]),
        (2, StencilOrder::Fourth) => (&D2_4.0[..], &D2_4.1[..]),
        (3, StencilOrder::Fourth) => (&D3_4.0[..], &D3_4.1[..]),
        (4, StencilOrder::Fourth) => (&D4_4.0[..], &D4_4.1[..]),
        _ => panic!("derivative order {m} not supported"),
    }
}

pub fn stencil_radius(m: u8, order: StencilOrder) -> usize {
    stencil(m, order).0.iter().map(|o| o.unsigned_abs() as usize).max().unwrap_or(0)
}

/// Mixed partial `∂^{orders} f` at a grid point by tensor-product central
/// differences. Only continuous axes may carry a nonzero order.
pub fn partial(
    f: &GridField,
    point: [usize; 3],
    orders: [u8; 3],
    so: StencilOrder,
) -> Result<f64> {
    const AXES: [&str; 3] = ["t", "a", "n"];
    for d in 0..3 {
        if orders[d] > 0 && f.axes[d].kind == AxisKind::Discrete {
            return Err(Error::DiscreteAxis(AXES[d]));
        }
        let r = stencil_radius(orders[d], so);
        let have = point[d].min(f.shape()[d] - 1 - point[d]);
        if r > have {
            return Err(Error::BoundaryProximity {
                axis: AXES[d],
                needed: r,
                have,
            });
        }
    }
    let (o0, w0) = stencil(orders[0], so);
    let (o1, w1) = stencil(orders[1], so);
    let (o2, w2) = stencil(orders[2], so);
    let mut acc = 0.0;
    for (i0, &d0) in o0.iter().enumerate() {
        if w0[i0] == 0.0 {
            continue;
        }
        for (i1, &d1) in o1.iter().enumerate() {
            if w1[i1] == 0.0 {
                continue;
            }
            for (i2, &d2) in o2.iter().enumerate() {
                if w2[i2] == 0.0 {
                    continue;
                }
                acc += w0[i0] * w1[i1] * w2[i2] * f.get_offset(point, [d0, d1, d2])?;
            }
        }
    }
    let h0 = f.axes[0].spacing.powi(orders[0] as i32);
    let h1 = f.axes[1].spacing.powi(orders[1] as i32);
    let h2 = f.axes[2].spacing.powi(orders[2] as i32);
    Ok(acc / (h0 * h1 * h2))
}

/// Mixed Hirota derivative `D^{orders} f·g` at matching points:
/// `Σ_j (-1)^{|orders-j|} C(orders, j) ∂^j f ∂^{orders-j} g`.
pub fn hirota_mixed(
    f: &GridField,
    g: &GridField,
    orders: [u8; 3],
    pf: [usize; 3],
    pg: [usize; 3],
    so: StencilOrder,
) -> Result<f64> {
    let mut acc = 0.0;
    for j0 in 0..=orders[0] {
        for j1 in 0..=orders[1] {
            for j2 in 0..=orders[2] {
                let c = choose(orders[0], j0) * choose(orders[1], j1) * choose(orders[2], j2);
                let parity = (orders[0] - j0) + (orders[1] - j1) + (orders[2] - j2);
                let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
                let df = partial(f, pf, [j0, j1, j2], so)?;
                let dg = partial(g, pg, [orders[0] - j0, orders[1] - j1, orders[2] - j2], so)?;
                acc += sign * c * df * dg;
            }
        }
    }
    Ok(acc)
}

fn choose(n: u8, k: u8) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Single-axis Hirota derivative `D_axis^order f·g` at `point`
/// (axis 0 = t, axis 1 = a).
pub fn hirota_derivative(
    f: &GridField,
    g: &GridField,
    axis: usize,
    order: u8,
    point: [usize; 3],
    so: StencilOrder,
) -> Result<f64> {
    let mut orders = [0u8; 3];
    orders[axis] = order;
    hirota_mixed(f, g, orders, point, point, so)
}

/// Exponential-shift pair `(e^{γ·D} f·g)(x) = f(x + γ) g(x - γ)`, with the
/// other variables kept fixed.
pub fn shift_bilinear(
    f: &GridField,
    g: &GridField,
    shift: [i64; 3],
    point: [usize; 3],
) -> Result<f64> {
    let left = f.get_offset(point, shift)?;
    let right = g.get_offset(point, [-shift[0], -shift[1], -shift[2]])?;
    Ok(left * right)
}

/// One bilinear term: `coeff · D^{orders} e^{shift·D} F(left)·F(right)`.
#[derive(Debug, Clone, Copy)]
pub struct Term {
    pub coeff: f64,
    pub shift: [i64; 3],
    pub orders: [u8; 3],
}

/// Equation identifiers for the registry. The `*M` variants are the
/// single-index forms where consecutive levels are encoded as `m ± 1`
/// shifts of one lattice direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EquationId {
    Rbm,
    Tasep,
    PushTasep,
    Parallel { p: f64 },
    Blocking { p: f64 },
    Pushing { q: f64 },
    Kp,
    Hbde { z: [f64; 3] },
    Toda2d,
    RbmM,
    TasepM,
    ParallelM { p: f64 },
}

#[derive(Debug, Clone)]
pub struct BilinearEquation {
    pub id: EquationId,
    pub terms: Vec<Term>,
    /// Offset of the right field argument relative to the left one
    /// (e.g. `(0,0,-1)` for an `F_n · F_{n-1}` pair).
    pub pair_offset: [i64; 3],
}

/// Registry mapping equation identifiers to term lists. Coefficients that
/// depend on the jump probability are baked in at construction, so a new
/// equation must be requested when the parameter changes.
pub fn equation(id: EquationId) -> BilinearEquation {
    let t = |coeff, shift, orders| Term {
        coeff,
        shift,
        orders,
    };
    let (terms, pair_offset) = match id {
        EquationId::Rbm => (
            vec![
                t(1.0, [0, 0, 0], [1, 0, 0]),
                t(-0.5, [0, 0, 0], [0, 2, 0]),
            ],
            [0, 0, -1],
        ),
        EquationId::Tasep => (
            vec![
                t(1.0, [0, 0, 0], [1, 0, 0]),
                t(-1.0, [0, -1, 0], [0, 0, 0]),
                t(1.0, [0, 0, 0], [0, 0, 0]),
            ],
            [0, 0, -1],
        ),
        EquationId::PushTasep => (
            vec![
                t(1.0, [0, 0, 0], [1, 0, 0]),
                t(-1.0, [0, 1, 0], [0, 0, 0]),
                t(1.0, [0, 0, 0], [0, 0, 0]),
            ],
            [0, 1, -1],
        ),
        EquationId::Parallel { p } => (
            vec![
                t(1.0, [1, 0, 0], [0, 0, 0]),
                t(-p, [0, -1, 0], [0, 0, 0]),
                t(-(1.0 - p), [0, 0, 0], [0, 0, 0]),
            ],
            [0, 0, -1],
        ),
        EquationId::Blocking { p } => (
            vec![
                t(1.0, [1, 0, 0], [0, 0, 0]),
                t(-p, [0, -1, 0], [0, 0, 0]),
                t(-(1.0 - p), [0, 0, 0], [0, 0, 0]),
            ],
            [1, 0, -1],
        ),
        EquationId::Pushing { q } => (
            vec![
                t(1.0, [1, 0, 0], [0, 0, 0]),
                t(-q, [0, 1, 0], [0, 0, 0]),
                t(-(1.0 - q), [0, 0, 0], [0, 0, 0]),
            ],
            [1, 1, -1],
        ),
        EquationId::Kp => (
            vec![
                t(1.0, [0, 0, 0], [1, 0, 1]),
                t(0.25, [0, 0, 0], [0, 2, 0]),
                t(1.0 / 12.0, [0, 0, 0], [0, 0, 4]),
            ],
            [0, 0, 0],
        ),
        EquationId::Hbde { z } => (
            vec![
                t(z[0], [1, 0, 0], [0, 0, 0]),
                t(z[1], [0, 1, 0], [0, 0, 0]),
                t(z[2], [0, 0, 1], [0, 0, 0]),
            ],
            [0, 0, 0],
        ),
        EquationId::Toda2d => (
            vec![
                t(0.5, [0, 0, 0], [2, 0, 0]),
                t(-0.5, [0, 0, 0], [0, 2, 0]),
                t(-4.0, [0, 0, 1], [0, 0, 0]),
                t(4.0, [0, 0, 0], [0, 0, 0]),
            ],
            [0, 0, 0],
        ),
        EquationId::RbmM => (
            vec![
                t(1.0, [0, 0, 1], [1, 0, 0]),
                t(-0.5, [0, 0, 1], [0, 2, 0]),
            ],
            [0, 0, 0],
        ),
        EquationId::TasepM => (
            vec![
                t(1.0, [0, 0, 1], [1, 0, 0]),
                t(-1.0, [0, -1, 1], [0, 0, 0]),
                t(1.0, [0, 0, 1], [0, 0, 0]),
            ],
            [0, 0, 0],
        ),
        EquationId::ParallelM { p } => (
            vec![
                t(1.0, [1, 0, 1], [0, 0, 0]),
                t(-p, [0, -1, 1], [0, 0, 0]),
                t(-(1.0 - p), [0, 0, 1], [0, 0, 0]),
            ],
            [0, 0, 0],
        ),
    };
    BilinearEquation {
        id,
        terms,
        pair_offset,
    }
}

/// Evaluates one term of an equation on the pair
/// `(F at point, F at point + pair_offset)`.
pub fn term_value(
    term: &Term,
    f: &GridField,
    point: [usize; 3],
    pair_offset: [i64; 3],
    so: StencilOrder,
) -> Result<f64> {
    let add = |p: [usize; 3], off: [i64; 3]| -> Result<[usize; 3]> {
        let mut out = [0usize; 3];
        let shape = f.shape();
        for d in 0..3 {
            let v = p[d] as i64 + off[d];
            if v < 0 || v >= shape[d] as i64 {
                return Err(Error::OutOfRange(
                    [
                        p[0] as i64 + off[0],
                        p[1] as i64 + off[1],
                        p[2] as i64 + off[2],
                    ],
                    shape,
                ));
            }
            out[d] = v as usize;
        }
        Ok(out)
    };
    let left = add(point, term.shift)?;
    let right = add(
        point,
        [
            pair_offset[0] - term.shift[0],
            pair_offset[1] - term.shift[1],
            pair_offset[2] - term.shift[2],
        ],
    )?;
    Ok(term.coeff * hirota_mixed(f, f, term.orders, left, right, so)?)
}

/// Raw and normalized residual of `eq` at one interior point.
pub fn residual_at(
    eq: &BilinearEquation,
    f: &GridField,
    point: [usize; 3],
    so: StencilOrder,
) -> Result<(f64, f64)> {
    let mut raw = 0.0;
    for term in &eq.terms {
        raw += term_value(term, f, point, eq.pair_offset, so)?;
    }
    let denom = f.get(point) * f.get_offset(point, eq.pair_offset)?;
    if denom.abs() < 1e-100 {
        return Err(Error::Guard(format!(
            "normalization factor vanishes at {point:?}"
        )));
    }
    Ok((raw, raw / denom))
}

/// Index box `lo..hi` (exclusive upper corner).
#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Region {
    pub fn full(f: &GridField) -> Region {
        Region {
            lo: [0; 3],
            hi: f.shape(),
        }
    }

    pub fn shrink(&self, by: [usize; 3]) -> Region {
        Region {
            lo: [self.lo[0] + by[0], self.lo[1] + by[1], self.lo[2] + by[2]],
            hi: [
                self.hi[0].saturating_sub(by[0]),
                self.hi[1].saturating_sub(by[1]),
                self.hi[2].saturating_sub(by[2]),
            ],
        }
    }
}

/// Residual field over a region, raw and normalized.
pub struct ResidualField {
    pub raw: GridField,
    pub normalized: GridField,
    pub region: Region,
    pub max_abs_raw: f64,
    pub max_abs_normalized: f64,
}

/// Evaluates the equation residual over every index in `region`, which must
/// leave room for all shifts and stencils.
pub fn residual_field(
    eq: &BilinearEquation,
    f: &GridField,
    region: Region,
    so: StencilOrder,
) -> Result<ResidualField> {
    let shape = [
        region.hi[0] - region.lo[0],
        region.hi[1] - region.lo[1],
        region.hi[2] - region.lo[2],
    ];
    let mut raw = Array3::<f64>::zeros(shape);
    let mut norm = Array3::<f64>::zeros(shape);
    let mut max_raw: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for i in 0..shape[0] {
        for j in 0..shape[1] {
            for k in 0..shape[2] {
                let point = [region.lo[0] + i, region.lo[1] + j, region.lo[2] + k];
                let (r, nres) = residual_at(eq, f, point, so)?;
                if !r.is_finite() {
                    return Err(Error::NanAt(point));
                }
                raw[[i, j, k]] = r;
                norm[[i, j, k]] = nres;
                max_raw = max_raw.max(r.abs());
                max_norm = max_norm.max(nres.abs());
            }
        }
    }
    let sub_axes = |d: usize| Axis {
        origin: f.axes[d].coord(region.lo[d]),
        spacing: f.axes[d].spacing,
        kind: f.axes[d].kind,
    };
    let axes = [sub_axes(0), sub_axes(1), sub_axes(2)];
    Ok(ResidualField {
        raw: GridField::new(raw, axes)?,
        normalized: GridField::new(norm, axes)?,
        region,
        max_abs_raw: max_raw,
        max_abs_normalized: max_norm,
    })
}

/// KP bilinear residual `[D_t D_a + ¼ D_x² + 1/12 D_a⁴] F·F` of a smooth
/// field sampled over `(t, x, a)` (all three axes continuous).
pub fn kp_residual(f: &GridField, so: StencilOrder) -> Result<ResidualField> {
    let r = stencil_radius(4, so);
    let eq = equation(EquationId::Kp);
    let region = Region::full(f).shrink([stencil_radius(1, so), stencil_radius(2, so), r]);
    residual_field(&eq, f, region, so)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn cont_axes(h: f64) -> [Axis; 3] {
        [
            Axis::continuous(-1.0, h),
            Axis::continuous(-1.0, h),
            Axis::continuous(-1.0, h),
        ]
    }

    #[test]
    fn first_order_hirota_on_exponentials() {
        // f = e^t, g = e^{2t}: D_t f·g = f'g - fg' = -e^{3t}, so -1 at t=0
        let h = 0.01;
        let axes = [
            Axis::continuous(-0.1, h),
            Axis::continuous(0.0, 1.0),
            Axis::continuous(0.0, 1.0),
        ];
        let f = GridField::from_fn([21, 1, 1], axes, |t, _, _| t.exp()).unwrap();
        let g = GridField::from_fn([21, 1, 1], axes, |t, _, _| (2.0 * t).exp()).unwrap();
        let at = [10, 0, 0]; // t = 0
        let d = hirota_derivative(&f, &g, 0, 1, at, StencilOrder::Second).unwrap();
        assert!((d + 1.0).abs() < 5e-4, "D_t = {d}");
        let d4 = hirota_derivative(&f, &g, 0, 1, at, StencilOrder::Fourth).unwrap();
        assert!((d4 + 1.0).abs() < 1e-7, "fourth-order D_t = {d4}");
    }

    #[test]
    fn second_order_hirota_gaussian() {
        // f = g = e^{a²/2}: D_a² f·f = 2(f f'' - f'²) = 2f² (1 + a² - a²)
        let h = 0.02;
        let axes = [
            Axis::continuous(0.0, 1.0),
            Axis::continuous(-0.2, h),
            Axis::continuous(0.0, 1.0),
        ];
        let f = GridField::from_fn([1, 21, 1], axes, |_, a, _| (a * a / 2.0).exp()).unwrap();
        let d = hirota_derivative(&f, &f, 1, 2, [0, 10, 0], StencilOrder::Second).unwrap();
        assert!((d - 2.0).abs() < 1e-3, "D_a² = {d}");
    }

    #[test]
    fn odd_order_annihilates_diagonal() {
        let h = 0.05;
        let f = GridField::from_fn([13, 13, 13], cont_axes(h), |t, a, n| {
            (0.3 * t - 0.2 * a * a + 0.1 * n * t).exp()
        })
        .unwrap();
        let p = [6, 6, 6];
        for order in [1u8, 3] {
            for axis in 0..3 {
                let d = hirota_derivative(&f, &f, axis, order, p, StencilOrder::Second).unwrap();
                assert!(
                    d.abs() < 1e-9,
                    "odd order {order} axis {axis} gave {d}"
                );
            }
        }
    }

    #[test]
    fn antisymmetry_under_swap() {
        let h = 0.05;
        let f = GridField::from_fn([13, 13, 13], cont_axes(h), |t, a, n| {
            (0.3 * t + 0.4 * a + 0.1 * n).sin() + 2.0
        })
        .unwrap();
        let g = GridField::from_fn([13, 13, 13], cont_axes(h), |t, a, n| {
            (0.2 * t - 0.3 * a + 0.2 * n).cos() + 2.0
        })
        .unwrap();
        let p = [6, 6, 6];
        for order in 1u8..=4 {
            let fg = hirota_derivative(&f, &g, 1, order, p, StencilOrder::Second).unwrap();
            let gf = hirota_derivative(&g, &f, 1, order, p, StencilOrder::Second).unwrap();
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (fg - sign * gf).abs() < 1e-12 * fg.abs().max(1.0),
                "order {order}: {fg} vs {gf}"
            );
        }
    }

    #[test]
    fn shift_bilinear_cases() {
        let axes = [
            Axis::continuous(0.0, 1.0),
            Axis::continuous(-5.0, 1.0),
            Axis::continuous(0.0, 1.0),
        ];
        let f = GridField::from_fn([1, 11, 1], axes, |_, a, _| a).unwrap();
        // f(a+1)f(a-1) = a² - 1 → -1 at a = 0
        let v = shift_bilinear(&f, &f, [0, 1, 0], [0, 5, 0]).unwrap();
        assert_eq!(v, -1.0);
        // zero shift is the plain product
        let v = shift_bilinear(&f, &f, [0, 0, 0], [0, 3, 0]).unwrap();
        assert_eq!(v, 4.0);
        let ones = GridField::from_fn([1, 11, 1], axes, |_, _, _| 1.0).unwrap();
        let v = shift_bilinear(&ones, &ones, [0, 3, 0], [0, 5, 0]).unwrap();
        assert_eq!(v, 1.0);
        assert!(shift_bilinear(&f, &f, [0, 9, 0], [0, 5, 0]).is_err());
    }

    #[test]
    fn discrete_axis_rejected_for_derivatives() {
        let axes = [
            Axis::continuous(0.0, 0.1),
            Axis::discrete(0),
            Axis::discrete(0),
        ];
        let f = GridField::from_fn([5, 5, 5], axes, |t, a, n| t + a + n).unwrap();
        assert!(matches!(
            hirota_derivative(&f, &f, 1, 2, [2, 2, 2], StencilOrder::Second),
            Err(Error::DiscreteAxis("a"))
        ));
    }

    #[test]
    fn parallel_residual_on_constant_field() {
        // F ≡ 1: residual of the parallel equation is 1 - p - (1-p) = 0
        let axes = [
            Axis::discrete(0),
            Axis::discrete(-3),
            Axis::discrete(0),
        ];
        let f = GridField::from_fn([5, 7, 4], axes, |_, _, _| 1.0).unwrap();
        let eq = equation(EquationId::Parallel { p: 0.35 });
        let reg = Region {
            lo: [1, 1, 1],
            hi: [4, 6, 4],
        };
        let rf = residual_field(&eq, &f, reg, StencilOrder::Second).unwrap();
        assert!(rf.max_abs_raw < 1e-15);
    }

    #[test]
    fn rbm_residual_matches_symbolic_value() {
        // F_n = F_{n-1} = e^{t + a²/2}: D_t F·F = 0 and D_a² F·F = 2F², so
        // the residual is -F² (equals -e^{2t} at a = 0)
        let (ht, ha) = (0.02, 0.02);
        let axes = [
            Axis::continuous(-0.1, ht),
            Axis::continuous(-0.1, ha),
            Axis::discrete(0),
        ];
        let f = GridField::from_fn([11, 11, 3], axes, |t, a, _| (t + a * a / 2.0).exp()).unwrap();
        let eq = equation(EquationId::Rbm);
        let point = [5, 5, 1]; // t = 0, a = 0
        let (raw, _) = residual_at(&eq, &f, point, StencilOrder::Second).unwrap();
        assert!((raw + 1.0).abs() < 1e-3, "raw = {raw}");
    }

    #[test]
    fn tasep_residual_on_poisson_pair() {
        // F_{·,·,0} ≡ 1 and F_{t,a,1} = P(Poisson(t) > a) solve the
        // equation; the t-stencil error carries a ∂³F/F factor, so stay in
        // the bulk of the distribution (a ≤ 3 at t ≤ 0.7)
        let ht = 0.005;
        let axes = [
            Axis::continuous(0.5, ht),
            Axis::discrete(-2),
            Axis::discrete(0),
        ];
        let f = GridField::from_fn([41, 10, 2], axes, |t, a, n| {
            if n < 0.5 {
                1.0
            } else {
                crate::closed_form::poisson_survival(t, a as i64)
            }
        })
        .unwrap();
        let eq = equation(EquationId::Tasep);
        let reg = Region {
            lo: [2, 1, 1],
            hi: [39, 6, 2],
        };
        let rf = residual_field(&eq, &f, reg, StencilOrder::Second).unwrap();
        assert!(
            rf.max_abs_normalized < 30.0 * ht * ht,
            "normalized residual {} at spacing {ht}",
            rf.max_abs_normalized
        );
    }

    #[test]
    fn kp_residual_trivial_and_soliton_cases() {
        let h = 0.05;
        // F ≡ 1 → 0; F = e^{cA} → 0 (pure exponentials kill every D on f·f)
        let ones = GridField::from_fn([9, 9, 9], cont_axes(h), |_, _, _| 1.0).unwrap();
        let rf = kp_residual(&ones, StencilOrder::Second).unwrap();
        assert!(rf.max_abs_raw < 1e-14);
        // a pure exponential kills every Hirota derivative analytically;
        // under differencing the even orders cancel to stencil order only
        let expo =
            GridField::from_fn([13, 13, 13], cont_axes(h), |_, _, a| (0.7 * a).exp()).unwrap();
        let rf = kp_residual(&expo, StencilOrder::Fourth).unwrap();
        assert!(rf.max_abs_normalized < 1e-5, "{}", rf.max_abs_normalized);

        // F = 1 + e^{T+X+A}: residual is (8/3) e^{T+X+A} (hand expansion)
        let f = GridField::from_fn([11, 11, 11], cont_axes(0.05), |t, x, a| {
            1.0 + (t + x + a).exp()
        })
        .unwrap();
        let rf = kp_residual(&f, StencilOrder::Fourth).unwrap();
        let mid = rf.raw.shape()[0] / 2;
        let got = rf.raw.values[[mid, mid, mid]];
        let coords = rf.raw.coords([mid, mid, mid]);
        let want = 8.0 / 3.0 * (coords[0] + coords[1] + coords[2]).exp();
        assert!(
            (got - want).abs() < 2e-3 * want.abs(),
            "KP residual {got} vs {want}"
        );
    }

    #[test]
    fn registry_matches_hand_expanded_forms() {
        // six model equations against their written-out expansions on a
        // random positive lattice field (discrete ones exactly)
        let axes = [
            Axis::discrete(0),
            Axis::discrete(0),
            Axis::discrete(0),
        ];
        let mut state = 88172645463325252u64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            0.5 + (state % 1000) as f64 / 1000.0
        };
        let f = GridField::from_fn([5, 5, 5], axes, |_, _, _| rnd()).unwrap();
        let at = [2usize, 2, 2];
        let g = |dt: i64, da: i64, dn: i64| f.get_offset(at, [dt, da, dn]).unwrap();

        let (p, q) = (0.37, 0.81);
        let checks: Vec<(EquationId, f64)> = vec![
            (
                EquationId::Parallel { p },
                g(1, 0, 0) * g(-1, 0, -1) - p * g(0, -1, 0) * g(0, 1, -1)
                    - (1.0 - p) * g(0, 0, 0) * g(0, 0, -1),
            ),
            (
                EquationId::Blocking { p },
                g(1, 0, 0) * g(0, 0, -1) - p * g(0, -1, 0) * g(1, 1, -1)
                    - (1.0 - p) * g(0, 0, 0) * g(1, 0, -1),
            ),
            (
                EquationId::Pushing { q },
                g(1, 0, 0) * g(0, 1, -1) - q * g(0, 1, 0) * g(1, 0, -1)
                    - (1.0 - q) * g(0, 0, 0) * g(1, 1, -1),
            ),
        ];
        for (id, want) in checks {
            let eq = equation(id);
            let (raw, _) = residual_at(&eq, &f, at, StencilOrder::Second).unwrap();
            assert!(
                (raw - want).abs() < 1e-14,
                "{id:?}: registry {raw} vs hand {want}"
            );
        }
    }
}
