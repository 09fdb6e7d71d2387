//! Gauss–Legendre quadrature and piecewise-polynomial helpers.
//!
//! Everything here works on composite panels: a list of breakpoints with a
//! fixed-order Gauss–Legendre rule inside each panel. Functions that are
//! analytic inside panels but kinked at the breakpoints (the epigraph-walk
//! expectations, for instance) keep spectral accuracy this way.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            pp = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p1 = x;
    for l in 1..n {
        let l = l as f64;
        let p2 = ((2.0 * l + 1.0) * x * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        (n as f64) * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Values `P_0(x) .. P_lmax(x)`.
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax == 0 {
        return out;
    }
    out.push(x);
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * out[l] - lf * out[l - 1]) / (lf + 1.0);
        out.push(next);
    }
    out
}

/// A composite Gauss–Legendre rule: `order` nodes inside each interval
/// `[breaks[k], breaks[k+1]]`.
#[derive(Debug, Clone)]
pub struct Panels {
    pub breaks: Vec<f64>,
    pub order: usize,
    /// Physical nodes, panel by panel.
    pub nodes: Vec<f64>,
    /// Matching quadrature weights.
    pub weights: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

impl Panels {
    /// Builds panels over the given strictly increasing breakpoints.
    /// Zero-length panels are dropped.
    pub fn new(mut breaks: Vec<f64>, order: usize) -> Self {
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let (ref_nodes, ref_weights) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Panels {
            breaks,
            order,
            nodes,
            weights,
            ref_nodes,
            ref_weights,
        }
    }

    pub fn n_panels(&self) -> usize {
        self.breaks.len().saturating_sub(1)
    }

    pub fn panel_bounds(&self, p: usize) -> (f64, f64) {
        (self.breaks[p], self.breaks[p + 1])
    }

    /// Integrates node values over the whole composite rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Cumulative antiderivative of the per-panel interpolant of `values`.
    ///
    /// Returns a callable `H` with `H(x) = ∫_{breaks[0]}^x f`, exact for the
    /// piecewise interpolant. `x` must lie inside the panel range.
    pub fn cumulative(&self, values: &[f64]) -> Cumulative<'_> {
        assert_eq!(values.len(), self.nodes.len());
        let n = self.order;
        let mut coeffs = Vec::with_capacity(self.n_panels());
        let mut panel_mass = Vec::with_capacity(self.n_panels());
        for p in 0..self.n_panels() {
            let vals = &values[p * n..(p + 1) * n];
            let mut c = vec![0.0; n];
            for (i, (&xi, &wi)) in self.ref_nodes.iter().zip(&self.ref_weights).enumerate() {
                let pl = legendre_all(n - 1, xi);
                for (l, cl) in c.iter_mut().enumerate() {
                    *cl += (2.0 * l as f64 + 1.0) / 2.0 * wi * pl[l] * vals[i];
                }
            }
            let (lo, hi) = self.panel_bounds(p);
            // ∫ over the panel = 2*c_0 * jacobian
            panel_mass.push(2.0 * c[0] * 0.5 * (hi - lo));
            coeffs.push(c);
        }
        let mut prefix = vec![0.0; self.n_panels() + 1];
        for p in 0..self.n_panels() {
            prefix[p + 1] = prefix[p] + panel_mass[p];
        }
        Cumulative {
            panels: self,
            coeffs,
            prefix,
        }
    }
}

/// See [`Panels::cumulative`].
pub struct Cumulative<'a> {
    panels: &'a Panels,
    coeffs: Vec<Vec<f64>>,
    prefix: Vec<f64>,
}

impl Cumulative<'_> {
    /// Total mass over all panels.
    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// `∫_{breaks[0]}^x` of the interpolant.
    pub fn eval(&self, x: f64) -> f64 {
        let breaks = &self.panels.breaks;
        if x <= breaks[0] {
            return 0.0;
        }
        if x >= *breaks.last().unwrap() {
            return self.total();
        }
        let p = match breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.panels.n_panels() - 1),
            Err(i) => i - 1,
        };
        let (lo, hi) = self.panels.panel_bounds(p);
        let xi = 2.0 * (x - lo) / (hi - lo) - 1.0;
        let c = &self.coeffs[p];
        let n = c.len();
        let pl = legendre_all(n, xi);
        // ∫_{-1}^ξ P_0 = ξ+1, ∫_{-1}^ξ P_l = (P_{l+1}-P_{l-1})/(2l+1) for l ≥ 1
        let mut acc = c[0] * (xi + 1.0);
        for l in 1..n {
            acc += c[l] * (pl[l + 1] - pl[l - 1]) / (2.0 * l as f64 + 1.0);
        }
        self.prefix[p] + acc * 0.5 * (hi - lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is exact for an 8-point rule
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((int - 2.0 / 15.0).abs() < 1e-14, "got {int}");
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gl_integrates_gaussian() {
        let (x, w) = gauss_legendre(64);
        // ∫_{-6}^{6} e^{-x²/2} dx over mapped nodes
        let int: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| 6.0 * w * (-(6.0 * x) * (6.0 * x) / 2.0).exp())
            .sum();
        // the clipped tails beyond ±6 carry ~5e-9 of mass
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((int - exact).abs() < 1e-8, "got {int} vs {exact}");
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let panels = Panels::new(vec![0.0, 0.7, 1.0, 2.0], 16);
        let vals: Vec<f64> = panels.nodes.iter().map(|x| (2.0 * x).sin()).collect();
        let cum = panels.cumulative(&vals);
        for &x in &[0.0f64, 0.3, 0.7, 0.9, 1.5, 2.0] {
            let exact = (1.0 - (2.0 * x).cos()) / 2.0;
            assert!(
                (cum.eval(x) - exact).abs() < 1e-12,
                "x={x}: {} vs {exact}",
                cum.eval(x)
            );
        }
    }
}
