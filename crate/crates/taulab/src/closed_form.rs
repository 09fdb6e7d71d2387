//! Closed-form one-particle laws used as anchors for the determinant,
//! hierarchy and Monte Carlo routes.

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `P(Poisson(t) > a)` for integer `a` (survival function).
pub fn poisson_survival(t: f64, a: i64) -> f64 {
    if a < 0 {
        return 1.0;
    }
    if t == 0.0 {
        return 0.0;
    }
    // CDF by forward summation; switch to the tail when it is the smaller
    // piece so the result keeps absolute accuracy near 0 and near 1.
    let mut term = (-t).exp();
    let mut cdf = 0.0;
    for k in 0..=a {
        cdf += term;
        term *= t / (k + 1) as f64;
    }
    if cdf < 0.5 {
        return 1.0 - cdf;
    }
    // term now equals P(N = a+1)
    let mut tail = 0.0;
    let mut k = a + 1;
    while term > 1e-22 * (tail + 1e-300) + 1e-320 {
        tail += term;
        k += 1;
        term *= t / k as f64;
        if k > a + 2000 {
            break;
        }
    }
    tail
}

/// `P(Binomial(t, p) > a)`.
pub fn binomial_survival(t: u64, p: f64, a: i64) -> f64 {
    if a < 0 {
        return 1.0;
    }
    if a as u64 >= t {
        return 0.0;
    }
    let q = 1.0 - p;
    let mut tail = 0.0;
    // sum the upper tail directly
    for k in (a + 1) as u64..=t {
        tail += crate::specfun::binom(t as i64, k as i64)
            * p.powi(k as i32)
            * q.powi((t - k) as i32);
    }
    tail.min(1.0)
}

/// Survival `P(Y(t) > a)` of a standard Brownian motion reflected below the
/// linear wall `b(s) = d·s` and started at the wall (`Y(0) = 0 = b(0)`).
///
/// `Y(t) = B(t) - sup_{s≤t} [B(s) - d·s]^+`, and `d·s - B(s)` relates to a
/// reflected drifted motion, giving
/// `F(t,a) = Φ(-a/√t) - e^{2d(dt-a)} Φ̄((2dt-a)/√t)` for `a ≤ d·t`.
pub fn rbm_wall_linear_survival(t: f64, d: f64, a: f64) -> f64 {
    if a >= d * t {
        return 0.0;
    }
    let s = t.sqrt();
    let val = normal_cdf(-a / s) - (2.0 * d * (d * t - a)).exp() * normal_cdf(-(2.0 * d * t - a) / s);
    val.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_tails() {
        assert_eq!(poisson_survival(1.0, -1), 1.0);
        let f = poisson_survival(1.0, 0);
        assert!((f - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        // symmetric check against the complementary sum
        let t = 3.0;
        for a in 0..12 {
            let surv = poisson_survival(t, a);
            let mut cdf = 0.0;
            let mut term = (-t).exp();
            for k in 0..=a {
                cdf += term;
                term *= t / (k + 1) as f64;
            }
            assert!((surv + cdf - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn binomial_edge_cases() {
        assert_eq!(binomial_survival(4, 0.3, -1), 1.0);
        assert_eq!(binomial_survival(4, 0.3, 4), 0.0);
        let f = binomial_survival(2, 0.5, 1);
        assert!((f - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wall_survival_vanishes_at_wall_and_normalizes() {
        let f = rbm_wall_linear_survival(2.0, 0.5, 1.0);
        assert_eq!(f, 0.0);
        let f = rbm_wall_linear_survival(2.0, 0.5, 0.999);
        assert!(f < 1e-3);
        let f = rbm_wall_linear_survival(2.0, 0.5, -8.0);
        assert!((f - 1.0).abs() < 1e-6);
    }

    #[test]
    fn normal_cdf_accuracy() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 1.349898031630095e-3).abs() < 1e-15);
    }
}
