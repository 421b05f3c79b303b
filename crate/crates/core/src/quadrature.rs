//! Gauss-Legendre quadrature with breakpoint-aware panel splitting.

use crate::error::{Error, Result};
use crate::scalar::{real, Accumulator, Real};

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule<R> {
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
}

impl<R: Real> GaussRule<R> {
    /// Nodes and weights of the `order`-point rule, found by Newton iteration
    /// on the Legendre polynomial (exact for polynomials of degree
    /// `2*order - 1`).
    pub fn legendre(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "quadrature order must be at least 1".into(),
            ));
        }
        let n = order;
        let mut nodes = vec![R::zero(); n];
        let mut weights = vec![R::zero(); n];
        let tol = R::epsilon() * real(4.0);
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n.
            let theta = real::<R>(std::f64::consts::PI) * (real::<R>(i as f64) + real(0.75))
                / (real::<R>(n as f64) + real(0.5));
            let mut x = theta.cos();
            let mut dp = R::zero();
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= tol {
                    let (_, d) = legendre_pair(n, x);
                    dp = d;
                    break;
                }
            }
            let w = real::<R>(2.0) / ((R::one() - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Ok(GaussRule { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over `[a, b]` by mapping the reference rule.
    pub fn integrate<F: FnMut(R) -> R>(&self, a: R, b: R, mut f: F) -> R {
        let half = real::<R>(0.5);
        let mid = (a + b) * half;
        let scale = (b - a) * half;
        let mut acc = Accumulator::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add_prod(w, f(mid + scale * x));
        }
        acc.value() * scale
    }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_pair<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p_prev = R::one();
    let mut p = x;
    for k in 1..n {
        let kf: R = real(k as f64);
        let next = ((real::<R>(2.0) * kf + R::one()) * x * p - kf * p_prev) / (kf + R::one());
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (R::one(), R::zero());
    }
    let nf: R = real(n as f64);
    let dp = nf * (x * p - p_prev) / (x * x - R::one());
    (p, dp)
}

/// Integrates `g` over the interval `el`, cutting each panel at the supplied
/// breakpoints and applying an `order`-point Gauss rule per panel. Exact for
/// piecewise polynomials of degree `2*order - 1` whose kinks are declared.
pub fn quadrature_on_element<R: Real, F: FnMut(R) -> R>(
    el: (R, R),
    mut g: F,
    breakpoints: &[R],
    order: usize,
) -> Result<R> {
    let rule = GaussRule::legendre(order)?;
    Ok(integrate_with_rule(el, &mut g, breakpoints, &rule))
}

/// Same as [`quadrature_on_element`] with a prebuilt rule (assembly hoists
/// the rule out of element loops).
pub fn integrate_with_rule<R: Real, F: FnMut(R) -> R>(
    el: (R, R),
    g: &mut F,
    breakpoints: &[R],
    rule: &GaussRule<R>,
) -> R {
    let (a, b) = el;
    let mut acc = Accumulator::new();
    let mut left = a;
    for &p in breakpoints {
        if p > left && p < b {
            acc.add(rule.integrate(left, p, &mut *g));
            left = p;
        }
    }
    if b > left {
        acc.add(rule.integrate(left, b, &mut *g));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_point_rule_is_exact_for_cubics() {
        let v = quadrature_on_element((-1.0, 1.0), |x: f64| x * x, &[], 2).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let v = quadrature_on_element((-1.0, 1.0), |x: f64| x * x * x + 1.0, &[], 2).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn split_at_kink_integrates_indicator_exactly() {
        let ind = |x: f64| if x > -1.0 && x < 0.0 { 1.0 } else { 0.0 };
        let v = quadrature_on_element((-0.5, 0.5), ind, &[0.0], 1).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn oscillatory_integrand_matches_closed_form() {
        // One-piece integral of the mixed example's sine data; the
        // antiderivative is -(4/(9 pi)) cos((pi/4)(9x - 1)).
        let f = |x: f64| (PI / 4.0 * (9.0 * x - 1.0)).sin();
        let exact = -4.0 / (9.0 * PI);
        let v = quadrature_on_element((1.0 / 3.0, 1.0), f, &[], 10).unwrap();
        assert!((v - exact).abs() < 1e-12, "got {v:.15e}, want {exact:.15e}");
        // Cross-check against a panelled evaluation with a different order.
        let v2 = quadrature_on_element((1.0 / 3.0, 1.0), f, &[0.5, 0.7, 0.9], 14).unwrap();
        assert!((v - v2).abs() < 1e-13);
    }

    #[test]
    fn high_order_rules_stay_accurate() {
        for order in [1usize, 3, 5, 8, 12, 16, 20, 24] {
            let rule = GaussRule::<f64>::legendre(order).unwrap();
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            // Exactness on the highest admissible monomial degree.
            let d = 2 * order - 1;
            let v = rule.integrate(0.0, 1.0, |x| x.powi(d as i32));
            assert!(
                (v - 1.0 / (d as f64 + 1.0)).abs() < 1e-13,
                "order {order} degree {d}: {v}"
            );
        }
    }

    #[test]
    fn breakpoints_outside_interval_are_ignored() {
        let v = quadrature_on_element((0.0, 1.0), |x: f64| x, &[-0.5, 0.0, 1.0, 2.0], 2).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(GaussRule::<f64>::legendre(0).is_err());
    }
}
