//! Piecewise-smooth functions: problem data (`f`, `psi`, `y_d`) and exact
//! solutions are sums of polynomial and sinusoidal terms on each interval
//! between declared breakpoints.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_rule, GaussRule};
use crate::scalar::{real, Real};

/// One closed-form term; a segment is a sum of these.
#[derive(Clone, Debug)]
pub enum Term<R> {
    /// `c0 + c1 x + c2 x^2 + ...`
    Poly(Vec<R>),
    /// `amp * sin(freq * x + phase)`
    Sin { amp: R, freq: R, phase: R },
    /// `amp * cos(freq * x + phase)`
    Cos { amp: R, freq: R, phase: R },
}

impl<R: Real> Term<R> {
    /// Value of the `der`-th derivative at `x` (closed form).
    pub fn eval(&self, x: R, der: usize) -> R {
        match self {
            Term::Poly(coeffs) => {
                // Horner on the derived coefficients c_j * j!/(j-der)!.
                let mut v = R::zero();
                for j in (der..coeffs.len()).rev() {
                    let mut fac = R::one();
                    for m in 0..der {
                        fac *= real((j - m) as f64);
                    }
                    v = v * x + coeffs[j] * fac;
                }
                v
            }
            // d/dx sin(wx + p) = w sin(wx + p + pi/2), so the k-th
            // derivative just shifts the phase by k*pi/2 and scales by w^k.
            Term::Sin { amp, freq, phase } => {
                let shift = real::<R>(der as f64) * R::FRAC_PI_2();
                *amp * freq.powi(der as i32) * (*freq * x + *phase + shift).sin()
            }
            Term::Cos { amp, freq, phase } => {
                let shift = real::<R>(der as f64) * R::FRAC_PI_2();
                *amp * freq.powi(der as i32) * (*freq * x + *phase + shift).cos()
            }
        }
    }

    /// Symbolic derivative.
    pub fn derivative(&self) -> Term<R> {
        match self {
            Term::Poly(coeffs) => Term::Poly(
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, &c)| c * real(j as f64))
                    .collect(),
            ),
            Term::Sin { amp, freq, phase } => Term::Cos {
                amp: *amp * *freq,
                freq: *freq,
                phase: *phase,
            },
            Term::Cos { amp, freq, phase } => Term::Sin {
                amp: -*amp * *freq,
                freq: *freq,
                phase: *phase,
            },
        }
    }
}

/// Piecewise-smooth function on `[-1, 1]` with declared interior
/// breakpoints; `segments[k]` covers the k-th interval. At a breakpoint the
/// right segment wins (quadrature never evaluates at breakpoints).
#[derive(Clone, Debug)]
pub struct PiecewiseSmooth<R> {
    breakpoints: Vec<R>,
    segments: Vec<Vec<Term<R>>>,
}

impl<R: Real> PiecewiseSmooth<R> {
    pub fn new(breakpoints: Vec<R>, segments: Vec<Vec<Term<R>>>) -> Result<Self> {
        if segments.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints require {} segments, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                segments.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if breakpoints
            .iter()
            .any(|&b| b <= real(-1.0) || b >= real(1.0))
        {
            return Err(Error::InvalidArgument(
                "breakpoints must lie strictly inside (-1, 1)".into(),
            ));
        }
        Ok(PiecewiseSmooth {
            breakpoints,
            segments,
        })
    }

    /// Single unbroken polynomial.
    pub fn poly(coeffs: Vec<R>) -> Self {
        PiecewiseSmooth {
            breakpoints: Vec::new(),
            segments: vec![vec![Term::Poly(coeffs)]],
        }
    }

    pub fn constant(c: R) -> Self {
        Self::poly(vec![c])
    }

    pub fn breakpoints(&self) -> &[R] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Vec<Term<R>>] {
        &self.segments
    }

    fn segment_at(&self, x: R) -> &[Term<R>] {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        &self.segments[idx]
    }

    /// Value of the `der`-th derivative at `x`.
    pub fn eval(&self, x: R, der: usize) -> R {
        self.segment_at(x)
            .iter()
            .map(|t| t.eval(x, der))
            .fold(R::zero(), |a, v| a + v)
    }

    pub fn value(&self, x: R) -> R {
        self.eval(x, 0)
    }

    /// Termwise symbolic derivative (breakpoints are kept).
    pub fn derivative(&self) -> Self {
        PiecewiseSmooth {
            breakpoints: self.breakpoints.clone(),
            segments: self
                .segments
                .iter()
                .map(|terms| terms.iter().map(Term::derivative).collect())
                .collect(),
        }
    }

    /// Termwise multiplication by a constant.
    pub fn scale(&self, c: R) -> Self {
        let scale_term = |t: &Term<R>| match t {
            Term::Poly(coeffs) => Term::Poly(coeffs.iter().map(|&v| v * c).collect()),
            Term::Sin { amp, freq, phase } => Term::Sin {
                amp: *amp * c,
                freq: *freq,
                phase: *phase,
            },
            Term::Cos { amp, freq, phase } => Term::Cos {
                amp: *amp * c,
                freq: *freq,
                phase: *phase,
            },
        };
        PiecewiseSmooth {
            breakpoints: self.breakpoints.clone(),
            segments: self
                .segments
                .iter()
                .map(|terms| terms.iter().map(scale_term).collect())
                .collect(),
        }
    }

    /// Pointwise sum; breakpoint sets are merged.
    pub fn add(&self, other: &Self) -> Self {
        let mut breakpoints = self.breakpoints.clone();
        for &b in &other.breakpoints {
            if !breakpoints.contains(&b) {
                breakpoints.push(b);
            }
        }
        breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        let mut segments = Vec::with_capacity(breakpoints.len() + 1);
        for k in 0..=breakpoints.len() {
            let lo = if k == 0 {
                real(-1.0)
            } else {
                breakpoints[k - 1]
            };
            let hi = if k == breakpoints.len() {
                real(1.0)
            } else {
                breakpoints[k]
            };
            let mid = (lo + hi) * real(0.5);
            let mut terms = self.segment_at(mid).to_vec();
            terms.extend_from_slice(other.segment_at(mid));
            segments.push(terms);
        }
        PiecewiseSmooth {
            breakpoints,
            segments,
        }
    }

    /// Integral over `[a, b]`, splitting panels at the declared breakpoints.
    pub fn integral(&self, a: R, b: R, order: usize) -> Result<R> {
        let rule = GaussRule::legendre(order)?;
        Ok(integrate_with_rule(
            (a, b),
            &mut |x| self.eval(x, 0),
            &self.breakpoints,
            &rule,
        ))
    }

    /// Max of the `der`-th derivative over a uniform sample (plus breakpoint
    /// neighborhoods); used for feasibility and data checks, not for norms.
    pub fn sampled_max(&self, der: usize, samples: usize) -> R {
        sample_points(&self.breakpoints, samples)
            .into_iter()
            .map(|x| self.eval(x, der))
            .fold(R::neg_infinity(), R::max)
    }

    pub fn sampled_min(&self, der: usize, samples: usize) -> R {
        sample_points(&self.breakpoints, samples)
            .into_iter()
            .map(|x| self.eval(x, der))
            .fold(R::infinity(), R::min)
    }
}

/// `samples` points spanning `(-1, 1)` plus both one-sided neighborhoods of
/// every breakpoint.
pub(crate) fn sample_points<R: Real>(breakpoints: &[R], samples: usize) -> Vec<R> {
    let n = samples.max(2);
    let mut xs: Vec<R> = (0..n)
        .map(|i| real::<R>(-1.0) + real::<R>(2.0) * real::<R>(i as f64) / real::<R>((n - 1) as f64))
        .collect();
    let eps = real::<R>(1e-9);
    for &b in breakpoints {
        xs.push(b - eps);
        xs.push(b + eps);
    }
    xs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn poly_derivatives() {
        // p(x) = 1 + 2x + 3x^2 + 4x^3
        let p = PiecewiseSmooth::poly(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.eval(2.0, 0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(p.eval(2.0, 1), 2.0 + 12.0 + 48.0);
        assert_eq!(p.eval(2.0, 2), 6.0 + 48.0);
        assert_eq!(p.eval(2.0, 3), 24.0);
        assert_eq!(p.eval(2.0, 4), 0.0);
    }

    #[test]
    fn trig_derivative_cycle() {
        let s = Term::Sin {
            amp: 2.0f64,
            freq: 3.0,
            phase: 0.5,
        };
        let x = 0.37f64;
        // Fourth derivative returns to amp * freq^4 * sin.
        let d4 = s.eval(x, 4);
        assert!((d4 - 2.0 * 81.0 * (3.0 * x + 0.5).sin()).abs() < 1e-12);
        // Symbolic derivative agrees with the phase-shift evaluation.
        let d1 = s.derivative();
        assert!((d1.eval(x, 0) - s.eval(x, 1)).abs() < 1e-12);
        assert!((d1.eval(x, 2) - s.eval(x, 3)).abs() < 1e-12);
    }

    #[test]
    fn segment_selection_is_right_continuous() {
        let f = PiecewiseSmooth::new(
            vec![0.0],
            vec![vec![Term::Poly(vec![1.0])], vec![Term::Poly(vec![5.0])]],
        )
        .unwrap();
        assert_eq!(f.value(-0.5), 1.0);
        assert_eq!(f.value(0.0), 5.0);
        assert_eq!(f.value(0.5), 5.0);
    }

    #[test]
    fn add_merges_breakpoints() {
        let a = PiecewiseSmooth::new(
            vec![0.0],
            vec![vec![Term::Poly(vec![1.0])], vec![Term::Poly(vec![2.0])]],
        )
        .unwrap();
        let b = PiecewiseSmooth::new(
            vec![0.5],
            vec![vec![Term::Poly(vec![10.0])], vec![Term::Poly(vec![20.0])]],
        )
        .unwrap();
        let s = a.add(&b);
        assert_eq!(s.breakpoints(), &[0.0, 0.5]);
        assert_eq!(s.value(-0.5), 11.0);
        assert_eq!(s.value(0.25), 12.0);
        assert_eq!(s.value(0.75), 22.0);
    }

    #[test]
    fn integral_splits_at_kinks() {
        let f = PiecewiseSmooth::new(
            vec![0.0f64],
            vec![vec![Term::Poly(vec![1.0])], vec![Term::Poly(vec![0.0])]],
        )
        .unwrap();
        let v: f64 = f.integral(-1.0, 1.0, 4).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_example_sine_integral() {
        let f = PiecewiseSmooth::new(
            vec![1.0 / 3.0],
            vec![
                vec![Term::Poly(vec![0.0])],
                vec![Term::Sin {
                    amp: 1.0,
                    freq: 9.0 * PI / 4.0,
                    phase: -PI / 4.0,
                }],
            ],
        )
        .unwrap();
        let exact = -4.0 / (9.0 * PI);
        let v = f.integral(-1.0, 1.0, 12).unwrap();
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn validation_rejects_malformed_input() {
        assert!(PiecewiseSmooth::<f64>::new(vec![0.0], vec![vec![]]).is_err());
        assert!(PiecewiseSmooth::<f64>::new(vec![0.3, 0.1], vec![vec![], vec![], vec![]]).is_err());
        assert!(PiecewiseSmooth::<f64>::new(vec![1.5], vec![vec![], vec![]]).is_err());
    }
}
