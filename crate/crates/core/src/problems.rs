//! Benchmark problems with known exact solutions, manufactured fixtures,
//! and JSON ingestion of user problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{sample_points, PiecewiseSmooth, Term};
use crate::scalar::{real, Real};
use crate::space::BcKind;

/// Where the derivative constraint is tight for the exact solution.
#[derive(Clone, Debug)]
pub enum ActiveSet<R> {
    Points(Vec<R>),
    Interval(R, R),
}

impl<R: Real> ActiveSet<R> {
    /// Distance from `x` to the set (zero inside an interval).
    pub fn distance(&self, x: R) -> R {
        match self {
            ActiveSet::Points(ps) => ps
                .iter()
                .map(|&p| (x - p).abs())
                .fold(R::infinity(), R::min),
            ActiveSet::Interval(a, b) => {
                if x < *a {
                    *a - x
                } else if x > *b {
                    x - *b
                } else {
                    R::zero()
                }
            }
        }
    }
}

/// The KKT multiplier measure: point masses plus an absolutely continuous
/// density (a boundary atom is an atom at the endpoint).
#[derive(Clone, Debug)]
pub struct MeasureDesc<R> {
    pub atoms: Vec<(R, R)>,
    pub density: Option<PiecewiseSmooth<R>>,
}

impl<R: Real> MeasureDesc<R> {
    pub fn zero() -> Self {
        MeasureDesc {
            atoms: Vec::new(),
            density: None,
        }
    }

    /// Total mass over `[-1, 1]`.
    pub fn total_mass(&self) -> Result<R> {
        let mut mass = self.atoms.iter().fold(R::zero(), |a, &(_, m)| a + m);
        if let Some(d) = &self.density {
            mass += d.integral(real(-1.0), real(1.0), 8)?;
        }
        Ok(mass)
    }
}

/// Exact-solution record attached to a problem.
#[derive(Clone, Debug)]
pub struct ExactInfo<R> {
    pub ybar: PiecewiseSmooth<R>,
    pub ubar: PiecewiseSmooth<R>,
    pub active_set: ActiveSet<R>,
    pub mu: MeasureDesc<R>,
}

/// Full problem description: minimize
/// `(|y - y_d|^2 + beta |u|^2) / 2` subject to `-y'' = u + f`, `y' <= psi`
/// and the boundary conditions.
#[derive(Clone, Debug)]
pub struct ProblemSpec<R> {
    pub beta: R,
    pub bc: BcKind,
    pub f: PiecewiseSmooth<R>,
    pub psi: PiecewiseSmooth<R>,
    pub y_d: PiecewiseSmooth<R>,
    pub exact: Option<ExactInfo<R>>,
}

impl<R: Real> ProblemSpec<R> {
    pub fn new(
        beta: R,
        bc: BcKind,
        f: PiecewiseSmooth<R>,
        psi: PiecewiseSmooth<R>,
        y_d: PiecewiseSmooth<R>,
        exact: Option<ExactInfo<R>>,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            beta,
            bc,
            f,
            psi,
            y_d,
            exact,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.beta <= R::zero() {
            return Err(Error::InfeasibleData(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        match self.bc {
            BcKind::Dirichlet => {
                // With homogeneous Dirichlet data, int y' dx = 0, so the
                // constraint set degenerates to a single point unless psi
                // has positive mean.
                let integral = self.psi.integral(real(-1.0), real(1.0), 8)?;
                if integral <= R::zero() {
                    return Err(Error::InfeasibleData(format!(
                        "Dirichlet data requires int psi dx > 0, got {integral:e} \
                         (the control problem is trivial or empty)"
                    )));
                }
            }
            BcKind::Mixed => {
                let at_one = self.psi.eval(real(1.0), 0);
                if at_one < R::zero() {
                    return Err(Error::InfeasibleData(format!(
                        "mixed data requires psi(1) >= 0, got {at_one:e}"
                    )));
                }
            }
        }
        if let Some(exact) = &self.exact {
            self.validate_exact(exact)?;
        }
        Ok(())
    }

    fn validate_exact(&self, exact: &ExactInfo<R>) -> Result<()> {
        let tol = real::<R>(1e-12);
        let ybar = &exact.ybar;
        let bc_pairs: [(R, usize); 2] = match self.bc {
            BcKind::Dirichlet => [(real(-1.0), 0), (real(1.0), 0)],
            BcKind::Mixed => [(real(-1.0), 0), (real(1.0), 1)],
        };
        for (x, der) in bc_pairs {
            let v = ybar.eval(x, der);
            if v.abs() > tol {
                return Err(Error::InfeasibleData(format!(
                    "exact solution violates its boundary condition at x = {x}: {v:e}"
                )));
            }
        }
        // Feasibility and the control identity u = -y'' - f on a sample.
        let mut breaks = ybar.breakpoints().to_vec();
        breaks.extend_from_slice(self.f.breakpoints());
        breaks.extend_from_slice(exact.ubar.breakpoints());
        for x in sample_points(&breaks, 1000) {
            if x < real(-1.0) || x > real(1.0) {
                continue;
            }
            if ybar.eval(x, 1) > self.psi.eval(x, 0) + tol {
                return Err(Error::InfeasibleData(format!(
                    "exact solution violates the derivative bound at x = {x}"
                )));
            }
            let resid = exact.ubar.eval(x, 0) + ybar.eval(x, 2) + self.f.eval(x, 0);
            if resid.abs() > tol {
                return Err(Error::InfeasibleData(format!(
                    "exact control does not equal -ybar'' - f at x = {x} (residual {resid:e})"
                )));
            }
        }
        for &(x, m) in &exact.mu.atoms {
            if m < R::zero() {
                return Err(Error::InfeasibleData(format!(
                    "multiplier atom at {x} has negative mass {m}"
                )));
            }
        }
        if let Some(d) = &exact.mu.density {
            if d.sampled_min(0, 1000) < -tol {
                return Err(Error::InfeasibleData(
                    "multiplier density must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `-ybar'' - f`, built symbolically.
fn control_from<R: Real>(ybar: &PiecewiseSmooth<R>, f: &PiecewiseSmooth<R>) -> PiecewiseSmooth<R> {
    ybar.derivative()
        .derivative()
        .scale(real(-1.0))
        .add(&f.scale(real(-1.0)))
}

/// Dirichlet benchmark: `beta = psi = 1`, piecewise-sextic exact state with
/// one active point at the origin carrying a unit point mass.
pub fn example_dirichlet<R: Real>() -> ProblemSpec<R> {
    let c = |v: f64| real::<R>(v);
    let zero = c(0.0);
    // Exact state: matching sextic pieces on (-1, 0) and (0, 1).
    let ybar = PiecewiseSmooth::new(
        vec![zero],
        vec![
            vec![Term::Poly(vec![
                c(1.0 / 12.0),
                c(1.0),
                c(5.0 / 4.0),
                c(0.5),
                c(0.25),
                c(0.0),
                c(-1.0 / 12.0),
            ])],
            vec![Term::Poly(vec![
                c(1.0 / 12.0),
                c(1.0),
                c(-7.0 / 4.0),
                c(0.5),
                c(0.25),
                c(0.0),
                c(-1.0 / 12.0),
            ])],
        ],
    )
    .expect("static data");
    let f = PiecewiseSmooth::new(
        vec![zero],
        vec![
            vec![Term::Poly(vec![c(-7.0), c(0.0), c(7.0)])],
            vec![Term::Poly(vec![c(0.0)])],
        ],
    )
    .expect("static data");
    // y_d = ybar + 14 * indicator(-1, 0) + (6 - 30 x^2).
    let bump = PiecewiseSmooth::new(
        vec![zero],
        vec![
            vec![Term::Poly(vec![c(20.0), c(0.0), c(-30.0)])],
            vec![Term::Poly(vec![c(6.0), c(0.0), c(-30.0)])],
        ],
    )
    .expect("static data");
    let y_d = ybar.add(&bump);
    let psi = PiecewiseSmooth::constant(c(1.0));
    let ubar = control_from(&ybar, &f);
    let exact = ExactInfo {
        ybar,
        ubar,
        active_set: ActiveSet::Points(vec![zero]),
        mu: MeasureDesc {
            atoms: vec![(zero, c(1.0))],
            density: None,
        },
    };
    ProblemSpec::new(c(1.0), BcKind::Dirichlet, f, psi, y_d, Some(exact))
        .expect("built-in problem data is consistent")
}

/// Mixed-boundary benchmark: `beta = psi = 1`, `f = 0`; the constraint is
/// active on `[-1, 1/3]` and the multiplier is absolutely continuous with
/// density `(9 pi / 4)^2` there.
pub fn example_mixed<R: Real>() -> ProblemSpec<R> {
    let c = |v: f64| real::<R>(v);
    let third = c(1.0) / c(3.0);
    let omega = c(9.0) * R::PI() / c(4.0);
    let phase = -R::PI() / c(4.0);
    // ybar = 1 + x up to 1/3, then 4/3 - (4/(9 pi)) cos(omega x + phase).
    let cos_amp = c(-4.0) / (c(9.0) * R::PI());
    let ybar = PiecewiseSmooth::new(
        vec![third],
        vec![
            vec![Term::Poly(vec![c(1.0), c(1.0)])],
            vec![
                Term::Poly(vec![c(4.0 / 3.0)]),
                Term::Cos {
                    amp: cos_amp,
                    freq: omega,
                    phase,
                },
            ],
        ],
    )
    .expect("static data");
    let f = PiecewiseSmooth::constant(c(0.0));
    let psi = PiecewiseSmooth::constant(c(1.0));
    // y_d adds p''' = -omega^3 cos(omega x + phase) beyond the contact zone.
    let extra = PiecewiseSmooth::new(
        vec![third],
        vec![
            vec![Term::Poly(vec![c(0.0)])],
            vec![Term::Cos {
                amp: -omega.powi(3),
                freq: omega,
                phase,
            }],
        ],
    )
    .expect("static data");
    let y_d = ybar.add(&extra);
    let ubar = control_from(&ybar, &f);
    let density = PiecewiseSmooth::new(
        vec![third],
        vec![
            vec![Term::Poly(vec![omega * omega])],
            vec![Term::Poly(vec![c(0.0)])],
        ],
    )
    .expect("static data");
    let exact = ExactInfo {
        ybar,
        ubar,
        active_set: ActiveSet::Interval(c(-1.0), third),
        mu: MeasureDesc {
            atoms: Vec::new(),
            density: Some(density),
        },
    };
    ProblemSpec::new(c(1.0), BcKind::Mixed, f, psi, y_d, Some(exact))
        .expect("built-in problem data is consistent")
}

/// Unconstrained fixture from a cubic `p` satisfying the chosen boundary
/// conditions: `f = -p''`, `y_d = p`, `psi = max p' + 1`, so the discrete
/// solution reproduces `p` exactly with an empty active set.
pub fn manufactured_unconstrained<R: Real>(coeffs: &[R], bc: BcKind) -> Result<ProblemSpec<R>> {
    if coeffs.len() > 4 {
        return Err(Error::InvalidArgument(
            "manufactured fixture expects a cubic polynomial".into(),
        ));
    }
    let p = PiecewiseSmooth::poly(coeffs.to_vec());
    let tol = real::<R>(1e-12);
    let checks: [(R, usize); 2] = match bc {
        BcKind::Dirichlet => [(real(-1.0), 0), (real(1.0), 0)],
        BcKind::Mixed => [(real(-1.0), 0), (real(1.0), 1)],
    };
    for (x, der) in checks {
        let v = p.eval(x, der);
        if v.abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "polynomial violates the boundary conditions at x = {x}: {v:e}"
            )));
        }
    }
    let psi = PiecewiseSmooth::constant(p.sampled_max(1, 1001) + R::one());
    let f = p.derivative().derivative().scale(real(-1.0));
    let ubar = control_from(&p, &f);
    let exact = ExactInfo {
        ybar: p.clone(),
        ubar,
        active_set: ActiveSet::Points(Vec::new()),
        mu: MeasureDesc::zero(),
    };
    ProblemSpec::new(R::one(), bc, f, psi, p, Some(exact))
}

// --- JSON problem documents -------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SegmentDoc {
    Poly {
        coeffs: Vec<f64>,
    },
    Sin {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    Cos {
        amp: f64,
        freq: f64,
        phase: f64,
    },
    /// Sum of elementary terms; needed for segments like `c + a cos(w x)`.
    Sum {
        terms: Vec<SegmentDoc>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct FunctionDoc {
    breakpoints: Vec<f64>,
    segments: Vec<SegmentDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ActiveSetDoc {
    Points(Vec<f64>),
    Interval([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
struct MuDoc {
    atoms: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density_segments: Option<FunctionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExactDoc {
    ybar: FunctionDoc,
    ubar: FunctionDoc,
    active_set: ActiveSetDoc,
    mu: MuDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemDoc {
    bc: String,
    beta: f64,
    f: FunctionDoc,
    psi: FunctionDoc,
    yd: FunctionDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactDoc>,
}

fn terms_from_doc<R: Real>(doc: &SegmentDoc, out: &mut Vec<Term<R>>) {
    match doc {
        SegmentDoc::Poly { coeffs } => {
            out.push(Term::Poly(coeffs.iter().map(|&c| real(c)).collect()))
        }
        SegmentDoc::Sin { amp, freq, phase } => out.push(Term::Sin {
            amp: real(*amp),
            freq: real(*freq),
            phase: real(*phase),
        }),
        SegmentDoc::Cos { amp, freq, phase } => out.push(Term::Cos {
            amp: real(*amp),
            freq: real(*freq),
            phase: real(*phase),
        }),
        SegmentDoc::Sum { terms } => {
            for t in terms {
                terms_from_doc(t, out);
            }
        }
    }
}

fn function_from_doc<R: Real>(doc: &FunctionDoc) -> Result<PiecewiseSmooth<R>> {
    let breakpoints = doc.breakpoints.iter().map(|&b| real(b)).collect();
    let segments = doc
        .segments
        .iter()
        .map(|s| {
            let mut terms = Vec::new();
            terms_from_doc(s, &mut terms);
            terms
        })
        .collect();
    PiecewiseSmooth::new(breakpoints, segments)
}

fn term_to_doc<R: Real>(term: &Term<R>) -> SegmentDoc {
    let f = |v: R| v.to_f64().expect("scalar convertible to f64");
    match term {
        Term::Poly(coeffs) => SegmentDoc::Poly {
            coeffs: coeffs.iter().map(|&c| f(c)).collect(),
        },
        Term::Sin { amp, freq, phase } => SegmentDoc::Sin {
            amp: f(*amp),
            freq: f(*freq),
            phase: f(*phase),
        },
        Term::Cos { amp, freq, phase } => SegmentDoc::Cos {
            amp: f(*amp),
            freq: f(*freq),
            phase: f(*phase),
        },
    }
}

fn function_to_doc<R: Real>(f: &PiecewiseSmooth<R>) -> FunctionDoc {
    FunctionDoc {
        breakpoints: f
            .breakpoints()
            .iter()
            .map(|&b| b.to_f64().expect("scalar convertible"))
            .collect(),
        segments: f
            .segments()
            .iter()
            .map(|terms| {
                if terms.len() == 1 {
                    term_to_doc(&terms[0])
                } else {
                    SegmentDoc::Sum {
                        terms: terms.iter().map(term_to_doc).collect(),
                    }
                }
            })
            .collect(),
    }
}

/// Parses and validates a JSON problem document.
pub fn load_problem<R: Real>(json: &str) -> Result<ProblemSpec<R>> {
    let doc: ProblemDoc = serde_json::from_str(json).map_err(|e| Error::Document(e.to_string()))?;
    let bc = match doc.bc.as_str() {
        "dirichlet" => BcKind::Dirichlet,
        "mixed" => BcKind::Mixed,
        other => {
            return Err(Error::Document(format!(
                "unknown bc {other:?}; expected \"dirichlet\" or \"mixed\""
            )))
        }
    };
    let exact = doc
        .exact
        .as_ref()
        .map(|e| -> Result<ExactInfo<R>> {
            let active_set = match &e.active_set {
                ActiveSetDoc::Points(ps) => {
                    ActiveSet::Points(ps.iter().map(|&p| real(p)).collect())
                }
                ActiveSetDoc::Interval([a, b]) => ActiveSet::Interval(real(*a), real(*b)),
            };
            let density =
                e.mu.density_segments
                    .as_ref()
                    .map(function_from_doc)
                    .transpose()?;
            Ok(ExactInfo {
                ybar: function_from_doc(&e.ybar)?,
                ubar: function_from_doc(&e.ubar)?,
                active_set,
                mu: MeasureDesc {
                    atoms: e
                        .mu
                        .atoms
                        .iter()
                        .map(|&[x, m]| (real(x), real(m)))
                        .collect(),
                    density,
                },
            })
        })
        .transpose()?;
    ProblemSpec::new(
        real(doc.beta),
        bc,
        function_from_doc(&doc.f)?,
        function_from_doc(&doc.psi)?,
        function_from_doc(&doc.yd)?,
        exact,
    )
}

/// Serializes a problem to the JSON document format.
pub fn to_json<R: Real>(spec: &ProblemSpec<R>) -> String {
    let doc = ProblemDoc {
        bc: match spec.bc {
            BcKind::Dirichlet => "dirichlet".into(),
            BcKind::Mixed => "mixed".into(),
        },
        beta: spec.beta.to_f64().expect("scalar convertible"),
        f: function_to_doc(&spec.f),
        psi: function_to_doc(&spec.psi),
        yd: function_to_doc(&spec.y_d),
        exact: spec.exact.as_ref().map(|e| ExactDoc {
            ybar: function_to_doc(&e.ybar),
            ubar: function_to_doc(&e.ubar),
            active_set: match &e.active_set {
                ActiveSet::Points(ps) => ActiveSetDoc::Points(
                    ps.iter()
                        .map(|&p| p.to_f64().expect("convertible"))
                        .collect(),
                ),
                ActiveSet::Interval(a, b) => ActiveSetDoc::Interval([
                    a.to_f64().expect("convertible"),
                    b.to_f64().expect("convertible"),
                ]),
            },
            mu: MuDoc {
                atoms: e
                    .mu
                    .atoms
                    .iter()
                    .map(|&(x, m)| {
                        [
                            x.to_f64().expect("convertible"),
                            m.to_f64().expect("convertible"),
                        ]
                    })
                    .collect(),
                density_segments: e.mu.density.as_ref().map(function_to_doc),
            },
        }),
    };
    serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
}
