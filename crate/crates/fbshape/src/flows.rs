//! Residual-driven boundary flows whose fixed points are the overdetermined
//! configurations QS(f,k), P(f,c), and (OC).

use crate::error::{Error, Result};
use crate::fem::{FemSystem, SourceSpec};
use crate::geometry::{
    distance_to_best_fit_circle, has_c_gnp, ConvexBody, DeformationField, StarDomain,
};
use crate::mesh::{triangulate_with, MeshParams};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub enum ProblemId<T> {
    /// QS(1,k): −∂u/∂ν = k with f ≡ 1.
    Serrin { k: T },
    /// QS(f,k): −∂u/∂ν = k.
    Qs { f: SourceSpec<T>, k: T },
    /// P(f,c): |∇u||∇v| = c.
    P { f: SourceSpec<T>, c: T },
    /// (OC): |∇v| = (N/(N+2))|∇u|³ with f ≡ 1.
    Oc,
}

impl<T: Real> ProblemId<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemId::Serrin { .. } => "SERRIN",
            ProblemId::Qs { .. } => "QS",
            ProblemId::P { .. } => "P",
            ProblemId::Oc => "OC",
        }
    }

    fn source(&self) -> SourceSpec<T> {
        match self {
            ProblemId::Serrin { .. } | ProblemId::Oc => SourceSpec::Constant(T::one()),
            ProblemId::Qs { f, .. } | ProblemId::P { f, .. } => f.clone(),
        }
    }

    fn needs_v(&self) -> bool {
        matches!(self, ProblemId::P { .. } | ProblemId::Oc)
    }

    fn validate(&self) -> Result<()> {
        match self {
            ProblemId::Serrin { k } | ProblemId::Qs { k, .. } => {
                if !(*k > T::zero()) {
                    return Err(Error::InvalidArgument("flux level k must be positive".into()));
                }
            }
            ProblemId::P { c, .. } => {
                if !(*c > T::zero()) {
                    return Err(Error::InvalidArgument("product level c must be positive".into()));
                }
            }
            ProblemId::Oc => {}
        }
        self.source().validate()
    }
}

/// Signed residual of the overdetermined condition along the boundary.
#[derive(Debug, Clone)]
pub struct Residual<T> {
    /// Boundary node angles, in boundary-loop order.
    pub theta: Vec<T>,
    /// Signed residual per boundary node.
    pub values: Vec<T>,
    /// Signed residual per boundary edge (endpoint average).
    pub edge_values: Vec<T>,
    pub sup: T,
}

/// Residual at the module's default resolution.
pub fn residual<T: Real>(domain: &StarDomain<T>, problem: &ProblemId<T>) -> Result<Residual<T>> {
    let h = T::lit(crate::shape_calculus::DEFAULT_H_FACTOR) * domain.mean_radius();
    let params = MeshParams::for_domain(domain, h)?;
    Ok(evaluate(domain, problem, params)?.0)
}

fn check_support<T: Real>(domain: &StarDomain<T>, source: &SourceSpec<T>) -> Result<()> {
    let body = match source {
        SourceSpec::Indicator { body, .. } | SourceSpec::ThinLine { body, .. } => body,
        _ => return Ok(()),
    };
    let margin = T::lit(1e-6);
    let inside = body
        .sample_boundary(128)
        .into_iter()
        .all(|p| domain.contains_strict(p, margin));
    if inside {
        Ok(())
    } else {
        Err(Error::Precondition("source support reaches the boundary".into()))
    }
}

fn evaluate<T: Real>(
    domain: &StarDomain<T>,
    problem: &ProblemId<T>,
    params: MeshParams,
) -> Result<(Residual<T>, DeformationField<T>)> {
    problem.validate()?;
    let source = problem.source();
    check_support(domain, &source)?;
    let mesh = triangulate_with(domain, params)?;
    let sys = FemSystem::new(mesh);
    let load_u = sys.assemble_load(&source);
    let u = sys.solve(&load_u, None)?;
    let flux_u = sys.flux(&u, &load_u);
    let flux_v = if problem.needs_v() {
        let load_v = sys.mass_apply(&u.values);
        let v = sys.solve(&load_v, None)?;
        Some(sys.flux(&v, &load_v))
    } else {
        None
    };

    let c0 = domain.center();
    let lp = &sys.mesh.boundary_loop;
    let mut theta = Vec::with_capacity(lp.len());
    let mut values = Vec::with_capacity(lp.len());
    for &i in lp {
        let p = sys.mesh.nodes[i];
        theta.push((p[1] - c0[1]).atan2(p[0] - c0[0]));
        let qu = -flux_u.normal_derivative[i];
        let r = match problem {
            ProblemId::Serrin { k } | ProblemId::Qs { k, .. } => qu - *k,
            ProblemId::P { c, .. } => {
                let qv = -flux_v.as_ref().unwrap().normal_derivative[i];
                qu * qv - *c
            }
            ProblemId::Oc => {
                let qv = -flux_v.as_ref().unwrap().normal_derivative[i];
                qv - T::lit(0.5) * qu * qu * qu
            }
        };
        values.push(r);
    }
    let sup = values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let edge_values = (0..lp.len())
        .map(|j| (values[j] + values[(j + 1) % lp.len()]) / T::lit(2.0))
        .collect();

    // stable direction: the residual with per-problem mode signs
    let modes = domain.modes();
    let mut field = DeformationField::from_normal_speed_samples(domain, &theta, &values, modes);
    match problem {
        // full-support sources: the mean flux grows with the domain, so the
        // mean component must flow against the residual
        ProblemId::Serrin { .. } | ProblemId::P { .. } => field.mean = -field.mean,
        ProblemId::Qs { f, .. } => {
            if !matches!(f, SourceSpec::Indicator { .. } | SourceSpec::ThinLine { .. }) {
                field.mean = -field.mean;
            }
        }
        // the (OC) residual grows under outward perturbations in every mode
        ProblemId::Oc => field = field.scaled(-T::one()),
    }
    // the flow commutes with θ → −θ; enforce the symmetry exactly
    if domain.sin_coeffs().iter().all(|&s| s == T::zero()) {
        for s in field.sin.iter_mut() {
            *s = T::zero();
        }
    }
    Ok((Residual { theta, values, edge_values, sup }, field))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowVerdict {
    Converged,
    MaxIters,
    StepCollapse,
}

#[derive(Debug, Clone, Copy)]
pub struct HistoryRow<T> {
    pub iter: usize,
    pub residual: T,
    pub area: T,
    pub perimeter: T,
}

#[derive(Debug, Clone)]
pub struct FlowParams<T> {
    pub step0: T,
    pub tol: T,
    pub max_iters: usize,
    pub constraint: Option<ConvexBody<T>>,
    /// Mesh pitch as a fraction of the mean radius.
    pub h_factor: T,
}

impl<T: Real> FlowParams<T> {
    pub fn new(step0: T, tol: T, max_iters: usize) -> Self {
        Self {
            step0,
            tol,
            max_iters,
            constraint: None,
            h_factor: T::lit(crate::shape_calculus::DEFAULT_H_FACTOR),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult<T> {
    pub domain: StarDomain<T>,
    pub iterations: usize,
    pub history: Vec<HistoryRow<T>>,
    pub verdict: FlowVerdict,
    pub best_fit_radius: T,
    pub distance_to_circle: T,
    pub final_residual: T,
}

pub fn run_flow<T: Real>(
    problem: &ProblemId<T>,
    init: &StarDomain<T>,
    params: &FlowParams<T>,
) -> Result<FlowResult<T>> {
    problem.validate()?;
    if let Some(c) = &params.constraint {
        if !has_c_gnp(init, c).holds() {
            return Err(Error::Precondition("initial domain violates C-GNP".into()));
        }
    }
    let mesh_params = |d: &StarDomain<T>| -> Result<MeshParams> {
        MeshParams::for_domain(d, params.h_factor * d.mean_radius())
    };

    // unit-amplitude direction: the backtracking step carries the scale, so
    // convergence speed does not degrade with small k or c
    let normalize = |f: DeformationField<T>, sup: T| {
        if sup > T::zero() {
            f.scaled(T::one() / sup)
        } else {
            f
        }
    };

    let mut domain = init.clone();
    let (mut res, mut dir) = evaluate(&domain, problem, mesh_params(&domain)?)?;
    dir = normalize(dir, res.sup);
    let mut history = vec![HistoryRow {
        iter: 0,
        residual: res.sup,
        area: domain.area(),
        perimeter: domain.perimeter(),
    }];
    let mut verdict = FlowVerdict::MaxIters;
    let mut iterations = 0usize;
    let mut t = params.step0;
    let collapse_at = params.step0 * T::lit(1e-8);

    for iter in 1..=params.max_iters {
        if res.sup <= params.tol {
            verdict = FlowVerdict::Converged;
            break;
        }
        // backtracking: halve t until the sup-residual strictly decreases
        let accepted = loop {
            if t < collapse_at {
                break None;
            }
            let candidate = match domain.deform(&dir, t) {
                Ok(d) => d,
                Err(_) => {
                    t = t / T::lit(2.0);
                    continue;
                }
            };
            if let Some(c) = &params.constraint {
                if !has_c_gnp(&candidate, c).holds() {
                    t = t / T::lit(2.0);
                    continue;
                }
            }
            match evaluate(&candidate, problem, mesh_params(&candidate)?) {
                Ok((r2, d2)) if r2.sup < res.sup => break Some((candidate, r2, d2)),
                Ok(_) | Err(Error::MeshingFailure(_)) | Err(Error::DomainDegenerate(_)) => {
                    t = t / T::lit(2.0);
                }
                Err(e) => return Err(e),
            }
        };
        match accepted {
            None => {
                verdict = FlowVerdict::StepCollapse;
                break;
            }
            Some((d, r, g)) => {
                domain = d;
                dir = normalize(g, r.sup);
                res = r;
                iterations = iter;
                history.push(HistoryRow {
                    iter,
                    residual: res.sup,
                    area: domain.area(),
                    perimeter: domain.perimeter(),
                });
                t = (t * T::lit(2.0)).min(params.step0);
            }
        }
    }
    if res.sup <= params.tol {
        verdict = FlowVerdict::Converged;
    }

    let (best_fit_radius, distance_to_circle) = distance_to_best_fit_circle(&domain, 1024);
    Ok(FlowResult {
        final_residual: res.sup,
        domain,
        iterations,
        history,
        verdict,
        best_fit_radius,
        distance_to_circle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_vanishes_on_oracle_balls() {
        let d = StarDomain::circle([0.0f64, 0.0], 1.0).unwrap();
        let r = residual(&d, &ProblemId::Serrin { k: 0.5 }).unwrap();
        assert!(r.sup < 1e-2, "serrin sup {}", r.sup);
        let r = residual(&d, &ProblemId::Oc).unwrap();
        assert!(r.sup < 1e-2, "oc sup {}", r.sup);
        let r = residual(&d, &ProblemId::P { f: SourceSpec::Constant(1.0), c: 1.0 / 32.0 }).unwrap();
        assert!(r.sup < 1e-3, "p sup {}", r.sup);
    }

    #[test]
    fn residual_large_off_ball() {
        let mut cos = vec![0.0; 16];
        cos[1] = 0.2;
        let d = StarDomain::new([0.0f64, 0.0], 1.0, cos, vec![]).unwrap();
        let r = residual(&d, &ProblemId::Serrin { k: 0.5 }).unwrap();
        assert!(r.sup > 0.05, "sup {}", r.sup);
    }

    #[test]
    fn support_violation_rejected() {
        let d = StarDomain::circle([0.0f64, 0.0], 1.0).unwrap();
        let body = ConvexBody::rectangle([0.0, 0.0], 0.99, 0.99).unwrap();
        let p = ProblemId::Qs { f: SourceSpec::Indicator { body, scale: 1.0 }, k: 0.1 };
        assert!(residual(&d, &p).is_err());
    }

    #[test]
    fn serrin_flow_reaches_circle() {
        let mut cos = vec![0.0; 8];
        cos[2] = 0.15;
        let init = StarDomain::new([0.0f64, 0.0], 1.0, cos, vec![]).unwrap();
        let mut fp = FlowParams::new(1.0, 2e-3, 120);
        fp.h_factor = 0.04;
        let out = run_flow(&ProblemId::Serrin { k: 0.5 }, &init, &fp).unwrap();
        assert_eq!(out.verdict, FlowVerdict::Converged, "residual {}", out.final_residual);
        assert!((out.best_fit_radius - 1.0).abs() < 0.02, "R {}", out.best_fit_radius);
        assert!(out.distance_to_circle < 0.02, "dist {}", out.distance_to_circle);
        // monotone accepted steps
        for w in out.history.windows(2) {
            assert!(w[1].residual < w[0].residual);
        }
        // symmetry preserved
        assert!(out.domain.sin_coeffs().iter().all(|&s| s == 0.0));
    }
}
