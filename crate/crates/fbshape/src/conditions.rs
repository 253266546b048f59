//! Integral inequalities and dichotomy hypotheses of the theory, evaluated
//! as signed residuals with three-way verdicts.

use crate::error::{Error, Result};
use crate::fem::{solve_chain, FemSystem, SourceSpec};
use crate::geometry::{ConvexBody, DeformationField, StarDomain};
use crate::mesh::{triangulate_polygon, triangulate_with, MeshParams};
use crate::scalar::{dot, sub, Real};
use crate::shape_calculus::DEFAULT_H_FACTOR;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Strict,
    BoundaryCase,
    Violated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Strict => "strict",
            Verdict::BoundaryCase => "boundary-case",
            Verdict::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConditionParams<T> {
    pub k: T,
    pub c: T,
    /// Numerical tolerance of the inputs, added to the boundary-case band.
    pub tol: T,
}

impl<T: Real> Default for ConditionParams<T> {
    fn default() -> Self {
        Self { k: T::lit(0.5), c: T::lit(1.0 / 32.0), tol: T::zero() }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionEntry<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub verdict: Verdict,
    pub branch: String,
}

#[derive(Debug, Clone)]
pub struct ConditionReport<T> {
    pub entries: Vec<ConditionEntry<T>>,
    pub tolerance: T,
}

impl<T: Real> ConditionReport<T> {
    pub fn entry(&self, name: &str) -> Option<&ConditionEntry<T>> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn classify<T: Real>(lhs: T, rhs: T, tol: T) -> Verdict {
    let band = T::lit(1e-9) * lhs.abs().max(rhs.abs()).max(T::one()) + tol;
    if (lhs - rhs).abs() <= band {
        Verdict::BoundaryCase
    } else if lhs > rhs {
        Verdict::Strict
    } else {
        Verdict::Violated
    }
}

fn entry<T: Real>(name: &str, lhs: T, rhs: T, tol: T, branch: &str) -> ConditionEntry<T> {
    ConditionEntry {
        name: name.into(),
        lhs,
        rhs,
        verdict: classify(lhs, rhs, tol),
        branch: branch.into(),
    }
}

/// Existence conditions attached to a convex body C: the Theorem 2.2 flux
/// balance, the Theorem 3.1 constant M_C, and the thin-line variant of
/// Remark 5.3 when f is a line mass.
pub fn existence_report<T: Real>(
    c_body: &ConvexBody<T>,
    f: &SourceSpec<T>,
    params: &ConditionParams<T>,
) -> Result<ConditionReport<T>> {
    f.validate()?;
    let per = c_body.perimeter();
    let int_f = f.integral_over_polygon(c_body);
    let mut entries = vec![entry(
        "thm_2_2_flux_balance",
        int_f,
        params.k * per,
        params.tol,
        "QS(f,k) has a solution iff lhs > rhs",
    )];

    // the M_C entry needs u_C on a mesh of C; thin slivers cannot be meshed
    // at a usable quality, and the thin-line threshold below covers them
    let thin = c_body.thin_eps.is_some();
    if !thin {
        let h = mean_extent(c_body) * T::lit(DEFAULT_H_FACTOR) * T::lit(2.0);
        let mesh = triangulate_polygon(c_body, h)?;
        let sys = FemSystem::new(mesh);
        let b = sys.assemble_load(f);
        let u_c = sys.solve(&b, None)?;
        let int_u = sys.integrate(&u_c.values);
        entries.push(entry(
            "thm_3_1_mc",
            int_f * int_u,
            params.c * per * per,
            params.tol,
            "lhs > rhs gives Omega strictly containing C for P(f,c)",
        ));
    }

    if let SourceSpec::ThinLine { body, mass_per_length } = f {
        let eps = body.thin_eps.expect("thin rectangle without width");
        // effective line mass a vs the threshold solving total mass = k|∂C|
        let a_threshold = effective_line_threshold(body, params.k);
        entries.push(entry(
            "remark_5_3_thin_line",
            *mass_per_length,
            a_threshold,
            params.tol,
            &format!("a > threshold at width eps = {}", eps.as_f64()),
        ));
    }
    Ok(ConditionReport { entries, tolerance: params.tol })
}

fn mean_extent<T: Real>(body: &ConvexBody<T>) -> T {
    let c = body.centroid();
    let n = 64;
    let mut acc = T::zero();
    for i in 0..n {
        let th = T::tau() * T::from_usize_(i) / T::from_usize_(n);
        acc += body.radial_support(c, th);
    }
    acc / T::from_usize_(n)
}

/// Line mass a at which total mass equals k|∂C| for the given thin rectangle.
pub fn effective_line_threshold<T: Real>(body: &ConvexBody<T>, k: T) -> T {
    let unit = SourceSpec::ThinLine { body: body.clone(), mass_per_length: T::one() };
    let mass_per_unit_a = unit.integral_over_polygon(body);
    k * body.perimeter() / mass_per_unit_a
}

/// Linear ε → 0 extrapolation of a width-dependent threshold from two widths.
pub fn extrapolate_threshold<T: Real>(eps1: T, a1: T, eps2: T, a2: T) -> T {
    (eps2 * a1 - eps1 * a2) / (eps2 - eps1)
}

#[derive(Debug, Clone)]
pub struct ResidualEntry<T> {
    pub name: String,
    /// Flux-weighted boundary average of lhs against the rhs profile.
    pub best_constant: T,
    /// sup|lhs − c·rhs| over the boundary, relative to |c|.
    pub sup_deviation: T,
}

#[derive(Debug, Clone)]
pub struct OverdeterminedReport<T> {
    pub pointwise: Vec<ResidualEntry<T>>,
    pub inequalities: Vec<ConditionEntry<T>>,
    /// ∮|∇u|²(∂u′/∂ν)dσ for V·ν ≡ 1, normalized by ∮|∇u|³dσ.
    pub oc_constraint: T,
}

impl<T: Real> OverdeterminedReport<T> {
    pub fn pointwise_entry(&self, name: &str) -> Option<&ResidualEntry<T>> {
        self.pointwise.iter().find(|e| e.name == name)
    }
}

fn best_constant_entry<T: Real>(
    name: &str,
    lhs: &[T],
    rhs: &[T],
    weights: &[T],
) -> ResidualEntry<T> {
    // flux weights double as quadrature weights here; callers pass w_i·q_i
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..lhs.len() {
        num += weights[i] * lhs[i] / rhs[i];
        den += weights[i];
    }
    let c = num / den;
    let mut sup = T::zero();
    for i in 0..lhs.len() {
        sup = sup.max((lhs[i] - c * rhs[i]).abs());
    }
    ResidualEntry { name: name.into(), best_constant: c, sup_deviation: sup / c.abs() }
}

/// Pointwise overdetermined conditions (Lemma 2.2, Theorem 2.3, the (OC)
/// line) and the §3 inequality hypotheses on a star domain.
pub fn overdetermined_residuals<T: Real>(
    domain: &StarDomain<T>,
    f: &SourceSpec<T>,
    params: &ConditionParams<T>,
) -> Result<OverdeterminedReport<T>> {
    let h = T::lit(DEFAULT_H_FACTOR) * domain.mean_radius();
    let mesh_params = MeshParams::for_domain(domain, h)?;
    let mesh = triangulate_with(domain, mesh_params)?;
    let sys = FemSystem::new(mesh);
    let chain = solve_chain(&sys, f)?;

    let center = domain.center();
    let lp = sys.mesh.boundary_loop.clone();
    let m = lp.len();
    let mut qu = Vec::with_capacity(m);
    let mut qv = Vec::with_capacity(m);
    let mut curv = Vec::with_capacity(m);
    let mut xnu = Vec::with_capacity(m);
    let mut wq = Vec::with_capacity(m);
    let mut theta = Vec::with_capacity(m);
    for &i in &lp {
        let p = sys.mesh.nodes[i];
        let th = (p[1] - center[1]).atan2(p[0] - center[0]);
        theta.push(th);
        qu.push(-chain.flux_u.normal_derivative[i]);
        qv.push(-chain.flux_v.normal_derivative[i]);
        curv.push(domain.curvature(th));
        // outward normal from the radial parameterization
        let r = domain.radius(th);
        let r1 = domain.radius_d1(th);
        let (co, si) = (th.cos(), th.sin());
        let tx = r1 * co - r * si;
        let ty = r1 * si + r * co;
        let speed = (tx * tx + ty * ty).sqrt();
        let nu = [ty / speed, -tx / speed];
        xnu.push(dot(sub(p, center), nu));
        wq.push(sys.boundary_weights[i] * (-chain.flux_u.normal_derivative[i]));
    }
    let starshaped = xnu.iter().all(|&x| x > T::zero());
    if !starshaped {
        return Err(Error::NotStarshaped);
    }

    // Lemma 2.2 needs its own solve with f ≡ N
    let n_dim = T::lit(2.0);
    let load_n = sys.assemble_load(&SourceSpec::Constant(n_dim));
    let u_n = sys.solve(&load_n, None)?;
    let flux_n = sys.flux(&u_n, &load_n);
    let qun: Vec<T> = lp.iter().map(|&i| -flux_n.normal_derivative[i]).collect();
    let inv_h: Vec<T> = curv.iter().map(|&k| T::one() / k).collect();

    let ones = vec![T::one(); m];
    let qu3: Vec<T> = qu.iter().map(|&q| T::lit(0.5) * q * q * q).collect();
    let pointwise = vec![
        best_constant_entry("lemma_2_2_flux_vs_inverse_curvature", &qun, &inv_h, &wq),
        best_constant_entry("thm_2_3_1_grad_v_constant", &qv, &ones, &wq),
        best_constant_entry("thm_2_3_2_grad_v_vs_support", &qv, &xnu, &wq),
        best_constant_entry("thm_2_3_3_grad_v_vs_grad_u", &qv, &qu, &wq),
        best_constant_entry("oc_grad_v_vs_half_grad_u_cubed", &qv, &qu3, &wq),
    ];

    let minr = |it: &mut dyn Iterator<Item = T>| it.fold(T::infinity(), |a, b| a.min(b));
    let inequalities = vec![
        entry(
            "sec3_grad_u_geq_k",
            minr(&mut qu.iter().copied()),
            params.k,
            params.tol,
            "either an Omega* strictly containing Omega solves QS(f,k), or equality",
        ),
        entry(
            "sec3_product_geq_c",
            minr(&mut qu.iter().zip(&qv).map(|(&a, &b)| a * b)),
            params.c,
            params.tol,
            "either an Omega* strictly containing Omega solves P(f,c), or a ball",
        ),
        entry(
            "sec3_grad_v_geq_k_grad_u",
            minr(&mut qv.iter().zip(&qu).map(|(&a, &b)| a / b)),
            params.k,
            params.tol,
            "either an Omega* solves QS(u,k|Omega|/|bdry|), or a ball",
        ),
        entry(
            "sec3_grad_v_geq_k_support",
            minr(&mut qv.iter().zip(&xnu).map(|(&a, &b)| a / b)),
            params.k,
            params.tol,
            "starshaped case: either an Omega* solves QS(u,kN|Omega|/|bdry|), or a ball",
        ),
    ];

    // Prop 4.1's second line for the uniform field, normalized by ∮|∇u|³
    let field = DeformationField::uniform_normal(domain, T::one(), domain.modes());
    let dchain = crate::fem::solve_derivative_chain(&sys, domain, &chain, &field)?;
    let raw = sys.boundary_integral_with(|i| {
        let q = -chain.flux_u.normal_derivative[i];
        q * q * dchain.dn_du[i]
    });
    let scale = sys.boundary_integral_with(|i| {
        let q = -chain.flux_u.normal_derivative[i];
        q * q * q
    });
    let oc_constraint = raw / scale.abs().max(T::lit(1e-30));

    Ok(OverdeterminedReport { pointwise, inequalities, oc_constraint })
}

#[derive(Debug, Clone)]
pub struct DidenkoReport<T> {
    /// One ratio per field; degenerate fields (∮u′dσ ≈ 0) carry None.
    pub ratios: Vec<Option<T>>,
    pub spread: T,
    pub mean: T,
    /// R/N of the best-fit circle, the ball-case oracle value of the ratio.
    pub rn_reference: T,
}

/// Per-field ratio ∫u′dx / ∮u′dσ of Theorem 4.1 (f ≡ 1). On balls the
/// harmonic mean-value property makes every usable ratio equal R/N.
pub fn didenko_ratio<T: Real>(
    domain: &StarDomain<T>,
    fields: &[DeformationField<T>],
) -> Result<DidenkoReport<T>> {
    let h = T::lit(DEFAULT_H_FACTOR) * domain.mean_radius();
    let mesh_params = MeshParams::for_domain(domain, h)?;
    let mesh = triangulate_with(domain, mesh_params)?;
    let sys = FemSystem::new(mesh);
    let one = SourceSpec::Constant(T::one());
    let load = sys.assemble_load(&one);
    let u = sys.solve(&load, None)?;
    let flux_u = sys.flux(&u, &load);

    let center = domain.center();
    let n = sys.mesh.nodes.len();
    let mut ratios = Vec::with_capacity(fields.len());
    let mut usable: Vec<T> = Vec::new();
    let per = domain.perimeter();
    for field in fields {
        let mut g = vec![T::zero(); n];
        let mut sup = T::zero();
        for &i in &sys.mesh.boundary_loop {
            let p = sys.mesh.nodes[i];
            let th = (p[1] - center[1]).atan2(p[0] - center[0]);
            let vn = field.normal_speed(domain, th);
            g[i] = -flux_u.normal_derivative[i] * vn;
            sup = sup.max(g[i].abs());
        }
        let zero = vec![T::zero(); n];
        let du = sys.solve(&zero, Some(&g))?;
        let volume = sys.integrate(&du.values);
        let boundary = sys.boundary_integral(&du.values);
        if boundary.abs() <= T::lit(1e-4) * (sup * per).max(T::lit(1e-30)) {
            ratios.push(None);
        } else {
            let r = volume / boundary;
            usable.push(r);
            ratios.push(Some(r));
        }
    }
    if usable.is_empty() {
        return Err(Error::NoData("all deformation fields are degenerate".into()));
    }
    let lo = usable.iter().copied().fold(T::infinity(), T::min);
    let hi = usable.iter().copied().fold(T::neg_infinity(), T::max);
    let mean = usable.iter().copied().sum::<T>() / T::from_usize_(usable.len());
    let (radius, _) = crate::geometry::distance_to_best_fit_circle(domain, 512);
    Ok(DidenkoReport { ratios, spread: hi - lo, mean, rn_reference: radius / T::lit(2.0) })
}

/// Default Didenko probe fields 1 + 0.9·cos jθ and 1 + 0.9·sin jθ, j = 1..4;
/// pure modes are degenerate on balls, so each carries a mean component.
pub fn didenko_default_fields<T: Real>(modes: usize) -> Vec<DeformationField<T>> {
    let mut fields = Vec::with_capacity(8);
    for j in 1..=4usize {
        let mut f = DeformationField::zero(modes);
        f.mean = T::one();
        f.cos[j - 1] = T::lit(0.9);
        fields.push(f);
        let mut f = DeformationField::zero(modes);
        f.mean = T::one();
        f.sin[j - 1] = T::lit(0.9);
        fields.push(f);
    }
    fields
}
