//! Piecewise-linear Galerkin solver for the chained Dirichlet problems
//! −Δu = f, −Δv = u, −Δw = v, −Δz = ½u², their domain-derivative problems,
//! and consistent (variational) boundary flux recovery.

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, DeformationField, StarDomain};
use crate::mesh::{tri_signed_area, Mesh};
use crate::scalar::{cross, dist, sub, Point, Real};
use crate::sparse::{solve_cg, Csr, Triplets};

/// Right-hand side f of a Dirichlet problem P(ω, f).
#[derive(Debug, Clone)]
pub enum SourceSpec<T> {
    Constant(T),
    /// Polynomial in r = |x − center|: Σ coeffs[i]·r^i.
    RadialPoly { center: Point<T>, coeffs: Vec<T> },
    /// scale·χ_C for a convex body C.
    Indicator { body: ConvexBody<T>, scale: T },
    /// Thin-rectangle approximation of a line mass a·δ_C: density a/ε on the
    /// rectangle (ε = recorded thin width).
    ThinLine { body: ConvexBody<T>, mass_per_length: T },
}

impl<T: Real> SourceSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let nonneg = match self {
            SourceSpec::Constant(c) => *c >= T::zero(),
            SourceSpec::RadialPoly { coeffs, .. } => coeffs.iter().all(|c| c.is_finite()),
            SourceSpec::Indicator { scale, .. } => *scale >= T::zero(),
            SourceSpec::ThinLine { body, mass_per_length } => {
                body.thin_eps.is_some() && *mass_per_length >= T::zero()
            }
        };
        if nonneg {
            Ok(())
        } else {
            Err(Error::InvalidArgument("invalid source specification".into()))
        }
    }

    fn density(&self) -> Option<(&ConvexBody<T>, T)> {
        match self {
            SourceSpec::Indicator { body, scale } => Some((body, *scale)),
            SourceSpec::ThinLine { body, mass_per_length } => {
                let eps = body.thin_eps.expect("thin rectangle without width");
                Some((body, *mass_per_length / eps))
            }
            _ => None,
        }
    }

    pub fn eval(&self, p: Point<T>) -> T {
        match self {
            SourceSpec::Constant(c) => *c,
            SourceSpec::RadialPoly { center, coeffs } => {
                let r = dist(p, *center);
                let mut acc = T::zero();
                let mut pw = T::one();
                for &c in coeffs {
                    acc += c * pw;
                    pw *= r;
                }
                acc
            }
            _ => {
                let (body, dens) = self.density().unwrap();
                if body.contains(p) {
                    dens
                } else {
                    T::zero()
                }
            }
        }
    }

    /// ∫_P f over a convex polygon, exact for constant and indicator types.
    pub fn integral_over_polygon(&self, poly: &ConvexBody<T>) -> T {
        match self {
            SourceSpec::Constant(c) => *c * poly.area(),
            SourceSpec::RadialPoly { .. } => {
                // centroid-subdivision quadrature
                let c = poly.centroid();
                let verts = poly.vertices();
                let n = verts.len();
                let mut acc = T::zero();
                for i in 0..n {
                    let a = verts[i];
                    let b = verts[(i + 1) % n];
                    let area = cross(sub(a, c), sub(b, c)) / T::lit(2.0);
                    for (m, w) in tri_midpoints(c, a, b) {
                        acc += self.eval(m) * w * area;
                    }
                }
                acc
            }
            _ => {
                let (body, dens) = self.density().unwrap();
                let clipped = clip_polygon_to_convex(poly.vertices(), body);
                dens * polygon_area(&clipped)
            }
        }
    }
}

fn tri_midpoints<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> [(Point<T>, T); 3] {
    let half = T::lit(0.5);
    let third = T::one() / T::lit(3.0);
    [
        ([(a[0] + b[0]) * half, (a[1] + b[1]) * half], third),
        ([(b[0] + c[0]) * half, (b[1] + c[1]) * half], third),
        ([(c[0] + a[0]) * half, (c[1] + a[1]) * half], third),
    ]
}

fn polygon_area<T: Real>(verts: &[Point<T>]) -> T {
    if verts.len() < 3 {
        return T::zero();
    }
    let n = verts.len();
    let mut a = T::zero();
    for i in 0..n {
        a += cross(verts[i], verts[(i + 1) % n]);
    }
    a / T::lit(2.0)
}

fn polygon_centroid<T: Real>(verts: &[Point<T>]) -> Point<T> {
    let n = verts.len();
    let mut cx = T::zero();
    let mut cy = T::zero();
    let mut a = T::zero();
    for i in 0..n {
        let p = verts[i];
        let q = verts[(i + 1) % n];
        let c = cross(p, q);
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
        a += c;
    }
    if a.abs() < T::lit(1e-300) {
        return verts[0];
    }
    let s = T::lit(3.0) * a;
    [cx / s, cy / s]
}

/// Sutherland–Hodgman clip of an arbitrary polygon against a convex body.
pub fn clip_polygon_to_convex<T: Real>(subject: &[Point<T>], body: &ConvexBody<T>) -> Vec<Point<T>> {
    let mut poly: Vec<Point<T>> = subject.to_vec();
    let verts = body.vertices();
    let n = verts.len();
    for i in 0..n {
        if poly.is_empty() {
            break;
        }
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let inside = |p: Point<T>| cross(sub(b, a), sub(p, a)) >= T::zero();
        let mut out: Vec<Point<T>> = Vec::with_capacity(poly.len() + 2);
        for j in 0..poly.len() {
            let p = poly[j];
            let q = poly[(j + 1) % poly.len()];
            let pin = inside(p);
            let qin = inside(q);
            if pin {
                out.push(p);
            }
            if pin != qin {
                // edge crossing
                let da = cross(sub(b, a), sub(p, a));
                let db = cross(sub(b, a), sub(q, a));
                let t = da / (da - db);
                out.push([p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t]);
            }
        }
        poly = out;
    }
    poly
}

#[derive(Debug, Clone)]
pub struct Field<T> {
    pub values: Vec<T>,
}

/// Boundary flux data recovered variationally: the residual of the bilinear
/// form against boundary hat functions divided by the lumped boundary
/// measure gives the signed normal derivative per boundary node.
#[derive(Debug, Clone)]
pub struct FluxTrace<T> {
    /// Signed ∂q/∂ν per node (zero at interior nodes).
    pub normal_derivative: Vec<T>,
    /// |∇q| per boundary edge (average of the nodal −∂q/∂ν at its ends).
    pub edge_flux: Vec<T>,
}

pub struct FemSystem<T> {
    pub mesh: Mesh<T>,
    pub stiffness: Csr<T>,
    pub mass: Csr<T>,
    interior: Vec<usize>,
    a_int: Csr<T>,
    pub boundary_weights: Vec<T>,
}

impl<T: Real> FemSystem<T> {
    pub fn new(mesh: Mesh<T>) -> Self {
        let n = mesh.nodes.len();
        let mut kt = Triplets::new(n);
        let mut mt = Triplets::new(n);
        for &t in &mesh.tris {
            let p: [Point<T>; 3] = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
            let area = tri_signed_area(&mesh.nodes, t);
            let two_a = area * T::lit(2.0);
            let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
            let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
            let quarter_inv_a = T::one() / (two_a * T::lit(2.0));
            let m_off = area / T::lit(12.0);
            let m_diag = area / T::lit(6.0);
            for i in 0..3 {
                for j in 0..3 {
                    kt.add(t[i], t[j], (b[i] * b[j] + c[i] * c[j]) * quarter_inv_a);
                    mt.add(t[i], t[j], if i == j { m_diag } else { m_off });
                }
            }
        }
        let stiffness = kt.to_csr();
        let mass = mt.to_csr();

        let mut interior = Vec::new();
        let mut interior_of = vec![None; n];
        for i in 0..n {
            if !mesh.is_boundary[i] {
                interior_of[i] = Some(interior.len());
                interior.push(i);
            }
        }
        let mut at = Triplets::new(interior.len());
        for (ri, &i) in interior.iter().enumerate() {
            for p in stiffness.indptr[i]..stiffness.indptr[i + 1] {
                if let Some(rj) = interior_of[stiffness.indices[p]] {
                    at.add(ri, rj, stiffness.data[p]);
                }
            }
        }
        let a_int = at.to_csr();
        let boundary_weights = mesh.boundary_node_weights();
        Self { mesh, stiffness, mass, interior, a_int, boundary_weights }
    }

    /// Load vector b_i = ∫ f φ_i. Indicator sources are integrated with
    /// exact per-triangle polygon clipping.
    pub fn assemble_load(&self, src: &SourceSpec<T>) -> Vec<T> {
        let n = self.mesh.nodes.len();
        let mut b = vec![T::zero(); n];
        match src {
            SourceSpec::Constant(c) => {
                for &t in &self.mesh.tris {
                    let area = tri_signed_area(&self.mesh.nodes, t);
                    let w = *c * area / T::lit(3.0);
                    for &i in &t {
                        b[i] += w;
                    }
                }
            }
            SourceSpec::RadialPoly { .. } => {
                // edge-midpoint rule, exact for quadratics
                for &t in &self.mesh.tris {
                    let area = tri_signed_area(&self.mesh.nodes, t);
                    let p = [self.mesh.nodes[t[0]], self.mesh.nodes[t[1]], self.mesh.nodes[t[2]]];
                    let mids = tri_midpoints(p[0], p[1], p[2]);
                    // midpoint k lies on the edge (k, k+1); φ_i = ½ there unless i = k+2
                    for (k, (m, _)) in mids.iter().enumerate() {
                        let f = src.eval(*m) * area / T::lit(3.0);
                        let half = T::lit(0.5);
                        b[t[k]] += f * half;
                        b[t[(k + 1) % 3]] += f * half;
                    }
                }
            }
            _ => {
                let (body, dens) = src.density().unwrap();
                for &t in &self.mesh.tris {
                    let p = [self.mesh.nodes[t[0]], self.mesh.nodes[t[1]], self.mesh.nodes[t[2]]];
                    let clipped = clip_polygon_to_convex(&p, body);
                    let area = polygon_area(&clipped);
                    if area <= T::zero() {
                        continue;
                    }
                    let cen = polygon_centroid(&clipped);
                    let bary = barycentric(p, cen);
                    for i in 0..3 {
                        b[t[i]] += dens * area * bary[i];
                    }
                }
            }
        }
        b
    }

    pub fn mass_apply(&self, v: &[T]) -> Vec<T> {
        self.mass.apply(v)
    }

    /// ∫ v_h dx
    pub fn integrate(&self, v: &[T]) -> T {
        self.mass.apply(v).iter().copied().sum()
    }

    /// ∫ a_h b_h dx
    pub fn inner_mass(&self, a: &[T], b: &[T]) -> T {
        let ma = self.mass.apply(a);
        ma.iter().zip(b).map(|(&x, &y)| x * y).sum()
    }

    /// ∫ |∇v_h|² dx
    pub fn dirichlet_energy(&self, v: &[T]) -> T {
        self.stiffness.quadratic_form(v)
    }

    /// Solve −Δq = f with Dirichlet data `g` (full-length vector read at
    /// boundary nodes; `None` means homogeneous).
    pub fn solve(&self, b_full: &[T], g: Option<&[T]>) -> Result<Field<T>> {
        let n = self.mesh.nodes.len();
        let mut lifted = vec![T::zero(); n];
        if let Some(g) = g {
            for i in 0..n {
                if self.mesh.is_boundary[i] {
                    lifted[i] = g[i];
                }
            }
        }
        let a_lift = self.stiffness.apply(&lifted);
        let rhs: Vec<T> = self
            .interior
            .iter()
            .map(|&i| b_full[i] - a_lift[i])
            .collect();
        let x = solve_cg(&self.a_int, &rhs, None, T::lit(1e-12), 200 * self.interior.len() + 1000)?;
        let mut values = lifted;
        for (ri, &i) in self.interior.iter().enumerate() {
            values[i] = x[ri];
        }
        Ok(Field { values })
    }

    /// Consistent flux recovery for a field solving the problem with load
    /// `b_full`.
    pub fn flux(&self, field: &Field<T>, b_full: &[T]) -> FluxTrace<T> {
        let n = self.mesh.nodes.len();
        let r = self.stiffness.apply(&field.values);
        let mut normal_derivative = vec![T::zero(); n];
        for i in 0..n {
            if self.mesh.is_boundary[i] && self.boundary_weights[i] > T::zero() {
                normal_derivative[i] = (r[i] - b_full[i]) / self.boundary_weights[i];
            }
        }
        let edge_flux = self
            .mesh
            .boundary_edges
            .iter()
            .map(|e| -(normal_derivative[e.a] + normal_derivative[e.b]) / T::lit(2.0))
            .collect();
        FluxTrace { normal_derivative, edge_flux }
    }

    /// ∮ g dσ for a full-length nodal vector (boundary-lumped quadrature).
    pub fn boundary_integral(&self, g: &[T]) -> T {
        self.mesh
            .boundary_loop
            .iter()
            .map(|&i| g[i] * self.boundary_weights[i])
            .sum()
    }

    /// ∮ f(node) dσ over boundary nodes.
    pub fn boundary_integral_with(&self, f: impl Fn(usize) -> T) -> T {
        self.mesh
            .boundary_loop
            .iter()
            .map(|&i| f(i) * self.boundary_weights[i])
            .sum()
    }
}

fn barycentric<T: Real>(p: [Point<T>; 3], x: Point<T>) -> [T; 3] {
    let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let l0 = cross(sub(p[1], x), sub(p[2], x)) / det;
    let l1 = cross(sub(p[2], x), sub(p[0], x)) / det;
    [l0, l1, T::one() - l0 - l1]
}

/// Solution stack u, v, w, z of the chained Dirichlet problems with their
/// boundary flux traces and load vectors.
pub struct Chain<T> {
    pub u: Field<T>,
    pub v: Field<T>,
    pub w: Field<T>,
    pub z: Field<T>,
    pub flux_u: FluxTrace<T>,
    pub flux_v: FluxTrace<T>,
    pub flux_w: FluxTrace<T>,
    pub flux_z: FluxTrace<T>,
    pub load_u: Vec<T>,
}

pub fn solve_chain<T: Real>(sys: &FemSystem<T>, source: &SourceSpec<T>) -> Result<Chain<T>> {
    source.validate()?;
    let load_u = sys.assemble_load(source);
    let u = sys.solve(&load_u, None)?;
    let load_v = sys.mass_apply(&u.values);
    let v = sys.solve(&load_v, None)?;
    let load_w = sys.mass_apply(&v.values);
    let w = sys.solve(&load_w, None)?;
    let half_u2: Vec<T> = u.values.iter().map(|&x| x * x / T::lit(2.0)).collect();
    let load_z = sys.mass_apply(&half_u2);
    let z = sys.solve(&load_z, None)?;
    let flux_u = sys.flux(&u, &load_u);
    let flux_v = sys.flux(&v, &load_v);
    let flux_w = sys.flux(&w, &load_w);
    let flux_z = sys.flux(&z, &load_z);
    Ok(Chain { u, v, w, z, flux_u, flux_v, flux_w, flux_z, load_u })
}

/// Domain derivatives u′, v′, w′, z′ for a deformation field, with signed
/// boundary normal derivatives.
pub struct DerivativeChain<T> {
    pub du: Field<T>,
    pub dv: Field<T>,
    pub dw: Field<T>,
    pub dz: Field<T>,
    pub dn_du: Vec<T>,
    pub dn_dv: Vec<T>,
    pub dn_dw: Vec<T>,
    pub dn_dz: Vec<T>,
    /// V·ν at each boundary node (zero at interior nodes).
    pub vn: Vec<T>,
}

pub fn solve_derivative_chain<T: Real>(
    sys: &FemSystem<T>,
    domain: &StarDomain<T>,
    chain: &Chain<T>,
    field: &DeformationField<T>,
) -> Result<DerivativeChain<T>> {
    let n = sys.mesh.nodes.len();
    let center = domain.center();
    let mut vn = vec![T::zero(); n];
    for &i in &sys.mesh.boundary_loop {
        let p = sys.mesh.nodes[i];
        let th = (p[1] - center[1]).atan2(p[0] - center[0]);
        vn[i] = field.normal_speed(domain, th);
    }
    let bc = |nd: &[T]| -> Vec<T> {
        // boundary data −(∂q/∂ν)·V·ν = |∇q|·V·ν
        (0..n).map(|i| -nd[i] * vn[i]).collect()
    };
    let zero = vec![T::zero(); n];
    let g_u = bc(&chain.flux_u.normal_derivative);
    let du = sys.solve(&zero, Some(&g_u))?;
    let load_dv = sys.mass_apply(&du.values);
    let g_v = bc(&chain.flux_v.normal_derivative);
    let dv = sys.solve(&load_dv, Some(&g_v))?;
    let load_dw = sys.mass_apply(&dv.values);
    let g_w = bc(&chain.flux_w.normal_derivative);
    let dw = sys.solve(&load_dw, Some(&g_w))?;
    let u_du: Vec<T> = chain.u.values.iter().zip(&du.values).map(|(&a, &b)| a * b).collect();
    let load_dz = sys.mass_apply(&u_du);
    let g_z = bc(&chain.flux_z.normal_derivative);
    let dz = sys.solve(&load_dz, Some(&g_z))?;

    let dn = |f: &Field<T>, b: &[T]| sys.flux(f, b).normal_derivative;
    Ok(DerivativeChain {
        dn_du: dn(&du, &zero),
        dn_dv: dn(&dv, &load_dv),
        dn_dw: dn(&dw, &load_dw),
        dn_dz: dn(&dz, &load_dz),
        du,
        dv,
        dw,
        dz,
        vn,
    })
}

/// Residuals of the Green identities linking the derivative-chain boundary
/// fluxes to boundary integrals of the primal fluxes.
#[derive(Debug, Clone)]
pub struct GreenIdentityReport<T> {
    /// ∮(−∂v′/∂ν) vs ∮|∇u|² V·ν
    pub second_order: (T, T),
    /// ∮(−∂w′/∂ν) vs 2∮|∇u||∇v| V·ν
    pub third_order: (T, T),
    /// ∮(−∂z′/∂ν) vs ∮|∇u||∇v| V·ν
    pub nonlinear: (T, T),
    /// L¹ magnitude of each right-hand integrand, the scale for `gaps`.
    pub magnitudes: [T; 3],
}

impl<T: Real> GreenIdentityReport<T> {
    /// Gaps relative to the right-hand magnitude ∮|integrand|dσ, which stays
    /// a meaningful scale when the signed integral cancels to ≈ 0.
    pub fn gaps(&self) -> [T; 3] {
        let rel = |(l, r): (T, T), m: T| (l - r).abs() / r.abs().max(m).max(T::lit(1e-30));
        [
            rel(self.second_order, self.magnitudes[0]),
            rel(self.third_order, self.magnitudes[1]),
            rel(self.nonlinear, self.magnitudes[2]),
        ]
    }
}

pub fn green_identity_report<T: Real>(
    sys: &FemSystem<T>,
    chain: &Chain<T>,
    dchain: &DerivativeChain<T>,
) -> GreenIdentityReport<T> {
    let qu = &chain.flux_u.normal_derivative;
    let qv = &chain.flux_v.normal_derivative;
    let vn = &dchain.vn;
    let lhs1 = sys.boundary_integral_with(|i| -dchain.dn_dv[i]);
    let rhs1 = sys.boundary_integral_with(|i| qu[i] * qu[i] * vn[i]);
    let lhs2 = sys.boundary_integral_with(|i| -dchain.dn_dw[i]);
    let rhs2 = sys.boundary_integral_with(|i| T::lit(2.0) * qu[i] * qv[i] * vn[i]);
    let lhs3 = sys.boundary_integral_with(|i| -dchain.dn_dz[i]);
    let rhs3 = sys.boundary_integral_with(|i| qu[i] * qv[i] * vn[i]);
    let mag1 = sys.boundary_integral_with(|i| (qu[i] * qu[i] * vn[i]).abs());
    let mag2 = sys.boundary_integral_with(|i| (T::lit(2.0) * qu[i] * qv[i] * vn[i]).abs());
    let mag3 = sys.boundary_integral_with(|i| (qu[i] * qv[i] * vn[i]).abs());
    GreenIdentityReport {
        second_order: (lhs1, rhs1),
        third_order: (lhs2, rhs2),
        nonlinear: (lhs3, rhs3),
        magnitudes: [mag1, mag2, mag3],
    }
}
