//! Star-shaped planar domains with truncated Fourier radial functions,
//! boundary differential geometry, Hausdorff distance, and the normal-cone
//! admissibility test relative to a convex body.

use crate::error::{Error, Result};
use crate::scalar::{add, cross, dist, dot, norm, scale, sub, Point, Real};

/// Default Fourier mode cutoff for radial functions and deformation fields.
pub const DEFAULT_MODES: usize = 16;

/// Star-shaped domain: boundary ρ(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)
/// measured from `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarDomain<T> {
    center: Point<T>,
    a0: T,
    cos_coeffs: Vec<T>,
    sin_coeffs: Vec<T>,
    rho_min: T,
}

impl<T: Real> StarDomain<T> {
    pub fn new(center: Point<T>, a0: T, cos_coeffs: Vec<T>, sin_coeffs: Vec<T>) -> Result<Self> {
        let rho_min = a0 / T::lit(20.0);
        Self::with_rho_min(center, a0, cos_coeffs, sin_coeffs, rho_min)
    }

    pub fn with_rho_min(
        center: Point<T>,
        a0: T,
        mut cos_coeffs: Vec<T>,
        mut sin_coeffs: Vec<T>,
        rho_min: T,
    ) -> Result<Self> {
        if !(a0 > T::zero()) {
            return Err(Error::DomainDegenerate("mean radius must be positive".into()));
        }
        let m = cos_coeffs.len().max(sin_coeffs.len()).max(DEFAULT_MODES);
        cos_coeffs.resize(m, T::zero());
        sin_coeffs.resize(m, T::zero());
        for c in cos_coeffs.iter().chain(sin_coeffs.iter()) {
            if !c.is_finite() {
                return Err(Error::DomainDegenerate("non-finite Fourier amplitude".into()));
            }
        }
        let dom = Self { center, a0, cos_coeffs, sin_coeffs, rho_min };
        // positivity sampled at ≥ 8M points
        let n = 8 * m.max(8);
        for i in 0..n {
            let th = T::tau() * T::from_usize_(i) / T::from_usize_(n);
            if dom.radius(th) < rho_min {
                return Err(Error::DomainDegenerate(format!(
                    "radial function below ρ_min at θ = {}",
                    th
                )));
            }
        }
        Ok(dom)
    }

    pub fn circle(center: Point<T>, radius: T) -> Result<Self> {
        Self::new(center, radius, vec![], vec![])
    }

    pub fn center(&self) -> Point<T> {
        self.center
    }

    pub fn mean_radius(&self) -> T {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[T] {
        &self.cos_coeffs
    }

    pub fn sin_coeffs(&self) -> &[T] {
        &self.sin_coeffs
    }

    pub fn modes(&self) -> usize {
        self.cos_coeffs.len()
    }

    pub fn radius(&self, theta: T) -> T {
        let mut r = self.a0;
        for (k, (&a, &b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let kt = theta * T::from_usize_(k + 1);
            r = r + a * kt.cos() + b * kt.sin();
        }
        r
    }

    pub fn radius_d1(&self, theta: T) -> T {
        let mut r = T::zero();
        for (k, (&a, &b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let kf = T::from_usize_(k + 1);
            let kt = theta * kf;
            r = r - a * kf * kt.sin() + b * kf * kt.cos();
        }
        r
    }

    pub fn radius_d2(&self, theta: T) -> T {
        let mut r = T::zero();
        for (k, (&a, &b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let kf = T::from_usize_(k + 1);
            let kt = theta * kf;
            r = r - kf * kf * (a * kt.cos() + b * kt.sin());
        }
        r
    }

    /// Boundary point at angle θ.
    pub fn point(&self, theta: T) -> Point<T> {
        let r = self.radius(theta);
        add(self.center, [r * theta.cos(), r * theta.sin()])
    }

    /// True if `p` lies in the closed domain.
    pub fn contains(&self, p: Point<T>) -> bool {
        let d = sub(p, self.center);
        let r = norm(d);
        if r == T::zero() {
            return true;
        }
        let theta = d[1].atan2(d[0]);
        r <= self.radius(theta)
    }

    /// True if `p` lies strictly inside, with relative margin `margin`.
    pub fn contains_strict(&self, p: Point<T>, margin: T) -> bool {
        let d = sub(p, self.center);
        let r = norm(d);
        if r == T::zero() {
            return true;
        }
        let theta = d[1].atan2(d[0]);
        r < self.radius(theta) * (T::one() - margin)
    }

    /// Area and perimeter by composite trapezoid quadrature (spectrally exact
    /// for the band-limited radial function).
    pub fn measures(&self) -> (T, T) {
        let n = (16 * self.modes()).max(2048);
        let dth = T::tau() / T::from_usize_(n);
        let mut area = T::zero();
        let mut per = T::zero();
        for i in 0..n {
            let th = dth * T::from_usize_(i);
            let r = self.radius(th);
            let r1 = self.radius_d1(th);
            area += r * r;
            per += (r * r + r1 * r1).sqrt();
        }
        (area * dth / T::lit(2.0), per * dth)
    }

    pub fn area(&self) -> T {
        self.measures().0
    }

    pub fn perimeter(&self) -> T {
        self.measures().1
    }

    /// Curvature κ(θ) = (ρ² + 2ρ′² − ρρ″)/(ρ² + ρ′²)^{3/2}.
    pub fn curvature(&self, theta: T) -> T {
        let r = self.radius(theta);
        let r1 = self.radius_d1(theta);
        let r2 = self.radius_d2(theta);
        let g = r * r + r1 * r1;
        (g + r1 * r1 - r * r2) / (g * g.sqrt())
    }

    /// Metric factor σ(θ) = √(ρ²+ρ′²)/ρ relating radial speed to normal speed.
    pub fn metric_factor(&self, theta: T) -> T {
        let r = self.radius(theta);
        let r1 = self.radius_d1(theta);
        (r * r + r1 * r1).sqrt() / r
    }

    /// Sampled boundary geometry at `m` equispaced angles.
    pub fn boundary_trace(&self, m: usize) -> Result<BoundaryTrace<T>> {
        if m < 64 {
            return Err(Error::InvalidArgument("boundary trace needs m ≥ 64".into()));
        }
        let dth = T::tau() / T::from_usize_(m);
        let mut trace = BoundaryTrace {
            theta: Vec::with_capacity(m),
            points: Vec::with_capacity(m),
            normals: Vec::with_capacity(m),
            curvature: Vec::with_capacity(m),
            weights: Vec::with_capacity(m),
            support: Vec::with_capacity(m),
        };
        for i in 0..m {
            let th = dth * T::from_usize_(i);
            let r = self.radius(th);
            if r <= T::zero() {
                return Err(Error::DomainDegenerate("non-positive radius".into()));
            }
            let r1 = self.radius_d1(th);
            let r2 = self.radius_d2(th);
            let (c, s) = (th.cos(), th.sin());
            let p = add(self.center, [r * c, r * s]);
            // tangent dx/dθ, outward normal is the tangent rotated by -90°
            let tx = r1 * c - r * s;
            let ty = r1 * s + r * c;
            let speed = (tx * tx + ty * ty).sqrt();
            let nu = [ty / speed, -tx / speed];
            let g = r * r + r1 * r1;
            let kappa = (g + r1 * r1 - r * r2) / (g * g.sqrt());
            trace.theta.push(th);
            trace.points.push(p);
            trace.normals.push(nu);
            trace.curvature.push(kappa);
            trace.weights.push(speed * dth);
            trace.support.push(dot(p, nu));
        }
        Ok(trace)
    }

    /// Points on the boundary at `m` equispaced angles.
    pub fn sample_boundary(&self, m: usize) -> Vec<Point<T>> {
        (0..m)
            .map(|i| self.point(T::tau() * T::from_usize_(i) / T::from_usize_(m)))
            .collect()
    }

    /// Move the boundary by `t` times the deformation field.
    pub fn deform(&self, field: &DeformationField<T>, t: T) -> Result<Self> {
        let m = self.modes().max(field.cos.len());
        let mut cos_coeffs = self.cos_coeffs.clone();
        let mut sin_coeffs = self.sin_coeffs.clone();
        cos_coeffs.resize(m, T::zero());
        sin_coeffs.resize(m, T::zero());
        let a0 = self.a0 + t * field.mean;
        for k in 0..field.cos.len() {
            cos_coeffs[k] += t * field.cos[k];
            sin_coeffs[k] += t * field.sin[k];
        }
        Self::with_rho_min(self.center, a0, cos_coeffs, sin_coeffs, self.rho_min).map_err(|e| {
            Error::StepTooLarge(format!("deformed domain invalid: {e}"))
        })
    }

    /// Dilation about the domain center.
    pub fn dilate(&self, factor: T) -> Result<Self> {
        Self::with_rho_min(
            self.center,
            self.a0 * factor,
            self.cos_coeffs.iter().map(|&c| c * factor).collect(),
            self.sin_coeffs.iter().map(|&c| c * factor).collect(),
            self.rho_min * factor,
        )
    }
}

/// Sampled boundary data: points, outward normals, curvature, arclength
/// weights, and support values x·ν (x in absolute coordinates).
#[derive(Debug, Clone)]
pub struct BoundaryTrace<T> {
    pub theta: Vec<T>,
    pub points: Vec<Point<T>>,
    pub normals: Vec<Point<T>>,
    pub curvature: Vec<T>,
    pub weights: Vec<T>,
    pub support: Vec<T>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// ∮ g dσ for nodal values `g` aligned with the trace samples.
    pub fn integrate(&self, g: &[T]) -> T {
        self.weights.iter().zip(g).map(|(&w, &v)| w * v).sum()
    }
}

/// Boundary deformation stored as radial-speed Fourier amplitudes:
/// ρ_t(θ) = ρ(θ) + t·g(θ). The normal speed it induces is
/// V·ν = g(θ)·ρ/√(ρ²+ρ′²), evaluated pointwise so analytic and
/// finite-difference shape derivatives see exactly the same perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationField<T> {
    pub mean: T,
    pub cos: Vec<T>,
    pub sin: Vec<T>,
}

impl<T: Real> DeformationField<T> {
    pub fn zero(modes: usize) -> Self {
        Self { mean: T::zero(), cos: vec![T::zero(); modes], sin: vec![T::zero(); modes] }
    }

    pub fn from_radial_modes(mean: T, cos: Vec<T>, sin: Vec<T>) -> Self {
        Self { mean, cos, sin }
    }

    /// Basis field index i of the 2M+1 radial mode basis:
    /// 0 → constant, 2k-1 → cos kθ, 2k → sin kθ.
    pub fn basis(index: usize, modes: usize) -> Self {
        let mut f = Self::zero(modes);
        if index == 0 {
            f.mean = T::one();
        } else {
            let k = (index + 1) / 2 - 1;
            if index % 2 == 1 {
                f.cos[k] = T::one();
            } else {
                f.sin[k] = T::one();
            }
        }
        f
    }

    pub fn basis_len(modes: usize) -> usize {
        2 * modes + 1
    }

    /// Field whose normal speed on `domain` approximates the sampled values
    /// `vn` at angles `theta` (radial speed g = V·ν·σ projected onto the
    /// truncated Fourier basis).
    pub fn from_normal_speed_samples(
        domain: &StarDomain<T>,
        theta: &[T],
        vn: &[T],
        modes: usize,
    ) -> Self {
        assert_eq!(theta.len(), vn.len());
        let g: Vec<T> = theta
            .iter()
            .zip(vn)
            .map(|(&th, &v)| v * domain.metric_factor(th))
            .collect();
        project_modes(theta, &g, modes)
    }

    /// Field with constant normal speed `v` on `domain`.
    pub fn uniform_normal(domain: &StarDomain<T>, v: T, modes: usize) -> Self {
        let n = (16 * modes).max(1024);
        let theta: Vec<T> =
            (0..n).map(|i| T::tau() * T::from_usize_(i) / T::from_usize_(n)).collect();
        let vn = vec![v; n];
        Self::from_normal_speed_samples(domain, &theta, &vn, modes)
    }

    /// Radial speed g(θ).
    pub fn radial_speed(&self, theta: T) -> T {
        let mut v = self.mean;
        for (k, (&a, &b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kt = theta * T::from_usize_(k + 1);
            v = v + a * kt.cos() + b * kt.sin();
        }
        v
    }

    /// Normal speed V·ν at the boundary point of `domain` at angle θ.
    pub fn normal_speed(&self, domain: &StarDomain<T>, theta: T) -> T {
        self.radial_speed(theta) / domain.metric_factor(theta)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            mean: self.mean * s,
            cos: self.cos.iter().map(|&c| c * s).collect(),
            sin: self.sin.iter().map(|&c| c * s).collect(),
        }
    }
}

/// Project samples (θ_i, g_i) with quadrature weights from the θ spacing onto
/// the first `modes` Fourier modes.
pub fn project_modes<T: Real>(theta: &[T], g: &[T], modes: usize) -> DeformationField<T> {
    let n = theta.len();
    // spacing weights for possibly non-uniform angles (midpoint rule on the circle)
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| theta[a].partial_cmp(&theta[b]).unwrap());
    let mut w = vec![T::zero(); n];
    for j in 0..n {
        let prev = theta[idx[(j + n - 1) % n]];
        let next = theta[idx[(j + 1) % n]];
        let mut gap = next - prev;
        if gap <= T::zero() {
            gap += T::tau();
        }
        w[idx[j]] = gap / T::lit(2.0);
    }
    let total: T = w.iter().copied().sum();
    let mut mean = T::zero();
    for i in 0..n {
        mean += g[i] * w[i];
    }
    mean = mean / total;
    let mut cos = vec![T::zero(); modes];
    let mut sin = vec![T::zero(); modes];
    for k in 1..=modes {
        let kf = T::from_usize_(k);
        let mut ac = T::zero();
        let mut as_ = T::zero();
        for i in 0..n {
            let kt = theta[i] * kf;
            ac += g[i] * kt.cos() * w[i];
            as_ += g[i] * kt.sin() * w[i];
        }
        cos[k - 1] = ac * T::lit(2.0) / total;
        sin[k - 1] = as_ * T::lit(2.0) / total;
    }
    DeformationField { mean, cos, sin }
}

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody<T> {
    vertices: Vec<Point<T>>,
    pub thin_eps: Option<T>,
}

impl<T: Real> ConvexBody<T> {
    pub fn new(mut vertices: Vec<Point<T>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument("convex body needs ≥ 3 vertices".into()));
        }
        let signed = shoelace(&vertices);
        if signed < T::zero() {
            vertices.reverse();
        }
        let n = vertices.len();
        let diam = polygon_diameter(&vertices);
        let tol = -T::lit(1e-12) * diam * diam;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(sub(b, a), sub(c, b)) < tol {
                return Err(Error::InvalidArgument("polygon is not convex".into()));
            }
        }
        Ok(Self { vertices, thin_eps: None })
    }

    pub fn rectangle(center: Point<T>, half_w: T, half_h: T) -> Result<Self> {
        let (cx, cy) = (center[0], center[1]);
        Self::new(vec![
            [cx - half_w, cy - half_h],
            [cx + half_w, cy - half_h],
            [cx + half_w, cy + half_h],
            [cx - half_w, cy + half_h],
        ])
    }

    /// Thin rectangle of length `2·half_len` and width `eps` approximating a
    /// segment; records the width for δ-source bookkeeping.
    pub fn thin_rectangle(center: Point<T>, half_len: T, eps: T) -> Result<Self> {
        let mut body = Self::rectangle(center, half_len, eps / T::lit(2.0))?;
        body.thin_eps = Some(eps);
        Ok(body)
    }

    pub fn regular_ngon(center: Point<T>, radius: T, n: usize) -> Result<Self> {
        let verts = (0..n)
            .map(|i| {
                let th = T::tau() * T::from_usize_(i) / T::from_usize_(n);
                add(center, [radius * th.cos(), radius * th.sin()])
            })
            .collect();
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn area(&self) -> T {
        shoelace(&self.vertices)
    }

    pub fn perimeter(&self) -> T {
        let n = self.vertices.len();
        (0..n).map(|i| dist(self.vertices[i], self.vertices[(i + 1) % n])).sum()
    }

    pub fn centroid(&self) -> Point<T> {
        let n = self.vertices.len();
        let mut cx = T::zero();
        let mut cy = T::zero();
        let mut a = T::zero();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let c = cross(p, q);
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
            a += c;
        }
        let s = T::lit(3.0) * a;
        [cx / s, cy / s]
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            cross(sub(b, a), sub(p, a)) >= T::zero()
        })
    }

    /// Distance from the centroid to the boundary along direction θ.
    pub fn radial_support(&self, center: Point<T>, theta: T) -> T {
        let dir = [theta.cos(), theta.sin()];
        let n = self.vertices.len();
        let mut best = T::infinity();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            // edge line: points x with (x-a)·n_e = 0, inward side positive
            let e = sub(b, a);
            let ne = [e[1], -e[0]]; // outward for ccw
            let denom = dot(dir, ne);
            if denom > T::zero() {
                let t = dot(sub(a, center), ne) / denom;
                if t > T::zero() && t < best {
                    best = t;
                }
            }
        }
        best
    }

    /// Evenly distributed boundary samples (by arclength).
    pub fn sample_boundary(&self, n: usize) -> Vec<Point<T>> {
        let per = self.perimeter();
        let step = per / T::from_usize_(n);
        let m = self.vertices.len();
        let mut out = Vec::with_capacity(n + m);
        for i in 0..m {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % m];
            let len = dist(a, b);
            let cnt = (len / step).ceil().as_f64() as usize;
            let cnt = cnt.max(1);
            for j in 0..cnt {
                let t = T::from_usize_(j) / T::from_usize_(cnt);
                out.push(add(a, scale(sub(b, a), t)));
            }
        }
        out
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| scale(v, factor)).collect(),
            thin_eps: self.thin_eps.map(|e| e * factor),
        }
    }
}

fn shoelace<T: Real>(verts: &[Point<T>]) -> T {
    let n = verts.len();
    let mut a = T::zero();
    for i in 0..n {
        a += cross(verts[i], verts[(i + 1) % n]);
    }
    a / T::lit(2.0)
}

fn polygon_diameter<T: Real>(verts: &[Point<T>]) -> T {
    let mut d = T::zero();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            d = d.max(dist(verts[i], verts[j]));
        }
    }
    d
}

/// Closed cone at apex `x`: {y : (y−x)·(z−x) ≤ 0 for every vertex z of C}.
#[derive(Debug, Clone)]
pub struct NormalCone<T> {
    apex: Point<T>,
    dirs: Vec<Point<T>>,
}

impl<T: Real> NormalCone<T> {
    pub fn new(apex: Point<T>, body: &ConvexBody<T>) -> Self {
        let dirs = body.vertices().iter().map(|&z| sub(z, apex)).collect();
        Self { apex, dirs }
    }

    pub fn apex(&self) -> Point<T> {
        self.apex
    }

    pub fn contains(&self, y: Point<T>) -> bool {
        let d = sub(y, self.apex);
        self.dirs.iter().all(|&z| dot(d, z) <= T::zero())
    }
}

/// Hausdorff distance between two point-sampled compact sets.
pub fn hausdorff_distance<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

fn directed_hausdorff<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> T {
    let mut worst = T::zero();
    for &p in a {
        let mut best = T::infinity();
        for &q in b {
            let d = dist(p, q);
            if d < best {
                best = d;
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

/// Outcome of the C-GNP test, carrying the certified sampling pitch.
#[derive(Debug, Clone, PartialEq)]
pub enum CgnpVerdict<T> {
    Holds { pitch: T },
    Fails { witness: Point<T>, pitch: T },
    NotContainingC,
}

impl<T> CgnpVerdict<T> {
    pub fn holds(&self) -> bool {
        matches!(self, CgnpVerdict::Holds { .. })
    }
}

/// C-GNP via the normal-cone separation test: for each boundary sample
/// x ∉ C the cone K_x must miss the (sampled) open domain.
pub fn has_c_gnp<T: Real>(domain: &StarDomain<T>, body: &ConvexBody<T>) -> CgnpVerdict<T> {
    // int(C) ⊂ ω
    for p in body.sample_boundary(256) {
        if !domain.contains(p) {
            return CgnpVerdict::NotContainingC;
        }
    }
    let per = domain.perimeter();
    let nb = 512usize;
    let pitch = per / T::from_usize_(nb);
    let bdry = domain.sample_boundary(nb);

    // candidate points of ω: interior grid plus slightly inset boundary samples
    let mut lo = [T::infinity(); 2];
    let mut hi = [T::neg_infinity(); 2];
    for &p in &bdry {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let grid = 64usize;
    let margin = T::lit(1e-3);
    let mut candidates: Vec<Point<T>> = Vec::with_capacity(grid * grid + nb);
    for i in 0..grid {
        for j in 0..grid {
            let fx = (T::from_usize_(i) + T::lit(0.5)) / T::from_usize_(grid);
            let fy = (T::from_usize_(j) + T::lit(0.5)) / T::from_usize_(grid);
            let p = [lo[0] + (hi[0] - lo[0]) * fx, lo[1] + (hi[1] - lo[1]) * fy];
            if domain.contains_strict(p, margin) {
                candidates.push(p);
            }
        }
    }
    let c = domain.center();
    for &p in &bdry {
        let inset = add(c, scale(sub(p, c), T::one() - margin));
        candidates.push(inset);
    }

    for &x in &bdry {
        if body.contains(x) {
            continue;
        }
        let cone = NormalCone::new(x, body);
        for &y in &candidates {
            if cone.contains(y) {
                return CgnpVerdict::Fails { witness: x, pitch };
            }
        }
    }
    CgnpVerdict::Holds { pitch }
}

/// Largest t ≤ t_max for which the deformed domain still satisfies C-GNP,
/// located by bisection to pitch 10⁻³·t_max.
pub fn cgnp_deformation_stability<T: Real>(
    domain: &StarDomain<T>,
    body: &ConvexBody<T>,
    field: &DeformationField<T>,
    t_max: T,
) -> Result<T> {
    if !has_c_gnp(domain, body).holds() {
        return Err(Error::Precondition("initial domain does not satisfy C-GNP".into()));
    }
    if t_max <= T::zero() {
        return Ok(T::zero());
    }
    let ok = |t: T| -> bool {
        match domain.deform(field, t) {
            Ok(d) => has_c_gnp(&d, body).holds(),
            Err(_) => false,
        }
    };
    if ok(t_max) {
        return Ok(t_max);
    }
    let mut lo = T::zero();
    let mut hi = t_max;
    let pitch = t_max * T::lit(1e-3);
    while hi - lo > pitch {
        let mid = (lo + hi) / T::lit(2.0);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Best-fit circle (boundary centroid center, mean-distance radius) and the
/// Hausdorff distance of the sampled boundary to it.
pub fn distance_to_best_fit_circle<T: Real>(domain: &StarDomain<T>, m: usize) -> (T, T) {
    let trace = domain.boundary_trace(m.max(64)).expect("trace");
    let per = trace.perimeter();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for (p, &w) in trace.points.iter().zip(&trace.weights) {
        cx += p[0] * w;
        cy += p[1] * w;
    }
    let center = [cx / per, cy / per];
    let mut radius = T::zero();
    for (p, &w) in trace.points.iter().zip(&trace.weights) {
        radius += dist(*p, center) * w;
    }
    radius = radius / per;
    let mut worst = T::zero();
    for p in &trace.points {
        let d = (dist(*p, center) - radius).abs();
        if d > worst {
            worst = d;
        }
    }
    (radius, worst)
}
