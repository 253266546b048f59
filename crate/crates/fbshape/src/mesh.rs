//! Deterministic fan-plus-rings triangulation of star-shaped regions
//! (smooth radial graphs and convex polygons) with Laplacian smoothing.

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, StarDomain};
use crate::scalar::{add, cross, dist, norm, sub, Point, Real};

pub const MIN_ANGLE_DEG: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct BoundaryEdge<T> {
    pub a: usize,
    pub b: usize,
    pub length: T,
    pub normal: Point<T>,
    pub midpoint: Point<T>,
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub nodes: Vec<Point<T>>,
    pub tris: Vec<[usize; 3]>,
    pub is_boundary: Vec<bool>,
    /// Boundary node indices in counterclockwise order.
    pub boundary_loop: Vec<usize>,
    pub boundary_edges: Vec<BoundaryEdge<T>>,
    pub h: T,
}

/// Ring/angle resolution, derived once from an undeformed domain so that
/// nearby domains get topologically identical meshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshParams {
    pub n_rings: usize,
    pub n_outer: usize,
}

impl MeshParams {
    pub fn for_domain<T: Real>(domain: &StarDomain<T>, h: T) -> Result<Self> {
        if h > domain.mean_radius() / T::lit(4.0) {
            return Err(Error::MeshingFailure(format!(
                "target edge length {h} exceeds a0/4"
            )));
        }
        let per = domain.perimeter();
        Ok(Self::from_scales(domain.mean_radius(), per, h))
    }

    pub fn for_polygon<T: Real>(body: &ConvexBody<T>, h: T) -> Self {
        let center = body.centroid();
        let n = 256;
        let mut mean_r = T::zero();
        for i in 0..n {
            let th = T::tau() * T::from_usize_(i) / T::from_usize_(n as usize);
            mean_r += body.radial_support(center, th);
        }
        mean_r = mean_r / T::from_usize_(n as usize);
        Self::from_scales(mean_r, body.perimeter(), h)
    }

    fn from_scales<T: Real>(radius: T, perimeter: T, h: T) -> Self {
        let n_rings = ((radius / h).round().as_f64() as usize).max(2);
        let n_outer = ((perimeter / h).ceil().as_f64() as usize).max(16);
        Self { n_rings, n_outer }
    }
}

pub fn triangulate<T: Real>(domain: &StarDomain<T>, h: T) -> Result<Mesh<T>> {
    let params = MeshParams::for_domain(domain, h)?;
    triangulate_with(domain, params)
}

pub fn triangulate_with<T: Real>(domain: &StarDomain<T>, params: MeshParams) -> Result<Mesh<T>> {
    triangulate_radial(domain.center(), |th| domain.radius(th), params, true)
}

pub fn triangulate_polygon<T: Real>(body: &ConvexBody<T>, h: T) -> Result<Mesh<T>> {
    let params = MeshParams::for_polygon(body, h);
    let center = body.centroid();
    // no smoothing: Laplacian relaxation drags nodes away from polygon corners
    // and thins the corner triangles, while the raw rings stay shape-regular
    triangulate_radial(center, |th| body.radial_support(center, th), params, false)
}

/// Triangulate {center + t·ρ(θ)·e(θ) : t ∈ [0,1]}.
pub fn triangulate_radial<T: Real>(
    center: Point<T>,
    rho: impl Fn(T) -> T,
    params: MeshParams,
    smooth_interior: bool,
) -> Result<Mesh<T>> {
    let n_r = params.n_rings;
    let n_outer = params.n_outer;

    let mut nodes: Vec<Point<T>> = vec![center];
    let mut ring_start: Vec<usize> = Vec::with_capacity(n_r + 1);
    let mut ring_count: Vec<usize> = Vec::with_capacity(n_r + 1);
    let mut ring_offset: Vec<T> = Vec::with_capacity(n_r + 1);
    for j in 1..=n_r {
        let m_j = if j == n_r {
            n_outer
        } else {
            ((n_outer * j + n_r / 2) / n_r).max(8)
        };
        // half-step stagger on alternate rings; symmetric under θ → −θ
        let offs = if j % 2 == 1 { T::lit(0.5) } else { T::zero() };
        ring_start.push(nodes.len());
        ring_count.push(m_j);
        ring_offset.push(offs);
        let frac = T::from_usize_(j) / T::from_usize_(n_r);
        for i in 0..m_j {
            let th = T::tau() * (T::from_usize_(i) + offs) / T::from_usize_(m_j);
            let r = rho(th) * frac;
            if !(r > T::zero()) && j > 0 {
                return Err(Error::DomainDegenerate("non-positive radius while meshing".into()));
            }
            nodes.push(add(center, [r * th.cos(), r * th.sin()]));
        }
    }

    let mut tris: Vec<[usize; 3]> = Vec::new();
    // center fan
    let m1 = ring_count[0];
    for i in 0..m1 {
        tris.push([0, ring_start[0] + i, ring_start[0] + (i + 1) % m1]);
    }
    // strips between consecutive rings, merged by angle
    for j in 1..n_r {
        let (ps, pc, po) = (ring_start[j - 1], ring_count[j - 1], ring_offset[j - 1]);
        let (qs, qc, qo) = (ring_start[j], ring_count[j], ring_offset[j]);
        let angle = |count: usize, offs: T, i: usize| {
            (T::from_usize_(i) + offs) / T::from_usize_(count)
        };
        let mut i = 0usize;
        let mut k = 0usize;
        while i < pc || k < qc {
            let advance_inner = if i >= pc {
                false
            } else if k >= qc {
                true
            } else {
                angle(pc, po, i + 1) <= angle(qc, qo, k + 1)
            };
            if advance_inner {
                tris.push([ps + i % pc, qs + k % qc, ps + (i + 1) % pc]);
                i += 1;
            } else {
                tris.push([ps + i % pc, qs + k % qc, qs + (k + 1) % qc]);
                k += 1;
            }
        }
    }

    let n_nodes = nodes.len();
    let bstart = ring_start[n_r - 1];
    let bcount = ring_count[n_r - 1];
    let mut is_boundary = vec![false; n_nodes];
    for i in 0..bcount {
        is_boundary[bstart + i] = true;
    }

    if smooth_interior {
        smooth(&mut nodes, &tris, &is_boundary);
    }

    // validate orientation and quality
    let mut min_angle = T::infinity();
    for t in &tris {
        let area = tri_signed_area(&nodes, *t);
        if !(area > T::zero()) {
            return Err(Error::MeshingFailure("non-positive triangle orientation".into()));
        }
        min_angle = min_angle.min(tri_min_angle(&nodes, *t));
    }
    if min_angle.as_f64() < MIN_ANGLE_DEG.to_radians() {
        return Err(Error::MeshingFailure(format!(
            "minimum triangle angle {:.2}° below {MIN_ANGLE_DEG}°",
            min_angle.as_f64().to_degrees()
        )));
    }

    let boundary_loop: Vec<usize> = (0..bcount).map(|i| bstart + i).collect();
    let boundary_edges: Vec<BoundaryEdge<T>> = (0..bcount)
        .map(|i| {
            let a = bstart + i;
            let b = bstart + (i + 1) % bcount;
            let e = sub(nodes[b], nodes[a]);
            let len = norm(e);
            BoundaryEdge {
                a,
                b,
                length: len,
                normal: [e[1] / len, -e[0] / len],
                midpoint: [
                    (nodes[a][0] + nodes[b][0]) / T::lit(2.0),
                    (nodes[a][1] + nodes[b][1]) / T::lit(2.0),
                ],
            }
        })
        .collect();

    // record the realized resolution rather than the requested target
    let h = boundary_edges
        .iter()
        .map(|e| e.length)
        .fold(T::zero(), |a, b| a.max(b));
    Ok(Mesh { nodes, tris, is_boundary, boundary_loop, boundary_edges, h })
}

fn smooth<T: Real>(nodes: &mut [Point<T>], tris: &[[usize; 3]], is_boundary: &[bool]) {
    let n = nodes.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in tris {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
            }
            if !neighbors[b].contains(&a) {
                neighbors[b].push(a);
            }
        }
    }
    for _ in 0..50 {
        let mut moved = T::zero();
        let snapshot: Vec<Point<T>> = nodes.to_vec();
        for i in 0..n {
            if is_boundary[i] || neighbors[i].is_empty() {
                continue;
            }
            let mut cx = T::zero();
            let mut cy = T::zero();
            for &j in &neighbors[i] {
                cx += snapshot[j][0];
                cy += snapshot[j][1];
            }
            let inv = T::one() / T::from_usize_(neighbors[i].len());
            let target = [cx * inv, cy * inv];
            moved = moved.max(dist(nodes[i], target));
            nodes[i] = target;
        }
        if moved < T::lit(1e-12) {
            break;
        }
    }
}

pub fn tri_signed_area<T: Real>(nodes: &[Point<T>], t: [usize; 3]) -> T {
    let a = nodes[t[0]];
    let b = nodes[t[1]];
    let c = nodes[t[2]];
    cross(sub(b, a), sub(c, a)) / T::lit(2.0)
}

fn tri_min_angle<T: Real>(nodes: &[Point<T>], t: [usize; 3]) -> T {
    let mut worst = T::infinity();
    for i in 0..3 {
        let a = nodes[t[i]];
        let b = nodes[t[(i + 1) % 3]];
        let c = nodes[t[(i + 2) % 3]];
        let u = sub(b, a);
        let v = sub(c, a);
        let ang = cross(u, v).abs().atan2(crate::scalar::dot(u, v));
        worst = worst.min(ang);
    }
    worst
}

impl<T: Real> Mesh<T> {
    pub fn area(&self) -> T {
        self.tris.iter().map(|&t| tri_signed_area(&self.nodes, t)).sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.tris
            .iter()
            .map(|&t| tri_min_angle(&self.nodes, t).as_f64())
            .fold(f64::INFINITY, f64::min)
            .to_degrees()
    }

    /// Lumped boundary measure per boundary node (half the two adjacent
    /// edge lengths); zero for interior nodes.
    pub fn boundary_node_weights(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.nodes.len()];
        for e in &self.boundary_edges {
            let half = e.length / T::lit(2.0);
            w[e.a] += half;
            w[e.b] += half;
        }
        w
    }
}
