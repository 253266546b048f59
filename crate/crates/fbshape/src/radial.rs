//! Closed-form ball solutions of the chained Dirichlet problems for any
//! dimension N ≥ 2, used as ground truth by the test suite and the CLI.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct BallSpec<T> {
    pub dim: u32,
    pub radius: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity<T> {
    U,
    V,
    W,
    Z,
    GradUBdry,
    GradVBdry,
    GradWBdry,
    GradZBdry,
    IntU,
    IntU2,
    IntGradU2,
    J4,
    Jp(T),
    SerrinRadius(T),
    PRadius(T),
}

impl<T: Real> BallSpec<T> {
    pub fn new(dim: u32, radius: T) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("dimension must be at least 2".into()));
        }
        if !(radius > T::zero()) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        Ok(Self { dim, radius })
    }

    fn n(&self) -> T {
        T::from_usize_(self.dim as usize)
    }

    /// u(r) = (R² − r²)/(2N), solving −Δu = 1.
    pub fn u(&self, r: T) -> T {
        let n = self.n();
        let rr = self.radius;
        (rr * rr - r * r) / (T::lit(2.0) * n)
    }

    /// v(r) solving −Δv = u, v(R) = 0.
    pub fn v(&self, r: T) -> T {
        let n = self.n();
        let rr = self.radius;
        let r2 = rr * rr;
        let four = T::lit(4.0);
        let eight = T::lit(8.0);
        r2 * (r2 - r * r) / (four * n * n)
            - (r2 * r2 - r * r * r * r) / (eight * n * (n + T::lit(2.0)))
    }

    /// w(r) solving −Δw = v, w(R) = 0.
    pub fn w(&self, r: T) -> T {
        let n = self.n();
        let rr = self.radius;
        let r2 = rr * rr;
        let r4 = r2 * r2;
        let s2 = r * r;
        let s4 = s2 * s2;
        let n2 = n + T::lit(2.0);
        let n4 = n + T::lit(4.0);
        r4 * (r2 - s2) / (T::lit(8.0) * n * n * n)
            - r2 * (r4 - s4) / (T::lit(16.0) * n * n * n2)
            - r4 * (r2 - s2) / (T::lit(16.0) * n * n * n2)
            + (r2 * r4 - s2 * s4) / (T::lit(48.0) * n * n2 * n4)
    }

    /// z(r) solving −Δz = ½u², z(R) = 0.
    pub fn z(&self, r: T) -> T {
        let n = self.n();
        let rr = self.radius;
        let r2 = rr * rr;
        let r4 = r2 * r2;
        let s2 = r * r;
        let s4 = s2 * s2;
        let n2 = n + T::lit(2.0);
        let n4 = n + T::lit(4.0);
        r4 * (r2 - s2) / (T::lit(16.0) * n * n * n)
            - r2 * (r4 - s4) / (T::lit(16.0) * n * n * n2)
            + (r2 * r4 - s2 * s4) / (T::lit(48.0) * n * n * n4)
    }

    /// |∇u|(R) = R/N.
    pub fn grad_u_bdry(&self) -> T {
        self.radius / self.n()
    }

    /// |∇v|(R) = R³/(N²(N+2)).
    pub fn grad_v_bdry(&self) -> T {
        let n = self.n();
        let rr = self.radius;
        rr * rr * rr / (n * n * (n + T::lit(2.0)))
    }

    /// |∇w|(R) = 2R⁵/(N³(N+2)(N+4)).
    pub fn grad_w_bdry(&self) -> T {
        let n = self.n();
        let rr = self.radius;
        let r5 = rr * rr * rr * rr * rr;
        T::lit(2.0) * r5 / (n * n * n * (n + T::lit(2.0)) * (n + T::lit(4.0)))
    }

    /// |∇z|(R) = R⁵/(N³(N+2)(N+4)).
    pub fn grad_z_bdry(&self) -> T {
        self.grad_w_bdry() / T::lit(2.0)
    }

    fn require_planar(&self) -> Result<()> {
        if self.dim == 2 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "closed-form volume integrals are provided for N = 2 only".into(),
            ))
        }
    }

    /// ∫u = πR⁴/8 (N = 2).
    pub fn int_u(&self) -> Result<T> {
        self.require_planar()?;
        let r = self.radius;
        Ok(T::pi() * r.powi(4) / T::lit(8.0))
    }

    /// ∫u² = πR⁶/48 (N = 2).
    pub fn int_u2(&self) -> Result<T> {
        self.require_planar()?;
        let r = self.radius;
        Ok(T::pi() * r.powi(6) / T::lit(48.0))
    }

    /// ∫|∇u|² = πR⁴/8 (N = 2).
    pub fn int_grad_u2(&self) -> Result<T> {
        self.require_planar()?;
        self.int_u()
    }

    /// J4 = N∮|∇u|³ − (N+2)∫|∇u|², identically zero on balls.
    pub fn j4(&self) -> T {
        T::zero()
    }

    /// J_P(c) = c|B_R| − ½∫u² (N = 2).
    pub fn jp(&self, c: T) -> Result<T> {
        self.require_planar()?;
        let r = self.radius;
        Ok(c * T::pi() * r * r - T::pi() * r.powi(6) / T::lit(96.0))
    }

    /// Radius at which |∇u| = k on the boundary: R = Nk.
    pub fn serrin_radius(dim: u32, k: T) -> T {
        T::from_usize_(dim as usize) * k
    }

    /// Radius at which |∇u||∇v| = c on the boundary: R⁴ = cN³(N+2).
    pub fn p_radius(dim: u32, c: T) -> T {
        let n = T::from_usize_(dim as usize);
        (c * n * n * n * (n + T::lit(2.0))).powf(T::lit(0.25))
    }
}

pub fn oracle<T: Real>(spec: BallSpec<T>, quantity: Quantity<T>, r: Option<T>) -> Result<T> {
    let at = |f: &dyn Fn(T) -> T| -> Result<T> {
        let r = r.unwrap_or(spec.radius);
        if r > spec.radius || r < T::zero() {
            return Err(Error::InvalidArgument("sample radius outside [0, R]".into()));
        }
        Ok(f(r))
    };
    match quantity {
        Quantity::U => at(&|r| spec.u(r)),
        Quantity::V => at(&|r| spec.v(r)),
        Quantity::W => at(&|r| spec.w(r)),
        Quantity::Z => at(&|r| spec.z(r)),
        Quantity::GradUBdry => Ok(spec.grad_u_bdry()),
        Quantity::GradVBdry => Ok(spec.grad_v_bdry()),
        Quantity::GradWBdry => Ok(spec.grad_w_bdry()),
        Quantity::GradZBdry => Ok(spec.grad_z_bdry()),
        Quantity::IntU => spec.int_u(),
        Quantity::IntU2 => spec.int_u2(),
        Quantity::IntGradU2 => spec.int_grad_u2(),
        Quantity::J4 => Ok(spec.j4()),
        Quantity::Jp(c) => spec.jp(c),
        Quantity::SerrinRadius(k) => Ok(BallSpec::<T>::serrin_radius(spec.dim, k)),
        Quantity::PRadius(c) => Ok(BallSpec::<T>::p_radius(spec.dim, c)),
    }
}

/// Parse a quantity name as used by the CLI; parameterized quantities take
/// the form "jp:0.03125", "serrin_radius:0.5", "p_radius:0.03125".
pub fn parse_quantity<T: Real>(s: &str) -> Result<Quantity<T>> {
    let (name, param) = match s.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (s, None),
    };
    let need = |p: Option<&str>| -> Result<T> {
        let p = p.ok_or_else(|| {
            Error::InvalidArgument(format!("quantity {name} needs a parameter, e.g. {name}:0.5"))
        })?;
        p.parse::<f64>()
            .map(T::lit)
            .map_err(|_| Error::InvalidArgument(format!("bad parameter in quantity: {p}")))
    };
    Ok(match name {
        "u" => Quantity::U,
        "v" => Quantity::V,
        "w" => Quantity::W,
        "z" => Quantity::Z,
        "grad_u_bdry" => Quantity::GradUBdry,
        "grad_v_bdry" => Quantity::GradVBdry,
        "grad_w_bdry" => Quantity::GradWBdry,
        "grad_z_bdry" => Quantity::GradZBdry,
        "int_u" => Quantity::IntU,
        "int_u2" => Quantity::IntU2,
        "int_grad_u2" => Quantity::IntGradU2,
        "j4" => Quantity::J4,
        "jp" => Quantity::Jp(need(param)?),
        "serrin_radius" => Quantity::SerrinRadius(need(param)?),
        "p_radius" => Quantity::PRadius(need(param)?),
        _ => return Err(Error::InvalidArgument(format!("unknown quantity: {s}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u32, r: f64) -> BallSpec<f64> {
        BallSpec::new(n, r).unwrap()
    }

    // radial Laplacian by central differences
    fn laplacian(f: &dyn Fn(f64) -> f64, n: f64, r: f64) -> f64 {
        let h = 1e-5;
        let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
        d2 + (n - 1.0) / r * d1
    }

    #[test]
    fn stored_polynomials_solve_their_stage_sources() {
        for &dim in &[2u32, 3, 5] {
            for &rr in &[1.0f64, 1.7] {
                let b = spec(dim, rr);
                let n = dim as f64;
                for i in 1..100 {
                    let r = rr * i as f64 / 100.0;
                    assert!((laplacian(&|r| b.u(r), n, r) + 1.0).abs() < 1e-5);
                    assert!((laplacian(&|r| b.v(r), n, r) + b.u(r)).abs() < 1e-5);
                    assert!((laplacian(&|r| b.w(r), n, r) + b.v(r)).abs() < 1e-5);
                    let src = b.u(r) * b.u(r) / 2.0;
                    assert!((laplacian(&|r| b.z(r), n, r) + src).abs() < 1e-5);
                }
                // boundary values vanish
                assert!(b.u(rr).abs() < 1e-14);
                assert!(b.v(rr).abs() < 1e-14);
                assert!(b.w(rr).abs() < 1e-14);
                assert!(b.z(rr).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_fluxes_match_radial_quadrature() {
        // −q′(R) = R^{1−N} ∫₀^R s^{N−1}·source ds, Simpson with 4000 panels
        for &dim in &[2u32, 3, 4] {
            for &rr in &[1.0f64, 1.3] {
                let b = spec(dim, rr);
                let n = dim as f64;
                let quad = |src: &dyn Fn(f64) -> f64| -> f64 {
                    let m = 4000;
                    let h = rr / m as f64;
                    let g = |s: f64| s.powf(n - 1.0) * src(s);
                    let mut acc = g(0.0) + g(rr);
                    for i in 1..m {
                        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                        acc += w * g(i as f64 * h);
                    }
                    acc * h / 3.0 * rr.powf(1.0 - n)
                };
                assert!((quad(&|_| 1.0) - b.grad_u_bdry()).abs() < 1e-10);
                assert!((quad(&|s| b.u(s)) - b.grad_v_bdry()).abs() < 1e-10);
                assert!((quad(&|s| b.v(s)) - b.grad_w_bdry()).abs() < 1e-10);
                assert!((quad(&|s| b.u(s) * b.u(s) / 2.0) - b.grad_z_bdry()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn paper_values_unit_disk() {
        let b = spec(2, 1.0);
        assert_eq!(b.grad_u_bdry(), 0.5);
        assert_eq!(b.grad_v_bdry(), 0.0625);
        assert!((b.grad_w_bdry() - 1.0 / 96.0).abs() < 1e-16);
        assert!((b.grad_z_bdry() - 1.0 / 192.0).abs() < 1e-16);
        assert!((b.v(0.0) - 3.0 / 64.0).abs() < 1e-16);
        assert_eq!(spec(3, 1.0).grad_u_bdry(), 1.0 / 3.0);
    }

    #[test]
    fn oc_identity_all_dimensions() {
        for &dim in &[2u32, 3, 7] {
            for &rr in &[0.5f64, 1.0, 2.0] {
                let b = spec(dim, rr);
                let n = dim as f64;
                let lhs = b.grad_v_bdry();
                let rhs = n / (n + 2.0) * b.grad_u_bdry().powi(3);
                assert!((lhs - rhs).abs() < 1e-14 * lhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn radius_inversions_roundtrip() {
        let b = spec(2, 1.0);
        let k = b.grad_u_bdry();
        assert!((BallSpec::<f64>::serrin_radius(2, k) - 1.0).abs() < 1e-14);
        let c = b.grad_u_bdry() * b.grad_v_bdry();
        assert!((c - 1.0 / 32.0).abs() < 1e-16);
        assert!((BallSpec::<f64>::p_radius(2, c) - 1.0).abs() < 1e-14);
        assert!((BallSpec::<f64>::p_radius(2, 1.0 / 32.0) - (32.0f64 / 32.0).powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn planar_integrals_and_jp() {
        let b = spec(2, 1.0);
        let pi = std::f64::consts::PI;
        assert!((b.int_u().unwrap() - pi / 8.0).abs() < 1e-14);
        assert!((b.int_u2().unwrap() - pi / 48.0).abs() < 1e-14);
        assert!((b.int_grad_u2().unwrap() - pi / 8.0).abs() < 1e-14);
        assert!((b.jp(1.0 / 32.0).unwrap() - pi / 48.0).abs() < 1e-14);
        assert!(spec(3, 1.0).int_u().is_err());
    }

    #[test]
    fn quantity_parsing() {
        assert_eq!(parse_quantity::<f64>("u").unwrap(), Quantity::U);
        assert_eq!(parse_quantity::<f64>("jp:0.03125").unwrap(), Quantity::Jp(0.03125));
        assert!(parse_quantity::<f64>("jp").is_err());
        assert!(parse_quantity::<f64>("nonsense").is_err());
    }
}
