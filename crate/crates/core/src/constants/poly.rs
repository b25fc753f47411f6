use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::constrained_generalized_eigenvalues;
use crate::quadrature::{integrate_segment, TriangleRule};
use crate::trimesh::{Point2, TriangleShape};

/// Degrees above this make the monomial Gram matrices numerically singular.
pub const MAX_POLY_DEGREE: usize = 10;

/// Which quotient is maximized over `V^4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Quotient {
    /// `|v|_1 / |v|_2`
    Gradient,
    /// `||v|| / |v|_2`
    Value,
}

/// Value, gradient and Hessian `(xx, xy, yy)` of one basis polynomial.
struct Jet {
    v: f64,
    g: Point2,
    h: [f64; 3],
}

/// Monomials `xi^i eta^j` in the affine coordinates of the triangle,
/// centred at the centroid. Affine coordinates keep the Gram matrices
/// well scaled for thin triangles.
struct Basis {
    exps: Vec<(usize, usize)>,
    origin: Point2,
    // rows of J^{-1}: d(xi)/dx and d(eta)/dx
    dxi: Point2,
    deta: Point2,
}

impl Basis {
    fn new(shape: &TriangleShape, degree: usize) -> Self {
        let [o, a, b] = shape.vertices();
        let (ea, eb) = (a - o, b - o);
        let det = ea.cross(eb);
        let exps = (0..=degree).flat_map(|d| (0..=d).map(move |j| (d - j, j))).collect();
        Self {
            exps,
            origin: o + (ea + eb) * (1.0 / 3.0),
            dxi: Point2::new(eb.x2, -eb.x1) * (1.0 / det),
            deta: Point2::new(-ea.x2, ea.x1) * (1.0 / det),
        }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }

    fn jets(&self, x: Point2) -> Vec<Jet> {
        let d = x - self.origin;
        let (xi, eta) = (self.dxi.dot(d), self.deta.dot(d));
        let pw = |base: f64, k: usize, drop: usize| -> f64 {
            if drop > k {
                0.0
            } else {
                let falling: f64 = (0..drop).map(|r| (k - r) as f64).product();
                falling * base.powi((k - drop) as i32)
            }
        };
        self.exps
            .iter()
            .map(|&(i, j)| {
                let (p0, p1, p2) = (pw(xi, i, 0), pw(xi, i, 1), pw(xi, i, 2));
                let (q0, q1, q2) = (pw(eta, j, 0), pw(eta, j, 1), pw(eta, j, 2));
                let (f_xi, f_eta) = (p1 * q0, p0 * q1);
                let (f_xixi, f_xieta, f_etaeta) = (p2 * q0, p1 * q1, p0 * q2);
                let g = self.dxi * f_xi + self.deta * f_eta;
                let (u, w) = (self.dxi, self.deta);
                let hxx = f_xixi * u.x1 * u.x1 + 2.0 * f_xieta * u.x1 * w.x1 + f_etaeta * w.x1 * w.x1;
                let hxy = f_xixi * u.x1 * u.x2 + f_xieta * (u.x1 * w.x2 + u.x2 * w.x1) + f_etaeta * w.x1 * w.x2;
                let hyy = f_xixi * u.x2 * u.x2 + 2.0 * f_xieta * u.x2 * w.x2 + f_etaeta * w.x2 * w.x2;
                Jet { v: p0 * q0, g, h: [hxx, hxy, hyy] }
            })
            .collect()
    }
}

/// Lower bound for `C_4` or `C_5` from polynomials of total degree
/// `<= degree` with zero means on all three edges.
///
/// Gram matrices are exact (collapsed rule of sufficient order) and the
/// edge means use Gauss-Legendre of sufficient order.
pub(crate) fn polynomial_lower(quotient: Quotient, shape: TriangleShape, degree: usize) -> Result<f64> {
    if !(2..=MAX_POLY_DEGREE).contains(&degree) {
        return Err(Error::InvalidInput(format!("poly_degree must lie in 2..={MAX_POLY_DEGREE}")));
    }
    let basis = Basis::new(&shape, degree);
    let nb = basis.len();
    let p = shape.vertices();
    let rule = TriangleRule::collapsed(degree + 1);
    let mut hess = DMatrix::zeros(nb, nb);
    let mut other = DMatrix::zeros(nb, nb);
    for (x, w) in rule.map(&p) {
        let jets = basis.jets(x);
        for r in 0..nb {
            for c in r..nb {
                let (a, b) = (&jets[r], &jets[c]);
                hess[(r, c)] += w * (a.h[0] * b.h[0] + 2.0 * a.h[1] * b.h[1] + a.h[2] * b.h[2]);
                other[(r, c)] += w
                    * match quotient {
                        Quotient::Gradient => a.g.dot(b.g),
                        Quotient::Value => a.v * b.v,
                    };
            }
        }
    }
    for r in 0..nb {
        for c in 0..r {
            hess[(r, c)] = hess[(c, r)];
            other[(r, c)] = other[(c, r)];
        }
    }
    let sides = [(p[0], p[1]), (p[0], p[2]), (p[1], p[2])];
    let gauss = degree / 2 + 1;
    let mut b = DMatrix::zeros(3, nb);
    for (s, &(from, to)) in sides.iter().enumerate() {
        for k in 0..nb {
            b[(s, k)] = integrate_segment(from, to, gauss, |x| basis.jets(x)[k].v);
        }
    }
    // maximize other / hess  <=>  minimize hess / other
    let ev = constrained_generalized_eigenvalues(&hess, &other, &b).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } | Error::RankDeficient => Error::DegenerateGram { degree },
        e => e,
    })?;
    let lambda = ev[0];
    if !(lambda > 0.0) {
        return Err(Error::DegenerateGram { degree });
    }
    Ok(1.0 / lambda.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn jets_match_finite_differences() {
        let shape = TriangleShape::new(0.7, 1.7, 1.0).unwrap();
        let basis = Basis::new(&shape, 4);
        let x = Point2::new(0.2, 0.3);
        let d = 1e-5;
        let j0 = basis.jets(x);
        let jx = basis.jets(x + Point2::new(d, 0.0));
        let jy = basis.jets(x + Point2::new(0.0, d));
        let jxm = basis.jets(x - Point2::new(d, 0.0));
        let jym = basis.jets(x - Point2::new(0.0, d));
        for k in 0..basis.len() {
            let gx = (jx[k].v - jxm[k].v) / (2.0 * d);
            let gy = (jy[k].v - jym[k].v) / (2.0 * d);
            assert!((gx - j0[k].g.x1).abs() < 1e-6 && (gy - j0[k].g.x2).abs() < 1e-6);
            let hxx = (jx[k].g.x1 - jxm[k].g.x1) / (2.0 * d);
            let hxy = (jy[k].g.x1 - jym[k].g.x1) / (2.0 * d);
            let hyy = (jy[k].g.x2 - jym[k].g.x2) / (2.0 * d);
            assert!((hxx - j0[k].h[0]).abs() < 1e-5);
            assert!((hxy - j0[k].h[1]).abs() < 1e-5);
            assert!((hyy - j0[k].h[2]).abs() < 1e-5);
        }
    }

    #[test]
    fn low_degrees_stay_below_c0() {
        let shape = TriangleShape::new(1.0, FRAC_PI_2, 1.0).unwrap();
        let v2 = polynomial_lower(Quotient::Gradient, shape, 2).unwrap();
        let v3 = polynomial_lower(Quotient::Gradient, shape, 3).unwrap();
        assert!(v2 > 0.0 && v2 <= v3 + 1e-14);
        assert!(v3 < 1.0 / std::f64::consts::PI);
    }

    #[test]
    fn degree_is_monotone() {
        let shape = TriangleShape::new(0.5, FRAC_PI_2, 1.0).unwrap();
        for q in [Quotient::Gradient, Quotient::Value] {
            let mut last = 0.0;
            for d in 2..=7 {
                let v = polynomial_lower(q, shape, d).unwrap();
                assert!(v >= last - 1e-12, "{q:?} degree {d}");
                last = v;
            }
        }
    }

    #[test]
    fn scaling() {
        let shape = TriangleShape::new(0.8, 1.3, 1.0).unwrap();
        let a = polynomial_lower(Quotient::Gradient, shape, 5).unwrap();
        let b = polynomial_lower(Quotient::Gradient, shape.with_h(0.5), 5).unwrap();
        assert!((b - 0.5 * a).abs() < 1e-10);
        let a = polynomial_lower(Quotient::Value, shape, 5).unwrap();
        let b = polynomial_lower(Quotient::Value, shape.with_h(0.5), 5).unwrap();
        assert!((b - 0.25 * a).abs() < 1e-10);
    }

    #[test]
    fn degree_limits() {
        let shape = TriangleShape::new(1.0, FRAC_PI_2, 1.0).unwrap();
        assert!(polynomial_lower(Quotient::Gradient, shape, 1).is_err());
        assert!(polynomial_lower(Quotient::Gradient, shape, MAX_POLY_DEGREE + 1).is_err());
    }
}
