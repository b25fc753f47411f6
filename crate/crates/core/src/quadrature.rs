//! Quadrature on triangles and segments.

use crate::trimesh::{signed_area, Point2};

/// A rule on a triangle in barycentric coordinates; weights sum to 1.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Edge-midpoint rule, exact for quadratics.
    pub fn degree2() -> Self {
        Self {
            points: vec![[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Seven-point Gauss rule, exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (9.0 - 2.0 * s15) / 21.0;
        let b1 = (6.0 + s15) / 21.0;
        let a2 = (9.0 + 2.0 * s15) / 21.0;
        let b2 = (6.0 - s15) / 21.0;
        let w1 = (155.0 + s15) / 1200.0;
        let w2 = (155.0 - s15) / 1200.0;
        Self {
            points: vec![
                [1.0 / 3.0; 3],
                [a1, b1, b1],
                [b1, a1, b1],
                [b1, b1, a1],
                [a2, b2, b2],
                [b2, a2, b2],
                [b2, b2, a2],
            ],
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `m * (m + 1)` points, exact
    /// for polynomials of degree `2m - 1`.
    pub fn collapsed(m: usize) -> Self {
        let (x, w) = gauss_legendre(m);
        let (x2, w2) = gauss_legendre(m + 1);
        let mut points = Vec::with_capacity(m * (m + 1));
        let mut weights = Vec::with_capacity(m * (m + 1));
        for (&u, &wu) in x2.iter().zip(&w2) {
            for (&v, &wv) in x.iter().zip(&w) {
                // (u, v) in the unit square -> (l1, l2) = (u, v(1 - u)); Jacobian (1 - u)
                let l1 = u;
                let l2 = v * (1.0 - u);
                points.push([1.0 - l1 - l2, l1, l2]);
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical quadrature points on triangle `p`.
    pub fn map(&self, p: &[Point2; 3]) -> impl Iterator<Item = (Point2, f64)> + '_ {
        let p = *p;
        self.points.iter().zip(&self.weights).map(move |(l, &w)| {
            (Point2::new(
                l[0] * p[0].x1 + l[1] * p[1].x1 + l[2] * p[2].x1,
                l[0] * p[0].x2 + l[1] * p[1].x2 + l[2] * p[2].x2,
            ), w)
        })
    }

    /// `int_T f dx`.
    pub fn integrate<F: FnMut(Point2) -> f64>(&self, p: &[Point2; 3], mut f: F) -> f64 {
        let area = signed_area(p[0], p[1], p[2]).abs();
        area * self.map(p).map(|(x, w)| w * f(x)).sum::<f64>()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev initial guess, Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        nodes[m - 1 - i] = 0.5 * (x + 1.0);
        weights[m - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `int_a^b f ds` along a segment with an `m`-point Gauss rule.
pub fn integrate_segment<F: FnMut(Point2) -> f64>(a: Point2, b: Point2, m: usize, mut f: F) -> f64 {
    let (x, w) = gauss_legendre(m);
    let len = (b - a).norm();
    len * x.iter().zip(&w).map(|(&s, &ws)| ws * f(a + (b - a) * s)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact `int_T x1^a x2^b`: expand in barycentric monomials and apply the
    /// Dirichlet integral formula.
    fn exact_monomial(p: &[Point2; 3], a: u32, b: u32) -> f64 {
        // int_T l0^i l1^j l2^k = 2|T| i! j! k! / (i+j+k+2)!
        fn fact(n: u32) -> f64 {
            (1..=n).map(f64::from).product()
        }
        let area = signed_area(p[0], p[1], p[2]).abs();
        // x = sum l_i p_i; expand x1^a x2^b as multinomials in l
        let mut total = 0.0;
        let coeffs = |c: [f64; 3], n: u32| -> Vec<([u32; 3], f64)> {
            let mut out = Vec::new();
            for i in 0..=n {
                for j in 0..=n - i {
                    let k = n - i - j;
                    let mult = fact(n) / (fact(i) * fact(j) * fact(k));
                    out.push(([i, j, k], mult * c[0].powi(i as i32) * c[1].powi(j as i32) * c[2].powi(k as i32)));
                }
            }
            out
        };
        let xs = coeffs([p[0].x1, p[1].x1, p[2].x1], a);
        let ys = coeffs([p[0].x2, p[1].x2, p[2].x2], b);
        for (ex, cx) in &xs {
            for (ey, cy) in &ys {
                let e = [ex[0] + ey[0], ex[1] + ey[1], ex[2] + ey[2]];
                total += cx * cy * 2.0 * area * fact(e[0]) * fact(e[1]) * fact(e[2])
                    / fact(e[0] + e[1] + e[2] + 2);
            }
        }
        total
    }

    fn random_triangle(rng: &mut ChaCha8Rng) -> [Point2; 3] {
        loop {
            let p: [Point2; 3] = std::array::from_fn(|_| Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
            if signed_area(p[0], p[1], p[2]).abs() > 0.1 {
                return p;
            }
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for r in [TriangleRule::degree2(), TriangleRule::degree5(), TriangleRule::collapsed(5)] {
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degree2_is_exact_for_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rule = TriangleRule::degree2();
        for _ in 0..10 {
            let p = random_triangle(&mut rng);
            for a in 0..=2 {
                for b in 0..=2 - a {
                    let q = rule.integrate(&p, |x| x.x1.powi(a as i32) * x.x2.powi(b as i32));
                    let e = exact_monomial(&p, a, b);
                    assert!((q - e).abs() < 1e-13 * (1.0 + e.abs()), "{a} {b}: {q} vs {e}");
                }
            }
        }
    }

    #[test]
    fn degree5_and_collapsed_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r5 = TriangleRule::degree5();
        let rc = TriangleRule::collapsed(6);
        for _ in 0..10 {
            let p = random_triangle(&mut rng);
            for a in 0..=5u32 {
                for b in 0..=5 - a {
                    let e = exact_monomial(&p, a, b);
                    let q = r5.integrate(&p, |x| x.x1.powi(a as i32) * x.x2.powi(b as i32));
                    assert!((q - e).abs() < 1e-12 * (1.0 + e.abs()));
                }
            }
            for a in 0..=10u32 {
                for b in 0..=10 - a {
                    let e = exact_monomial(&p, a, b);
                    let q = rc.integrate(&p, |x| x.x1.powi(a as i32) * x.x2.powi(b as i32));
                    assert!((q - e).abs() < 1e-10 * (1.0 + e.abs()), "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_segment() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let v = integrate_segment(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 5, |p| p.x1.powi(9));
        assert!((v - 0.1).abs() < 1e-15);
    }
}
