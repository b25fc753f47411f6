//! Bubble enrichment of the CR solution and the lowest-order Raviart-Thomas
//! flux `p_h = grad_h u* - (fbar/2)(x - x_G)` with its companion `ubar`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::femcore::{
    cr_load_piecewise_constant, project_mean, solve_cr_with_load, CrSolution, DofMap, PwConstant, ScalarField,
};
use crate::linalg::{solve_spd, TripletBuilder};
use crate::par;
use crate::quadrature::TriangleRule;
use crate::trimesh::{barycentric, fmt17, Mesh, Point2};

fn centroid(p: &[Point2; 3]) -> Point2 {
    (p[0] + p[1] + p[2]) * (1.0 / 3.0)
}

/// `sum_i |x_i - x_G|^2`, one third of the squared edge lengths.
fn spread(p: &[Point2; 3]) -> f64 {
    let g = centroid(p);
    p.iter().map(|&x| (x - g).norm_sq()).sum()
}

/// `phi_K(x) = |x - x_G|^2 / 2 - spread / 12`; zero mean on every edge.
pub fn bubble_value(p: &[Point2; 3], x: Point2) -> f64 {
    0.5 * (x - centroid(p)).norm_sq() - spread(p) / 12.0
}

/// `grad phi_K(x) = x - x_G`.
pub fn bubble_gradient(p: &[Point2; 3], x: Point2) -> Point2 {
    x - centroid(p)
}

/// Per-triangle bubble coefficients `alpha_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct BubbleCoefficients {
    pub values: Vec<f64>,
}

/// Per-triangle `p(x) = a + c (x - x_G)`; `div p = 2c`.
#[derive(Clone, Debug, PartialEq)]
pub struct RtFlux {
    pub a: Vec<Point2>,
    pub c: Vec<f64>,
}

impl RtFlux {
    pub fn eval(&self, mesh: &Mesh, t: usize, x: Point2) -> Point2 {
        self.a[t] + (x - mesh.centroid(t)) * self.c[t]
    }

    pub fn divergence(&self, t: usize) -> f64 {
        2.0 * self.c[t]
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

/// Per-triangle values of `ubar_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct UBar {
    pub values: Vec<f64>,
}

/// CR solve with the piecewise-constant load `Q_h f`.
pub fn solve_modified_cr(mesh: &Mesh, f: &ScalarField) -> Result<CrSolution> {
    solve_modified_cr_with_mean(mesh, &project_mean(mesh, f))
}

/// [`solve_modified_cr`] for a precomputed `fbar = Q_h f`.
pub fn solve_modified_cr_with_mean(mesh: &Mesh, fbar: &PwConstant) -> Result<CrSolution> {
    check_len(mesh, fbar.values.len())?;
    solve_cr_with_load(mesh, &cr_load_piecewise_constant(mesh, fbar), None)
}

fn check_len(mesh: &Mesh, n: usize) -> Result<()> {
    if n != mesh.num_triangles() {
        return Err(Error::MeshMismatch(format!("{n} element values for {} triangles", mesh.num_triangles())));
    }
    Ok(())
}

/// `alpha_K = -fbar_K / 2`.
pub fn bubble_coefficients(fbar: &PwConstant) -> BubbleCoefficients {
    BubbleCoefficients { values: fbar.values.iter().map(|f| -0.5 * f).collect() }
}

/// `alpha_K = (fbar_K, phi_K)_K / (grad phi_K, grad phi_K)_K`, both inner
/// products by quadrature.
pub fn bubble_coefficients_rayleigh(mesh: &Mesh, fbar: &PwConstant) -> BubbleCoefficients {
    let rule = TriangleRule::degree5();
    BubbleCoefficients {
        values: par::map_range(mesh.num_triangles(), |t| {
            let p = mesh.triangle_points(t);
            let num = rule.integrate(&p, |x| fbar.values[t] * bubble_value(&p, x));
            let den = rule.integrate(&p, |x| bubble_gradient(&p, x).norm_sq());
            num / den
        }),
    }
}

/// `p_h` from the modified CR solution.
pub fn build_rt_flux(mesh: &Mesh, u_star: &CrSolution, fbar: &PwConstant) -> Result<RtFlux> {
    check_len(mesh, fbar.values.len())?;
    if u_star.values.len() != mesh.num_edges() {
        return Err(Error::MeshMismatch("CR solution does not match the mesh".into()));
    }
    Ok(RtFlux {
        a: par::map_range(mesh.num_triangles(), |t| u_star.element_gradient(mesh, t)),
        c: fbar.values.iter().map(|f| -0.5 * f).collect(),
    })
}

/// `ubar_K = u*(x_G) + (fbar_K / 48) sum_i |x_i - x_G|^2`, the element
/// mean of `u* + alpha_K phi_K`.
pub fn build_ubar(mesh: &Mesh, u_star: &CrSolution, fbar: &PwConstant) -> Result<UBar> {
    check_len(mesh, fbar.values.len())?;
    Ok(UBar {
        values: par::map_range(mesh.num_triangles(), |t| {
            // a CR function at the centroid is the mean of its three DOFs
            let u_g = u_star.local(mesh, t).iter().sum::<f64>() / 3.0;
            u_g + fbar.values[t] / 48.0 * spread(&mesh.triangle_points(t))
        }),
    })
}

/// Local index of edge `e` in triangle `t`.
fn local_edge(mesh: &Mesh, t: usize, e: usize) -> usize {
    mesh.triangle_edges(t).iter().position(|&x| x == e).expect("edge not on triangle")
}

/// RT basis field of edge `e` restricted to triangle `t`: unit flux across
/// `e` along its global normal, zero flux across the other two edges.
pub fn rt_basis(mesh: &Mesh, e: usize, t: usize, x: Point2) -> Point2 {
    let i = local_edge(mesh, t, e);
    let p = mesh.triangle_points(t);
    (x - p[i]) * (mesh.edge_sign(t, i) / (2.0 * mesh.area(t)))
}

/// Divergence of [`rt_basis`] on `t`.
pub fn rt_basis_divergence(mesh: &Mesh, e: usize, t: usize) -> f64 {
    mesh.edge_sign(t, local_edge(mesh, t, e)) / mesh.area(t)
}

/// `(r1, r2)`: the largest residual of `(p, q) + (ubar, div q) = 0` over
/// the RT basis and of `div p + fbar = 0` over the triangles.
pub fn mixed_residual(mesh: &Mesh, p: &RtFlux, ubar: &UBar, fbar: &PwConstant) -> Result<(f64, f64)> {
    check_len(mesh, p.len())?;
    check_len(mesh, ubar.values.len())?;
    check_len(mesh, fbar.values.len())?;
    let rule = TriangleRule::degree2();
    let r1 = par::max_range(mesh.num_edges(), |e| {
        let (t1, t2) = mesh.edges()[e].triangles;
        let mut r = 0.0;
        for t in std::iter::once(t1).chain(t2) {
            let pts = mesh.triangle_points(t);
            r += rule.integrate(&pts, |x| p.eval(mesh, t, x).dot(rt_basis(mesh, e, t, x)));
            r += ubar.values[t] * rt_basis_divergence(mesh, e, t) * mesh.area(t);
        }
        r.abs()
    });
    let r2 = par::max_range(mesh.num_triangles(), |t| (p.divergence(t) + fbar.values[t]).abs());
    Ok((r1, r2))
}

/// Largest interior normal jump of `p`, relative to `max |p|` at the
/// triangle vertices (absolute when `p` vanishes).
pub fn max_normal_jump(mesh: &Mesh, p: &RtFlux) -> f64 {
    let scale = par::max_range(mesh.num_triangles(), |t| {
        mesh.triangle_points(t).iter().map(|&x| p.eval(mesh, t, x).norm()).fold(0.0, f64::max)
    });
    let jump = par::max_range(mesh.num_edges(), |e| {
        let edge = &mesh.edges()[e];
        match edge.triangles {
            (t1, Some(t2)) => {
                let n = mesh.edge_normal(e);
                (p.eval(mesh, t1, edge.midpoint).dot(n) - p.eval(mesh, t2, edge.midpoint).dot(n)).abs()
            }
            _ => 0.0,
        }
    });
    if scale > 0.0 {
        jump / scale
    } else {
        jump
    }
}

/// Largest `|(grad psi_e, grad phi_K)_K|` over all CR basis functions and
/// bubbles, by the edge-midpoint rule (exact here).
pub fn max_cross_stiffness(mesh: &Mesh) -> f64 {
    let rule = TriangleRule::degree2();
    par::max_range(mesh.num_triangles(), |t| {
        let p = mesh.triangle_points(t);
        let g = mesh.barycentric_gradients(t);
        (0..3)
            .map(|i| rule.integrate(&p, |x| (g[i] * -2.0).dot(bubble_gradient(&p, x))).abs())
            .fold(0.0, f64::max)
    })
}

/// Solves the enriched system (CR plus one bubble per triangle, load
/// `fbar`) in one go, without using the orthogonality of the two parts.
pub fn solve_enriched(mesh: &Mesh, fbar: &PwConstant) -> Result<(CrSolution, BubbleCoefficients)> {
    check_len(mesh, fbar.values.len())?;
    let ne = mesh.num_edges();
    let nt = mesh.num_triangles();
    let dofs = DofMap::cr(mesh);
    let nfree = dofs.n_free();
    let rule = TriangleRule::degree2();
    let mut builder = TripletBuilder::new(nfree + nt, nfree + nt);
    let mut rhs = vec![0.0; nfree + nt];
    for t in 0..nt {
        let p = mesh.triangle_points(t);
        let g = mesh.barycentric_gradients(t);
        let edges = mesh.triangle_edges(t);
        let bubble = nfree + t;
        let grads: [Point2; 3] = std::array::from_fn(|i| g[i] * -2.0);
        for i in 0..3 {
            let Some(r) = dofs.free_index(edges[i]) else { continue };
            for j in 0..3 {
                if let Some(c) = dofs.free_index(edges[j]) {
                    builder.add(r, c, grads[i].dot(grads[j]) * mesh.area(t));
                }
            }
            let cross = rule.integrate(&p, |x| grads[i].dot(bubble_gradient(&p, x)));
            builder.add(r, bubble, cross);
            builder.add(bubble, r, cross);
            rhs[r] += rule.integrate(&p, |x| fbar.values[t] * (1.0 - 2.0 * barycentric(&p, x)[i]));
        }
        builder.add(bubble, bubble, rule.integrate(&p, |x| bubble_gradient(&p, x).norm_sq()));
        rhs[bubble] = rule.integrate(&p, |x| fbar.values[t] * bubble_value(&p, x));
    }
    let x = solve_spd(&builder.build(), &rhs)?;
    let values = (0..ne).map(|e| dofs.free_index(e).map_or(0.0, |r| x[r])).collect();
    Ok((CrSolution { values }, BubbleCoefficients { values: x[nfree..].to_vec() }))
}

pub const FLUX_HEADER: &str = "tri_index,ax,ay,c,fbar";

/// Flux dump; `p` is recovered exactly from `a`, `c` and the mesh.
pub fn write_flux_csv<W: Write>(p: &RtFlux, fbar: &PwConstant, mut w: W) -> Result<()> {
    if p.len() != fbar.values.len() {
        return Err(Error::MeshMismatch("flux and load lengths differ".into()));
    }
    writeln!(w, "{FLUX_HEADER}")?;
    for t in 0..p.len() {
        writeln!(w, "{t},{},{},{},{}", fmt17(p.a[t].x1), fmt17(p.a[t].x2), fmt17(p.c[t]), fmt17(fbar.values[t]))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::femcore::{solve_poisson_cr, DiscreteField};
    use crate::quadrature::integrate_segment;
    use crate::trimesh::generate_friedrichs_keller;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT: [Point2; 3] = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];

    fn random_triangle(rng: &mut ChaCha8Rng) -> [Point2; 3] {
        loop {
            let p: [Point2; 3] = std::array::from_fn(|_| Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
            let area = crate::trimesh::signed_area(p[0], p[1], p[2]);
            if area.abs() > 0.05 {
                return if area > 0.0 { p } else { [p[0], p[2], p[1]] };
            }
        }
    }

    #[test]
    fn bubble_values_on_unit_triangle() {
        assert!((bubble_value(&UNIT, Point2::new(1.0 / 3.0, 1.0 / 3.0)) + 1.0 / 9.0).abs() < 1e-15);
        assert!(bubble_value(&UNIT, Point2::new(0.0, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn bubble_edge_means_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_triangle(&mut rng);
            for i in 0..3 {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                // Simpson, exact for quadratics
                let simpson = (bubble_value(&p, a) + 4.0 * bubble_value(&p, (a + b) * 0.5) + bubble_value(&p, b)) / 6.0;
                assert!(simpson.abs() < 1e-13);
                assert!(integrate_segment(a, b, 3, |x| bubble_value(&p, x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_load_routes() {
        let mesh = generate_friedrichs_keller(4).unwrap();
        let one = ScalarField::constant(1.0);
        let a = solve_modified_cr(&mesh, &one).unwrap();
        let b = solve_poisson_cr(&mesh, &one).unwrap();
        assert_eq!(a, b);
        let alpha = bubble_coefficients(&project_mean(&mesh, &one));
        assert!(alpha.values.iter().all(|&v| v == -0.5));
        let zero = bubble_coefficients(&project_mean(&mesh, &ScalarField::zero()));
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rayleigh_route_agrees() {
        let mesh = generate_friedrichs_keller(3).unwrap();
        let fbar = PwConstant { values: (0..mesh.num_triangles()).map(|t| 2.5 - 0.3 * t as f64).collect() };
        let a = bubble_coefficients(&fbar);
        let b = bubble_coefficients_rayleigh(&mesh, &fbar);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ubar_unit_triangle() {
        let mesh = Mesh::new(UNIT.to_vec(), vec![[0, 1, 2]]).unwrap();
        let u = CrSolution { values: vec![0.0; 3] };
        let ub = build_ubar(&mesh, &u, &PwConstant { values: vec![1.0] }).unwrap();
        assert!((ub.values[0] - 1.0 / 36.0).abs() < 1e-16);
    }

    #[test]
    fn rt_basis_fluxes() {
        let mesh = generate_friedrichs_keller(2).unwrap();
        for (e, edge) in mesh.edges().iter().enumerate() {
            for t in std::iter::once(edge.triangles.0).chain(edge.triangles.1) {
                for (k, &other) in mesh.triangle_edges(t).iter().enumerate() {
                    let oe = &mesh.edges()[other];
                    let n = mesh.edge_normal(other);
                    let flux = rt_basis(&mesh, e, t, oe.midpoint).dot(n) * mesh.edge_length(other);
                    let want = if other == e { 1.0 } else { 0.0 };
                    assert!((flux - want).abs() < 1e-14, "edge {e} tri {t} local {k}");
                }
                // Gauss: int div = sum of outward fluxes
                let out = mesh.edge_sign(t, local_edge(&mesh, t, e));
                assert!((rt_basis_divergence(&mesh, e, t) * mesh.area(t) - out).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sinsin_flux_is_conforming_and_solves_the_mixed_system() {
        let mesh = generate_friedrichs_keller(4).unwrap();
        let f = ScalarField::sin_sin();
        let fbar = project_mean(&mesh, &f);
        let u = solve_modified_cr_with_mean(&mesh, &fbar).unwrap();
        let p = build_rt_flux(&mesh, &u, &fbar).unwrap();
        let ub = build_ubar(&mesh, &u, &fbar).unwrap();
        assert!(max_normal_jump(&mesh, &p) <= 1e-10);
        let (r1, r2) = mixed_residual(&mesh, &p, &ub, &fbar).unwrap();
        assert!(r1 <= 1e-9 && r2 <= 1e-13, "{r1} {r2}");

        let mut bad = ub.clone();
        bad.values[5] += 1.0;
        let (r1, _) = mixed_residual(&mesh, &p, &bad, &fbar).unwrap();
        assert!(r1 >= 0.9);
    }

    #[test]
    fn unmodified_solution_breaks_conformity() {
        let mesh = generate_friedrichs_keller(4).unwrap();
        let f = ScalarField::sin_sin();
        let fbar = project_mean(&mesh, &f);
        let u = solve_poisson_cr(&mesh, &f).unwrap();
        let p = build_rt_flux(&mesh, &u, &fbar).unwrap();
        assert!(max_normal_jump(&mesh, &p) > 1e-8);
    }

    #[test]
    fn zero_data_zero_residual() {
        let mesh = generate_friedrichs_keller(3).unwrap();
        let fbar = PwConstant { values: vec![0.0; mesh.num_triangles()] };
        let u = CrSolution { values: vec![0.0; mesh.num_edges()] };
        let p = build_rt_flux(&mesh, &u, &fbar).unwrap();
        let ub = build_ubar(&mesh, &u, &fbar).unwrap();
        assert_eq!(mixed_residual(&mesh, &p, &ub, &fbar).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn flux_matches_enriched_gradient() {
        let mesh = generate_friedrichs_keller(3).unwrap();
        let fbar = project_mean(&mesh, &ScalarField::sin_sin());
        let u = solve_modified_cr_with_mean(&mesh, &fbar).unwrap();
        let p = build_rt_flux(&mesh, &u, &fbar).unwrap();
        let alpha = bubble_coefficients(&fbar);
        for t in 0..mesh.num_triangles() {
            let pts = mesh.triangle_points(t);
            let x = pts[0] * 0.2 + pts[1] * 0.5 + pts[2] * 0.3;
            let grad = u.gradient(&mesh, t, x) + bubble_gradient(&pts, x) * alpha.values[t];
            assert!((p.eval(&mesh, t, x) - grad).norm() < 1e-14);
            assert!((p.eval(&mesh, t, mesh.centroid(t)) - u.element_gradient(&mesh, t)).norm() < 1e-15);
        }
    }

    #[test]
    fn orthogonality_and_enriched_solve() {
        let mesh = generate_friedrichs_keller(5).unwrap();
        assert!(max_cross_stiffness(&mesh) <= 1e-13);
        let fbar = project_mean(&mesh, &ScalarField::sin_sin());
        let (u, alpha) = solve_enriched(&mesh, &fbar).unwrap();
        let u_star = solve_modified_cr_with_mean(&mesh, &fbar).unwrap();
        let direct = bubble_coefficients(&fbar);
        for (a, b) in u.values.iter().zip(&u_star.values) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in alpha.values.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn flux_csv_schema() {
        let mesh = generate_friedrichs_keller(1).unwrap();
        let fbar = PwConstant { values: vec![1.0, 2.0] };
        let u = CrSolution { values: vec![0.0; 5] };
        let p = build_rt_flux(&mesh, &u, &fbar).unwrap();
        let mut buf = Vec::new();
        write_flux_csv(&p, &fbar, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), FLUX_HEADER);
        assert_eq!(text.lines().count(), 3);
    }
}
