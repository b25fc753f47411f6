use std::f64::consts::FRAC_PI_2;

use femcert::certify::{certify_mesh, load_norms_by_quadrature, CertifyConfig};
use femcert::constants::{
    constants_atlas, eigen_constant_lower, solve_c12_transcendental, solve_c1_transcendental, ConstantId,
};
use femcert::femcore::{seminorm_difference, solve_poisson_cr, ScalarField};
use femcert::flux::solve_modified_cr;
use femcert::trimesh::{generate_friedrichs_keller, read_mesh, write_mesh, Mesh, Point2};

/// FK mesh with interior vertices pushed off the grid, written and read back.
fn perturbed_mesh(n: usize) -> Mesh {
    let fk = generate_friedrichs_keller(n).unwrap();
    let h = 1.0 / n as f64;
    let vertices: Vec<Point2> = fk
        .vertices()
        .iter()
        .zip(fk.boundary_vertices())
        .enumerate()
        .map(|(i, (&p, on_boundary))| {
            if on_boundary {
                p
            } else {
                let s = 0.15 * h * ((i as f64) * 1.618).sin();
                Point2::new(p.x1 + s, p.x2 - 0.5 * s)
            }
        })
        .collect();
    let mesh = Mesh::new(vertices, fk.triangles().to_vec()).unwrap();
    let mut buf = Vec::new();
    write_mesh(&mesh, &mut buf).unwrap();
    read_mesh(buf.as_slice()).unwrap()
}

#[test]
fn file_mesh_solve_and_certify() {
    let mesh = perturbed_mesh(8);
    let f = ScalarField::sin_sin();
    let exact = ScalarField::sin_sin_solution();
    let norms = load_norms_by_quadrature(&mesh, &f);
    let closed = f.norms().unwrap();
    assert!((norms.l2 - closed.l2).abs() < 1e-3 * closed.l2);

    let config = CertifyConfig { eigen_n: 8, ..CertifyConfig::default() };
    let run = certify_mesh(&mesh, &f, Some(&exact), norms, &config).unwrap();
    let r = &run.report;
    assert_eq!(r.violations(), 0, "{r:?}");
    assert!(r.energy_err.unwrap() <= r.apost_flux);
    assert!(r.energy_err.unwrap() <= r.apriori_energy.unwrap());
    assert!(r.l2_err.unwrap() <= r.apriori_l2.unwrap());
}

#[test]
fn fine_eigen_lower_bounds_sit_just_below_roots() {
    let c12 = solve_c12_transcendental();
    let c1 = solve_c1_transcendental();
    let lo12 = eigen_constant_lower(ConstantId::C12, 1.0, FRAC_PI_2, 64).unwrap();
    let lo1 = eigen_constant_lower(ConstantId::C1, 1.0, FRAC_PI_2, 64).unwrap();
    assert!(lo12 < c12 && lo12 > 0.99 * c12, "{lo12} vs {c12}");
    assert!(lo1 < c1 && lo1 > 0.99 * c1, "{lo1} vs {c1}");
    for n in [2, 4, 8, 16] {
        assert!(eigen_constant_lower(ConstantId::C12, 1.0, FRAC_PI_2, n).unwrap() < 0.24647);
    }
}

#[test]
fn atlas_c0_grows_with_alpha() {
    let alphas: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let entries = constants_atlas(&[ConstantId::C0], &alphas, FRAC_PI_2, 16, 6);
    let lower: Vec<f64> = entries.iter().map(|e| e.result.as_ref().unwrap().lower).collect();
    assert!(lower.windows(2).all(|w| w[0] < w[1]), "{lower:?}");
}

#[test]
fn modified_solution_approaches_plain_solution() {
    let f = ScalarField::sin_sin();
    let diff = |n: usize| {
        let mesh = generate_friedrichs_keller(n).unwrap();
        let plain = solve_poisson_cr(&mesh, &f).unwrap();
        let modified = solve_modified_cr(&mesh, &f).unwrap();
        seminorm_difference(&mesh, &plain, &modified)
    };
    let (coarse, fine) = (diff(4), diff(16));
    assert!(fine < coarse / 8.0, "{coarse} -> {fine}");
}
