//! Computable error bounds: a priori energy and `L2` bounds and the
//! hypercircle a posteriori bound, with mesh-wide constants.

use std::collections::BTreeMap;
use std::io::Write;

use crate::constants::{shape_constants, ShapeConstants, UPPER_ESTIMATE_N};
use crate::error::{Error, Result};
use crate::femcore::{
    conforming_load_piecewise_constant, energy_error, l2_error, project_mean, solve_conforming_with_load,
    solve_poisson_cr, ConformingSolution, CrSolution, PwConstant, ScalarField,
};
use crate::flux::{build_rt_flux, solve_modified_cr_with_mean, RtFlux};
use crate::par;
use crate::quadrature::TriangleRule;
use crate::trimesh::{fmt17, generate_friedrichs_keller, Mesh};

/// Mesh-wide maxima of the element constants and the assembled `gamma_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalConstants {
    pub h_star: f64,
    pub c0h: f64,
    pub c12h: f64,
    pub c6h: f64,
    /// `||v - Pi_h v|| <= gamma0 h^2 |v|_2`, `gamma0 = C0h C12h`
    pub gamma0: f64,
    /// `||grad(v - Pi_h v)|| <= gamma1 h |v|_2`, `gamma1 = C0h`
    pub gamma1: f64,
    /// Fortin operator, `gamma2 = C6h`
    pub gamma2: f64,
    /// `||g - Q_h g|| <= gamma3 h ||grad_h g||`, `gamma3 = C0h`
    pub gamma3: f64,
    /// `false` if any element constant is an extrapolated estimate.
    pub certified: bool,
}

impl GlobalConstants {
    pub fn from_maxima(h_star: f64, c0h: f64, c12h: f64, c6h: f64, certified: bool) -> Self {
        Self {
            h_star,
            c0h,
            c12h,
            c6h,
            gamma0: c0h * c12h,
            gamma1: c0h,
            gamma2: c6h,
            gamma3: c0h,
            certified,
        }
    }
}

/// Shapes closer than this in `alpha` and `theta` share one cache entry.
const SHAPE_KEY_SCALE: f64 = 1e9;

/// [`global_constants_with`] at the default estimate subdivision.
pub fn global_constants(mesh: &Mesh) -> Result<GlobalConstants> {
    global_constants_with(mesh, UPPER_ESTIMATE_N)
}

/// Maxima over the elements of the upper constants, computed once per
/// distinct shape.
pub fn global_constants_with(mesh: &Mesh, n: usize) -> Result<GlobalConstants> {
    if mesh.num_triangles() == 0 {
        return Err(Error::InvalidInput("empty mesh".into()));
    }
    let mut shapes: BTreeMap<(i64, i64), (f64, f64)> = BTreeMap::new();
    for s in mesh.shapes() {
        let key = ((s.alpha * SHAPE_KEY_SCALE).round() as i64, (s.theta * SHAPE_KEY_SCALE).round() as i64);
        shapes.entry(key).or_insert((s.alpha.min(1.0), s.theta));
    }
    let distinct: Vec<(f64, f64)> = shapes.into_values().collect();
    let per_shape: Vec<Result<ShapeConstants>> = par::map_slice(&distinct, |&(a, t)| shape_constants(a, t, n));
    let mut gc = (0.0f64, 0.0f64, 0.0f64, true);
    for sc in per_shape {
        let sc = sc?;
        gc = (gc.0.max(sc.c0), gc.1.max(sc.c12), gc.2.max(sc.c6), gc.3 && sc.certified);
    }
    Ok(GlobalConstants::from_maxima(mesh.h_star(), gc.0, gc.1, gc.2, gc.3))
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::InvalidInput(format!("{name} must be a nonnegative number, got {v}")));
    }
    Ok(())
}

/// `h {gamma1^2 |u|_2^2 + (gamma2 |u|_2 + gamma3 ||f||)^2}^{1/2}` with
/// `|u|_2 <= ||f||`; with `|f|_1` the last term is `gamma3^2 h |f|_1`.
pub fn apriori_energy_bound(gc: &GlobalConstants, norm_f: f64, seminorm_f1: Option<f64>) -> Result<f64> {
    check_nonnegative("||f||", norm_f)?;
    let h = gc.h_star;
    let load = match seminorm_f1 {
        Some(s) => {
            check_nonnegative("|f|_1", s)?;
            gc.gamma3 * gc.gamma3 * h * s
        }
        None => gc.gamma3 * norm_f,
    };
    let u2 = norm_f;
    Ok(h * ((gc.gamma1 * u2).powi(2) + (gc.gamma2 * u2 + load).powi(2)).sqrt())
}

/// Positive root of `e^2 <= h A1 e + h^2 A2` with
/// `A1 = (gamma1 + gamma2) ||grad e|| + (gamma0 + gamma1 gamma2) h ||f||` and
/// `A2 = gamma3^2 ||grad e||^2`. With `|f|_1`, `gamma0 h ||f||` becomes
/// `gamma0 gamma3 h^2 |f|_1`.
pub fn apriori_l2_bound(gc: &GlobalConstants, norm_grad_eh: f64, norm_f: f64, seminorm_f1: Option<f64>) -> Result<f64> {
    check_nonnegative("||grad e||", norm_grad_eh)?;
    check_nonnegative("||f||", norm_f)?;
    let h = gc.h_star;
    let g0 = match seminorm_f1 {
        Some(s) => {
            check_nonnegative("|f|_1", s)?;
            gc.gamma0 * gc.gamma3 * h * h * s
        }
        None => gc.gamma0 * h * norm_f,
    };
    let a1 = (gc.gamma1 + gc.gamma2) * norm_grad_eh + g0 + gc.gamma1 * gc.gamma2 * h * norm_f;
    let a2 = (gc.gamma3 * norm_grad_eh).powi(2);
    Ok(0.5 * h * (a1 + (a1 * a1 + 4.0 * a2).sqrt()))
}

/// Both hypercircle bounds and the computable parts they are built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hypercircle {
    /// bound on `||grad u - p_h||`
    pub bound_flux: f64,
    /// bound on `||grad u - (grad v + p_h) / 2||`
    pub bound_mid: f64,
    /// `||grad v - p_h||`
    pub gap: f64,
    /// bound on `||grad(u - u^h)||` from the data oscillation
    pub oscillation: f64,
}

/// `||f - Q_h f||`, seven-point rule.
pub fn data_oscillation(mesh: &Mesh, f: &ScalarField, fbar: &PwConstant) -> f64 {
    let rule = TriangleRule::degree5();
    par::sum_range(mesh.num_triangles(), |t| {
        rule.integrate(&mesh.triangle_points(t), |x| (f.eval(x) - fbar.values[t]).powi(2))
    })
    .sqrt()
}

/// `||grad v - p||` with a rule of the given order (the integrand is a
/// quadratic, so the edge-midpoint rule is already exact).
pub fn flux_gap_with(mesh: &Mesh, p: &RtFlux, v: &ConformingSolution, rule: &TriangleRule) -> f64 {
    par::sum_range(mesh.num_triangles(), |t| {
        let gv = v.element_gradient(mesh, t);
        rule.integrate(&mesh.triangle_points(t), |x| (gv - p.eval(mesh, t, x)).norm_sq())
    })
    .sqrt()
}

/// `||grad u - p|| <= osc + ||grad v - p||` and
/// `||grad u - (grad v + p)/2|| <= osc + ||grad v - p|| / 2`, where
/// `osc = min(gamma3 h ||f - Q_h f||, gamma3^2 h^2 |f|_1)`.
pub fn aposteriori_hypercircle(
    mesh: &Mesh,
    p: &RtFlux,
    v: &ConformingSolution,
    gc: &GlobalConstants,
    f: &ScalarField,
    seminorm_f1: Option<f64>,
) -> Result<Hypercircle> {
    if p.len() != mesh.num_triangles() || v.values.len() != mesh.num_vertices() {
        return Err(Error::MeshMismatch("flux or admissible field does not match the mesh".into()));
    }
    let h = gc.h_star;
    let fbar = project_mean(mesh, f);
    let mut osc = gc.gamma3 * h * data_oscillation(mesh, f, &fbar);
    if let Some(s) = seminorm_f1 {
        check_nonnegative("|f|_1", s)?;
        osc = osc.min(gc.gamma3 * gc.gamma3 * h * h * s);
    }
    let gap = flux_gap_with(mesh, p, v, &TriangleRule::degree2());
    Ok(Hypercircle { bound_flux: osc + gap, bound_mid: osc + 0.5 * gap, gap, oscillation: osc })
}

/// Choice of the admissible `v in H^1_0` for the hypercircle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AdmissibleField {
    /// conforming P1 solution of the `Q_h f` problem
    #[default]
    ConformingSolve,
    /// vertex averages of the adjacent CR midpoint values, zero on the boundary
    NodalAverage,
}

/// Vertex averages of a CR field, zero at boundary vertices.
pub fn nodal_average(mesh: &Mesh, u: &CrSolution) -> ConformingSolution {
    let mut sum = vec![0.0; mesh.num_vertices()];
    let mut count = vec![0usize; mesh.num_vertices()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        for &v in &edge.vertices {
            sum[v] += u.values[e];
            count[v] += 1;
        }
    }
    let boundary = mesh.boundary_vertices();
    let values = (0..mesh.num_vertices())
        .map(|v| if boundary[v] || count[v] == 0 { 0.0 } else { sum[v] / count[v] as f64 })
        .collect();
    ConformingSolution { values }
}

/// Norms of the load entering the bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadNorms {
    pub l2: f64,
    pub h1_semi: Option<f64>,
}

/// `||f||` and `|f|_1` (when `f` has a gradient) over the mesh, seven-point rule.
pub fn load_norms_by_quadrature(mesh: &Mesh, f: &ScalarField) -> LoadNorms {
    let rule = TriangleRule::degree5();
    let l2 = par::sum_range(mesh.num_triangles(), |t| rule.integrate(&mesh.triangle_points(t), |x| f.eval(x).powi(2)));
    let h1 = f.has_gradient().then(|| {
        par::sum_range(mesh.num_triangles(), |t| {
            rule.integrate(&mesh.triangle_points(t), |x| f.grad(x).unwrap().norm_sq())
        })
        .sqrt()
    });
    LoadNorms { l2: l2.sqrt(), h1_semi: h1 }
}

/// Run options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyConfig {
    /// enables `|u|_2 <= ||f||`, needed by both a priori bounds
    pub convex: bool,
    pub admissible: AdmissibleField,
    /// subdivision for element constants that need an eigen estimate
    pub eigen_n: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { convex: true, admissible: AdmissibleField::ConformingSolve, eigen_n: UPPER_ESTIMATE_N }
    }
}

/// One row of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub n: Option<usize>,
    pub h: f64,
    pub energy_err: Option<f64>,
    pub l2_err: Option<f64>,
    /// `None` unless the domain is flagged convex
    pub apriori_energy: Option<f64>,
    /// uses `apriori_energy` as the surrogate for `||grad e||`
    pub apriori_l2: Option<f64>,
    pub apost_flux: f64,
    pub apost_mid: f64,
    /// true `||grad u - p_h||`
    pub flux_err: Option<f64>,
    /// true `||grad u - (grad v + p_h)/2||`
    pub mid_err: Option<f64>,
    pub constants_certified: bool,
}

fn ratio(bound: Option<f64>, truth: Option<f64>) -> Option<f64> {
    match (bound, truth) {
        (Some(b), Some(t)) if t > 0.0 => Some(b / t),
        _ => None,
    }
}

impl BoundReport {
    pub fn eff_energy(&self) -> Option<f64> {
        ratio(self.apriori_energy, self.energy_err)
    }

    pub fn eff_apost(&self) -> Option<f64> {
        ratio(Some(self.apost_flux), self.flux_err)
    }

    /// Number of guaranteed-bound violations against the known truths.
    pub fn violations(&self) -> usize {
        let below = |b: Option<f64>, t: Option<f64>| matches!((b, t), (Some(b), Some(t)) if b < t);
        [
            below(self.apriori_energy, self.energy_err),
            below(self.apriori_l2, self.l2_err),
            below(Some(self.apost_flux), self.flux_err),
            below(Some(self.apost_mid), self.mid_err),
        ]
        .iter()
        .filter(|&&v| v)
        .count()
    }
}

/// Everything computed for one mesh.
#[derive(Clone, Debug)]
pub struct CertifiedRun {
    pub report: BoundReport,
    pub constants: GlobalConstants,
    pub fbar: PwConstant,
    pub u_h: CrSolution,
    pub u_star: CrSolution,
    pub v: ConformingSolution,
    pub flux: RtFlux,
    pub hypercircle: Hypercircle,
}

/// Plain and modified CR solves, flux, admissible field and all bounds.
pub fn certify_mesh(
    mesh: &Mesh,
    f: &ScalarField,
    exact: Option<&ScalarField>,
    norms: LoadNorms,
    config: &CertifyConfig,
) -> Result<CertifiedRun> {
    let gc = global_constants_with(mesh, config.eigen_n)?;
    let fbar = project_mean(mesh, f);
    let u_h = solve_poisson_cr(mesh, f)?;
    let u_star = solve_modified_cr_with_mean(mesh, &fbar)?;
    let flux = build_rt_flux(mesh, &u_star, &fbar)?;
    let v = match config.admissible {
        AdmissibleField::ConformingSolve => {
            solve_conforming_with_load(mesh, &conforming_load_piecewise_constant(mesh, &fbar), None)?
        }
        AdmissibleField::NodalAverage => nodal_average(mesh, &u_star),
    };
    let hc = aposteriori_hypercircle(mesh, &flux, &v, &gc, f, norms.h1_semi)?;
    let (apriori_energy, apriori_l2) = if config.convex {
        let e = apriori_energy_bound(&gc, norms.l2, norms.h1_semi)?;
        (Some(e), Some(apriori_l2_bound(&gc, e, norms.l2, norms.h1_semi)?))
    } else {
        (None, None)
    };
    let (energy_err, l2_err, flux_err, mid_err) = match exact {
        Some(u) => {
            let rule = TriangleRule::degree5();
            let flux_sq = |w: f64| {
                par::sum_range(mesh.num_triangles(), |t| {
                    let gv = v.element_gradient(mesh, t);
                    rule.integrate(&mesh.triangle_points(t), |x| {
                        let q = flux.eval(mesh, t, x) * (1.0 - w) + gv * w;
                        (u.grad(x).unwrap() - q).norm_sq()
                    })
                })
                .sqrt()
            };
            (
                Some(energy_error(mesh, &u_h, u)?),
                Some(l2_error(mesh, &u_h, u)),
                Some(flux_sq(0.0)),
                Some(flux_sq(0.5)),
            )
        }
        None => (None, None, None, None),
    };
    let report = BoundReport {
        n: None,
        h: gc.h_star,
        energy_err,
        l2_err,
        apriori_energy,
        apriori_l2,
        apost_flux: hc.bound_flux,
        apost_mid: hc.bound_mid,
        flux_err,
        mid_err,
        constants_certified: gc.certified,
    };
    Ok(CertifiedRun { report, constants: gc, fbar, u_h, u_star, v, flux, hypercircle: hc })
}

/// [`certify_mesh`] on Friedrichs-Keller meshes of the unit square, in
/// parallel over `ns`. Load norms come from the field's closed forms when
/// present.
pub fn convergence_study(
    f: &ScalarField,
    exact: Option<&ScalarField>,
    ns: &[usize],
    config: &CertifyConfig,
) -> Result<Vec<BoundReport>> {
    if ns.is_empty() {
        return Err(Error::InvalidInput("empty N list".into()));
    }
    if let Some(u) = exact {
        if !u.has_gradient() {
            return Err(Error::InvalidInput(format!("exact solution `{}` has no gradient", u.name())));
        }
    }
    par::map_slice(ns, |&n| {
        let mesh = generate_friedrichs_keller(n)?;
        let norms = match f.norms() {
            Some(d) => LoadNorms { l2: d.l2, h1_semi: Some(d.h1_semi) },
            None => load_norms_by_quadrature(&mesh, f),
        };
        let mut report = certify_mesh(&mesh, f, exact, norms, config)?.report;
        report.n = Some(n);
        Ok(report)
    })
    .into_iter()
    .collect()
}

/// Least-squares slope of `log e` against `log h`; `None` if fewer than two
/// positive points.
pub fn loglog_slope(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        h.iter().zip(e).filter(|(h, e)| **h > 0.0 && **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

pub const CONVERGENCE_HEADER: &str = "N,h,energy_err,l2_err,apriori_energy,apriori_l2,apost_flux,apost_mid,eff_energy,eff_apost";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), fmt17)
}

/// Convergence CSV, one row per report and a `slope` footer row.
pub fn write_convergence_csv<W: Write>(reports: &[BoundReport], mut w: W) -> Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n.map_or_else(String::new, |n| n.to_string()),
            fmt17(r.h),
            opt(r.energy_err),
            opt(r.l2_err),
            opt(r.apriori_energy),
            opt(r.apriori_l2),
            fmt17(r.apost_flux),
            fmt17(r.apost_mid),
            opt(r.eff_energy()),
            opt(r.eff_apost()),
        )?;
    }
    if reports.len() >= 2 {
        let h: Vec<f64> = reports.iter().map(|r| r.h).collect();
        let col = |get: &dyn Fn(&BoundReport) -> Option<f64>| -> String {
            let e: Option<Vec<f64>> = reports.iter().map(get).collect();
            opt(e.and_then(|e| loglog_slope(&h, &e)))
        };
        writeln!(
            w,
            "slope,,{},{},{},{},{},{},,",
            col(&|r| r.energy_err),
            col(&|r| r.l2_err),
            col(&|r| r.apriori_energy),
            col(&|r| r.apriori_l2),
            col(&|r| Some(r.apost_flux)),
            col(&|r| Some(r.apost_mid)),
        )?;
    }
    Ok(())
}
