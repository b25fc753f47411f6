//! Interpolation error constants `C_J(alpha, theta)` on `T_{alpha,theta,1}`.

mod eigen;
mod poly;
mod roots;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::Write;

pub use eigen::{eigen_constant_lower, eigen_constant_lower_on};
pub use poly::MAX_POLY_DEGREE;
pub use roots::{c0_exact, solve_c12_transcendental, solve_c1_transcendental};

use crate::error::{Error, Result};
use crate::par;
use crate::trimesh::{fmt17, TriangleShape};
use poly::{polynomial_lower, Quotient};

/// Subdivision used for Richardson upper estimates when the caller gives none.
pub const UPPER_ESTIMATE_N: usize = 32;

/// Relative safety margin applied to extrapolated eigenvalue estimates.
pub const ESTIMATE_MARGIN: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstantId {
    C0,
    C1,
    C2,
    C3,
    C12,
    C123,
    C4,
    C5,
    C6,
}

impl ConstantId {
    pub const ALL: [ConstantId; 9] = [
        ConstantId::C0,
        ConstantId::C1,
        ConstantId::C2,
        ConstantId::C3,
        ConstantId::C12,
        ConstantId::C123,
        ConstantId::C4,
        ConstantId::C5,
        ConstantId::C6,
    ];

    /// Subscript as written in tables: `0`, `1`, ..., `12`, `123`.
    pub fn tag(self) -> &'static str {
        match self {
            ConstantId::C0 => "0",
            ConstantId::C1 => "1",
            ConstantId::C2 => "2",
            ConstantId::C3 => "3",
            ConstantId::C12 => "12",
            ConstantId::C123 => "123",
            ConstantId::C4 => "4",
            ConstantId::C5 => "5",
            ConstantId::C6 => "6",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().trim_start_matches(['C', 'c']).trim_matches(['{', '}']).replace(',', "");
        Self::ALL.into_iter().find(|id| id.tag() == s)
    }

    /// `C_J(alpha, theta, h) = h^p C_J(alpha, theta)`.
    pub fn scaling_power(self) -> i32 {
        if self == ConstantId::C5 {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// How the lower end of an estimate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ExactRoot,
    ClosedForm,
    EigenLower,
    ChainUpper,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ExactRoot => "exact-root",
            Method::ClosedForm => "closed-form",
            Method::EigenLower => "eigen-lower",
            Method::ChainUpper => "chain-upper",
        }
    }
}

/// An upper value with the chain of facts it rests on.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    pub chain: String,
    /// `false` when any link is an extrapolated estimate.
    pub certified: bool,
}

impl UpperBound {
    fn new(value: f64, chain: impl Into<String>, certified: bool) -> Self {
        Self { value, chain: chain.into(), certified }
    }
}

/// `lower <= C_J(alpha, theta) <= upper`, the upper end labelled by its chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantEstimate {
    pub id: ConstantId,
    pub alpha: f64,
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub upper_chain: String,
    pub certified: bool,
}

impl ConstantEstimate {
    /// `(lower, upper)` on `T_{alpha,theta,h}`.
    pub fn scaled(&self, h: f64) -> (f64, f64) {
        let s = h.powi(self.id.scaling_power());
        (self.lower * s, self.upper * s)
    }

    /// Value of the CSV `method` column.
    pub fn method_label(&self) -> String {
        format!("{};upper={}", self.method.tag(), self.upper_chain)
    }
}

fn is_right_angle(theta: f64) -> bool {
    (theta - FRAC_PI_2).abs() <= 1e-12
}

/// Fortin constant bound from `c_i = C_i(alpha, theta)`.
pub fn c6_closed_form(alpha: f64, theta: f64, c1: f64, c2: f64) -> Result<f64> {
    TriangleShape::new(alpha, theta, 1.0)?;
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidInput("c1 and c2 must be positive".into()));
    }
    let (s, c) = theta.sin_cos();
    let root = (c1 * c1 + c2 * c2 + 2.0 * c1 * c2 * (2.0 * theta).cos()).max(0.0).sqrt();
    let e = c1 * c1 + c2 * c2 + 2.0 * c1 * c2 * c * c + (c1 + c2) * root;
    Ok(e.sqrt() / (std::f64::consts::SQRT_2 * s))
}

/// Eigenvalue Richardson extrapolation from `n` and `n/2`, then a relative
/// margin. An estimate, not a bound.
fn richardson_upper(id: ConstantId, shape: TriangleShape, n: usize) -> Result<f64> {
    let n = n.max(4);
    let fine = eigen_constant_lower_on(id, shape, n)?;
    let coarse = eigen_constant_lower_on(id, shape, n / 2)?;
    let (lf, lc) = (fine.powi(-2), coarse.powi(-2));
    let limit = lf - (lc - lf).max(0.0) / 3.0;
    if !(limit > 0.0) {
        return Err(Error::NotConverged { residual: limit });
    }
    Ok((limit.sqrt().recip() * (1.0 + ESTIMATE_MARGIN)).max(fine))
}

/// Upper value for an `H^1` constant on `T_{alpha,theta,1}`.
///
/// Right angle: monotonicity in `alpha` reduces to the known values at
/// `alpha = 1`. Otherwise `C_0 <= diam/pi` (convex domain) and the edge
/// constants fall back to extrapolated estimates.
pub fn upper_bound(id: ConstantId, alpha: f64, theta: f64, n: usize) -> Result<UpperBound> {
    let shape = TriangleShape::new(alpha, theta, 1.0)?;
    let right = is_right_angle(theta);
    Ok(match id {
        ConstantId::C0 => {
            let [_, a, b] = shape.vertices();
            let pw = (b - a).norm() / PI;
            if right && c0_exact() <= pw {
                UpperBound::new(c0_exact(), "alpha-monotone(1/pi)", true)
            } else {
                UpperBound::new(pw, "payne-weinberger(diam/pi)", true)
            }
        }
        ConstantId::C1 | ConstantId::C2 if right => {
            UpperBound::new(solve_c1_transcendental(), "alpha-monotone(C1 root)", true)
        }
        ConstantId::C12 if right => UpperBound::new(solve_c12_transcendental(), "alpha-monotone(C12 root)", true),
        ConstantId::C123 => {
            let c12 = upper_bound(ConstantId::C12, alpha, theta, n)?;
            UpperBound::new(c12.value, format!("C123<=C12:{}", c12.chain), c12.certified)
        }
        ConstantId::C1 | ConstantId::C2 | ConstantId::C3 | ConstantId::C12 => {
            UpperBound::new(richardson_upper(id, shape, n)?, "richardson-estimate+1%", false)
        }
        ConstantId::C4 => {
            let c0 = upper_bound(ConstantId::C0, alpha, theta, n)?;
            UpperBound::new(c0.value, format!("C4<=C0:{}", c0.chain), c0.certified)
        }
        ConstantId::C5 => {
            let c0 = upper_bound(ConstantId::C0, alpha, theta, n)?;
            let c123 = upper_bound(ConstantId::C123, alpha, theta, n)?;
            UpperBound::new(
                c0.value * c123.value,
                format!("C5<=C0*C123:{}*{}", c0.chain, c123.chain),
                c0.certified && c123.certified,
            )
        }
        ConstantId::C6 => {
            let c1 = upper_bound(ConstantId::C1, alpha, theta, n)?;
            let c2 = upper_bound(ConstantId::C2, alpha, theta, n)?;
            UpperBound::new(
                c6_closed_form(alpha, theta, c1.value, c2.value)?,
                format!("C6(c1,c2):{}", c1.chain),
                c1.certified && c2.certified,
            )
        }
    })
}

/// Bracket for `C_4` or `C_5`: polynomial-subspace lower bound of total
/// degree `poly_degree` and the chain upper bound.
pub fn c45_bracket(id: ConstantId, alpha: f64, theta: f64, poly_degree: usize) -> Result<ConstantEstimate> {
    c45_bracket_with(id, alpha, theta, poly_degree, UPPER_ESTIMATE_N)
}

fn c45_bracket_with(id: ConstantId, alpha: f64, theta: f64, poly_degree: usize, n: usize) -> Result<ConstantEstimate> {
    let quotient = match id {
        ConstantId::C4 => Quotient::Gradient,
        ConstantId::C5 => Quotient::Value,
        other => return Err(Error::InvalidInput(format!("c45_bracket expects J=4 or J=5, got {other}"))),
    };
    let shape = TriangleShape::new(alpha, theta, 1.0)?;
    let lower = polynomial_lower(quotient, shape, poly_degree)?;
    let up = upper_bound(id, alpha, theta, n)?;
    Ok(ConstantEstimate {
        id,
        alpha,
        theta,
        lower,
        upper: up.value.max(lower),
        method: Method::ChainUpper,
        upper_chain: up.chain,
        certified: up.certified,
    })
}

/// Exact values at the reference shape `(1, pi/2)`.
pub fn exact_estimate(id: ConstantId) -> Option<ConstantEstimate> {
    let (value, method, chain) = match id {
        ConstantId::C0 => (c0_exact(), Method::ClosedForm, "1/pi"),
        ConstantId::C1 | ConstantId::C2 => (solve_c1_transcendental(), Method::ExactRoot, "C1 root"),
        ConstantId::C12 => (solve_c12_transcendental(), Method::ExactRoot, "C12 root"),
        ConstantId::C6 => (solve_c1_transcendental(), Method::ClosedForm, "C6(C1,C1)"),
        _ => return None,
    };
    Some(ConstantEstimate {
        id,
        alpha: 1.0,
        theta: FRAC_PI_2,
        lower: value,
        upper: value,
        method,
        upper_chain: chain.into(),
        certified: true,
    })
}

/// One atlas point: eigen lower bounds (subdivision `n`) for the `H^1`
/// constants, the polynomial bracket for `C_4`, `C_5`, and the closed form
/// for `C_6`.
pub fn estimate(id: ConstantId, alpha: f64, theta: f64, n: usize, poly_degree: usize) -> Result<ConstantEstimate> {
    match id {
        ConstantId::C4 | ConstantId::C5 => c45_bracket_with(id, alpha, theta, poly_degree, n),
        ConstantId::C6 => {
            let lo1 = eigen_constant_lower(ConstantId::C1, alpha, theta, n)?;
            let lo2 = eigen_constant_lower(ConstantId::C2, alpha, theta, n)?;
            let lower = c6_closed_form(alpha, theta, lo1, lo2)?;
            let up = upper_bound(id, alpha, theta, n)?;
            Ok(ConstantEstimate {
                id,
                alpha,
                theta,
                lower: lower.min(up.value),
                upper: lower.max(up.value),
                method: Method::ClosedForm,
                upper_chain: up.chain,
                certified: up.certified,
            })
        }
        _ => {
            let lower = eigen_constant_lower(id, alpha, theta, n)?;
            let up = upper_bound(id, alpha, theta, n)?;
            Ok(ConstantEstimate {
                id,
                alpha,
                theta,
                lower,
                upper: up.value.max(lower),
                method: Method::EigenLower,
                upper_chain: up.chain,
                certified: up.certified,
            })
        }
    }
}

/// Certified-or-labelled upper constants for one element shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeConstants {
    pub c0: f64,
    pub c12: f64,
    pub c6: f64,
    pub certified: bool,
}

/// Upper values of `C_0`, `C_{1,2}`, `C_6` at `(alpha, theta)`.
pub fn shape_constants(alpha: f64, theta: f64, n: usize) -> Result<ShapeConstants> {
    let c0 = upper_bound(ConstantId::C0, alpha, theta, n)?;
    let c12 = upper_bound(ConstantId::C12, alpha, theta, n)?;
    let c6 = upper_bound(ConstantId::C6, alpha, theta, n)?;
    Ok(ShapeConstants {
        c0: c0.value,
        c12: c12.value,
        c6: c6.value,
        certified: c0.certified && c12.certified && c6.certified,
    })
}

/// One row of a constants atlas.
#[derive(Debug)]
pub struct AtlasEntry {
    pub id: ConstantId,
    pub alpha: f64,
    pub theta: f64,
    pub n: usize,
    pub poly_degree: usize,
    pub result: Result<ConstantEstimate>,
}

/// Estimates for every `(id, alpha)` pair, id-major, in parallel.
pub fn constants_atlas(ids: &[ConstantId], alphas: &[f64], theta: f64, n: usize, poly_degree: usize) -> Vec<AtlasEntry> {
    let pairs: Vec<(ConstantId, f64)> = ids.iter().flat_map(|&id| alphas.iter().map(move |&a| (id, a))).collect();
    par::map_slice(&pairs, |&(id, alpha)| AtlasEntry {
        id,
        alpha,
        theta,
        n,
        poly_degree,
        result: estimate(id, alpha, theta, n, poly_degree),
    })
}

pub const ATLAS_HEADER: &str = "J,alpha,theta,lower,upper,method,n,poly_degree";

/// Atlas CSV; failed points carry `nan` bounds and a `failed:` method.
pub fn write_atlas_csv<W: Write>(entries: &[AtlasEntry], mut w: W) -> Result<()> {
    writeln!(w, "{ATLAS_HEADER}")?;
    for e in entries {
        let (lower, upper, method) = match &e.result {
            Ok(est) => (fmt17(est.lower), fmt17(est.upper), est.method_label()),
            Err(err) => ("nan".into(), "nan".into(), format!("failed:{}", err.to_string().replace([',', '\n'], " "))),
        };
        writeln!(
            w,
            "{},{},{},{lower},{upper},{method},{},{}",
            e.id,
            fmt17(e.alpha),
            fmt17(e.theta),
            e.n,
            e.poly_degree
        )?;
    }
    Ok(())
}
