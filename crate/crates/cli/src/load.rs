//! Load specifications: `builtin:sinsin`, `builtin:const:c`,
//! `builtin:poly:c0:c1:c2:c3:c4:c5` (the `builtin:` prefix is optional).

use femcert::femcore::ScalarField;

/// A parsed load and, when known, the exact solution on the unit square.
pub struct Load {
    pub f: ScalarField,
    pub exact: Option<ScalarField>,
}

pub fn parse_load(spec: &str) -> Result<Load, String> {
    let body = spec.strip_prefix("builtin:").unwrap_or(spec);
    let mut parts = body.split(':');
    let kind = parts.next().unwrap_or_default();
    let nums: Result<Vec<f64>, String> = parts
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in load `{spec}`")))
        .collect();
    let nums = nums?;
    if nums.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite coefficient in load `{spec}`"));
    }
    match (kind, nums.as_slice()) {
        ("sinsin", []) => Ok(Load { f: ScalarField::sin_sin(), exact: Some(ScalarField::sin_sin_solution()) }),
        ("const", [c]) => Ok(Load {
            f: ScalarField::constant(*c),
            exact: (*c == 0.0).then(ScalarField::zero),
        }),
        ("poly", c) if c.len() == 6 => Ok(Load {
            f: ScalarField::quadratic([c[0], c[1], c[2], c[3], c[4], c[5]]),
            exact: None,
        }),
        _ => Err(format!(
            "unknown load `{spec}`; expected builtin:sinsin, builtin:const:C or builtin:poly:C0:C1:C2:C3:C4:C5"
        )),
    }
}
