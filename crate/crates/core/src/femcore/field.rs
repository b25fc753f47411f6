use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::trimesh::Point2;

type ValueFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;

/// `||f||` and `|f|_1` over the unit square, known in closed form for the
/// builtin fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

/// A scalar function of the plane with an optional gradient.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    value: ValueFn,
    gradient: Option<GradientFn>,
    norms: Option<DataNorms>,
    constant: Option<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("gradient", &self.gradient.is_some())
            .field("norms", &self.norms)
            .finish()
    }
}

impl ScalarField {
    pub fn new(name: impl Into<String>, f: impl Fn(Point2) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), value: Arc::new(f), gradient: None, norms: None, constant: None }
    }

    pub fn with_gradient(mut self, g: impl Fn(Point2) -> Point2 + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_norms(mut self, l2: f64, h1_semi: f64) -> Self {
        self.norms = Some(DataNorms { l2, h1_semi });
        self
    }

    pub fn constant(c: f64) -> Self {
        let mut f = Self::new(format!("const:{c}"), move |_| c)
            .with_gradient(|_| Point2::new(0.0, 0.0))
            .with_norms(c.abs(), 0.0);
        f.constant = Some(c);
        f
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `sin(pi x1) sin(pi x2)`; `||f|| = 1/2`, `|f|_1 = pi/sqrt 2` on the unit square.
    pub fn sin_sin() -> Self {
        Self::new("sinsin", |x| (PI * x.x1).sin() * (PI * x.x2).sin())
            .with_gradient(|x| {
                Point2::new(
                    PI * (PI * x.x1).cos() * (PI * x.x2).sin(),
                    PI * (PI * x.x1).sin() * (PI * x.x2).cos(),
                )
            })
            .with_norms(0.5, PI / 2f64.sqrt())
    }

    /// `(1 / 2 pi^2) sin(pi x1) sin(pi x2)`, the solution for the load [`sin_sin`](Self::sin_sin).
    pub fn sin_sin_solution() -> Self {
        let s = 1.0 / (2.0 * PI * PI);
        Self::new("sinsin-solution", move |x| s * (PI * x.x1).sin() * (PI * x.x2).sin())
            .with_gradient(move |x| {
                Point2::new(
                    s * PI * (PI * x.x1).cos() * (PI * x.x2).sin(),
                    s * PI * (PI * x.x1).sin() * (PI * x.x2).cos(),
                )
            })
            .with_norms(s * 0.5, s * PI / 2f64.sqrt())
    }

    /// Quadratic `c[0] + c[1] x1 + c[2] x2 + c[3] x1^2 + c[4] x1 x2 + c[5] x2^2`
    /// with exact unit-square norms.
    pub fn quadratic(c: [f64; 6]) -> Self {
        let value = Poly2::new(&[
            (c[0], 0, 0),
            (c[1], 1, 0),
            (c[2], 0, 1),
            (c[3], 2, 0),
            (c[4], 1, 1),
            (c[5], 0, 2),
        ]);
        let (dx, dy) = (value.d1(), value.d2());
        let l2 = value.unit_square_l2_sq().sqrt();
        let h1 = (dx.unit_square_l2_sq() + dy.unit_square_l2_sq()).sqrt();
        let name = format!("poly:{}", c.map(|v| v.to_string()).join(":"));
        let v = value.clone();
        Self::new(name, move |x| v.eval(x))
            .with_gradient(move |x| Point2::new(dx.eval(x), dy.eval(x)))
            .with_norms(l2, h1)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: Point2) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: Point2) -> Option<Point2> {
        self.gradient.as_ref().map(|g| g(x))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn norms(&self) -> Option<DataNorms> {
        self.norms
    }

    /// The value if the field is a known constant.
    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }
}

/// Sparse bivariate polynomial `sum c x1^a x2^b`.
#[derive(Clone, Debug)]
struct Poly2 {
    terms: Vec<(f64, i32, i32)>,
}

impl Poly2 {
    fn new(terms: &[(f64, i32, i32)]) -> Self {
        Self { terms: terms.iter().copied().filter(|t| t.0 != 0.0).collect() }
    }

    fn eval(&self, x: Point2) -> f64 {
        self.terms.iter().map(|&(c, a, b)| c * x.x1.powi(a) * x.x2.powi(b)).sum()
    }

    fn d1(&self) -> Self {
        Self::new(&self.terms.iter().filter(|t| t.1 > 0).map(|&(c, a, b)| (c * a as f64, a - 1, b)).collect::<Vec<_>>())
    }

    fn d2(&self) -> Self {
        Self::new(&self.terms.iter().filter(|t| t.2 > 0).map(|&(c, a, b)| (c * b as f64, a, b - 1)).collect::<Vec<_>>())
    }

    fn unit_square_l2_sq(&self) -> f64 {
        let mut s = 0.0;
        for &(ci, ai, bi) in &self.terms {
            for &(cj, aj, bj) in &self.terms {
                s += ci * cj / (((ai + aj + 1) * (bi + bj + 1)) as f64);
            }
        }
        s
    }
}
