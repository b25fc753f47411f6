use std::f64::consts::{FRAC_PI_2, PI};

use super::{is_degenerate, signed_area, Point2};
use crate::error::{Error, Result};

const RANGE_TOL: f64 = 1e-12;

/// Shape parameters of the reference triangle `T_{alpha,theta,h}` with
/// vertices `O(0,0)`, `A(h,0)` and `B(alpha h cos theta, alpha h sin theta)`.
///
/// `h` is the medium edge length, `alpha h` the shortest and `AB` the longest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleShape {
    pub alpha: f64,
    pub theta: f64,
    pub h: f64,
}

impl TriangleShape {
    /// Validated constructor.
    pub fn new(alpha: f64, theta: f64, h: f64) -> Result<Self> {
        if !Self::in_range(alpha, theta) || !(h > 0.0 && h.is_finite()) {
            return Err(Error::ShapeOutOfRange { alpha, theta });
        }
        Ok(Self { alpha, theta, h })
    }

    /// `0 < alpha <= 1` and `acos(alpha/2) <= theta < pi`, with a `1e-12`
    /// slack on the lower angle bound for rounding.
    pub fn in_range(alpha: f64, theta: f64) -> bool {
        alpha > 0.0
            && alpha <= 1.0 + RANGE_TOL
            && theta < PI
            && theta + RANGE_TOL >= (alpha.min(1.0) / 2.0).acos()
    }

    /// The right isosceles shape `(1, pi/2)`.
    pub fn is_reference(&self) -> bool {
        (self.alpha - 1.0).abs() <= 1e-12 && (self.theta - FRAC_PI_2).abs() <= 1e-12
    }

    /// Vertices `O`, `A`, `B`.
    pub fn vertices(&self) -> [Point2; 3] {
        let (s, c) = self.theta.sin_cos();
        [
            Point2::new(0.0, 0.0),
            Point2::new(self.h, 0.0),
            Point2::new(self.alpha * self.h * c, self.alpha * self.h * s),
        ]
    }

    /// Same `(alpha, theta)` with a new `h`.
    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }
}

/// Maps a triangle onto `T_{alpha,theta,h}` by a congruence.
///
/// Reflections are allowed: the constants depend only on `(alpha, theta, h)`.
/// Equal-length edges are ordered by their sorted local vertex indices.
pub fn classify_shape(p: &[Point2; 3]) -> Result<TriangleShape> {
    if is_degenerate(p) {
        return Err(Error::Degenerate { index: 0, area: signed_area(p[0], p[1], p[2]) });
    }
    // edge i joins the two vertices other than i
    let mut edges: [(f64, [usize; 2], usize); 3] = std::array::from_fn(|i| {
        let a = (i + 1) % 3;
        let b = (i + 2) % 3;
        ((p[b] - p[a]).norm(), [a.min(b), a.max(b)], i)
    });
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (short, medium, longest) = (edges[0], edges[1], edges[2]);

    // shortest and medium edges meet at the vertex opposite the longest one
    let apex = longest.2;
    let u = p[(apex + 1) % 3] - p[apex];
    let v = p[(apex + 2) % 3] - p[apex];
    let theta = u.cross(v).abs().atan2(u.dot(v));

    let h = medium.0;
    let alpha = short.0 / h;
    if !TriangleShape::in_range(alpha, theta) {
        return Err(Error::ShapeOutOfRange { alpha, theta });
    }
    Ok(TriangleShape { alpha: alpha.min(1.0), theta, h })
}
