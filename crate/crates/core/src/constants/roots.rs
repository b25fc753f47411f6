use std::f64::consts::{FRAC_PI_2, PI};

/// Smallest root of `tan t = -t` in `(pi/2, pi)`.
///
/// Works on `g(t) = sin t + t cos t`, which has the same root there but no
/// pole: bisection to width `1e-14`, then three Newton steps.
fn tan_root() -> f64 {
    let g = |t: f64| t.sin() + t * t.cos();
    let (mut lo, mut hi) = (FRAC_PI_2 + 1e-9, PI - 1e-9);
    // g(lo) > 0 > g(hi)
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let dg = 2.0 * t.cos() - t * t.sin();
        let step = g(t) / dg;
        if step.is_finite() {
            t -= step;
        }
    }
    t
}

/// `C_0 = 1/pi` on the right isosceles reference triangle.
pub fn c0_exact() -> f64 {
    1.0 / PI
}

/// `C_1 = C_2`: the largest positive root of `1/mu + tan(1/mu) = 0`.
pub fn solve_c1_transcendental() -> f64 {
    1.0 / tan_root()
}

/// `C_{1,2}`: the largest positive root of `1/(2 mu) + tan(1/(2 mu)) = 0`.
pub fn solve_c12_transcendental() -> f64 {
    0.5 / tan_root()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c1_root() {
        let mu = solve_c1_transcendental();
        assert!((mu - 0.4929124516).abs() < 1e-9);
        assert!(mu > 0.49282 && mu < 0.49294);
        assert!((1.0 / mu + (1.0 / mu).tan()).abs() < 1e-12);
    }

    #[test]
    fn c12_root() {
        let mu = solve_c12_transcendental();
        assert!((mu - 0.2464562258).abs() < 1e-9);
        assert!(mu > 0.24641 && mu < 0.24647 && mu < 0.25);
        let t = 0.5 / mu;
        assert!((t + t.tan()).abs() < 1e-12);
        assert!((mu - solve_c1_transcendental() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn root_is_the_smallest_in_the_interval() {
        let t = tan_root();
        // tan t + t keeps one sign on (pi/2, t)
        for k in 1..100 {
            let s = FRAC_PI_2 + (t - FRAC_PI_2) * k as f64 / 100.0;
            assert!(s.tan() + s < 0.0);
        }
    }
}
