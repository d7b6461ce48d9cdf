//! Degree-based trigonometry with exact quadrant symmetries.
//!
//! For angles whose half-turn shift is exactly representable,
//! `cos_sin_deg(a + 180)` is the bitwise negation of `cos_sin_deg(a)`. Code matrices
//! rely on this so that mirrored steering targets produce mirrored bits.

/// Returns `(cos a, sin a)` for `a` in degrees.
pub fn cos_sin_deg(deg: f64) -> (f64, f64) {
    let a = deg.rem_euclid(360.0);
    let (quadrant, r) = if a < 90.0 {
        (0, a)
    } else if a < 180.0 {
        (1, a - 90.0)
    } else if a < 270.0 {
        (2, a - 180.0)
    } else {
        (3, a - 270.0)
    };
    let (c, s) = base(r);
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

pub fn sin_deg(deg: f64) -> f64 {
    cos_sin_deg(deg).1
}

pub fn cos_deg(deg: f64) -> f64 {
    cos_sin_deg(deg).0
}

// r in [0, 90)
fn base(r: f64) -> (f64, f64) {
    if r == 0.0 {
        (1.0, 0.0)
    } else if r == 45.0 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        (h, h)
    } else if r > 45.0 {
        let (c, s) = base_small(90.0 - r);
        (s, c)
    } else {
        base_small(r)
    }
}

fn base_small(r: f64) -> (f64, f64) {
    let x = r.to_radians();
    (x.cos(), x.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinal_angles_are_exact() {
        assert_eq!(cos_sin_deg(0.0), (1.0, 0.0));
        assert_eq!(cos_sin_deg(90.0), (0.0, 1.0));
        assert_eq!(cos_sin_deg(180.0), (-1.0, -0.0));
        assert_eq!(cos_sin_deg(270.0).1, -1.0);
        assert_eq!(sin_deg(30.0), 30f64.to_radians().sin());
    }

    #[test]
    fn half_turn_negates_exactly() {
        for k in 0..720 {
            let a = k as f64 * 0.25 - 50.0;
            let (c0, s0) = cos_sin_deg(a);
            let (c1, s1) = cos_sin_deg(a + 180.0);
            assert_eq!(c1, -c0, "cos at {a}");
            assert_eq!(s1, -s0, "sin at {a}");
        }
    }

    #[test]
    fn matches_std_trig() {
        for k in 0..3600 {
            let a = k as f64 * 0.1;
            let (c, s) = cos_sin_deg(a);
            assert!((c - a.to_radians().cos()).abs() < 1e-14);
            assert!((s - a.to_radians().sin()).abs() < 1e-14);
        }
    }
}
