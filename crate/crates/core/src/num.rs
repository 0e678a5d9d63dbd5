//! Float helpers for `no_std` plus error-free comparisons used by exact mode.

/// Relative slack used by every float-mode inequality check.
pub const REL_TOL: f64 = 1e-9;

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}
#[inline]
pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `a <= b` up to relative slack `REL_TOL`.
#[inline]
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * abs(b).max(abs(a))
}

/// Ceiling with a small guard so that values like `2.0000000000001` coming
/// out of a log ratio do not round up to 3.
pub fn guarded_ceil(x: f64) -> f64 {
    ceil(x - 1e-12 * abs(x).max(1.0))
}

/// Exact sign of `a + b - c` for finite floats (no rounding).
pub fn sum_cmp(a: f64, b: f64, c: f64) -> core::cmp::Ordering {
    use core::cmp::Ordering::*;
    let s = a + b;
    // TwoSum: s + e == a + b exactly.
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    if s > c {
        Greater
    } else if s < c {
        Less
    } else if e > 0.0 {
        Greater
    } else if e < 0.0 {
        Less
    } else {
        Equal
    }
}

/// Exact sign of `a * b - c` for finite floats without overflow.
pub fn prod_cmp(a: f64, b: f64, c: f64) -> core::cmp::Ordering {
    use core::cmp::Ordering::*;
    let p = a * b;
    let e = libm::fma(a, b, -p);
    if p > c {
        Greater
    } else if p < c {
        Less
    } else if e > 0.0 {
        Greater
    } else if e < 0.0 {
        Less
    } else {
        Equal
    }
}

/// Exact comparison of the fractions `a/b` and `c/d` with positive denominators.
pub fn frac_cmp(a: f64, b: f64, c: f64, d: f64) -> core::cmp::Ordering {
    use crate::exact::to_rational;
    // Fast path: the float quotients differ by more than rounding can explain.
    let x = a / b;
    let y = c / d;
    if x > y * (1.0 + 1e-14) {
        return core::cmp::Ordering::Greater;
    }
    if y > x * (1.0 + 1e-14) {
        return core::cmp::Ordering::Less;
    }
    (to_rational(a) * to_rational(d)).cmp(&(to_rational(c) * to_rational(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::cmp::Ordering::*;

    #[test]
    fn sum_cmp_sees_past_rounding() {
        // 0.1 + 0.2 rounds to 0.30000000000000004, but the exact sum is
        // slightly above the double nearest to 0.3.
        assert_eq!(sum_cmp(0.1, 0.2, 0.3), Greater);
        assert_eq!(sum_cmp(1.0, 1.0, 2.0), Equal);
        assert_eq!(sum_cmp(1.0, 1e-30, 1.0), Greater);
        assert_eq!(sum_cmp(1.0, -1e-30, 1.0), Less);
    }

    #[test]
    fn prod_cmp_exact() {
        assert_eq!(prod_cmp(3.0, 1.0 / 3.0, 1.0), Less);
        assert_eq!(prod_cmp(0.5, 4.0, 2.0), Equal);
    }

    #[test]
    fn frac_cmp_equal_fractions() {
        assert_eq!(frac_cmp(3.0, 2.0, 6.0, 4.0), Equal);
        assert_eq!(frac_cmp(1.0, 3.0, 0.3333333333333333, 1.0), Greater);
    }

    #[test]
    fn guarded_ceil_absorbs_noise() {
        assert_eq!(guarded_ceil(2.0 + 1e-14), 2.0);
        assert_eq!(guarded_ceil(2.1), 3.0);
    }
}
