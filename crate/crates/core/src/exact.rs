//! Exact-rational arithmetic. Every stored `f64` is read as the dyadic
//! rational it denotes, so comparisons made here carry no rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::num;

pub fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Rational approximation of a rational to a float (for reporting only).
pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(num_a / den_a) * (num_b / den_b) <= bound`, decided exactly.
pub fn ratio_product_le(num_a: f64, den_a: f64, num_b: f64, den_b: f64, bound: f64) -> bool {
    let lhs = to_rational(num_a) * to_rational(num_b);
    let rhs = to_rational(bound) * to_rational(den_a) * to_rational(den_b);
    lhs <= rhs
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

const U: f64 = f64::EPSILON;

/// Certified check of `sum_{i in subset} w_i^psi >= (sum_i w_i)^psi`.
///
/// Powers with a non-integer exponent are irrational in general, so the two
/// sides are bracketed with outward rounding (libm `pow` is faithful to
/// within one ulp) and the inequality is accepted only if the lower
/// bracket of the left side clears the upper bracket of the right side.
/// Cases where the two sides can coincide exactly are settled
/// symbolically: the full set (subadditivity of `x^psi` for `psi <= 1`),
/// `psi = 0`, and equal weights, where the condition reads `m >= n^psi` and
/// is decided in integers as `m^q >= n^p` for a rational `p/q >= psi`.
pub fn weighted_condition_certified(weights: &[f64], subset: &[usize], psi: f64) -> bool {
    if subset.is_empty() {
        return false;
    }
    if psi == 0.0 {
        return true;
    }
    if psi <= 1.0 && is_full(subset, weights.len()) {
        return true;
    }
    let (lhs_lo, rhs_hi) = weighted_brackets(weights, subset, psi);
    if lhs_lo >= rhs_hi {
        return true;
    }
    weights.windows(2).all(|w| w[0] == w[1]) && count_exceeds_power(subset.len() as u64, weights.len() as u64, psi)
}

/// Sufficient integer test for `m >= n^psi`: some `p/q >= psi` with `q <= 64`
/// and `m^q >= n^p`.
pub fn count_exceeds_power(m: u64, n: u64, psi: f64) -> bool {
    use num_traits::Pow;
    if !(psi.is_finite() && psi >= 0.0) {
        return false;
    }
    let r = to_rational(psi);
    let (bm, bn) = (BigInt::from(m), BigInt::from(n));
    (1u32..=64).any(|q| {
        let p = (r.clone() * BigInt::from(q)).ceil().to_integer();
        match u32::try_from(p) {
            Ok(p) => Pow::pow(&bm, q) >= Pow::pow(&bn, p),
            Err(_) => false,
        }
    })
}

/// Lower bracket of the left side and upper bracket of the right side.
pub fn weighted_brackets(weights: &[f64], subset: &[usize], psi: f64) -> (f64, f64) {
    let n = weights.len() as f64;
    let m = subset.len() as f64;
    let total: f64 = weights.iter().sum();
    let total_hi = total * (1.0 + (n + 2.0) * U);
    let rhs_hi = num::pow(total_hi, psi) * (1.0 + 4.0 * U);
    let lhs: f64 = subset.iter().map(|&i| num::pow(weights[i], psi)).sum();
    let lhs_lo = lhs * (1.0 - 4.0 * U) * (1.0 - (m + 2.0) * U);
    (lhs_lo, rhs_hi)
}

fn is_full(subset: &[usize], n: usize) -> bool {
    if subset.len() != n {
        return false;
    }
    let mut seen = alloc::vec![false; n];
    for &i in subset {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 3), BigInt::from(220));
        assert_eq!(binomial(24, 12), BigInt::from(2_704_156));
        assert_eq!(binomial(3, 5), BigInt::zero());
    }

    #[test]
    fn ratio_product_exact() {
        // (3/2) * (1/1) <= 1.5 holds with equality.
        assert!(ratio_product_le(3.0, 2.0, 1.0, 1.0, 1.5));
        assert!(!ratio_product_le(3.0, 2.0, 1.0, 1.0, 1.4999999999999998));
    }

    #[test]
    fn weighted_condition_cases() {
        let w = [1.0; 16];
        // 4 >= 16^(1/2) is an equality: brackets alone cannot certify it,
        // the integer route for equal weights does.
        let (lo, hi) = weighted_brackets(&w, &[0, 1, 2, 3], 0.5);
        assert!(lo < hi);
        assert!(weighted_condition_certified(&w, &[0, 1, 2, 3], 0.5));
        assert!(!weighted_condition_certified(&w, &[0, 1, 2], 0.5));
        let uneven = [1.0, 1.0, 1.0, 13.0];
        assert!(!weighted_condition_certified(&uneven, &[0, 1, 2], 0.5));
        assert!(weighted_condition_certified(&uneven, &[2, 3], 0.5));
        assert!(weighted_condition_certified(&w, &[0, 1, 2, 3], 0.49));
        assert!(weighted_condition_certified(&w, &(0..16).collect::<alloc::vec::Vec<_>>(), 1.0));
        assert!(weighted_condition_certified(&w, &[3], 0.0));
        assert!(!weighted_condition_certified(&w, &[], 0.0));
        let v = [3.0; 16];
        assert!(weighted_condition_certified(&v, &[0, 1, 2, 3], 0.5));
        assert!(!weighted_condition_certified(&v, &[0, 1, 2], 0.5));
    }

    #[test]
    fn integer_power_route() {
        // 4^3 = 64 = 8^2, so 4 >= 8^(2/3) holds with equality; the float
        // 2.0/3.0 sits just below 2/3.
        assert!(count_exceeds_power(4, 8, 2.0 / 3.0));
        assert!(!count_exceeds_power(3, 8, 2.0 / 3.0));
        assert!(count_exceeds_power(1, 1, 0.37));
    }
}
