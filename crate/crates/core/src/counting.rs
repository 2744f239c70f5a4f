//! Exact component counting and size bounds.

use num_bigint::BigUint;
use num_traits::One;

/// Numerator of the constant c = 1133233/8! bounding s'(n)/n!.
pub const C_NUMERATOR: u64 = 1_133_233;
/// 8! = 40320, the denominator of c.
pub const C_DENOMINATOR: u64 = 40_320;

/// Number of distinct circuit components on n qubits, ignoring the CR
/// phase exponent k, via the exact recurrence
/// s'(n) = 3 s'(n-1) + 2(n-1) s'(n-2) + sum_{j=0}^{n-2} C(n-1,j)(n-j) s'(j)
/// with s'(0) = 1 and s'(n<0) = 0.
pub fn s_prime(n: usize) -> BigUint {
    let mut values: Vec<BigUint> = vec![BigUint::one()];
    for m in 1..=n {
        let mut v = &values[m - 1] * 3u32;
        if m >= 2 {
            v += &values[m - 2] * (2 * (m as u32 - 1));
        }
        if m >= 2 {
            // Pascal row C(m-1, j) built incrementally.
            let mut binom = BigUint::one();
            for j in 0..=m - 2 {
                v += &binom * (m - j) as u32 * &values[j];
                binom = binom * (m - 1 - j) as u32 / (j as u32 + 1);
            }
        }
        values.push(v);
    }
    values.pop().unwrap()
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).fold(BigUint::one(), |a, b| a * b)
}

/// Squared value of c * n^{n/2} * n! as an exact (numerator, denominator)
/// pair, avoiding any irrational intermediate for odd n.
fn bound_squared(n: usize) -> (BigUint, BigUint) {
    let fact = factorial(n);
    let num = BigUint::from(C_NUMERATOR).pow(2)
        * BigUint::from(n as u64).pow(n as u32)
        * (&fact * &fact);
    let den = BigUint::from(C_DENOMINATOR).pow(2);
    (num, den)
}

/// Upper bound on s(n): ceil(c * n^{n/2} * n!), exact for even n and the
/// ceiling of the real value for odd n.
pub fn component_count_bound(n: usize) -> BigUint {
    let (num, den) = bound_squared(n);
    // Smallest m with m^2 * den >= num.
    let mut m = (&num / &den).sqrt();
    while &m * &m * &den < num {
        m += 1u32;
    }
    m
}

/// ceil(log2(c * n^{n/2} * n!)), the paper-level bit-string size bound,
/// computed in exact integer arithmetic.
pub fn bitstring_size_bound(n: usize) -> u32 {
    let (num, den) = bound_squared(n);
    // Smallest b with 4^b * den >= num, i.e. 2^b >= c n^{n/2} n!.
    let mut b = 0u32;
    let mut pow = den;
    while pow < num {
        pow <<= 2;
        b += 1;
    }
    b
}

/// Upper bound on compiled factorization-circuit depth:
/// 96 * floor(log2 a) * floor(log2 N)^2.
pub fn max_depth(n: u64, a: u64) -> u64 {
    assert!(n >= 3 && a > 1 && a < n, "need N >= 3 and 1 < a < N");
    96 * a.ilog2() as u64 * (n.ilog2() as u64).pow(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_prime_small_values() {
        assert_eq!(s_prime(0), BigUint::from(1u32));
        assert_eq!(s_prime(1), BigUint::from(3u32));
        assert_eq!(s_prime(2), BigUint::from(13u32));
        assert_eq!(s_prime(3), BigUint::from(66u32));
    }

    #[test]
    fn s_prime_peak_ratio_value() {
        assert_eq!(s_prime(8), BigUint::from(C_NUMERATOR));
    }

    #[test]
    fn size_bound_examples() {
        assert_eq!(bitstring_size_bound(1), 5);
        assert_eq!(bitstring_size_bound(5), 18);
    }

    #[test]
    fn size_bound_monotone() {
        for n in 1..=20 {
            assert!(bitstring_size_bound(n + 1) > bitstring_size_bound(n));
        }
    }

    #[test]
    fn count_bound_dominates_s_prime() {
        // s(n) <= n^{n/2} s'(n) <= c n^{n/2} n!; check the outer bound
        // against s'(n) * n^{n/2} for even n where n^{n/2} is exact.
        for n in [2usize, 4, 6, 8] {
            let exact = s_prime(n) * BigUint::from(n as u64).pow(n as u32 / 2);
            assert!(component_count_bound(n) >= exact);
        }
    }

    #[test]
    fn max_depth_examples() {
        assert_eq!(max_depth(21, 4), 3072);
        assert_eq!(max_depth(15, 11), 2592);
        assert_eq!(max_depth(3, 2), 96);
    }
}
