//! Classical side of period finding: modular arithmetic, continued
//! fraction convergents, period validation and factor recovery, plus the
//! ideal phase-estimation distribution used as a reference oracle.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::statevec::Distribution;

/// An odd semiprime together with the chosen coprime base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorInstance {
    pub n: u64,
    pub a: u64,
    pub r: Option<u64>,
    pub p: Option<u64>,
    pub q: Option<u64>,
}

impl FactorInstance {
    pub fn new(n: u64, a: u64) -> Result<Self> {
        if n < 9 || n % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "N = {n} is not an odd semiprime candidate"
            )));
        }
        if a <= 1 || a >= n || gcd(a, n) != 1 {
            return Err(Error::InvalidArgument(format!(
                "base a = {a} must satisfy 1 < a < N and gcd(a, N) = 1"
            )));
        }
        Ok(FactorInstance {
            n,
            a,
            r: None,
            p: None,
            q: None,
        })
    }

    pub fn with_order(mut self) -> Self {
        self.r = Some(multiplicative_order(self.a, self.n));
        self
    }
}

pub fn gcd(u: u64, v: u64) -> u64 {
    u.gcd(&v)
}

/// Square-and-multiply a^x mod N.
pub fn modexp(a: u64, x: u64, n: u64) -> u64 {
    assert!(n >= 2);
    let mut base = (a % n) as u128;
    let n = n as u128;
    let mut result = 1u128;
    let mut x = x;
    while x > 0 {
        if x & 1 == 1 {
            result = result * base % n;
        }
        base = base * base % n;
        x >>= 1;
    }
    result as u64
}

/// Smallest r >= 1 with a^r = 1 mod N, by brute force.
pub fn multiplicative_order(a: u64, n: u64) -> u64 {
    assert!(gcd(a, n) == 1, "order undefined for gcd(a, N) > 1");
    let mut v = a % n;
    let mut r = 1;
    while v != 1 {
        v = v * (a % n) % n;
        r += 1;
    }
    r
}

/// Continued-fraction convergent d/s of y/2^t, kept when s < N and
/// |d/s - y/2^t| < 1/2^{t+1}, all comparisons in exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentCandidate {
    pub d: u64,
    pub s: u64,
    pub error: Ratio<u64>,
}

/// Filtered convergents of y/2^t in increasing denominator order.
pub fn convergents(y: u64, t: u32, n: u64) -> Vec<ConvergentCandidate> {
    assert!(y < 1 << t);
    let target = Ratio::new(y, 1u64 << t);
    let cutoff = Ratio::new(1, 1u64 << (t + 1));

    let mut out = Vec::new();
    // Convergent recurrence d_i = q_i d_{i-1} + d_{i-2}, same for s.
    let (mut num, mut den) = (y, 1u64 << t);
    let (mut d_prev, mut d) = (0u64, 1u64);
    let (mut s_prev, mut s) = (1u64, 0u64);
    loop {
        let q = num / den;
        let (d_next, s_next) = (q * d + d_prev, q * s + s_prev);
        (d_prev, d) = (d, d_next);
        (s_prev, s) = (s, s_next);

        let value = Ratio::new(d, s);
        let error = if value > target {
            value - target
        } else {
            target - value
        };
        if s < n && error < cutoff {
            out.push(ConvergentCandidate { d, s, error });
        }
        let rem = num % den;
        if rem == 0 {
            break;
        }
        (num, den) = (den, rem);
    }
    out
}

/// Half power a^{s/2} mod N, where for odd s the square-root convention
/// a = w^2 gives a^{s/2} = w^s. None when s is odd and a is not a square.
fn half_power(s: u64, a: u64, n: u64) -> Option<u64> {
    if s % 2 == 0 {
        Some(modexp(a, s / 2, n))
    } else {
        let w = (a as f64).sqrt().round() as u64;
        (w * w == a).then(|| modexp(w, s, n))
    }
}

/// True iff s is a usable period: a^s = 1 mod N, the half power exists
/// (s even, or s odd with a a perfect square), and a^{s/2} != -1 mod N.
pub fn validate_period(s: u64, a: u64, n: u64) -> bool {
    if s == 0 || a <= 1 || a >= n || gcd(a, n) != 1 {
        return false;
    }
    if modexp(a, s, n) != 1 {
        return false;
    }
    match half_power(s, a, n) {
        Some(h) => h != n - 1,
        None => false,
    }
}

/// p = gcd(a^{r/2} + 1, N), q = gcd(a^{r/2} - 1, N). Ok(None) when a gcd
/// degenerates to 1 or N.
pub fn factors_from_period(r: u64, a: u64, n: u64) -> Result<Option<(u64, u64)>> {
    if !validate_period(r, a, n) {
        return Err(Error::InvalidPeriod { period: r, a, n });
    }
    let h = half_power(r, a, n).expect("validated period has a half power");
    let p = gcd(h + 1, n);
    let q = gcd(h - 1, n);
    if p == 1 || p == n || q == 1 || q == n {
        return Ok(None);
    }
    Ok(Some((p, q)))
}

/// Scan each candidate s, then offsets -1, +1, ..., -radius, +radius,
/// then multiples 2s .. max_multiple*s, returning the first value that
/// validates as a period.
pub fn heuristic_extend(
    candidates: &[u64],
    a: u64,
    n: u64,
    radius: u64,
    max_multiple: u64,
) -> Option<u64> {
    assert!(radius >= 1 && max_multiple >= 1);
    for &s in candidates {
        let mut trials = vec![s];
        for o in 1..=radius {
            if s > o {
                trials.push(s - o);
            }
            trials.push(s + o);
        }
        for m in 2..=max_multiple {
            trials.push(m * s);
        }
        for trial in trials {
            if validate_period(trial, a, n) {
                return Some(trial);
            }
        }
    }
    None
}

pub const DEFAULT_HEURISTIC_RADIUS: u64 = 2;
pub const DEFAULT_HEURISTIC_MAX_MULTIPLE: u64 = 4;

/// Full post-processing of one first-register outcome y: convergents,
/// validation in increasing-s order, optional heuristic rescue.
pub fn recover_period(y: u64, t: u32, a: u64, n: u64, heuristic: bool) -> Option<u64> {
    let candidates = convergents(y, t, n);
    for cand in &candidates {
        if validate_period(cand.s, a, n) {
            return Some(cand.s);
        }
    }
    if heuristic {
        let ss: Vec<u64> = candidates.iter().map(|c| c.s).collect();
        return heuristic_extend(
            &ss,
            a,
            n,
            DEFAULT_HEURISTIC_RADIUS,
            DEFAULT_HEURISTIC_MAX_MULTIPLE,
        );
    }
    None
}

/// Exact first-register distribution of uncompiled period finding:
/// P(y) = 2^{-2t} sum_v |sum_{x: a^x = v} e^{2 pi i x y / 2^t}|^2.
pub fn ideal_qpe_distribution(n: u64, a: u64, t: u32) -> Distribution {
    assert!(t <= 12);
    let size = 1usize << t;
    let r = multiplicative_order(a, n) as usize;
    let mut probs = vec![0.0f64; size];
    for (y, p) in probs.iter_mut().enumerate() {
        let mut total = 0.0;
        for branch in 0..r.min(size) {
            // Geometric sum over x = branch, branch + r, ... below 2^t.
            let (mut re, mut im) = (0.0f64, 0.0f64);
            let mut x = branch;
            while x < size {
                let phase = 2.0 * std::f64::consts::PI * (x as f64) * (y as f64) / size as f64;
                re += phase.cos();
                im += phase.sin();
                x += r;
            }
            total += re * re + im * im;
        }
        *p = total / (size * size) as f64;
    }
    Distribution::from_probs((0..t as usize).collect(), probs)
}
