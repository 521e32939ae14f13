//! Small integer helpers: primality, p-adic valuation of integers and rationals.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const WITNESSES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Miller-Rabin with the first sixteen primes as witnesses. Deterministic
/// below 3.3e24, probabilistic beyond.
pub fn is_probable_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    let n = n.magnitude().clone();
    for w in WITNESSES {
        let w = BigUint::from(w);
        if n == w {
            return true;
        }
        if (&n % &w).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = &n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for w in WITNESSES {
        let mut x = BigUint::from(w).modpow(&d, &n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % &n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Splits a nonzero integer as `p^v * rest` with `p` not dividing `rest`.
pub fn split_valuation(n: &BigInt, p: &BigInt) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let mut v = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(p);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

/// The p-adic valuation of a rational; `None` for zero.
pub fn rational_valuation(x: &BigRational, p: &BigInt) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let (a, _) = split_valuation(x.numer(), p);
    let (b, _) = split_valuation(x.denom(), p);
    Some(a - b)
}

pub fn pow(p: &BigInt, e: i64) -> BigInt {
    debug_assert!(e >= 0);
    num_traits::pow(p.clone(), e as usize)
}

/// Least non-negative residue.
pub fn modulo(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a % m;
    if r.is_negative() {
        r + m
    } else {
        r
    }
}

/// Inverse of a unit modulo `m`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = modulo(a, m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(modulo(&e.x, m))
}

/// Integer k-th root if `n` is a perfect k-th power.
pub fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        if k % 2 == 0 {
            return None;
        }
        return exact_root(&-n, k).map(|r| -r);
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

pub fn to_i64(n: &BigInt) -> Option<i64> {
    n.to_i64()
}
