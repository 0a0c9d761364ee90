//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// 3j symbol from Racah's single-sum formula in exact rationals.
/// Arguments are doubled; the caller guarantees |m| ≤ j and matching parities.
pub fn racah_3j(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 || tj3 < (tj1 - tj2).abs() || tj3 > tj1 + tj2 || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    let half = |x: i64| {
        assert!(x % 2 == 0, "odd doubled combination");
        x / 2
    };
    let triangle = BigRational::new(
        factorial(half(tj1 + tj2 - tj3)) * factorial(half(tj1 - tj2 + tj3)) * factorial(half(-tj1 + tj2 + tj3)),
        factorial(half(tj1 + tj2 + tj3) + 1),
    );
    let mut projections = BigInt::one();
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        projections *= factorial(half(tj + tm)) * factorial(half(tj - tm));
    }
    let mut sum = BigRational::zero();
    for k in 0..=half(tj1 + tj2 + tj3) {
        let args = [
            k,
            half(tj3 - tj2 + tm1) + k,
            half(tj3 - tj1 - tm2) + k,
            half(tj1 + tj2 - tj3) - k,
            half(tj1 - tm1) - k,
            half(tj2 + tm2) - k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let den = args.iter().fold(BigInt::one(), |acc, &a| acc * factorial(a));
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let square = triangle * BigRational::from_integer(projections) * &sum * &sum;
    let magnitude = square.to_f64().expect("finite").sqrt();
    let phase = half(tj1 - tj2 - tm3).rem_euclid(2);
    let sign = if phase == 0 { 1.0 } else { -1.0 };
    if sum.is_negative() {
        -sign * magnitude
    } else {
        sign * magnitude
    }
}

/// Every valid doubled argument tuple with all j ≤ `max_j`.
pub fn all_3j_arguments(max_j: i64) -> Vec<[i64; 6]> {
    let top = 2 * max_j;
    let mut out = Vec::new();
    for tj1 in 0..=top {
        for tj2 in 0..=top {
            for tj3 in 0..=top {
                for tm1 in (-tj1..=tj1).step_by(2) {
                    for tm2 in (-tj2..=tj2).step_by(2) {
                        let tm3 = -tm1 - tm2;
                        if tm3.abs() > tj3 || (tj3 + tm3) % 2 != 0 {
                            continue;
                        }
                        out.push([tj1, tj2, tj3, tm1, tm2, tm3]);
                    }
                }
            }
        }
    }
    out
}
