//! Wigner 3j symbols and direction-cosine matrix elements in the symmetric-top basis.
//!
//! Angular momenta are passed around as doubled integers internally so that
//! half-integer arguments are exact. Phase conventions are Condon–Shortley.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest doubled angular momentum sum we keep factorials for.
const MAX_FACTORIAL: usize = 400;

fn factorials() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(MAX_FACTORIAL + 1);
        let mut acc = BigUint::one();
        table.push(acc.clone());
        for n in 1..=MAX_FACTORIAL {
            acc *= n;
            table.push(acc.clone());
        }
        table
    })
}

fn factorial(n: i64) -> &'static BigUint {
    &factorials()[n as usize]
}

const PASCAL_ROWS: usize = 128;

fn pascal() -> &'static [Vec<u128>] {
    static TABLE: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(PASCAL_ROWS);
        for n in 0..PASCAL_ROWS {
            let mut row = vec![1u128; n + 1];
            for r in 1..n {
                row[r] = rows[n - 1][r - 1] + rows[n - 1][r];
            }
            rows.push(row);
        }
        rows
    })
}

fn binomial(n: i64, r: i64) -> BigUint {
    if r < 0 || r > n {
        return BigUint::zero();
    }
    if (n as usize) < PASCAL_ROWS {
        return BigUint::from(pascal()[n as usize][r as usize]);
    }
    factorial(n) / (factorial(r) * factorial(n - r))
}

/// Wigner 3j symbol with every argument given as twice its value.
///
/// Returns zero when the triangle or projection conditions fail; errors on a
/// negative angular momentum, |m| > j, or mismatched integer/half-integer parity.
pub fn wigner3j_doubled(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> Result<f64> {
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if tj < 0 {
            return Err(Error::Domain(format!("negative angular momentum j = {}/2", tj)));
        }
        if tm.abs() > tj {
            return Err(Error::Domain(format!("|m| = {}/2 exceeds j = {}/2", tm.abs(), tj)));
        }
        if (tj + tm) % 2 != 0 {
            return Err(Error::Domain(format!(
                "j - m not integer for j = {}/2, m = {}/2",
                tj, tm
            )));
        }
    }
    if tm1 + tm2 + tm3 != 0 {
        return Ok(0.0);
    }
    if tj3 < (tj1 - tj2).abs() || tj3 > tj1 + tj2 || (tj1 + tj2 + tj3) % 2 != 0 {
        return Ok(0.0);
    }
    if 2 * ((tj1 + tj2 + tj3) / 2) + 2 > MAX_FACTORIAL as i64 {
        return Err(Error::Domain(
            "angular momenta too large for the factorial table".into(),
        ));
    }

    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tj2 + tj3) / 2;
    let c = (-tj1 + tj2 + tj3) / 2;
    let big_j = (tj1 + tj2 + tj3) / 2;
    let j1_minus_m1 = (tj1 - tm1) / 2;
    let j2_plus_m2 = (tj2 + tm2) / 2;

    // Racah's sum rewritten as a product of binomials, all in integers.
    let mut sum = BigInt::zero();
    for k in 0..=a {
        let term = binomial(a, k) * binomial(b, j1_minus_m1 - k) * binomial(c, j2_plus_m2 - k);
        if term.is_zero() {
            continue;
        }
        if k % 2 == 0 {
            sum += BigInt::from(term);
        } else {
            sum -= BigInt::from(term);
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let mut num = BigUint::one();
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        num *= factorial((tj + tm) / 2);
        num *= factorial((tj - tm) / 2);
    }
    let den = factorial(big_j + 1) * factorial(a) * factorial(b) * factorial(c);

    // sum^2 * num / den is a rational <= 1; reduce its size before leaving integers.
    let sum_sq = sum.magnitude() * sum.magnitude();
    let ratio = ratio_to_f64(&(sum_sq * num), &den);
    let phase = (tj1 - tj2 - tm3) / 2;
    let sign = if phase.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sign = if sum < BigInt::zero() { -sign } else { sign };
    Ok(sign * ratio.sqrt())
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // Shift so the quotient keeps 64+ significant bits before conversion.
    let shift = (den.bits() as i64 - num.bits() as i64 + 80).max(0) as u64;
    let q = (num << shift) / den;
    q.to_f64().unwrap_or(f64::NAN) * (2.0f64).powi(-(shift as i32))
}

fn doubled(x: f64, name: &str) -> Result<i64> {
    let t = 2.0 * x;
    if (t - t.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!("{name} = {x} is not a half-integer")));
    }
    Ok(t.round() as i64)
}

/// Wigner 3j symbol for integer or half-integer arguments.
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    wigner3j_doubled(
        doubled(j1, "j1")?,
        doubled(j2, "j2")?,
        doubled(j3, "j3")?,
        doubled(m1, "m1")?,
        doubled(m2, "m2")?,
        doubled(m3, "m3")?,
    )
}

/// Integer-argument 3j symbol; arguments must already be valid.
pub(crate) fn w3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    wigner3j_doubled(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3).unwrap_or(0.0)
}

/// Symmetric-top basis ket |J K M⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymTopKet {
    pub j: i64,
    pub k: i64,
    pub m: i64,
}

impl SymTopKet {
    pub fn new(j: i64, k: i64, m: i64) -> Result<Self> {
        if j < 0 || k.abs() > j || m.abs() > j {
            return Err(Error::Domain(format!("invalid symmetric-top ket J={j} K={k} M={m}")));
        }
        Ok(Self { j, k, m })
    }
}

/// Space-fixed axis: Cartesian or a spherical component m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceAxis {
    X,
    Y,
    Z,
    Spherical(i64),
}

/// Body-fixed axis (a ↔ z in representation Iʳ) or a spherical component k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyAxis {
    A,
    B,
    C,
    Spherical(i64),
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl SpaceAxis {
    /// Coefficients of this axis on the spherical components m = -1, 0, +1.
    pub fn spherical_weights(self) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            SpaceAxis::Z => [zero, Complex64::new(1.0, 0.0), zero],
            SpaceAxis::X => [Complex64::new(SQRT_HALF, 0.0), zero, Complex64::new(-SQRT_HALF, 0.0)],
            SpaceAxis::Y => [Complex64::new(0.0, SQRT_HALF), zero, Complex64::new(0.0, SQRT_HALF)],
            SpaceAxis::Spherical(m) => {
                let mut w = [zero; 3];
                if (-1..=1).contains(&m) {
                    w[(m + 1) as usize] = Complex64::new(1.0, 0.0);
                }
                w
            }
        }
    }
}

impl BodyAxis {
    /// Coefficients on k = -1, 0, +1 such that μ_k = ∓(μ_b ± iμ_c)/√2, μ_0 = μ_a.
    pub fn spherical_weights(self) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            BodyAxis::A => [zero, Complex64::new(1.0, 0.0), zero],
            BodyAxis::B => [Complex64::new(SQRT_HALF, 0.0), zero, Complex64::new(-SQRT_HALF, 0.0)],
            BodyAxis::C => [Complex64::new(0.0, -SQRT_HALF), zero, Complex64::new(0.0, -SQRT_HALF)],
            BodyAxis::Spherical(k) => {
                let mut w = [zero; 3];
                if (-1..=1).contains(&k) {
                    w[(k + 1) as usize] = Complex64::new(1.0, 0.0);
                }
                w
            }
        }
    }
}

/// ⟨J'K'M'| D¹*_{mk} |JKM⟩ for single spherical components.
pub fn direction_cosine_spherical(bra: SymTopKet, ket: SymTopKet, m: i64, k: i64) -> f64 {
    if (bra.j - ket.j).abs() > 1 || bra.m != ket.m + m || bra.k != ket.k + k {
        return 0.0;
    }
    let phase = if (bra.m - bra.k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let norm = (((2 * ket.j + 1) * (2 * bra.j + 1)) as f64).sqrt();
    phase * norm * w3j(ket.j, 1, bra.j, ket.m, m, -bra.m) * w3j(ket.j, 1, bra.j, ket.k, k, -bra.k)
}

/// Direction-cosine element ⟨bra|Φ_{βα}|ket⟩ for any space/body axis pair.
pub fn direction_cosine(bra: SymTopKet, ket: SymTopKet, space: SpaceAxis, body: BodyAxis) -> Complex64 {
    let sw = space.spherical_weights();
    let bw = body.spherical_weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for (im, wm) in sw.iter().enumerate() {
        if wm.norm_sqr() == 0.0 {
            continue;
        }
        for (ik, wk) in bw.iter().enumerate() {
            if wk.norm_sqr() == 0.0 {
                continue;
            }
            let d = direction_cosine_spherical(bra, ket, im as i64 - 1, ik as i64 - 1);
            if d != 0.0 {
                acc += wm * wk * d;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms_for_j3_zero() {
        assert_abs_diff_eq!(w3j(1, 1, 0, 0, 0, 0), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w3j(2, 2, 0, 0, 0, 0), 1.0 / 5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w3j(1, 1, 2, 1, -1, 0), 1.0 / 30f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(wigner3j(-1.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(wigner3j(1.0, 1.0, 1.0, 2.0, -2.0, 0.0).is_err());
        assert!(wigner3j(1.0, 1.0, 1.0, 0.5, -0.5, 0.0).is_err());
        assert_eq!(wigner3j(1.0, 1.0, 3.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(wigner3j(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_integer_values() {
        // (1/2 1/2 1; 1/2 -1/2 0) = 1/sqrt(6)
        let v = wigner3j(0.5, 0.5, 1.0, 0.5, -0.5, 0.0).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn direction_cosine_examples() {
        let k100 = SymTopKet::new(1, 0, 0).unwrap();
        let k000 = SymTopKet::new(0, 0, 0).unwrap();
        assert_eq!(direction_cosine(k100, k100, SpaceAxis::Z, BodyAxis::A).norm(), 0.0);
        let v = direction_cosine(k000, k100, SpaceAxis::Z, BodyAxis::A);
        assert_abs_diff_eq!(v.re, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let k300 = SymTopKet::new(3, 0, 0).unwrap();
        assert_eq!(direction_cosine(k300, k100, SpaceAxis::X, BodyAxis::B).norm(), 0.0);
    }

    #[test]
    fn delta_j_zero_diagonal_is_mk_over_jj1() {
        for j in 1..5 {
            for k in -j..=j {
                for m in -j..=j {
                    let ket = SymTopKet::new(j, k, m).unwrap();
                    let v = direction_cosine_spherical(ket, ket, 0, 0);
                    assert_abs_diff_eq!(v, (m * k) as f64 / (j * (j + 1)) as f64, epsilon = 1e-14);
                }
            }
        }
    }
}
