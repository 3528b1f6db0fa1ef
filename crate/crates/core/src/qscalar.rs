//! q-deformed scalar arithmetic: powers of the deformation parameter with the
//! spiral branch for negative q, Gaussian binomials, quantum dimensions and the
//! Chebyshev recurrence that computes free orthogonal dimensions.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Deformation parameter `q` with `-1 < q < 1`, `q != 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > -1.0 && q < 1.0 && q != 0.0 {
            Ok(Self(q))
        } else {
            Err(Error::InvalidQ(q))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.0.abs()
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.0 < 0.0
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for QParam {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

/// A non-negative half-integer, stored as twice its value.
///
/// These label the irreducible representations of `SU_q(2)`; the label `s`
/// has dimension `2s + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    twice: u32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    /// Converts a float that must be an exact multiple of 1/2.
    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || twice < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::InvalidHalfInt(value.to_string()));
        }
        Ok(Self { twice: twice as u32 })
    }

    #[inline]
    pub const fn twice(self) -> u32 {
        self.twice
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Dimension `2s + 1` of the irreducible representation labelled by `self`.
    #[inline]
    pub const fn dim(self) -> usize {
        self.twice as usize + 1
    }

    #[inline]
    pub const fn is_integer(self) -> bool {
        self.twice.is_multiple_of(2)
    }

    /// All labels `0, 1/2, 1, ..., max`.
    pub fn up_to(max: HalfInt) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        (0..=max.twice).map(HalfInt::from_twice)
    }

    /// The weights `-s, -s+1, ..., s` in ascending order.
    pub fn weights(self) -> impl DoubleEndedIterator<Item = SignedHalfInt> + ExactSizeIterator + Clone {
        let s = self.twice as i64;
        (0..self.twice + 1).map(move |j| SignedHalfInt::from_twice(-s + 2 * j as i64))
    }

    pub fn signed(self) -> SignedHalfInt {
        SignedHalfInt::from_twice(self.twice as i64)
    }

    /// `|self - other|`
    pub fn abs_diff(self, other: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice.abs_diff(other.twice))
    }
}

impl Add for HalfInt {
    type Output = HalfInt;

    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3"`, `"5/2"` and `"2.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidHalfInt(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "2" => Ok(HalfInt::from_twice(num)),
                "1" => num.checked_mul(2).map(HalfInt::from_twice).ok_or_else(bad),
                _ => Err(bad()),
            }
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            HalfInt::from_f64(v).map_err(|_| bad())
        }
    }
}

/// A signed half-integer `k ∈ ½ℤ`, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SignedHalfInt {
    twice: i64,
}

impl SignedHalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub fn from_int(k: i64) -> Self {
        Self { twice: 2 * k }
    }

    #[inline]
    pub const fn twice(self) -> i64 {
        self.twice
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    #[inline]
    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }
}

impl Add for SignedHalfInt {
    type Output = SignedHalfInt;

    fn add(self, rhs: SignedHalfInt) -> SignedHalfInt {
        SignedHalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for SignedHalfInt {
    type Output = SignedHalfInt;

    fn sub(self, rhs: SignedHalfInt) -> SignedHalfInt {
        SignedHalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for SignedHalfInt {
    type Output = SignedHalfInt;

    fn neg(self) -> SignedHalfInt {
        SignedHalfInt::from_twice(-self.twice)
    }
}

impl From<HalfInt> for SignedHalfInt {
    fn from(h: HalfInt) -> Self {
        h.signed()
    }
}

impl fmt::Display for SignedHalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// `q^k` for a signed half-integer `k`.
///
/// For `q < 0` the value is `|q|^k e^{iπk}`, the branch on which the spiral
/// `S_q = {|q|^x e^{iπx}}` lives. The phase `e^{iπk} = i^{2k}` is taken from
/// `2k mod 4` so integer powers come out exactly real.
pub fn q_power(q: QParam, k: SignedHalfInt) -> Complex64 {
    let modulus = q.abs().powf(k.value());
    if !q.is_negative() {
        return Complex64::new(modulus, 0.0);
    }
    match k.twice().rem_euclid(4) {
        0 => Complex64::new(modulus, 0.0),
        1 => Complex64::new(0.0, modulus),
        2 => Complex64::new(-modulus, 0.0),
        _ => Complex64::new(0.0, -modulus),
    }
}

/// Above this top index the q-binomial is evaluated through logarithms.
const LOG_SPACE_THRESHOLD: i64 = 30;

/// Gaussian binomial `[a choose b]_base = (base;base)_a / ((base;base)_b (base;base)_{a-b})`.
pub fn q_binomial(a: i64, b: i64, base: f64) -> Result<f64> {
    if b < 0 || b > a {
        return Err(Error::BinomialRange { a, b });
    }
    if !(base.is_finite() && base > 0.0) || base == 1.0 {
        return Err(Error::InvalidBase(base));
    }
    if a <= LOG_SPACE_THRESHOLD {
        let pochhammer = |n: i64| -> f64 { (1..=n).map(|j| 1.0 - base.powi(j as i32)).product() };
        return Ok(pochhammer(a) / (pochhammer(b) * pochhammer(a - b)));
    }
    // ln|(base;base)_n| with the number of negative factors tracked separately
    let log_pochhammer = |n: i64| -> (f64, i64) {
        let mut log_abs = 0.0;
        let mut negatives = 0;
        for j in 1..=n {
            let factor = 1.0 - base.powf(j as f64);
            if factor < 0.0 {
                negatives += 1;
            }
            log_abs += factor.abs().ln();
        }
        (log_abs, negatives)
    };
    let (la, na) = log_pochhammer(a);
    let (lb, nb) = log_pochhammer(b);
    let (lc, nc) = log_pochhammer(a - b);
    let sign = if (na + nb + nc) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * (la - (lb + lc)).exp())
}

/// Quantum dimension `d_s = Σ_{k=-s..s} |q|^{2k}`.
pub fn quantum_dim(q: QParam, s: HalfInt) -> f64 {
    s.weights().map(|k| q.abs().powf(2.0 * k.value())).sum()
}

/// Chebyshev polynomial of the second kind in the normalization
/// `U_0 = 1`, `U_1(x) = x`, `U_{k+1} = x U_k - U_{k-1}`, so that `U_{2s}(n)`
/// is the classical dimension of the spin-`s` representation of `O_F^+`
/// with `F ∈ GL_n`.
pub fn chebyshev_u(n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::NegativeIndex(n));
    }
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return Ok(prev);
    }
    for _ in 1..n {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn qparam_rejects_out_of_range() {
        for bad in [0.0, 1.0, -1.0, 1.5, f64::NAN, f64::INFINITY] {
            assert!(QParam::new(bad).is_err(), "{bad}");
        }
        assert!(QParam::new(-0.999).is_ok());
    }

    #[test]
    fn half_int_parsing_and_display() {
        assert_eq!("5/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(5));
        assert_eq!("2.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(5));
        assert_eq!("3".parse::<HalfInt>().unwrap(), HalfInt::from_twice(6));
        assert_eq!("4/1".parse::<HalfInt>().unwrap(), HalfInt::from_twice(8));
        assert!("1.25".parse::<HalfInt>().is_err());
        assert!("-1".parse::<HalfInt>().is_err());
        assert!("1/3".parse::<HalfInt>().is_err());
        assert_eq!(HalfInt::from_twice(5).to_string(), "5/2");
        assert_eq!(HalfInt::from_twice(4).to_string(), "2");
        assert_eq!(SignedHalfInt::from_twice(-3).to_string(), "-3/2");
    }

    #[test]
    fn weights_ascend() {
        let w: Vec<i64> = HalfInt::from_twice(3).weights().map(|k| k.twice()).collect();
        assert_eq!(w, vec![-3, -1, 1, 3]);
    }

    #[test]
    fn q_power_examples() {
        assert_eq!(q_power(q(0.5), SignedHalfInt::from_twice(0)), Complex64::new(1.0, 0.0));
        assert_eq!(q_power(q(-0.5), SignedHalfInt::from_int(1)), Complex64::new(-0.5, 0.0));
        let z = q_power(q(-0.25), SignedHalfInt::from_twice(1));
        assert!((z - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        // oracle: |q|^k e^{iπk} evaluated through the exponential
        for twice in -7..=7 {
            let k = twice as f64 / 2.0;
            let oracle = Complex64::from_polar(0.3f64.powf(k), std::f64::consts::PI * k);
            assert!((q_power(q(-0.3), SignedHalfInt::from_twice(twice)) - oracle).norm() < 1e-12 * oracle.norm());
        }
    }

    #[test]
    fn q_power_integer_matches_powi() {
        for qv in [-0.9, -0.3, 0.4] {
            for k in -6..=6 {
                let z = q_power(q(qv), SignedHalfInt::from_int(k));
                assert_eq!(z.im, 0.0);
                assert!((z.re - qv.powi(k as i32)).abs() <= 1e-14 * z.re.abs());
            }
        }
    }

    #[test]
    fn q_binomial_examples() {
        assert_eq!(q_binomial(2, 0, 4.0).unwrap(), 1.0);
        assert!((q_binomial(2, 1, 4.0).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(q_binomial(3, 1, 0.25).unwrap(), q_binomial(3, 2, 0.25).unwrap());
        assert!(matches!(q_binomial(2, 3, 4.0), Err(Error::BinomialRange { .. })));
        assert!(matches!(q_binomial(2, -1, 4.0), Err(Error::BinomialRange { .. })));
        assert!(matches!(q_binomial(2, 1, 1.0), Err(Error::InvalidBase(_))));
    }

    #[test]
    fn q_binomial_log_space_agrees_with_pascal_recurrence() {
        // [a, b] = [a-1, b-1] + base^b [a-1, b]
        let base = 1.0 / (0.8f64 * 0.8);
        for b in [1, 5, 17, 30] {
            let a = 40;
            let lhs = q_binomial(a, b, base).unwrap();
            let rhs = q_binomial(a - 1, b - 1, base).unwrap() + base.powi(b as i32) * q_binomial(a - 1, b, base).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs(), "b={b}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn quantum_dim_examples() {
        assert_eq!(quantum_dim(q(0.5), HalfInt::ZERO), 1.0);
        assert!((quantum_dim(q(0.5), HalfInt::HALF) - 2.5).abs() < 1e-15);
        for qv in [-0.9, -0.5, -0.1, 0.1, 0.5, 0.9] {
            for s in HalfInt::up_to(HalfInt::from_twice(12)) {
                assert!(quantum_dim(q(qv), s) >= s.dim() as f64 - 1e-12);
            }
        }
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_u(0, 5.0).unwrap(), 1.0);
        assert_eq!(chebyshev_u(1, 5.0).unwrap(), 5.0);
        assert_eq!(chebyshev_u(2, 5.0).unwrap(), 24.0);
        assert!(chebyshev_u(-1, 5.0).is_err());
        // n = 2 gives the SU(2) dimensions 2s + 1
        for k in 0..10 {
            assert_eq!(chebyshev_u(k, 2.0).unwrap(), (k + 1) as f64);
        }
    }

    proptest! {
        #[test]
        fn q_power_is_multiplicative(qv in prop_oneof![-0.99f64..-0.01, 0.01f64..0.99], j in -12i64..12, k in -12i64..12) {
            let qq = q(qv);
            let lhs = q_power(qq, SignedHalfInt::from_twice(j + k));
            let rhs = q_power(qq, SignedHalfInt::from_twice(j)) * q_power(qq, SignedHalfInt::from_twice(k));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }

        #[test]
        fn q_binomial_is_symmetric(a in 0i64..45, frac in 0.0f64..1.0, base in prop_oneof![0.05f64..0.95, 1.05f64..3.0]) {
            let b = ((a as f64) * frac).floor() as i64;
            prop_assert_eq!(q_binomial(a, b, base).unwrap(), q_binomial(a, a - b, base).unwrap());
        }

        #[test]
        fn chebyshev_three_term_recurrence(n in 1i64..30, x in -3.0f64..3.0) {
            let next = chebyshev_u(n + 1, x).unwrap();
            let expected = x * chebyshev_u(n, x).unwrap() - chebyshev_u(n - 1, x).unwrap();
            prop_assert!((next - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }
}
