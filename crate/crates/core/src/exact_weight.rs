//! Exact positive reals of the form `Π p^{e_p}` with rational exponents.
//!
//! Every basis magnitude and every structure constant in the category is a
//! single monomial in primes, so this multiplicative group is closed under
//! everything the rest of the crate needs. Values are kept in canonical form
//! (prime keys, nonzero exponents), which makes structural equality coincide
//! with equality of the represented reals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default binary precision used when rendering the decimal `approx` field.
pub const DEFAULT_PRECISION_BITS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("expected a strictly positive rational, got {0}")]
    NotPositive(Rational64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("malformed exponent {0:?}")]
    BadExponent(String),
    #[error("precision must be at least 24 bits, got {0}")]
    PrecisionTooLow(u32),
}

/// Exact positive real `Π p^{e_p}`; the empty map is `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PosExact {
    factors: BTreeMap<u64, Rational64>,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Trial-division factorization; `n >= 1`.
fn factorize(mut n: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut k = 0;
        while n.is_multiple_of(d) {
            n /= d;
            k += 1;
        }
        if k > 0 {
            out.push((d, k));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl PosExact {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_rational(q: Rational64) -> Result<Self, WeightError> {
        if !q.is_positive() {
            return Err(WeightError::NotPositive(q));
        }
        let mut out = Self::one();
        for (p, k) in factorize(*q.numer() as u64) {
            out.add_exponent(p, Rational64::from_integer(k));
        }
        for (p, k) in factorize(*q.denom() as u64) {
            out.add_exponent(p, Rational64::from_integer(-k));
        }
        Ok(out)
    }

    pub fn from_integer(n: u64) -> Result<Self, WeightError> {
        Self::from_rational(Rational64::from_integer(n as i64))
    }

    /// Builds a value from explicit `(prime, exponent)` pairs. Repeated primes
    /// accumulate; zero exponents vanish.
    pub fn from_factors<I>(factors: I) -> Result<Self, WeightError>
    where
        I: IntoIterator<Item = (u64, Rational64)>,
    {
        let mut out = Self::one();
        for (p, e) in factors {
            if !is_prime(p) {
                return Err(WeightError::NotPrime(p));
            }
            out.add_exponent(p, e);
        }
        Ok(out)
    }

    /// `base^exponent` for a positive rational base.
    pub fn rational_power(base: Rational64, exponent: Rational64) -> Result<Self, WeightError> {
        Ok(Self::from_rational(base)?.pow(exponent))
    }

    fn add_exponent(&mut self, p: u64, e: Rational64) {
        if e.is_zero() {
            return;
        }
        let slot = self.factors.entry(p).or_insert_with(Rational64::zero);
        *slot += e;
        if slot.is_zero() {
            self.factors.remove(&p);
        }
    }

    pub fn factors(&self) -> &BTreeMap<u64, Rational64> {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn inv(&self) -> Self {
        Self {
            factors: self.factors.iter().map(|(&p, &e)| (p, -e)).collect(),
        }
    }

    pub fn pow(&self, r: Rational64) -> Self {
        if r.is_zero() {
            return Self::one();
        }
        Self {
            factors: self.factors.iter().map(|(&p, &e)| (p, e * r)).collect(),
        }
    }

    /// Least common multiple of all exponent denominators (1 for the empty map).
    fn exponent_lcm(&self) -> i64 {
        self.factors
            .values()
            .fold(1i64, |acc, e| acc.lcm(e.denom()))
    }

    /// Returns `(L, R)` with `self^L = R` exactly, `L` the smallest positive
    /// integer clearing every exponent denominator.
    pub fn cleared_power(&self) -> (u32, BigRational) {
        let l = self.exponent_lcm();
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (&p, &e) in &self.factors {
            let k = (e * Rational64::from_integer(l)).to_integer();
            let pk: BigInt = Pow::pow(BigInt::from(p), k.unsigned_abs() as u32);
            if k > 0 {
                num *= pk;
            } else {
                den *= pk;
            }
        }
        (l as u32, BigRational::new(num, den))
    }

    /// Natural logarithm in double precision, `Σ e_p ln p`.
    pub fn ln_f64(&self) -> f64 {
        self.factors
            .iter()
            .map(|(&p, e)| e.to_f64().unwrap_or(f64::NAN) * (p as f64).ln())
            .sum()
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(53).map(|a| a.to_f64()).unwrap_or(f64::NAN)
    }

    /// Truncated binary approximation with at least `precision_bits`
    /// significant bits. The error is below one unit in the last place.
    pub fn to_float(&self, precision_bits: u32) -> Result<BinaryApprox, WeightError> {
        if precision_bits < 24 {
            return Err(WeightError::PrecisionTooLow(precision_bits));
        }
        let (l, r) = self.cleared_power();
        let log2 = self.ln_f64() / std::f64::consts::LN_2;
        // two guard bits absorb the error of the f64 estimate of log2
        let shift = precision_bits as i64 + 2 - log2.floor() as i64;
        let mut num = r.numer().to_biguint().expect("positive numerator");
        let mut den = r.denom().to_biguint().expect("positive denominator");
        let scaled_bits = shift.unsigned_abs() as usize * l as usize;
        if shift >= 0 {
            num <<= scaled_bits;
        } else {
            den <<= scaled_bits;
        }
        // floor((num/den)^(1/l)) == floor(floor(num/den)^(1/l))
        let mantissa = (num / den).nth_root(l);
        Ok(BinaryApprox {
            mantissa,
            exp2: -shift,
        })
    }

    /// Decimal rendering with as many significant digits as `precision_bits`
    /// supports.
    pub fn approx_string(&self, precision_bits: u32) -> String {
        let bits = precision_bits.max(24);
        let digits = ((bits as f64) * std::f64::consts::LOG10_2).floor() as u32;
        self.to_float(bits)
            .expect("precision clamped above minimum")
            .to_decimal(digits)
    }

    pub fn to_json(&self, precision_bits: u32) -> serde_json::Value {
        let factors: serde_json::Map<String, serde_json::Value> = self
            .factors
            .iter()
            .map(|(p, e)| (p.to_string(), serde_json::Value::String(format_rational(e))))
            .collect();
        serde_json::json!({
            "factors": factors,
            "approx": self.approx_string(precision_bits),
        })
    }

    /// Exact logarithm of this value as a formal combination of `log p`.
    pub fn ln(&self) -> ExactLog {
        ExactLog(self.clone())
    }
}

impl Ord for PosExact {
    fn cmp(&self, other: &Self) -> Ordering {
        let quotient = self / other;
        let (_, r) = quotient.cleared_power();
        // x -> x^L is monotone on positives, so comparing (a/b)^L with 1 decides
        r.numer().cmp(r.denom())
    }
}

impl PartialOrd for PosExact {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &PosExact {
    type Output = PosExact;
    fn mul(self, rhs: &PosExact) -> PosExact {
        let mut out = self.clone();
        for (&p, &e) in &rhs.factors {
            out.add_exponent(p, e);
        }
        out
    }
}

impl Mul for PosExact {
    type Output = PosExact;
    fn mul(self, rhs: PosExact) -> PosExact {
        &self * &rhs
    }
}

impl Div for &PosExact {
    type Output = PosExact;
    fn div(self, rhs: &PosExact) -> PosExact {
        self * &rhs.inv()
    }
}

impl Div for PosExact {
    type Output = PosExact;
    fn div(self, rhs: PosExact) -> PosExact {
        &self / &rhs
    }
}

impl std::iter::Product for PosExact {
    fn product<I: Iterator<Item = PosExact>>(iter: I) -> Self {
        iter.fold(PosExact::one(), |acc, x| &acc * &x)
    }
}

impl fmt::Display for PosExact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| {
                if e.is_one() {
                    p.to_string()
                } else {
                    format!("{}^({})", p, e)
                }
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

impl Serialize for PosExact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json(DEFAULT_PRECISION_BITS).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PosExact {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            factors: BTreeMap<String, String>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut pairs = Vec::with_capacity(repr.factors.len());
        for (p, e) in repr.factors {
            let p: u64 = p.parse().map_err(D::Error::custom)?;
            let e = parse_rational(&e).map_err(D::Error::custom)?;
            pairs.push((p, e));
        }
        PosExact::from_factors(pairs).map_err(D::Error::custom)
    }
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational64) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational64, WeightError> {
    let bad = || WeightError::BadExponent(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational64::new(n, d))
        }
        None => Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `mantissa · 2^exp2`, obtained by truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryApprox {
    pub mantissa: BigUint,
    pub exp2: i64,
}

impl BinaryApprox {
    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits() as i64;
        // keep the top 64 bits so the conversion stays in range
        let drop = (bits - 64).max(0);
        let top = (&self.mantissa >> drop as usize)
            .to_f64()
            .unwrap_or(f64::NAN);
        top * 2f64.powi((self.exp2 + drop) as i32)
    }

    /// Truncated decimal expansion with `digits` significant digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        if self.mantissa.is_zero() {
            return "0".to_string();
        }
        let log10 = self.to_f64().log10();
        let frac_digits = (digits as i64 - 1 - log10.floor() as i64).max(0) as u32;
        let mut num = &self.mantissa * Pow::pow(BigUint::from(10u32), frac_digits);
        if self.exp2 >= 0 {
            num <<= self.exp2 as usize;
        } else {
            num >>= (-self.exp2) as usize;
        }
        let s = num.to_string();
        if frac_digits == 0 {
            return s;
        }
        let fd = frac_digits as usize;
        let padded = if s.len() <= fd {
            format!("{}{}", "0".repeat(fd + 1 - s.len()), s)
        } else {
            s
        };
        let (int, frac) = padded.split_at(padded.len() - fd);
        format!("{}.{}", int, frac)
    }
}

impl Ord for BinaryApprox {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp2.min(other.exp2);
        let a = &self.mantissa << (self.exp2 - e) as usize;
        let b = &other.mantissa << (other.exp2 - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for BinaryApprox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact formal combination `Σ q_p · log p`, the logarithm of a [`PosExact`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExactLog(PosExact);

impl ExactLog {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn exp(&self) -> PosExact {
        self.0.clone()
    }

    pub fn coefficients(&self) -> &BTreeMap<u64, Rational64> {
        self.0.factors()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.ln_f64()
    }

    pub fn sign(&self) -> Ordering {
        self.0.cmp(&PosExact::one())
    }
}

impl std::ops::Add for &ExactLog {
    type Output = ExactLog;
    fn add(self, rhs: &ExactLog) -> ExactLog {
        ExactLog(&self.0 * &rhs.0)
    }
}

impl std::ops::Add for ExactLog {
    type Output = ExactLog;
    fn add(self, rhs: ExactLog) -> ExactLog {
        &self + &rhs
    }
}

impl std::ops::Neg for ExactLog {
    type Output = ExactLog;
    fn neg(self) -> ExactLog {
        ExactLog(self.0.inv())
    }
}

impl std::iter::Sum for ExactLog {
    fn sum<I: Iterator<Item = ExactLog>>(iter: I) -> Self {
        iter.fold(ExactLog::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for ExactLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coefficients()
            .iter()
            .map(|(p, q)| format!("({})·log {}", q, p))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn pe(pairs: &[(u64, i64, i64)]) -> PosExact {
        PosExact::from_factors(pairs.iter().map(|&(p, n, d)| (p, r(n, d)))).unwrap()
    }

    #[test]
    fn from_rational_factorizes() {
        assert_eq!(
            PosExact::from_rational(r(3, 4)).unwrap(),
            pe(&[(3, 1, 1), (2, -2, 1)])
        );
        assert!(PosExact::from_rational(r(1, 1))
            .unwrap()
            .factors()
            .is_empty());
        assert_eq!(
            PosExact::from_rational(r(12, 1)).unwrap(),
            pe(&[(2, 2, 1), (3, 1, 1)])
        );
        assert_eq!(
            PosExact::from_rational(r(999_983 * 2, 1)).unwrap(),
            pe(&[(2, 1, 1), (999_983, 1, 1)])
        );
    }

    #[test]
    fn from_rational_rejects_nonpositive() {
        assert!(matches!(
            PosExact::from_rational(r(0, 1)),
            Err(WeightError::NotPositive(_))
        ));
        assert!(PosExact::from_rational(r(-1, 2)).is_err());
    }

    #[test]
    fn from_factors_rejects_composites() {
        assert_eq!(
            PosExact::from_factors([(4, r(1, 1))]),
            Err(WeightError::NotPrime(4))
        );
    }

    #[test]
    fn mul_and_pow_examples() {
        let half_root = pe(&[(2, -1, 2)]);
        assert_eq!(&half_root * &half_root, pe(&[(2, -1, 1)]));
        assert_eq!(pe(&[(2, -1, 1)]).pow(r(1, 2)), pe(&[(2, -1, 2)]));
        assert_eq!(
            &pe(&[(2, 2, 1), (3, -3, 2)]) * &pe(&[(2, -1, 1), (3, 3, 2)]),
            pe(&[(2, 1, 1)])
        );
        assert!((&half_root * &half_root.inv()).is_one());
    }

    #[test]
    fn compare_examples() {
        // 2^(1/2) vs 3/2: squares are 2 and 9/4
        let a = pe(&[(2, 1, 2)]);
        let b = PosExact::from_rational(r(3, 2)).unwrap();
        assert_eq!(a.cmp(&b), Ordering::Less);
        assert_eq!(a.cmp(&a), Ordering::Equal);
        assert_eq!(pe(&[(2, -1, 1)]).cmp(&PosExact::one()), Ordering::Less);
    }

    #[test]
    fn to_float_examples() {
        assert_eq!(pe(&[(2, -1, 1)]).to_f64(), 0.5);
        assert_eq!(PosExact::one().to_f64(), 1.0);
        // 4 / 3^(3/2), mpmath: 0.76980035891950101934...
        let v = pe(&[(2, 2, 1), (3, -3, 2)]);
        assert!((v.to_f64() - 0.769_800_358_919_501).abs() < 1e-15);
        assert_eq!(v.approx_string(64), "0.7698003589195010193");
    }

    #[test]
    fn to_float_rejects_low_precision() {
        assert_eq!(
            PosExact::one().to_float(10),
            Err(WeightError::PrecisionTooLow(10))
        );
    }

    #[test]
    fn decimal_rendering_of_large_and_exact_values() {
        let v = PosExact::from_rational(r(3, 1)).unwrap().pow(r(3, 2));
        let c = &v / &PosExact::from_integer(2).unwrap();
        assert!(c.approx_string(64).starts_with("2.598076211353315940"));
        assert_eq!(
            PosExact::from_integer(1024).unwrap().approx_string(64),
            "1024.000000000000000"
        );
    }

    #[test]
    fn json_roundtrip_keeps_exponents() {
        let v = pe(&[(2, -1, 2), (3, 5, 3), (11, -7, 1)]);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"2\":\"-1/2\""));
        let back: PosExact = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn exact_log_arithmetic() {
        let a = pe(&[(2, -1, 2)]).ln();
        assert_eq!(a.sign(), Ordering::Less);
        let neg = -a.clone();
        assert!((&a + &neg).is_zero());
        assert!((a.to_f64() + 0.5 * 2f64.ln()).abs() < 1e-15);
    }
}
