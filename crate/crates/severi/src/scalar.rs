//! Exact scalars: arbitrary-precision rationals, prime-field residues, and
//! univariate polynomials over the rationals (parameter `t`, used by the
//! degeneration machinery). All arithmetic is exact; there is no floating
//! point anywhere in the crate.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpoly::QPoly;

/// Which exact field (or ring) a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// Arbitrary-precision rationals, always in lowest terms.
    Rational,
    /// Prime field with the given modulus.
    Fp(u64),
    /// Univariate polynomials in `t` with rational coefficients.
    PolyRational,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "rational"),
            FieldKind::Fp(p) => write!(f, "fp:{p}"),
            FieldKind::PolyRational => write!(f, "poly-rational"),
        }
    }
}

impl FieldKind {
    /// Parses the wire form used in JSON files: `"rational"` or `"fp:<p>"`.
    pub fn parse(s: &str) -> Result<FieldKind> {
        if s == "rational" {
            return Ok(FieldKind::Rational);
        }
        if let Some(p) = s.strip_prefix("fp:") {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad modulus in field tag {s:?}")))?;
            check_modulus(p)?;
            return Ok(FieldKind::Fp(p));
        }
        Err(Error::Parse(format!("unknown field tag {s:?}")))
    }
}

/// Default prime modulus: the largest prime below 2^16.
pub const DEFAULT_MODULUS: u64 = 65521;

/// Largest supported modulus; keeps `u128` intermediate products safe.
pub const MAX_MODULUS: u64 = 1 << 31;

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn check_modulus(p: u64) -> Result<()> {
    if !(2..=MAX_MODULUS).contains(&p) || !is_prime_u64(p) {
        return Err(Error::BadModulus(p));
    }
    Ok(())
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse mod p for prime p; errors on zero.
pub fn inv_mod(a: u64, p: u64) -> Result<u64> {
    if a.is_multiple_of(p) {
        return Err(Error::DivisionByZero);
    }
    Ok(mod_pow(a % p, p - 2, p))
}

/// A prime-field element tagged with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpElem {
    pub value: u64,
    pub modulus: u64,
}

impl FpElem {
    pub fn new(value: i64, modulus: u64) -> FpElem {
        let m = modulus as i128;
        let v = ((value as i128 % m) + m) % m;
        FpElem {
            value: v as u64,
            modulus,
        }
    }
}

/// An element of one of the supported exact coefficient domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scalar {
    Rat(BigRational),
    Fp(FpElem),
    Poly(QPoly),
}

impl Scalar {
    pub fn kind(&self) -> FieldKind {
        match self {
            Scalar::Rat(_) => FieldKind::Rational,
            Scalar::Fp(e) => FieldKind::Fp(e.modulus),
            Scalar::Poly(_) => FieldKind::PolyRational,
        }
    }

    pub fn zero(kind: FieldKind) -> Scalar {
        match kind {
            FieldKind::Rational => Scalar::Rat(BigRational::zero()),
            FieldKind::Fp(p) => Scalar::Fp(FpElem {
                value: 0,
                modulus: p,
            }),
            FieldKind::PolyRational => Scalar::Poly(QPoly::zero()),
        }
    }

    pub fn one(kind: FieldKind) -> Scalar {
        match kind {
            FieldKind::Rational => Scalar::Rat(BigRational::one()),
            FieldKind::Fp(p) => Scalar::Fp(FpElem {
                value: 1 % p,
                modulus: p,
            }),
            FieldKind::PolyRational => Scalar::Poly(QPoly::constant(BigRational::one())),
        }
    }

    pub fn from_int(v: i64, kind: FieldKind) -> Scalar {
        match kind {
            FieldKind::Rational => Scalar::Rat(BigRational::from(BigInt::from(v))),
            FieldKind::Fp(p) => Scalar::Fp(FpElem::new(v, p)),
            FieldKind::PolyRational => {
                Scalar::Poly(QPoly::constant(BigRational::from(BigInt::from(v))))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp(e) => e.value == 0,
            Scalar::Poly(p) => p.is_zero(),
        }
    }

    pub fn as_rat(&self) -> Result<&BigRational> {
        match self {
            Scalar::Rat(r) => Ok(r),
            other => Err(Error::FieldMismatch(FieldKind::Rational, other.kind())),
        }
    }

    pub fn as_fp(&self) -> Result<FpElem> {
        match self {
            Scalar::Fp(e) => Ok(*e),
            other => Err(Error::FieldMismatch(other.kind(), FieldKind::Rational)),
        }
    }

    pub fn as_poly(&self) -> Result<&QPoly> {
        match self {
            Scalar::Poly(p) => Ok(p),
            other => Err(Error::FieldMismatch(FieldKind::PolyRational, other.kind())),
        }
    }

    fn binop(
        &self,
        rhs: &Scalar,
        fr: impl FnOnce(&BigRational, &BigRational) -> BigRational,
        ff: impl FnOnce(u64, u64, u64) -> u64,
        fp: impl FnOnce(&QPoly, &QPoly) -> QPoly,
    ) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Ok(Scalar::Rat(fr(a, b))),
            (Scalar::Fp(a), Scalar::Fp(b)) => {
                if a.modulus != b.modulus {
                    return Err(Error::FieldMismatch(
                        FieldKind::Fp(a.modulus),
                        FieldKind::Fp(b.modulus),
                    ));
                }
                Ok(Scalar::Fp(FpElem {
                    value: ff(a.value, b.value, a.modulus),
                    modulus: a.modulus,
                }))
            }
            (Scalar::Poly(a), Scalar::Poly(b)) => Ok(Scalar::Poly(fp(a, b))),
            (a, b) => Err(Error::FieldMismatch(a.kind(), b.kind())),
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binop(rhs, |a, b| a + b, |a, b, p| (a + b) % p, QPoly::add)
    }

    pub fn sub(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binop(rhs, |a, b| a - b, |a, b, p| (p + a - b) % p, QPoly::sub)
    }

    pub fn mul(&self, rhs: &Scalar) -> Result<Scalar> {
        self.binop(rhs, |a, b| a * b, mul_mod, QPoly::mul)
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Fp(e) => Scalar::Fp(FpElem {
                value: if e.value == 0 { 0 } else { e.modulus - e.value },
                modulus: e.modulus,
            }),
            Scalar::Poly(p) => Scalar::Poly(p.neg()),
        }
    }

    /// Field division; errors over `PolyRational` (not a field) and on zero.
    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Ok(Scalar::Rat(a / b)),
            (Scalar::Fp(a), Scalar::Fp(b)) => {
                if a.modulus != b.modulus {
                    return Err(Error::FieldMismatch(
                        FieldKind::Fp(a.modulus),
                        FieldKind::Fp(b.modulus),
                    ));
                }
                let inv = inv_mod(b.value, a.modulus)?;
                Ok(Scalar::Fp(FpElem {
                    value: mul_mod(a.value, inv, a.modulus),
                    modulus: a.modulus,
                }))
            }
            (Scalar::Poly(_), Scalar::Poly(_)) => {
                Err(Error::UnsupportedField(FieldKind::PolyRational))
            }
            (a, b) => Err(Error::FieldMismatch(a.kind(), b.kind())),
        }
    }

    /// Wire form: `"7"`, `"-3/2"`, residues as decimal strings; polynomials
    /// as `"[c0,c1,...]"` coefficient lists (lowest degree first).
    pub fn to_wire(&self) -> String {
        match self {
            Scalar::Rat(r) => format_rational(r),
            Scalar::Fp(e) => e.value.to_string(),
            Scalar::Poly(p) => {
                let parts: Vec<String> = p.coeffs().iter().map(format_rational).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    pub fn parse_wire(s: &str, kind: FieldKind) -> Result<Scalar> {
        match kind {
            FieldKind::Rational => Ok(Scalar::Rat(parse_rational(s)?)),
            FieldKind::Fp(p) => {
                let r = parse_rational(s)?;
                Ok(Scalar::Fp(rational_mod_p(&r, p)?))
            }
            FieldKind::PolyRational => {
                let inner = s
                    .strip_prefix('[')
                    .and_then(|t| t.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse(format!("bad polynomial literal {s:?}")))?;
                let coeffs = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(parse_rational)
                        .collect::<Result<Vec<_>>>()?
                };
                Ok(Scalar::Poly(QPoly::new(coeffs)))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_wire())
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_wire())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Scalar, D::Error> {
        let s = String::deserialize(de)?;
        Scalar::parse_wire(&s, FieldKind::Rational).map_err(serde::de::Error::custom)
    }
}

/// Lowest-terms display with positive denominator: `"3"`, `"-3/2"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Reduces a rational mod p; errors when the denominator vanishes mod p.
pub fn rational_mod_p(r: &BigRational, p: u64) -> Result<FpElem> {
    let pb = BigInt::from(p);
    let num = r.numer() % &pb;
    let den = r.denom() % &pb;
    let to_u64 = |v: BigInt| -> u64 {
        let m = ((v % &pb) + &pb) % &pb;
        let (_, digits) = m.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    };
    let den_u = to_u64(den);
    if den_u == 0 {
        return Err(Error::DivisionByZero);
    }
    let num_u = to_u64(num);
    Ok(FpElem {
        value: mul_mod(num_u, inv_mod(den_u, p)?, p),
        modulus: p,
    })
}

/// Content-normalizes a rational vector to coprime integers with the first
/// nonzero entry positive. Returns `None` for the zero vector.
pub fn primitive_integer_vector(values: &[BigRational]) -> Option<Vec<BigInt>> {
    use num_integer::Integer;
    if values.iter().all(|v| v.is_zero()) {
        return None;
    }
    let mut lcm = BigInt::one();
    for v in values {
        lcm = lcm.lcm(v.denom());
    }
    let mut ints: Vec<BigInt> = values
        .iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for v in &ints {
        gcd = gcd.gcd(v);
        if gcd.is_one() {
            break;
        }
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for v in &mut ints {
            *v /= &gcd;
        }
    }
    if let Some(first) = ints.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            for v in &mut ints {
                *v = -v.clone();
            }
        }
    }
    Some(ints)
}
