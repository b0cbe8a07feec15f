//! Univariate polynomials in the family parameter `t`, with exact rational
//! coefficients. These are the matrix entries used when a point configuration
//! moves along a one-parameter path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense polynomial, lowest degree first, with no trailing zero coefficient.
/// The zero polynomial is the empty coefficient list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<BigRational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> QPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> QPoly {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> QPoly {
        QPoly::new(vec![c])
    }

    pub fn from_ints(coeffs: &[i64]) -> QPoly {
        QPoly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from(BigInt::from(c)))
                .collect(),
        )
    }

    /// The monomial `c * t^k`.
    pub fn monomial(c: BigRational, k: usize) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        QPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree of the zero polynomial is reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            out[i] += c;
        }
        QPoly::new(out)
    }

    pub fn sub(&self, rhs: &QPoly) -> QPoly {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly {
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Long division; `rhs` must be nonzero. Returns `(quotient, remainder)`.
    pub fn div_rem(&self, rhs: &QPoly) -> Result<(QPoly, QPoly)> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = rhs.coeffs.len() - 1;
        let lead = rhs.coeffs.last().unwrap();
        let mut rem = self.coeffs.clone();
        let mut quot =
            vec![BigRational::zero(); self.coeffs.len().saturating_sub(rhs.coeffs.len()) + 1];
        while rem.len() >= rhs.coeffs.len() && !rem.is_empty() {
            let shift = rem.len() - 1 - d;
            let factor = rem.last().unwrap() / lead;
            if !factor.is_zero() {
                for (i, c) in rhs.coeffs.iter().enumerate() {
                    let idx = shift + i;
                    let sub = c * &factor;
                    rem[idx] -= sub;
                }
                quot[shift] = factor;
            }
            // top coefficient cancels exactly
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((QPoly::new(quot), QPoly::new(rem)))
    }

    /// Exact division; errors when the remainder is nonzero.
    pub fn exact_div(&self, rhs: &QPoly) -> Result<QPoly> {
        let (q, r) = self.div_rem(rhs)?;
        if !r.is_zero() {
            return Err(Error::Shape("inexact polynomial division".into()));
        }
        Ok(q)
    }

    /// Multiplicity of the root `t0` (0 when `p(t0) != 0`); `None` for the
    /// zero polynomial, whose valuation is infinite.
    pub fn valuation_at(&self, t0: &BigRational) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let divisor = QPoly::new(vec![-t0.clone(), BigRational::one()]);
        let mut v = 0;
        let mut cur = self.clone();
        while !cur.is_zero() && cur.eval(t0).is_zero() {
            cur = cur.exact_div(&divisor).expect("root divides exactly");
            v += 1;
        }
        Some(v)
    }

    /// Substitutes another polynomial for `t` (used for reparameterization).
    pub fn compose(&self, inner: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&QPoly::constant(c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from(BigInt::from(i)))
                .collect(),
        )
    }

    /// Monic gcd over the rationals; gcd(0, 0) = 0.
    pub fn gcd(&self, rhs: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.coeffs.last().unwrap().clone();
        a.scale(&lead.recip())
    }

    /// Rescales so the coefficients are coprime integers with positive
    /// leading coefficient; zero stays zero.
    pub fn primitive(&self) -> QPoly {
        use num_integer::Integer;
        if self.is_zero() {
            return QPoly::zero();
        }
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        g *= sign;
        QPoly {
            coeffs: ints
                .into_iter()
                .map(|v| BigRational::from(v / &g))
                .collect(),
        }
    }
}

impl std::fmt::Display for QPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", crate::scalar::format_rational(c))?,
                1 => write!(f, "({})*t", crate::scalar::format_rational(c))?,
                _ => write!(f, "({})*t^{}", crate::scalar::format_rational(c), i)?,
            }
        }
        Ok(())
    }
}
