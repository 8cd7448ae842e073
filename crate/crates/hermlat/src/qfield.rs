//! Exact arithmetic in the imaginary quadratic field K = Q(sqrt(-d)).
//!
//! Elements are stored in the integral basis {1, omega}, so the ring of
//! integers is exactly the integer-coordinate elements for every d.

use crate::linalg::Q;
use num::bigint::BigInt;
use num::{One, Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaKind {
    /// omega = sqrt(-d), for -d = 2, 3 mod 4; discriminant -4d.
    SqrtMinusD,
    /// omega = (1 + sqrt(-d))/2, for -d = 1 mod 4; discriminant -d.
    HalfOnePlusSqrtMinusD,
}

/// An element a + b*omega of K.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KElem {
    pub a: Q,
    pub b: Q,
}

impl KElem {
    pub fn new(a: Q, b: Q) -> Self {
        KElem { a, b }
    }

    pub fn zero() -> Self {
        KElem { a: Q::zero(), b: Q::zero() }
    }

    pub fn one() -> Self {
        KElem { a: Q::one(), b: Q::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        KElem { a: crate::linalg::qi(n), b: Q::zero() }
    }

    pub fn from_rat(a: Q) -> Self {
        KElem { a, b: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, y: &KElem) -> KElem {
        KElem { a: &self.a + &y.a, b: &self.b + &y.b }
    }

    pub fn sub(&self, y: &KElem) -> KElem {
        KElem { a: &self.a - &y.a, b: &self.b - &y.b }
    }

    pub fn neg(&self) -> KElem {
        KElem { a: -self.a.clone(), b: -self.b.clone() }
    }

    pub fn scale(&self, c: &Q) -> KElem {
        KElem { a: &self.a * c, b: &self.b * c }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    NotSquarefree(u64),
    NotPositive,
    DivisionByZero,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotSquarefree(d) => write!(f, "d = {d} is not squarefree"),
            FieldError::NotPositive => write!(f, "d must be a positive integer"),
            FieldError::DivisionByZero => write!(f, "division by zero in K"),
        }
    }
}

impl std::error::Error for FieldError {}

/// The field Q(sqrt(-d)) with its ring of integers Z[omega].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadField {
    d: u64,
    kind: OmegaKind,
    discriminant: BigInt,
    /// Tr(omega): 0 or 1.
    tr_omega: Q,
    /// N(omega): d or (1+d)/4.
    n_omega: Q,
    units: Vec<KElem>,
}

impl QuadField {
    pub fn new(d: u64) -> Result<QuadField, FieldError> {
        if d == 0 {
            return Err(FieldError::NotPositive);
        }
        let mut p = 2u64;
        while p * p <= d {
            if d % (p * p) == 0 {
                return Err(FieldError::NotSquarefree(d));
            }
            p += 1;
        }
        let (kind, discriminant, tr_omega, n_omega) = if d % 4 == 3 {
            // -d = 1 mod 4
            (
                OmegaKind::HalfOnePlusSqrtMinusD,
                -BigInt::from(d),
                Q::one(),
                Q::from_integer(BigInt::from((1 + d) / 4)),
            )
        } else {
            (
                OmegaKind::SqrtMinusD,
                BigInt::from(-4i64) * BigInt::from(d),
                Q::zero(),
                Q::from_integer(BigInt::from(d)),
            )
        };
        let omega = KElem::new(Q::zero(), Q::one());
        let units = match d {
            1 => vec![KElem::one(), KElem::one().neg(), omega.clone(), omega.neg()],
            3 => {
                // omega is a primitive 6th root of unity
                let w2 = KElem::new(-Q::one(), Q::one()); // omega^2 = omega - 1
                vec![
                    KElem::one(),
                    KElem::one().neg(),
                    omega.clone(),
                    omega.neg(),
                    w2.clone(),
                    w2.neg(),
                ]
            }
            _ => vec![KElem::one(), KElem::one().neg()],
        };
        Ok(QuadField { d, kind, discriminant, tr_omega, n_omega, units })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn omega_kind(&self) -> OmegaKind {
        self.kind
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    pub fn units(&self) -> &[KElem] {
        &self.units
    }

    pub fn omega(&self) -> KElem {
        KElem::new(Q::zero(), Q::one())
    }

    /// sqrt(-d) as an element of K.
    pub fn sqrt_md(&self) -> KElem {
        match self.kind {
            OmegaKind::SqrtMinusD => self.omega(),
            OmegaKind::HalfOnePlusSqrtMinusD => KElem::new(-Q::one(), crate::linalg::qi(2)),
        }
    }

    pub fn mul(&self, x: &KElem, y: &KElem) -> KElem {
        // omega^2 = tr_omega * omega - n_omega
        let bb = &x.b * &y.b;
        KElem {
            a: &x.a * &y.a - &self.n_omega * &bb,
            b: &x.a * &y.b + &x.b * &y.a + &self.tr_omega * &bb,
        }
    }

    pub fn conj(&self, x: &KElem) -> KElem {
        // conj(omega) = tr_omega - omega
        KElem { a: &x.a + &self.tr_omega * &x.b, b: -x.b.clone() }
    }

    pub fn norm(&self, x: &KElem) -> Q {
        &x.a * &x.a + &self.tr_omega * &x.a * &x.b + &self.n_omega * &x.b * &x.b
    }

    pub fn trace(&self, x: &KElem) -> Q {
        &x.a + &x.a + &self.tr_omega * &x.b
    }

    pub fn inv(&self, x: &KElem) -> Result<KElem, FieldError> {
        if x.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.norm(x);
        Ok(self.conj(x).scale(&n.recip()))
    }

    pub fn div(&self, x: &KElem, y: &KElem) -> Result<KElem, FieldError> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn is_integral(&self, x: &KElem) -> bool {
        x.a.is_integer() && x.b.is_integer()
    }

    pub fn is_unit(&self, x: &KElem) -> bool {
        self.units.contains(x)
    }

    /// Coordinates (u, v) with x = u + v*sqrt(-d).
    pub fn to_sqrt_basis(&self, x: &KElem) -> (Q, Q) {
        match self.kind {
            OmegaKind::SqrtMinusD => (x.a.clone(), x.b.clone()),
            OmegaKind::HalfOnePlusSqrtMinusD => {
                (&x.a + &x.b / crate::linalg::qi(2), &x.b / crate::linalg::qi(2))
            }
        }
    }

    /// Element u + v*sqrt(-d) in {1, omega} coordinates.
    pub fn from_sqrt_basis(&self, u: &Q, v: &Q) -> KElem {
        match self.kind {
            OmegaKind::SqrtMinusD => KElem::new(u.clone(), v.clone()),
            OmegaKind::HalfOnePlusSqrtMinusD => KElem::new(u - v, v + v),
        }
    }

    /// Render in terms of sqrt(-d), e.g. "(3+2*s)/1" style "3/2+1/6*sqrt(-15)".
    pub fn fmt_elem(&self, x: &KElem) -> String {
        let (u, v) = self.to_sqrt_basis(x);
        if v.is_zero() {
            return format!("{u}");
        }
        let root = format!("sqrt(-{})", self.d);
        if u.is_zero() {
            if v.is_one() {
                return root;
            }
            if v == -Q::one() {
                return format!("-{root}");
            }
            return format!("{v}*{root}");
        }
        let (vs, vabs) = if v.is_negative() { ("-", -v.clone()) } else { ("+", v.clone()) };
        if vabs.is_one() {
            format!("{u}{vs}{root}")
        } else {
            format!("{u}{vs}{vabs}*{root}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qi, qr};

    #[test]
    fn field_conventions() {
        let k15 = QuadField::new(15).unwrap();
        assert_eq!(k15.omega_kind(), OmegaKind::HalfOnePlusSqrtMinusD);
        assert_eq!(k15.discriminant(), &BigInt::from(-15));
        let k5 = QuadField::new(5).unwrap();
        assert_eq!(k5.omega_kind(), OmegaKind::SqrtMinusD);
        assert_eq!(k5.discriminant(), &BigInt::from(-20));
        assert!(QuadField::new(12).is_err());
        assert!(QuadField::new(0).is_err());
    }

    #[test]
    fn unit_counts() {
        assert_eq!(QuadField::new(1).unwrap().units().len(), 4);
        assert_eq!(QuadField::new(3).unwrap().units().len(), 6);
        assert_eq!(QuadField::new(5).unwrap().units().len(), 2);
    }

    #[test]
    fn norm_trace_examples() {
        let k5 = QuadField::new(5).unwrap();
        let s = k5.sqrt_md();
        assert_eq!(k5.conj(&s), s.neg());
        assert_eq!(k5.norm(&s), qi(5));
        assert_eq!(k5.trace(&s), qi(0));

        let k15 = QuadField::new(15).unwrap();
        // (1 + sqrt(-15))/2 = omega, N = 4
        assert_eq!(k15.norm(&k15.omega()), qi(4));
        // (3 + sqrt(-15))/6 has trace 1
        let x = k15.from_sqrt_basis(&qr(1, 2), &qr(1, 6));
        assert_eq!(k15.trace(&x), qi(1));
    }

    #[test]
    fn ring_identities() {
        for d in [1u64, 2, 3, 5, 6, 10, 13, 15, 21, 23] {
            let k = QuadField::new(d).unwrap();
            let xs = [
                KElem::new(qr(1, 2), qr(-2, 3)),
                KElem::new(qi(3), qi(1)),
                k.omega(),
                k.sqrt_md(),
            ];
            for x in &xs {
                for y in &xs {
                    assert_eq!(k.norm(&k.mul(x, y)), k.norm(x) * k.norm(y));
                    assert_eq!(k.mul(x, y), k.mul(y, x));
                }
                assert_eq!(k.conj(&k.conj(x)), *x);
                assert_eq!(k.trace(&k.conj(x)), k.trace(x));
                assert_eq!(KElem::from_rat(k.norm(x)), k.mul(x, &k.conj(x)));
                if !x.is_zero() {
                    assert_eq!(k.mul(x, &k.inv(x).unwrap()), KElem::one());
                }
            }
            // sqrt(-d)^2 = -d
            let s = k.sqrt_md();
            assert_eq!(k.mul(&s, &s), KElem::from_int(-(d as i64)));
        }
    }
}
