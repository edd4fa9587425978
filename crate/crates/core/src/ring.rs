//! Exact arithmetic over the supported coefficient rings.
//!
//! Three rings are available: the integers `Z`, the integers modulo `p`
//! written `Z/p` (any `p >= 2`, composite moduli and their zero divisors
//! included) and the rationals `Q`. Every element carries its ring, so
//! mixing rings is detected instead of silently coercing, and values are
//! kept canonical — residues in `[0, p)`, rationals reduced with a
//! positive denominator — so equality is structural.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Errors from ring arithmetic, inversion and parsing.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("cannot combine elements of {left} and {right}")]
    MixedRings { left: RingSpec, right: RingSpec },
    #[error("{value} is not invertible in {ring}")]
    NotInvertible { value: String, ring: RingSpec },
    #[error("cannot parse {input:?} as an element of {ring}")]
    BadElement { input: String, ring: RingSpec },
    #[error("cannot parse {0:?} as a ring (expected \"Z\", \"Z/<p>\" or \"Q\")")]
    BadSpec(String),
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(BigUint),
}

/// One of the supported coefficient rings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingSpec {
    Integers,
    IntegersMod(BigUint),
    Rationals,
}

impl RingSpec {
    /// The ring of integers modulo `p`.
    pub fn mod_p(p: u64) -> Self {
        RingSpec::IntegersMod(BigUint::from(p))
    }

    /// Checks the modulus constraint `p >= 2`.
    pub fn validate(&self) -> Result<(), RingError> {
        match self {
            RingSpec::IntegersMod(p) if *p < BigUint::from(2u8) => {
                Err(RingError::BadModulus(p.clone()))
            }
            _ => Ok(()),
        }
    }

    pub fn zero(&self) -> RingElement {
        self.from_bigint(&BigInt::zero())
    }

    pub fn one(&self) -> RingElement {
        self.from_bigint(&BigInt::one())
    }

    /// Canonical image of an integer in this ring.
    pub fn from_int(&self, n: i64) -> RingElement {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> RingElement {
        match self {
            RingSpec::Integers => RingElement::Integer(n.clone()),
            RingSpec::IntegersMod(p) => {
                let p_int = BigInt::from(p.clone());
                let value = n.mod_floor(&p_int).to_biguint().expect("mod_floor is non-negative");
                RingElement::Residue { value, modulus: p.clone() }
            }
            RingSpec::Rationals => RingElement::Rational(BigRational::from_integer(n.clone())),
        }
    }

    /// Parses the decimal-string form used by the file formats:
    /// `"-3"` over Z, `"4"` over Z/p, `"-3/7"` over Q.
    pub fn parse(&self, input: &str) -> Result<RingElement, RingError> {
        // Tolerate the unicode minus sign that shows up in pasted text.
        let s = input.trim().replace('\u{2212}', "-");
        let bad = || RingError::BadElement { input: input.to_string(), ring: self.clone() };
        match self {
            RingSpec::Integers => {
                let n = BigInt::from_str(&s).map_err(|_| bad())?;
                Ok(RingElement::Integer(n))
            }
            RingSpec::IntegersMod(_) => {
                let n = BigInt::from_str(&s).map_err(|_| bad())?;
                Ok(self.from_bigint(&n))
            }
            RingSpec::Rationals => {
                let (num, den) = match s.split_once('/') {
                    Some((n, d)) => (
                        BigInt::from_str(n.trim()).map_err(|_| bad())?,
                        BigInt::from_str(d.trim()).map_err(|_| bad())?,
                    ),
                    None => (BigInt::from_str(&s).map_err(|_| bad())?, BigInt::one()),
                };
                if den.is_zero() {
                    return Err(bad());
                }
                Ok(RingElement::Rational(BigRational::new(num, den)))
            }
        }
    }

    /// True when every nonzero element is a unit (Q, or Z/p with p prime).
    pub fn is_field(&self) -> bool {
        match self {
            RingSpec::Integers => false,
            RingSpec::Rationals => true,
            RingSpec::IntegersMod(p) => is_prime(p),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => write!(f, "Z"),
            RingSpec::IntegersMod(p) => write!(f, "Z/{p}"),
            RingSpec::Rationals => write!(f, "Q"),
        }
    }
}

impl FromStr for RingSpec {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self, RingError> {
        let s = s.trim();
        let spec = match s {
            "Z" => RingSpec::Integers,
            "Q" => RingSpec::Rationals,
            _ => match s.strip_prefix("Z/") {
                Some(p) => {
                    let p = BigUint::from_str(p.trim()).map_err(|_| RingError::BadSpec(s.to_string()))?;
                    RingSpec::IntegersMod(p)
                }
                None => return Err(RingError::BadSpec(s.to_string())),
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// An exact element of one of the supported rings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingElement {
    Integer(BigInt),
    Residue { value: BigUint, modulus: BigUint },
    Rational(BigRational),
}

impl RingElement {
    pub fn spec(&self) -> RingSpec {
        match self {
            RingElement::Integer(_) => RingSpec::Integers,
            RingElement::Residue { modulus, .. } => RingSpec::IntegersMod(modulus.clone()),
            RingElement::Rational(_) => RingSpec::Rationals,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingElement::Integer(n) => n.is_zero(),
            RingElement::Residue { value, .. } => value.is_zero(),
            RingElement::Rational(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            RingElement::Integer(n) => n.is_one(),
            RingElement::Residue { value, .. } => value.is_one(),
            RingElement::Rational(q) => q.is_one(),
        }
    }

    fn mixed(&self, other: &RingElement) -> RingError {
        RingError::MixedRings { left: self.spec(), right: other.spec() }
    }

    /// Exact sum in canonical form.
    pub fn add(&self, other: &RingElement) -> Result<RingElement, RingError> {
        match (self, other) {
            (RingElement::Integer(a), RingElement::Integer(b)) => Ok(RingElement::Integer(a + b)),
            (
                RingElement::Residue { value: a, modulus: p },
                RingElement::Residue { value: b, modulus: q },
            ) if p == q => Ok(RingElement::Residue { value: (a + b) % p, modulus: p.clone() }),
            (RingElement::Rational(a), RingElement::Rational(b)) => Ok(RingElement::Rational(a + b)),
            _ => Err(self.mixed(other)),
        }
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement, RingError> {
        self.add(&other.neg())
    }

    /// Exact product in canonical form.
    pub fn mul(&self, other: &RingElement) -> Result<RingElement, RingError> {
        match (self, other) {
            (RingElement::Integer(a), RingElement::Integer(b)) => Ok(RingElement::Integer(a * b)),
            (
                RingElement::Residue { value: a, modulus: p },
                RingElement::Residue { value: b, modulus: q },
            ) if p == q => Ok(RingElement::Residue { value: (a * b) % p, modulus: p.clone() }),
            (RingElement::Rational(a), RingElement::Rational(b)) => Ok(RingElement::Rational(a * b)),
            _ => Err(self.mixed(other)),
        }
    }

    pub fn neg(&self) -> RingElement {
        match self {
            RingElement::Integer(n) => RingElement::Integer(-n),
            RingElement::Residue { value, modulus } => {
                let value = if value.is_zero() { value.clone() } else { modulus - value };
                RingElement::Residue { value, modulus: modulus.clone() }
            }
            RingElement::Rational(q) => RingElement::Rational(-q),
        }
    }

    /// Multiplicative inverse, or `NotInvertible` when the element is not
    /// a unit. Over Z the units are ±1; over Q every nonzero element;
    /// over Z/p exactly the residues coprime to p (extended gcd).
    pub fn try_invert(&self) -> Result<RingElement, RingError> {
        let not_a_unit = || RingError::NotInvertible { value: self.to_string(), ring: self.spec() };
        match self {
            RingElement::Integer(n) => {
                if n.is_one() || (-n).is_one() {
                    Ok(self.clone())
                } else {
                    Err(not_a_unit())
                }
            }
            RingElement::Rational(q) => {
                if q.is_zero() {
                    Err(not_a_unit())
                } else {
                    Ok(RingElement::Rational(q.recip()))
                }
            }
            RingElement::Residue { value, modulus } => {
                let p = BigInt::from(modulus.clone());
                let ext = BigInt::from(value.clone()).extended_gcd(&p);
                if ext.gcd.is_one() {
                    let inv = ext.x.mod_floor(&p).to_biguint().expect("mod_floor is non-negative");
                    Ok(RingElement::Residue { value: inv, modulus: modulus.clone() })
                } else {
                    Err(not_a_unit())
                }
            }
        }
    }

    /// Whether the element is a unit of its ring.
    pub fn is_invertible(&self) -> bool {
        self.try_invert().is_ok()
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElement::Integer(n) => write!(f, "{n}"),
            RingElement::Residue { value, .. } => write!(f, "{value}"),
            RingElement::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}

/// Trial-division primality test; moduli in practice are small.
fn is_prime(p: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if *p < two {
        return false;
    }
    if *p == two {
        return true;
    }
    if p.is_even() {
        return false;
    }
    let mut d = BigUint::from(3u8);
    while &d * &d <= *p {
        if (p % &d).is_zero() {
            return false;
        }
        d += two.clone();
    }
    true
}

/// Lift to an ordinary integer: identity on Z, the canonical
/// representative on Z/p, and the numerator for integral rationals.
/// Used by the Smith normal form oracle and the decomposition checker.
pub(crate) fn lift_to_bigint(x: &RingElement) -> Option<BigInt> {
    match x {
        RingElement::Integer(n) => Some(n.clone()),
        RingElement::Residue { value, .. } => Some(BigInt::from(value.clone())),
        RingElement::Rational(q) => q.denom().is_one().then(|| q.numer().clone()),
    }
}

/// Lift to a rational, always possible for the supported rings.
pub(crate) fn lift_to_rational(x: &RingElement) -> BigRational {
    match x {
        RingElement::Integer(n) => BigRational::from_integer(n.clone()),
        RingElement::Residue { value, .. } => {
            BigRational::from_integer(BigInt::from(value.clone()))
        }
        RingElement::Rational(q) => q.clone(),
    }
}

/// Push a rational back into `spec`; fails when a denominator is not a
/// unit there (cannot happen when the rational came from inverting a
/// matrix whose determinant is a unit).
pub(crate) fn lower_from_rational(spec: &RingSpec, q: &BigRational) -> Option<RingElement> {
    match spec {
        RingSpec::Rationals => Some(RingElement::Rational(q.clone())),
        RingSpec::Integers => q.denom().is_one().then(|| RingElement::Integer(q.numer().clone())),
        RingSpec::IntegersMod(_) => {
            let den = spec.from_bigint(q.denom()).try_invert().ok()?;
            spec.from_bigint(q.numer()).mul(&den).ok()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(n: i64) -> RingElement {
        RingSpec::Integers.from_int(n)
    }

    fn zm(n: i64, p: u64) -> RingElement {
        RingSpec::mod_p(p).from_int(n)
    }

    fn q(n: i64, d: i64) -> RingElement {
        RingElement::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    #[test]
    fn addition_examples() {
        assert_eq!(z(2).add(&z(-2)).unwrap(), z(0));
        assert_eq!(zm(4, 6).add(&zm(5, 6)).unwrap(), zm(3, 6));
        assert_eq!(q(1, 2).add(&q(1, 3)).unwrap(), q(5, 6));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(z(-1).mul(&z(-1)).unwrap(), z(1));
        assert_eq!(zm(2, 6).mul(&zm(3, 6)).unwrap(), zm(0, 6));
        assert_eq!(q(2, 3).mul(&q(3, 2)).unwrap(), q(1, 1));
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(z(-1).try_invert().unwrap(), z(-1));
        assert!(matches!(z(2).try_invert(), Err(RingError::NotInvertible { .. })));
        assert_eq!(zm(5, 6).try_invert().unwrap(), zm(5, 6));
        assert_eq!(q(2, 3).try_invert().unwrap(), q(3, 2));
    }

    #[test]
    fn mixed_rings_are_rejected() {
        assert!(matches!(z(1).add(&q(1, 2)), Err(RingError::MixedRings { .. })));
        assert!(matches!(zm(1, 4).mul(&zm(1, 6)), Err(RingError::MixedRings { .. })));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(zm(-1, 6), zm(5, 6));
        assert_eq!(q(2, -4), q(-1, 2));
        assert_eq!(q(6, 3).to_string(), "2");
    }

    #[test]
    fn spec_round_trip() {
        for s in ["Z", "Z/6", "Q"] {
            assert_eq!(s.parse::<RingSpec>().unwrap().to_string(), s);
        }
        assert!("Z/1".parse::<RingSpec>().is_err());
        assert!("R".parse::<RingSpec>().is_err());
    }

    #[test]
    fn element_parse_round_trip() {
        let cases = [
            (RingSpec::Integers, "-3"),
            (RingSpec::mod_p(7), "4"),
            (RingSpec::Rationals, "-3/7"),
            (RingSpec::Rationals, "2"),
        ];
        for (spec, s) in cases {
            assert_eq!(spec.parse(s).unwrap().to_string(), s);
        }
        assert!(RingSpec::Rationals.parse("1/0").is_err());
        assert!(RingSpec::Integers.parse("x").is_err());
    }

    #[test]
    fn field_detection() {
        assert!(RingSpec::Rationals.is_field());
        assert!(RingSpec::mod_p(2).is_field());
        assert!(RingSpec::mod_p(97).is_field());
        assert!(!RingSpec::mod_p(6).is_field());
        assert!(!RingSpec::Integers.is_field());
    }

    fn arb_spec() -> impl Strategy<Value = RingSpec> {
        prop_oneof![
            Just(RingSpec::Integers),
            (2u64..60).prop_map(RingSpec::mod_p),
            Just(RingSpec::Rationals),
        ]
    }

    fn arb_element(spec: RingSpec) -> impl Strategy<Value = RingElement> {
        (-40i64..40, 1i64..12).prop_map(move |(n, d)| match &spec {
            RingSpec::Rationals => q(n, d),
            other => other.from_int(n),
        })
    }

    fn arb_triple() -> impl Strategy<Value = (RingElement, RingElement, RingElement)> {
        arb_spec().prop_flat_map(|spec| {
            (
                arb_element(spec.clone()),
                arb_element(spec.clone()),
                arb_element(spec),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in arb_triple()) {
            let ab = a.add(&b).unwrap();
            let ba = b.add(&a).unwrap();
            prop_assert_eq!(&ab, &ba);
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(
                ab.add(&c).unwrap(),
                a.add(&b.add(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b).unwrap().mul(&c).unwrap(),
                a.mul(&b.mul(&c).unwrap()).unwrap()
            );
            // distributivity
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            // additive inverse and identities
            let spec = a.spec();
            prop_assert!(a.add(&a.neg()).unwrap().is_zero());
            prop_assert_eq!(a.add(&spec.zero()).unwrap(), a.clone());
            prop_assert_eq!(a.mul(&spec.one()).unwrap(), a.clone());
        }

        #[test]
        fn inverse_really_inverts((a, _, _) in arb_triple()) {
            match a.try_invert() {
                Ok(inv) => prop_assert!(a.mul(&inv).unwrap().is_one()),
                Err(RingError::NotInvertible { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }

        #[test]
        fn unit_characterization(n in -40i64..40, p in 2u64..60) {
            // over Z: exactly ±1
            prop_assert_eq!(z(n).is_invertible(), n == 1 || n == -1);
            // over Q: exactly nonzero
            prop_assert_eq!(q(n, 1).is_invertible(), n != 0);
            // over Z/p: exactly gcd(n, p) == 1
            let g = BigInt::from(n).gcd(&BigInt::from(p));
            prop_assert_eq!(zm(n, p).is_invertible(), g.is_one());
        }
    }
}
