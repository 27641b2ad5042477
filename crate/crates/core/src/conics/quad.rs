//! Scalars of a quadratic extension Q(√d), and square-root extraction for
//! rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// a + b·√d with a, b rational and d a non-square integer.
///
/// Rational values carry `b = 0`; their `d` is irrelevant and set to 1. The
/// radicand is reduced by small square factors only, so the same field may
/// appear with radicands differing by a square; arithmetic and equality
/// convert between such representations. Mixing genuinely different
/// quadratic fields is a logic error.
#[derive(Clone)]
pub struct QuadScalar {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl PartialEq for QuadScalar {
    fn eq(&self, o: &QuadScalar) -> bool {
        // b₁√d₁ = b₂√d₂ ⟺ same sign and b₁²d₁ = b₂²d₂.
        self.a == o.a
            && self.b.is_negative() == o.b.is_negative()
            && &self.b * &self.b * BigRational::from_integer(self.d.clone())
                == &o.b * &o.b * BigRational::from_integer(o.d.clone())
    }
}

impl Eq for QuadScalar {}

impl QuadScalar {
    pub fn rational(a: BigRational) -> Self {
        QuadScalar { a, b: BigRational::zero(), d: BigInt::one() }
    }

    pub fn from_int(n: &BigInt) -> Self {
        QuadScalar::rational(BigRational::from_integer(n.clone()))
    }

    /// a + b√d. `d` must be square-free and not 1.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() {
            return QuadScalar::rational(a);
        }
        debug_assert!(!d.is_one() && !d.is_zero());
        QuadScalar { a, b, d }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.a.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Rewrite `o` over this scalar's radicand (or vice versa) so both share one.
    fn align(&self, o: &QuadScalar) -> (QuadScalar, QuadScalar) {
        match (self.b.is_zero(), o.b.is_zero()) {
            (true, _) | (_, true) => {
                let d = if self.b.is_zero() { o.d.clone() } else { self.d.clone() };
                (self.with_d(&d), o.with_d(&d))
            }
            (false, false) if self.d == o.d => (self.clone(), o.clone()),
            (false, false) => {
                // √d₂ = (s/d₁)·√d₁ where s² = d₁d₂.
                let prod = &self.d * &o.d;
                assert!(!prod.is_negative(), "quadratic scalars over different fields");
                let s = prod.sqrt();
                assert_eq!(&s * &s, prod, "quadratic scalars over different fields");
                let factor = BigRational::new(s, self.d.clone());
                (self.clone(), QuadScalar { a: o.a.clone(), b: &o.b * factor, d: self.d.clone() })
            }
        }
    }

    fn with_d(&self, d: &BigInt) -> QuadScalar {
        if self.b.is_zero() {
            QuadScalar { a: self.a.clone(), b: BigRational::zero(), d: d.clone() }
        } else {
            self.clone()
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadScalar { a: self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }

    /// a² − d·b².
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(self.d.clone()) * &self.b * &self.b
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conjugate();
        Some(QuadScalar::new(c.a / &n, c.b / &n, c.d))
    }
}

impl fmt::Debug for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        let mag = self.b.abs();
        let radical = if mag.is_one() { format!("√{}", self.d) } else { format!("{}√{}", mag, self.d) };
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{radical}")
            } else {
                write!(f, "{radical}")
            }
        } else {
            write!(f, "{}{}{}", self.a, sign, radical)
        }
    }
}

impl<'a> Add<&'a QuadScalar> for &'a QuadScalar {
    type Output = QuadScalar;
    fn add(self, o: &QuadScalar) -> QuadScalar {
        let (x, y) = self.align(o);
        QuadScalar::new(&x.a + &y.a, &x.b + &y.b, x.d)
    }
}

impl<'a> Sub<&'a QuadScalar> for &'a QuadScalar {
    type Output = QuadScalar;
    fn sub(self, o: &QuadScalar) -> QuadScalar {
        let (x, y) = self.align(o);
        QuadScalar::new(&x.a - &y.a, &x.b - &y.b, x.d)
    }
}

impl<'a> Mul<&'a QuadScalar> for &'a QuadScalar {
    type Output = QuadScalar;
    fn mul(self, o: &QuadScalar) -> QuadScalar {
        let (x, y) = self.align(o);
        let dq = BigRational::from_integer(x.d.clone());
        let a = &x.a * &y.a + dq * &x.b * &y.b;
        let b = &x.a * &y.b + &x.b * &y.a;
        QuadScalar::new(a, b, x.d)
    }
}

impl Neg for &QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar { a: -self.a.clone(), b: -self.b.clone(), d: self.d.clone() }
    }
}

/// Primes below this bound are divided out of radicands.
const SMALL_PRIME_BOUND: u32 = 1000;

/// Writes n = k²·s, removing square factors of primes below 1000 and
/// detecting a perfect-square cofactor; s is then 1 (n a square), or a
/// non-square free of small square factors. Exact for the purposes of field
/// arithmetic: s = 1 exactly when |n| is a perfect square.
pub fn reduce_radicand(n: &BigInt) -> (BigInt, BigInt) {
    assert!(!n.is_zero(), "radicand zero");
    let sign = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut rem = n.abs();
    let mut k = BigInt::one();
    let mut p: u32 = 2;
    while p < SMALL_PRIME_BOUND {
        let p2 = BigInt::from(p * p);
        while (&rem % &p2).is_zero() {
            rem /= &p2;
            k *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = rem.sqrt();
    if &r * &r == rem {
        return (k * r, sign);
    }
    (k, sign * rem)
}

/// √q for a rational q ≠ 0, as a QuadScalar (rational when q is a square).
pub fn sqrt_rational(q: &BigRational) -> QuadScalar {
    // √(p/r) = √(p·r)/r
    let pr = q.numer() * q.denom();
    let (k, s) = reduce_radicand(&pr);
    let coeff = BigRational::new(k, q.denom().clone());
    if s.is_one() {
        QuadScalar::rational(coeff)
    } else {
        QuadScalar::new(BigRational::zero(), coeff, s)
    }
}
