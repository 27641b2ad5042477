//! Truncated Chow ring of Y = P¹×P¹.
//!
//! Pic Y is Z² with basis the two rulings f₁ = (1,0), f₂ = (0,1); the
//! intersection form is f₁² = f₂² = 0, f₁·f₂ = 1. Everything here is exact
//! integer or rational arithmetic.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// χ(O_Y) for Y = P¹×P¹.
pub const CHI_STRUCTURE_SHEAF: i64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChowError {
    #[error("total Chern class divisor must have degree-0 part 1, got {0}")]
    NonUnitDivisor(i64),
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("operation needs a rank-2 class, got rank {0}")]
    NotRankTwo(u32),
}

/// The class of O_Y(m, n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct DivisorClassY {
    pub m: i64,
    pub n: i64,
}

impl DivisorClassY {
    pub const ZERO: DivisorClassY = DivisorClassY { m: 0, n: 0 };
    /// Pullback of a line from the plane.
    pub const H: DivisorClassY = DivisorClassY { m: 1, n: 1 };
    /// Canonical class, ω_Y = O_Y(−2,−2).
    pub const CANONICAL: DivisorClassY = DivisorClassY { m: -2, n: -2 };

    pub const fn new(m: i64, n: i64) -> Self {
        DivisorClassY { m, n }
    }

    /// Intersection number `self · other`.
    pub fn dot(self, other: DivisorClassY) -> i64 {
        intersect(self, other)
    }

    pub fn sigma(self) -> Self {
        sigma_pullback(self)
    }

    pub fn is_symmetric(self) -> bool {
        self.m == self.n
    }

    /// Ample on P¹×P¹ iff both coordinates are positive.
    pub fn is_ample(self) -> bool {
        self.m > 0 && self.n > 0
    }
}

impl fmt::Display for DivisorClassY {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

impl Add for DivisorClassY {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        DivisorClassY::new(self.m + o.m, self.n + o.n)
    }
}

impl AddAssign for DivisorClassY {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for DivisorClassY {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        DivisorClassY::new(self.m - o.m, self.n - o.n)
    }
}

impl Neg for DivisorClassY {
    type Output = Self;
    fn neg(self) -> Self {
        DivisorClassY::new(-self.m, -self.n)
    }
}

impl Mul<DivisorClassY> for i64 {
    type Output = DivisorClassY;
    fn mul(self, d: DivisorClassY) -> DivisorClassY {
        DivisorClassY::new(self * d.m, self * d.n)
    }
}

impl std::iter::Sum for DivisorClassY {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(DivisorClassY::ZERO, Add::add)
    }
}

/// (m₁,n₁)·(m₂,n₂) = m₁n₂ + m₂n₁.
pub fn intersect(a: DivisorClassY, b: DivisorClassY) -> i64 {
    a.m * b.n + b.m * a.n
}

/// σ*(O_Y(m,n)) = O_Y(n,m).
pub fn sigma_pullback(a: DivisorClassY) -> DivisorClassY {
    DivisorClassY::new(a.n, a.m)
}

/// An element r + d + p·[pt] of A*(Y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChowClassY {
    pub r: i64,
    pub d: DivisorClassY,
    pub p: i64,
}

impl ChowClassY {
    pub const ONE: ChowClassY = ChowClassY { r: 1, d: DivisorClassY::ZERO, p: 0 };

    pub const fn new(r: i64, d: DivisorClassY, p: i64) -> Self {
        ChowClassY { r, d, p }
    }

    /// Total Chern class 1 + D of the line bundle O_Y(D).
    pub fn of_line_bundle(d: DivisorClassY) -> Self {
        ChowClassY::new(1, d, 0)
    }

    /// Total Chern class 1 + c₁ + c₂ of a sheaf.
    pub fn total_chern(c: &ChernData) -> Self {
        ChowClassY::new(1, c.c1, c.c2)
    }
}

impl Mul for ChowClassY {
    type Output = ChowClassY;
    fn mul(self, o: ChowClassY) -> ChowClassY {
        chow_mul(self, o)
    }
}

/// Graded product, truncated above degree 2.
pub fn chow_mul(x: ChowClassY, y: ChowClassY) -> ChowClassY {
    ChowClassY {
        r: x.r * y.r,
        d: x.r * y.d + y.r * x.d,
        p: x.r * y.p + y.r * x.p + intersect(x.d, y.d),
    }
}

/// Solves `total_sub · q = total_ambient` for q.
///
/// The truncated inverse of 1 + d + p is 1 − d + (d² − p).
pub fn whitney_div(total_ambient: ChowClassY, total_sub: ChowClassY) -> Result<ChowClassY, ChowError> {
    if total_sub.r != 1 {
        return Err(ChowError::NonUnitDivisor(total_sub.r));
    }
    let inverse = ChowClassY::new(1, -total_sub.d, intersect(total_sub.d, total_sub.d) - total_sub.p);
    Ok(chow_mul(total_ambient, inverse))
}

/// Rank and Chern classes of a coherent sheaf on Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChernData {
    pub rank: u32,
    pub c1: DivisorClassY,
    pub c2: i64,
}

impl ChernData {
    pub fn new(rank: u32, c1: DivisorClassY, c2: i64) -> Result<Self, ChowError> {
        if rank == 0 {
            return Err(ChowError::ZeroRank);
        }
        Ok(ChernData { rank, c1, c2 })
    }

    pub fn line_bundle(d: DivisorClassY) -> Self {
        ChernData { rank: 1, c1: d, c2: 0 }
    }

    /// Chern data of a direct sum, via the Whitney product formula.
    pub fn direct_sum(&self, other: &ChernData) -> ChernData {
        let total = ChowClassY::total_chern(self) * ChowClassY::total_chern(other);
        ChernData { rank: self.rank + other.rank, c1: total.d, c2: total.p }
    }

    pub fn euler_char(&self) -> i64 {
        euler_char(self)
    }

    pub fn discriminant(&self) -> i64 {
        discriminant(self)
    }

    pub fn slope(&self) -> Rational64 {
        slope(self)
    }
}

impl fmt::Display for ChernData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(rank {}, c1 {}, c2 {})", self.rank, self.c1, self.c2)
    }
}

/// Riemann-Roch on Y: χ = r·χ(O_Y) + ½ c₁·(c₁ − K_Y) − c₂.
pub fn euler_char(c: &ChernData) -> i64 {
    let twice = intersect(c.c1, c.c1 - DivisorClassY::CANONICAL);
    // c₁·(c₁−K) = 2mn + 2m + 2n on this lattice, always even.
    debug_assert_eq!(twice % 2, 0);
    i64::from(c.rank) * CHI_STRUCTURE_SHEAF + twice / 2 - c.c2
}

/// Δ = 4c₂ − c₁².
pub fn discriminant(c: &ChernData) -> i64 {
    4 * c.c2 - intersect(c.c1, c.c1)
}

/// μ = c₁·H / rank with respect to H = (1,1).
pub fn slope(c: &ChernData) -> Rational64 {
    Rational64::new(intersect(c.c1, DivisorClassY::H), i64::from(c.rank))
}
