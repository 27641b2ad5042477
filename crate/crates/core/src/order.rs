//! Divisor-class model of the cyclic order A = O_Y ⊕ L_σ on Y = P¹×P¹.
//!
//! The order is represented only by its Picard data: the period e of σ, the
//! class of L, the relation divisor D with L_σ^{⊗e} ≅ O_Y(−D), the polarization
//! H and the canonical class of Y.

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chowring::{discriminant, intersect, slope, ChernData, DivisorClassY};
use crate::cohomology::LineBundleSum;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("order data violates: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<OrderViolation>),
    #[error("operation needs a rank-2 class, got rank {0}")]
    NotRankTwo(u32),
    #[error("first Chern class {0} is not a multiple of H")]
    AsymmetricC1(DivisorClassY),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderViolation {
    /// Σ (σ^i)*L over one σ-orbit differs from −D.
    Relation { orbit_sum: DivisorClassY, minus_d: DivisorClassY },
    /// D is not σ-invariant.
    AsymmetricRelationDivisor(DivisorClassY),
    ZeroPeriod,
}

impl fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderViolation::Relation { orbit_sum, minus_d } => {
                write!(f, "L + σ*L = {orbit_sum} but −D = {minus_d}")
            }
            OrderViolation::AsymmetricRelationDivisor(d) => write!(f, "D = {d} is not σ-invariant"),
            OrderViolation::ZeroPeriod => f.write_str("period e must be positive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderData {
    pub e: u32,
    pub l: DivisorClassY,
    pub d: DivisorClassY,
    pub h: DivisorClassY,
    pub k_y: DivisorClassY,
    /// Branch conic of the double cover Y → P².
    #[serde(default = "default_branch_label")]
    pub branch_label: String,
    /// Conic whose pullback is the relation divisor D.
    #[serde(default = "default_relation_label")]
    pub relation_label: String,
}

fn default_branch_label() -> String {
    "E".into()
}

fn default_relation_label() -> String {
    "E'".into()
}

impl OrderData {
    /// e = 2, L = (−1,−1), D = (2,2), H = (1,1), K_Y = (−2,−2).
    pub fn main_instance() -> Self {
        OrderData {
            e: 2,
            l: DivisorClassY::new(-1, -1),
            d: DivisorClassY::new(2, 2),
            h: DivisorClassY::H,
            k_y: DivisorClassY::CANONICAL,
            branch_label: default_branch_label(),
            relation_label: default_relation_label(),
        }
    }

    pub fn with_relation(l: DivisorClassY, d: DivisorClassY) -> Self {
        OrderData { l, d, ..OrderData::main_instance() }
    }

    pub fn validate(&self) -> Result<(), OrderError> {
        validate_order(self)
    }

    pub fn canonical_twist(&self) -> DivisorClassY {
        canonical_twist(self)
    }
}

/// Class-level consistency of the multiplication: L + σ*L + … + (σ^{e−1})*L = −D and σ*D = D.
pub fn validate_order(o: &OrderData) -> Result<(), OrderError> {
    let mut violations = Vec::new();
    if o.e == 0 {
        violations.push(OrderViolation::ZeroPeriod);
    } else {
        let mut orbit_sum = DivisorClassY::ZERO;
        let mut power = o.l;
        for _ in 0..o.e {
            orbit_sum += power;
            power = power.sigma();
        }
        if orbit_sum != -o.d {
            violations.push(OrderViolation::Relation { orbit_sum, minus_d: -o.d });
        }
    }
    if !o.d.is_symmetric() {
        violations.push(OrderViolation::AsymmetricRelationDivisor(o.d));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(OrderError::Invalid(violations))
    }
}

/// ω_A = A ⊗ O_Y(L + D + K_Y); returns the twisting class.
pub fn canonical_twist(o: &OrderData) -> DivisorClassY {
    o.l + o.d + o.k_y
}

/// Same twist written through the base: L + (e−1)R + D + π*K_X, where R is the
/// reduced pullback of the branch divisor and `pullback_base_canonical` is π*K_X.
pub fn canonical_twist_from_base(
    o: &OrderData,
    reduced_branch: DivisorClassY,
    pullback_base_canonical: DivisorClassY,
) -> DivisorClassY {
    o.l + (i64::from(o.e) - 1) * reduced_branch + o.d + pullback_base_canonical
}

/// A is del Pezzo when the dual canonical bimodule is ample.
pub fn is_del_pezzo(o: &OrderData) -> bool {
    (-canonical_twist(o)).is_ample()
}

/// Underlying O_Y-module of A ⊗_Y O_Y(N): N ⊕ (L + σ*N).
pub fn induced_summands(o: &OrderData, n: DivisorClassY) -> LineBundleSum {
    LineBundleSum::new(vec![n, o.l + n.sigma()]).expect("two summands")
}

/// Chern data of A ⊗_Y O_Y(N) for the given order.
pub fn chern_of_induced_in(o: &OrderData, n: DivisorClassY) -> ChernData {
    let other = o.l + n.sigma();
    ChernData { rank: 2, c1: n + other, c2: intersect(n, other) }
}

/// Chern data of A ⊗_Y O_Y(N) for the standard order.
pub fn chern_of_induced(n: DivisorClassY) -> ChernData {
    chern_of_induced_in(&OrderData::main_instance(), n)
}

/// Chern data of A itself.
pub fn chern_of_a() -> ChernData {
    chern_of_induced(DivisorClassY::ZERO)
}

/// Rank-2 twist by O_Y(T): c₁' = c₁ + 2T, c₂' = c₂ + c₁·T + T².
pub fn twist(c: &ChernData, t: DivisorClassY) -> Result<ChernData, OrderError> {
    if c.rank != 2 {
        return Err(OrderError::NotRankTwo(c.rank));
    }
    Ok(ChernData { rank: 2, c1: c.c1 + 2 * t, c2: c.c2 + intersect(c.c1, t) + intersect(t, t) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistResult {
    /// Number of H-twists applied (negative for twists by −H).
    pub n: i64,
    pub chern: ChernData,
}

/// Twist by a multiple of H until c₁ ∈ {(−1,−1), (−2,−2)}.
pub fn normalize_c1(c: &ChernData) -> Result<TwistResult, OrderError> {
    if c.rank != 2 {
        return Err(OrderError::NotRankTwo(c.rank));
    }
    if !c.c1.is_symmetric() {
        return Err(OrderError::AsymmetricC1(c.c1));
    }
    let k = c.c1.m;
    // k + 2n must land in {−1, −2}.
    let n = (-1 - k).div_euclid(2);
    let chern = twist(c, n * DivisorClassY::H)?;
    debug_assert!(chern.c1 == DivisorClassY::new(-1, -1) || chern.c1 == DivisorClassY::new(-2, -2));
    Ok(TwistResult { n, chern })
}

/// Δ(c) ≥ −2 for a rank-2 class.
pub fn check_bogomolov(c: &ChernData) -> Result<bool, OrderError> {
    if c.rank != 2 {
        return Err(OrderError::NotRankTwo(c.rank));
    }
    Ok(discriminant(c) >= -2)
}

/// μ(sub) − μ(amb) for a rank-one subsheaf O_Y(sub) of a rank-2 sheaf.
pub fn slope_gap_witness(sub: DivisorClassY, amb: &ChernData) -> Result<Rational64, OrderError> {
    if amb.rank != 2 {
        return Err(OrderError::NotRankTwo(amb.rank));
    }
    Ok(slope(&ChernData::line_bundle(sub)) - slope(amb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(m: i64, n: i64) -> DivisorClassY {
        DivisorClassY::new(m, n)
    }

    fn rank2(c1: DivisorClassY, c2: i64) -> ChernData {
        ChernData::new(2, c1, c2).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_order(&OrderData::main_instance()).is_ok());
        let bad = OrderData::with_relation(d(-1, 0), d(2, 2));
        match validate_order(&bad) {
            Err(OrderError::Invalid(v)) => assert_eq!(
                v,
                vec![OrderViolation::Relation { orbit_sum: d(-1, -1), minus_d: d(-2, -2) }]
            ),
            other => panic!("expected violation, got {other:?}"),
        }
        assert!(validate_order(&OrderData::with_relation(d(-2, -2), d(4, 4))).is_ok());
    }

    #[test]
    fn validate_flags_asymmetric_d() {
        let bad = OrderData::with_relation(d(-1, -2), d(3, 3));
        assert!(validate_order(&bad).is_ok());
        let bad = OrderData::with_relation(d(-1, -1), d(2, 3));
        let Err(OrderError::Invalid(v)) = validate_order(&bad) else { panic!() };
        assert!(v.contains(&OrderViolation::AsymmetricRelationDivisor(d(2, 3))));
    }

    #[test]
    fn canonical_twist_examples() {
        let a = OrderData::main_instance();
        assert_eq!(canonical_twist(&a), d(-1, -1));
        assert_eq!(canonical_twist(&a), -a.h);
        assert_eq!(canonical_twist(&OrderData::with_relation(d(-2, -2), d(4, 4))), d(0, 0));
        assert!(is_del_pezzo(&a));
        assert!((i64::from(a.e) * -canonical_twist(&a)).is_ample());
        assert!(!is_del_pezzo(&OrderData::with_relation(d(-2, -2), d(4, 4))));
    }

    #[test]
    fn canonical_twist_through_base_agrees() {
        // Branch conic pulls back to 2R with R = (1,1); π*K_{P²} = (−3,−3).
        let a = OrderData::main_instance();
        assert_eq!(canonical_twist_from_base(&a, d(1, 1), d(-3, -3)), canonical_twist(&a));
    }

    #[test]
    fn chern_of_induced_examples() {
        assert_eq!(chern_of_induced(d(0, 0)), rank2(d(-1, -1), 0));
        assert_eq!(chern_of_induced(d(-1, 0)), rank2(d(-2, -2), 2));
        for n in -3..=3 {
            assert_eq!(chern_of_induced(d(0, n + 1)).c1, d(n, n));
        }
    }

    #[test]
    fn twist_examples() {
        assert_eq!(twist(&rank2(d(-2, -2), 2), d(1, 1)).unwrap(), rank2(d(0, 0), 0));
        let c = rank2(d(3, -1), 7);
        assert_eq!(twist(&c, d(0, 0)).unwrap(), c);
        let t = twist(&rank2(d(-1, -1), 0), d(1, 1)).unwrap();
        // c₂ = 0 + (−1,−1)·(1,1) + (1,1)² = 0, keeping Δ = −2.
        assert_eq!(t, rank2(d(1, 1), 0));
        assert_eq!(discriminant(&t), -2);
        assert_eq!(
            twist(&ChernData::line_bundle(d(0, 0)), d(1, 1)),
            Err(OrderError::NotRankTwo(1))
        );
    }

    #[test]
    fn normalize_examples() {
        let r = normalize_c1(&rank2(d(2, 2), 5)).unwrap();
        // Two twists by −H by hand: ((2,2),5) → ((0,0),3) → ((−2,−2),5).
        let by_hand = twist(&twist(&rank2(d(2, 2), 5), d(-1, -1)).unwrap(), d(-1, -1)).unwrap();
        assert_eq!(r, TwistResult { n: -2, chern: by_hand });
        assert_eq!(r.chern, rank2(d(-2, -2), 5));
        assert_eq!(discriminant(&r.chern), discriminant(&rank2(d(2, 2), 5)));

        assert_eq!(
            normalize_c1(&rank2(d(-1, -1), 0)).unwrap(),
            TwistResult { n: 0, chern: rank2(d(-1, -1), 0) }
        );
        assert_eq!(normalize_c1(&rank2(d(1, 0), 0)), Err(OrderError::AsymmetricC1(d(1, 0))));
    }

    #[test]
    fn bogomolov_examples() {
        let a = chern_of_a();
        assert!(check_bogomolov(&a).unwrap());
        assert_eq!(discriminant(&a), -2);
        assert!(!check_bogomolov(&rank2(d(-2, -2), 1)).unwrap());
        assert_eq!(discriminant(&rank2(d(-2, -2), 1)), -4);
    }

    /// Closed form for Δ(A ⊗ O(a,b)), derived by expanding c₁ and c₂ by hand.
    fn delta_oracle(a: i64, b: i64) -> i64 {
        4 * (a * a - a + b * b - b) - 2 * (a + b - 1) * (a + b - 1)
    }

    #[test]
    fn induced_bundles_satisfy_bound_on_grid() {
        let mut minimal = Vec::new();
        let mut minimal_oracle = Vec::new();
        for a in -5..=5 {
            for b in -5..=5 {
                let c = chern_of_induced(d(a, b));
                assert!(c.c1.is_symmetric());
                assert_eq!(discriminant(&c), delta_oracle(a, b));
                assert!(check_bogomolov(&c).unwrap());
                if discriminant(&c) == -2 {
                    minimal.push((a, b));
                }
                if delta_oracle(a, b) == -2 {
                    minimal_oracle.push((a, b));
                }
            }
        }
        assert_eq!(minimal, minimal_oracle);
        assert!(minimal.iter().all(|&(a, b)| a == b));
        assert_eq!(minimal.len(), 11);
    }

    #[test]
    fn slope_gap_examples() {
        assert_eq!(slope_gap_witness(d(0, 0), &chern_of_a()).unwrap(), Rational64::from(1));
        for a in -5..=5 {
            for b in -5..=5 {
                let gap = slope_gap_witness(d(a, b), &chern_of_induced(d(a, b))).unwrap();
                assert_eq!(gap, Rational64::from(1));
            }
        }
        assert_eq!(
            slope_gap_witness(d(-1, -1), &rank2(d(-2, -2), 2)).unwrap(),
            Rational64::from(0)
        );
    }

    #[test]
    fn order_data_from_json() {
        let json = r#"{"e":2,"l":{"m":-1,"n":-1},"d":{"m":2,"n":2},"h":{"m":1,"n":1},"k_y":{"m":-2,"n":-2}}"#;
        let o: OrderData = serde_json::from_str(json).unwrap();
        assert_eq!(o, OrderData::main_instance());
    }

    fn rank2_strategy() -> impl Strategy<Value = ChernData> {
        (-30i64..=30, -30i64..=30, -100i64..=100).prop_map(|(m, n, c2)| rank2(d(m, n), c2))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn discriminant_twist_invariant(c in rank2_strategy(), tm in -10i64..=10, tn in -10i64..=10) {
            let t = twist(&c, d(tm, tn)).unwrap();
            prop_assert_eq!(discriminant(&t), discriminant(&c));
        }

        #[test]
        fn normalize_is_idempotent_and_invertible(k in -40i64..=40, c2 in -50i64..=50) {
            let c = rank2(d(k, k), c2);
            let r = normalize_c1(&c).unwrap();
            prop_assert_eq!(normalize_c1(&r.chern).unwrap(), TwistResult { n: 0, chern: r.chern });
            prop_assert_eq!(twist(&r.chern, -r.n * DivisorClassY::H).unwrap(), c);
        }
    }
}
