//! Cohomology of line bundles on P¹ and P¹×P¹, and the Hom/Ext dimensions
//! between split bundles, induced A-modules and the torsion sheaves supported
//! on rulings that appear in the moduli computations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chowring::{ChernData, DivisorClassY};
use crate::order::{self, OrderData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("a line bundle sum needs at least one summand")]
    EmptySum,
    #[error("split A-module presentation needs exactly two summands, got {0}")]
    SplitArity(usize),
    #[error("first Chern class {0} of a split A-module is not of the form (k,k)")]
    AsymmetricSplit(DivisorClassY),
    #[error("unknown dimension computation `{0}`")]
    UnknownCase(String),
}

/// (h⁰, h¹) of O(n) on P¹.
pub fn h_p1(n: i64) -> (u64, u64) {
    ((n + 1).max(0) as u64, (-n - 1).max(0) as u64)
}

/// Dimensions (h⁰, h¹, h²) of a line bundle on Y, by Künneth.
pub fn h_y(d: DivisorClassY) -> [u64; 3] {
    let (a0, a1) = h_p1(d.m);
    let (b0, b1) = h_p1(d.n);
    [a0 * b0, a0 * b1 + a1 * b0, a1 * b1]
}

/// A finite direct sum of line bundles on Y. Summand order is not significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineBundleSum {
    terms: Vec<DivisorClassY>,
}

impl LineBundleSum {
    pub fn new(mut terms: Vec<DivisorClassY>) -> Result<Self, CohomologyError> {
        if terms.is_empty() {
            return Err(CohomologyError::EmptySum);
        }
        terms.sort();
        Ok(LineBundleSum { terms })
    }

    pub fn single(d: DivisorClassY) -> Self {
        LineBundleSum { terms: vec![d] }
    }

    pub fn terms(&self) -> &[DivisorClassY] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Tensor every summand with O_Y(t).
    pub fn shifted(&self, t: DivisorClassY) -> Self {
        LineBundleSum::new(self.terms.iter().map(|&d| d + t).collect()).expect("nonempty")
    }

    pub fn chern(&self) -> ChernData {
        let mut it = self.terms.iter().map(|&d| ChernData::line_bundle(d));
        let first = it.next().expect("nonempty");
        it.fold(first, |acc, c| acc.direct_sum(&c))
    }

    pub fn cohomology(&self) -> [u64; 3] {
        self.terms.iter().map(|&d| h_y(d)).fold([0; 3], add3)
    }
}

impl fmt::Display for LineBundleSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|d| format!("O{d}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

fn add3(a: [u64; 3], b: [u64; 3]) -> [u64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// dim Extⁱ_Y(⊕ src, ⊕ dst) = Σ hⁱ(dst_k − src_j).
pub fn ext_sums(src: &LineBundleSum, dst: &LineBundleSum) -> [u64; 3] {
    src.terms
        .iter()
        .flat_map(|&s| dst.terms.iter().map(move |&t| h_y(t - s)))
        .fold([0; 3], add3)
}

/// Extⁱ_A(A ⊗_Y N, M) ≅ Extⁱ_Y(N, M), for `target` the underlying O_Y-module of M.
pub fn ext_a_from_induced(n: DivisorClassY, target: &LineBundleSum) -> [u64; 3] {
    ext_sums(&LineBundleSum::single(n), target)
}

/// An A-module described through its underlying O_Y-module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AModulePresentation {
    /// A ⊗_Y O_Y(N).
    Induced(DivisorClassY),
    /// An A-module whose underlying O_Y-module is the given split sum.
    Split(LineBundleSum),
}

impl AModulePresentation {
    pub fn split(sum: LineBundleSum) -> Result<Self, CohomologyError> {
        if sum.rank() != 2 {
            return Err(CohomologyError::SplitArity(sum.rank()));
        }
        let c1 = sum.chern().c1;
        if !c1.is_symmetric() {
            return Err(CohomologyError::AsymmetricSplit(c1));
        }
        Ok(AModulePresentation::Split(sum))
    }

    /// Underlying O_Y-module; for A ⊗ N this is N ⊕ (L + σ*N).
    pub fn underlying(&self, order: &OrderData) -> LineBundleSum {
        match self {
            AModulePresentation::Induced(n) => order::induced_summands(order, *n),
            AModulePresentation::Split(s) => s.clone(),
        }
    }
}

/// O_C(k) on a smooth rational curve C ⊂ Y in the class of a ruling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RulingSheaf {
    pub curve: DivisorClassY,
    pub degree: i64,
}

impl RulingSheaf {
    pub fn structure(curve: DivisorClassY) -> Self {
        RulingSheaf { curve, degree: 0 }
    }
}

/// dim Extⁱ_Y(O_Y(N), O_C(k)) = hⁱ(P¹, k − N·C) for i = 0, 1.
pub fn ext_line_to_ruling(n: DivisorClassY, target: RulingSheaf) -> (u64, u64) {
    h_p1(target.degree - n.dot(target.curve))
}

/// Underlying O_Y-module of A ⊗_Y O_C: O_C ⊕ O_{σC}(L·σC).
pub fn induced_on_ruling(order: &OrderData, curve: DivisorClassY) -> [RulingSheaf; 2] {
    let other = curve.sigma();
    [RulingSheaf::structure(curve), RulingSheaf { curve: other, degree: order.l.dot(other) }]
}

/// The closed-form Hom/Ext dimensions used in the moduli arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TangentCase {
    /// Hom_A(A⊗O(−F), A⊗O_F): tangent space of Hilb A at A⊗O_F.
    HilbTangentAtInducedF,
    /// Hom_A(M, A) for M split as O(−1,−1)⊕O(−1,−1), via Serre duality.
    HomMtoASplit,
    /// Hom_A(M, A) for M = A⊗O(−F).
    HomMtoAInduced,
    /// Ext¹_A(A⊗O(−F), A⊗O_F).
    SmoothnessObstructionInducedF,
    /// Ext¹_A(M, O_C) for split M, bounded by H¹(Y, M(−H)) + h⁰(Hom_Y(M, M(−H))).
    SmoothnessObstructionSplit,
}

impl TangentCase {
    pub const ALL: [TangentCase; 5] = [
        TangentCase::HilbTangentAtInducedF,
        TangentCase::HomMtoASplit,
        TangentCase::HomMtoAInduced,
        TangentCase::SmoothnessObstructionInducedF,
        TangentCase::SmoothnessObstructionSplit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TangentCase::HilbTangentAtInducedF => "hilb-tangent-induced-f",
            TangentCase::HomMtoASplit => "hom-m-a-split",
            TangentCase::HomMtoAInduced => "hom-m-a-induced",
            TangentCase::SmoothnessObstructionInducedF => "obstruction-induced-f",
            TangentCase::SmoothnessObstructionSplit => "obstruction-split",
        }
    }
}

impl FromStr for TangentCase {
    type Err = CohomologyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TangentCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CohomologyError::UnknownCase(s.to_string()))
    }
}

/// The split A-line bundle O(−1,−1)⊕O(−1,−1) with c₁ = (−2,−2), c₂ = 2.
pub fn split_minimal_bundle() -> LineBundleSum {
    LineBundleSum::new(vec![DivisorClassY::new(-1, -1); 2]).expect("nonempty")
}

pub fn hom_a_tangent(case: TangentCase) -> u64 {
    let order = OrderData::main_instance();
    let f = DivisorClassY::new(1, 0);
    match case {
        TangentCase::HilbTangentAtInducedF => induced_on_ruling(&order, f)
            .iter()
            .map(|&s| ext_line_to_ruling(-f, s).0)
            .sum(),
        TangentCase::SmoothnessObstructionInducedF => induced_on_ruling(&order, f)
            .iter()
            .map(|&s| ext_line_to_ruling(-f, s).1)
            .sum(),
        TangentCase::HomMtoAInduced => {
            let a = AModulePresentation::Induced(DivisorClassY::ZERO).underlying(&order);
            ext_a_from_induced(-f, &a)[0]
        }
        TangentCase::HomMtoASplit => {
            // hom_A(M, A) = ext²_A(A, ω_A ⊗ M)* = h²(Y, M ⊗ O(canonical twist)).
            let twisted = split_minimal_bundle().shifted(order.canonical_twist());
            ext_a_from_induced(DivisorClassY::ZERO, &twisted)[2]
        }
        TangentCase::SmoothnessObstructionSplit => {
            let m = split_minimal_bundle();
            let m_twisted = m.shifted(order.canonical_twist());
            let h1 = ext_a_from_induced(DivisorClassY::ZERO, &m_twisted)[1];
            let hom_bound = ext_sums(&m, &m_twisted)[0];
            h1 + hom_bound
        }
    }
}
