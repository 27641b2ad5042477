//! Intersection numbers on Hilb A, generated from a small table of rules:
//! pullback degrees, the projection formula, the substitution R_i = ½Ψ*L_i,
//! disjointness of the ramification components over E∨ and E′∨, and
//! adjunction for their self-intersections.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::conics::{Case, ConicPair};
use crate::fibers::expected_count;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntersectError {
    #[error("no rule reduces {0} · {1}")]
    Irreducible(Basis, Basis),
    #[error("genus 1 − {0}/8 is not an integer")]
    NonIntegralGenus(i64),
    #[error("stratum census is not in general position: {0}")]
    Census(String),
}

/// Formal generators. `P` is Ψ*h for h the line class of the dual plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Basis {
    P,
    R1a,
    R1b,
    R2a,
    R2b,
    R3,
    R4,
    R5,
    R6,
    U1,
    U2,
}

impl Basis {
    pub const ALL: [Basis; 11] = [
        Basis::P,
        Basis::R1a,
        Basis::R1b,
        Basis::R2a,
        Basis::R2b,
        Basis::R3,
        Basis::R4,
        Basis::R5,
        Basis::R6,
        Basis::U1,
        Basis::U2,
    ];

    /// Ramification components of Ψ.
    pub const RAMIFICATION: [Basis; 8] =
        [Basis::R1a, Basis::R1b, Basis::R2a, Basis::R2b, Basis::R3, Basis::R4, Basis::R5, Basis::R6];

    pub const BITANGENT: [Basis; 4] = [Basis::R3, Basis::R4, Basis::R5, Basis::R6];

    fn is_r1(self) -> bool {
        matches!(self, Basis::R1a | Basis::R1b)
    }

    fn is_r2(self) -> bool {
        matches!(self, Basis::R2a | Basis::R2b)
    }

    fn is_bitangent(self) -> bool {
        Basis::BITANGENT.contains(&self)
    }

    /// Ψ_* as a dual-plane class, recorded as its degree: each section of the
    /// double cover over E′∨ (or E∨) maps isomorphically onto the conic; R_i
    /// maps 4:1 onto the bitangent L_i.
    fn pushforward_degree(self) -> Option<i64> {
        match self {
            Basis::R1a | Basis::R1b | Basis::R2a | Basis::R2b => Some(2),
            Basis::R3 | Basis::R4 | Basis::R5 | Basis::R6 => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::P => "Ψ*h",
            Basis::R1a => "R1'",
            Basis::R1b => "R1''",
            Basis::R2a => "R2'",
            Basis::R2b => "R2''",
            Basis::R3 => "R3",
            Basis::R4 => "R4",
            Basis::R5 => "R5",
            Basis::R6 => "R6",
            Basis::U1 => "U1",
            Basis::U2 => "U2",
        };
        f.write_str(s)
    }
}

/// A rational linear combination of basis elements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RamExpr {
    terms: BTreeMap<Basis, Rational64>,
}

impl RamExpr {
    pub fn zero() -> Self {
        RamExpr::default()
    }

    pub fn basis(b: Basis) -> Self {
        RamExpr::term(b, Rational64::one())
    }

    pub fn term(b: Basis, c: Rational64) -> Self {
        let mut e = RamExpr::zero();
        e.add_term(b, c);
        e
    }

    pub fn from_terms(ts: &[(Basis, i64)]) -> Self {
        let mut e = RamExpr::zero();
        for &(b, c) in ts {
            e.add_term(b, Rational64::from_integer(c));
        }
        e
    }

    fn add_term(&mut self, b: Basis, c: Rational64) {
        let v = self.terms.entry(b).or_insert_with(Rational64::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&b);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Basis, Rational64)> + '_ {
        self.terms.iter().map(|(&b, &c)| (b, c))
    }

    pub fn coefficient(&self, b: Basis) -> Rational64 {
        self.terms.get(&b).copied().unwrap_or_else(Rational64::zero)
    }

    /// Ψ*x for a dual-plane class of degree `deg` (all classes are multiples of h).
    pub fn pullback(deg: i64) -> Self {
        RamExpr::from_terms(&[(Basis::P, deg)])
    }

    pub fn r1() -> Self {
        RamExpr::from_terms(&[(Basis::R1a, 1), (Basis::R1b, 1)])
    }

    pub fn r2() -> Self {
        RamExpr::from_terms(&[(Basis::R2a, 1), (Basis::R2b, 1)])
    }

    /// The full ramification divisor R = R₁ + R₂ + R₃ + … + R₆.
    pub fn ramification() -> Self {
        Basis::RAMIFICATION.iter().map(|&b| RamExpr::basis(b)).sum()
    }

    /// K_Hilb = Ψ*K + R with K = −3h on the dual plane.
    pub fn canonical() -> Self {
        RamExpr::pullback(-3) + RamExpr::ramification()
    }

    pub fn scale(&self, c: Rational64) -> Self {
        let mut e = RamExpr::zero();
        for (b, x) in self.terms() {
            e.add_term(b, x * c);
        }
        e
    }
}

impl std::ops::Add for RamExpr {
    type Output = RamExpr;
    fn add(mut self, o: RamExpr) -> RamExpr {
        for (b, c) in o.terms() {
            self.add_term(b, c);
        }
        self
    }
}

impl std::ops::Sub for RamExpr {
    type Output = RamExpr;
    fn sub(self, o: RamExpr) -> RamExpr {
        self + o.scale(-Rational64::one())
    }
}

impl std::iter::Sum for RamExpr {
    fn sum<I: Iterator<Item = RamExpr>>(iter: I) -> RamExpr {
        iter.fold(RamExpr::zero(), |a, b| a + b)
    }
}

impl fmt::Display for RamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(b, c)| if c.is_one() { b.to_string() } else { format!("{c}·{b}") })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    /// Ψ*x·Ψ*y = 8 (x·y).
    PullbackDegree,
    /// Ψ*x·R = x·Ψ_*R.
    ProjectionFormula,
    /// R_i = ½Ψ*L_i, L_i ∼ h.
    Substitution,
    /// Components over E∨ and E′∨ do not meet.
    R1R2Disjoint,
    /// The two sections of a double cover are disjoint.
    SectionsDisjoint,
    /// C² from −2 = C·(C + K_Hilb).
    Adjunction,
    /// U₁ = Ψ*E′∨ − 2R₁, U₂ = Ψ*E∨ − 2R₂.
    Definition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditStep {
    pub left: Basis,
    pub right: Basis,
    pub rule: Rule,
    #[serde(serialize_with = "ser_ratio")]
    pub value: Rational64,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Products of basis elements other than U₁, U₂, which are expanded by definition.
#[derive(Debug, Clone)]
pub struct RuleTable {
    entries: BTreeMap<(Basis, Basis), (Rule, Rational64)>,
}

fn key(a: Basis, b: Basis) -> (Basis, Basis) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn u_definition(b: Basis) -> Option<RamExpr> {
    match b {
        Basis::U1 => Some(RamExpr::pullback(2) - RamExpr::r1().scale(2.into())),
        Basis::U2 => Some(RamExpr::pullback(2) - RamExpr::r2().scale(2.into())),
        _ => None,
    }
}

impl RuleTable {
    /// The table with adjunction closures solved.
    pub fn standard() -> Self {
        let mut t = RuleTable::without_adjunction();
        for c in [Basis::R1a, Basis::R1b, Basis::R2a, Basis::R2b] {
            let v = t.adjunction_solve(c).expect("cross terms present");
            t.entries.insert((c, c), (Rule::Adjunction, v));
        }
        t
    }

    /// All rules except the self-intersections of the R₁, R₂ components.
    pub fn without_adjunction() -> Self {
        let mut entries = BTreeMap::new();
        let core: Vec<Basis> = Basis::ALL.iter().copied().filter(|b| u_definition(*b).is_none()).collect();
        for (i, &a) in core.iter().enumerate() {
            for &b in &core[i..] {
                if let Some(e) = Self::direct_rule(a, b) {
                    entries.insert(key(a, b), e);
                }
            }
        }
        RuleTable { entries }
    }

    fn direct_rule(a: Basis, b: Basis) -> Option<(Rule, Rational64)> {
        let int = Rational64::from_integer;
        if a == Basis::P && b == Basis::P {
            return Some((Rule::PullbackDegree, int(8)));
        }
        if a == Basis::P || b == Basis::P {
            let other = if a == Basis::P { b } else { a };
            return other.pushforward_degree().map(|d| (Rule::ProjectionFormula, int(d)));
        }
        if a.is_bitangent() || b.is_bitangent() {
            // R_i·X = ½ Ψ*h·X, the latter by projection formula or pullback degree.
            let other = if a.is_bitangent() { b } else { a };
            let d = other.pushforward_degree()?;
            return Some((Rule::Substitution, Rational64::new(d, 2)));
        }
        if (a.is_r1() && b.is_r2()) || (a.is_r2() && b.is_r1()) {
            return Some((Rule::R1R2Disjoint, int(0)));
        }
        if a != b && ((a.is_r1() && b.is_r1()) || (a.is_r2() && b.is_r2())) {
            return Some((Rule::SectionsDisjoint, int(0)));
        }
        None
    }

    pub fn lookup(&self, a: Basis, b: Basis) -> Option<(Rule, Rational64)> {
        self.entries.get(&key(a, b)).copied()
    }

    /// Self-intersection of a genus-0 component C from −2 = C² + C·K_Hilb,
    /// where C·K_Hilb contains C² once more from the R term.
    pub fn adjunction_solve(&self, c: Basis) -> Result<Rational64, IntersectError> {
        let k = RamExpr::canonical();
        let mut rest = Rational64::zero();
        for (b, coeff) in k.terms() {
            if b == c {
                continue;
            }
            let (_, v) = self.lookup(c, b).ok_or(IntersectError::Irreducible(c, b))?;
            rest += coeff * v;
        }
        // −2 = C² + (C² · k_c + rest), k_c = coefficient of C in K_Hilb.
        let kc = k.coefficient(c);
        Ok((Rational64::from_integer(-2) - rest) / (Rational64::one() + kc))
    }

    pub fn pairing(&self, x: &RamExpr, y: &RamExpr) -> Result<Rational64, IntersectError> {
        self.pairing_traced(x, y).map(|(v, _)| v)
    }

    /// Pairing with the list of basis products used.
    pub fn pairing_traced(&self, x: &RamExpr, y: &RamExpr) -> Result<(Rational64, Vec<AuditStep>), IntersectError> {
        let x = expand_u(x);
        let y = expand_u(y);
        let mut total = Rational64::zero();
        let mut log = Vec::new();
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                let (rule, v) = self.lookup(a, b).ok_or(IntersectError::Irreducible(a, b))?;
                log.push(AuditStep { left: a, right: b, rule, value: v });
                total += ca * cb * v;
            }
        }
        Ok((total, log))
    }

    /// Ψ*(deg·h)·R_i computed by the projection formula.
    pub fn projection_route(&self, deg: i64, ri: Basis) -> Rational64 {
        Rational64::from_integer(deg * ri.pushforward_degree().unwrap_or(0))
    }

    /// Ψ*(deg·h)·R_i computed by substituting R_i = ½Ψ*h.
    pub fn substitution_route(&self, deg: i64, ri: Basis) -> Result<Rational64, IntersectError> {
        debug_assert!(ri.is_bitangent());
        self.pairing(&RamExpr::pullback(deg), &RamExpr::pullback(1).scale(Rational64::new(1, 2)))
    }
}

fn expand_u(x: &RamExpr) -> RamExpr {
    x.terms()
        .map(|(b, c)| match u_definition(b) {
            Some(def) => def.scale(c),
            None => RamExpr::term(b, c),
        })
        .sum()
}

/// K² split into its four contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KAudit {
    /// (Ψ*K)²
    pub pullback_square: i64,
    /// Σ R_i² over the six ramification classes.
    pub ram_self: i64,
    /// 2·Ψ*K·R
    pub cross_pullback: i64,
    /// 2·Σ_{i<j} R_i·R_j over the six ramification classes.
    pub cross_ram: i64,
    pub total: i64,
}

fn to_int(r: Rational64) -> i64 {
    assert!(r.is_integer(), "non-integral intersection number {r}");
    r.to_integer()
}

/// The six ramification classes R₁ = R₁′+R₁″, R₂ = R₂′+R₂″, R₃, …, R₆.
pub fn ramification_classes() -> [RamExpr; 6] {
    [
        RamExpr::r1(),
        RamExpr::r2(),
        RamExpr::basis(Basis::R3),
        RamExpr::basis(Basis::R4),
        RamExpr::basis(Basis::R5),
        RamExpr::basis(Basis::R6),
    ]
}

pub fn canonical_audit(table: &RuleTable) -> Result<KAudit, IntersectError> {
    let pk = RamExpr::pullback(-3);
    let rs = ramification_classes();
    let pullback_square = to_int(table.pairing(&pk, &pk)?);
    let mut ram_self = 0;
    let mut cross_pullback = 0;
    let mut cross_ram = 0;
    for (i, r) in rs.iter().enumerate() {
        ram_self += to_int(table.pairing(r, r)?);
        cross_pullback += 2 * to_int(table.pairing(&pk, r)?);
        for s in &rs[i + 1..] {
            cross_ram += 2 * to_int(table.pairing(r, s)?);
        }
    }
    let total = pullback_square + ram_self + cross_pullback + cross_ram;
    Ok(KAudit { pullback_square, ram_self, cross_pullback, cross_ram, total })
}

/// K_Hilb² expanded directly from the table.
pub fn canonical_self_intersection() -> i64 {
    let t = RuleTable::standard();
    let k = RamExpr::canonical();
    to_int(t.pairing(&k, &k).expect("table is total"))
}

/// g from K² = 8(1 − g).
pub fn genus_of_pic(k2: i64) -> Result<Rational64, IntersectError> {
    if k2 % 8 != 0 {
        return Err(IntersectError::NonIntegralGenus(k2));
    }
    Ok(Rational64::from_integer(1 - k2 / 8))
}

/// Counts of the point strata of the dual plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StratumCensus {
    pub case4: i64,
    pub case5: i64,
    pub case7: i64,
    pub case8: i64,
}

impl StratumCensus {
    pub fn general_position() -> Self {
        StratumCensus { case4: 6, case5: 4, case7: 4, case8: 4 }
    }

    /// Census of a concrete pair. The four common tangents need not be
    /// rational, so their number is read from the pencil of dual conics.
    pub fn of_pair(pair: &ConicPair) -> Result<Self, IntersectError> {
        let distinct = |v: Vec<crate::conics::ProjPoint>| {
            let n = v.len();
            let s: std::collections::BTreeSet<_> = v.into_iter().collect();
            (s.len() == n).then_some(n as i64)
        };
        let err = |what: &str| IntersectError::Census(what.to_string());
        let case4 = distinct(pair.bitangent_crossings()).ok_or_else(|| err("bitangent crossings coincide"))?;
        let case5 = distinct(pair.e_prime_tangents_at_base()).ok_or_else(|| err("E' tangents coincide"))?;
        let case8 = distinct(pair.e_tangents_at_base()).ok_or_else(|| err("E tangents coincide"))?;
        let case7 = pair.common_tangent_count();
        let census = StratumCensus { case4, case5, case7, case8 };
        if census != StratumCensus::general_position() {
            return Err(IntersectError::Census(format!("{census:?}")));
        }
        // Every special point must land in its own stratum.
        for (case, p) in pair.special_points() {
            match crate::conics::classify_point(&p, pair) {
                Ok(s) if s.case == case => {}
                _ => return Err(err("special point in the wrong stratum")),
            }
        }
        Ok(census)
    }
}

/// Σ over strata of (fiber size) × χ(stratum), a topological Euler
/// characteristic of Hilb A computed without the ramification table.
pub fn euler_cross_check(c: &StratumCensus) -> i64 {
    let n = |case: Case| expected_count(case) as i64;
    // Each dual conic is a P¹ minus its special points.
    let chi_e_dual = 2 - c.case7 - c.case8;
    let chi_e_prime_dual = 2 - c.case7 - c.case5;
    // Each bitangent meets three others and one tangent to each conic.
    let per_bitangent_points = 2 * c.case4 / 4 + c.case5 / 4 + c.case8 / 4;
    let chi_bitangent = 2 - per_bitangent_points;
    let points = c.case4 + c.case5 + c.case7 + c.case8;
    let closed = chi_e_dual + chi_e_prime_dual + 4 * chi_bitangent + points;
    let chi_open = 3 - closed;
    n(Case::Case1) * chi_open
        + n(Case::Case6) * chi_e_dual
        + n(Case::Case2) * chi_e_prime_dual
        + n(Case::Case3) * 4 * chi_bitangent
        + n(Case::Case4) * c.case4
        + n(Case::Case5) * c.case5
        + n(Case::Case7) * c.case7
        + n(Case::Case8) * c.case8
}

/// Same sum for an unramified 8:1 cover: 8·χ(P²).
pub fn euler_unramified() -> i64 {
    8 * 3
}

/// Basis elements carrying a factor-2 rule in the fiber ramification
/// assignment; compare with the support of R.
pub fn ramification_support() -> Vec<Basis> {
    RamExpr::ramification().terms().map(|(b, _)| b).collect()
}
