//! Fibers of Ψ over dual-plane points.
//!
//! Over p the curve C_p = π⁻¹(l_p) carries the degree-4 divisor D̄ = C_p ∩ D
//! with its σ-action. Quotients of A supported on C_p come from halves D̄′ of
//! D̄ (each giving a ± pair of module structures) and, when C_p is nodal, from
//! the two extras A⊗O_F and A⊗O_F′.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::conics::{classify_point, meet_with_incidence, Case, ConicError, ConicPair, ProjPoint, Stratum};

/// Sum of ramification indices over every fiber.
pub const DEGREE: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("marked divisor has degree {0}, expected 4")]
    Degree(u32),
    #[error("orbit {0} has multiplicity 0")]
    ZeroMultiplicity(usize),
    #[error("orbit {0} lies at the node but the fiber is smooth or the orbit is not σ-fixed")]
    BadNode(usize),
    #[error("more than one orbit at the node")]
    SeveralNodes,
    #[error("σ-fixed orbit {0} off the node on a nodal fiber")]
    FixedOffNode(usize),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// A σ-orbit of points of D̄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Orbit {
    pub id: usize,
    pub multiplicity: u32,
    pub sigma_fixed: bool,
    pub at_node: bool,
}

impl Orbit {
    pub fn free(id: usize, multiplicity: u32) -> Self {
        Orbit { id, multiplicity, sigma_fixed: false, at_node: false }
    }

    pub fn fixed(id: usize, multiplicity: u32) -> Self {
        Orbit { id, multiplicity, sigma_fixed: true, at_node: false }
    }

    pub fn node(id: usize, multiplicity: u32) -> Self {
        Orbit { id, multiplicity, sigma_fixed: true, at_node: true }
    }

    /// Contribution to deg D̄.
    pub fn degree(&self) -> u32 {
        if self.sigma_fixed {
            self.multiplicity
        } else {
            2 * self.multiplicity
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MarkedFiber {
    pub singular: bool,
    orbits: Vec<Orbit>,
}

impl MarkedFiber {
    /// Validates and canonicalizes: node orbit first, then fixed, then by
    /// descending multiplicity; ids are reassigned 0, 1, … in that order.
    pub fn new(singular: bool, mut orbits: Vec<Orbit>) -> Result<Self, FiberError> {
        for o in &orbits {
            if o.multiplicity == 0 {
                return Err(FiberError::ZeroMultiplicity(o.id));
            }
            if o.at_node && !(singular && o.sigma_fixed) {
                return Err(FiberError::BadNode(o.id));
            }
            if singular && o.sigma_fixed && !o.at_node {
                return Err(FiberError::FixedOffNode(o.id));
            }
        }
        if orbits.iter().filter(|o| o.at_node).count() > 1 {
            return Err(FiberError::SeveralNodes);
        }
        let degree: u32 = orbits.iter().map(Orbit::degree).sum();
        if degree != 4 {
            return Err(FiberError::Degree(degree));
        }
        orbits.sort_by_key(|o| (!o.at_node, !o.sigma_fixed, std::cmp::Reverse(o.multiplicity)));
        for (i, o) in orbits.iter_mut().enumerate() {
            o.id = i;
        }
        Ok(MarkedFiber { singular, orbits })
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn degree(&self) -> u32 {
        self.orbits.iter().map(Orbit::degree).sum()
    }
}

/// Which point of an orbit is selected. Plus lies on F and minus on F′ when
/// C_p = F + F′ is nodal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Plus,
    Minus,
    Fixed,
}

impl Side {
    fn sigma(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
            Side::Fixed => Side::Fixed,
        }
    }
}

/// A degree-2 sub-divisor D̄′ with D̄′ + σ*D̄′ = D̄, as a sorted multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Choice(pub Vec<(usize, Side)>);

impl Choice {
    pub fn new(mut pts: Vec<(usize, Side)>) -> Self {
        pts.sort();
        Choice(pts)
    }

    pub fn sigma(&self) -> Choice {
        Choice::new(self.0.iter().map(|&(o, s)| (o, s.sigma())).collect())
    }

    pub fn is_sigma_invariant(&self) -> bool {
        *self == self.sigma()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(o, s)| match s {
                Side::Plus => format!("{o}+"),
                Side::Minus => format!("{o}-"),
                Side::Fixed => format!("{o}"),
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// All halves of D̄. On a nodal fiber only node-free choices with one point
/// on each component survive; the rest are accounted for by the extras.
pub fn enumerate_choices(f: &MarkedFiber) -> Vec<Choice> {
    // Per orbit: the list of possible contributions.
    let per_orbit: Vec<Vec<Vec<(usize, Side)>>> = f
        .orbits
        .iter()
        .map(|o| {
            if o.sigma_fixed {
                if o.multiplicity % 2 == 1 {
                    vec![]
                } else {
                    vec![vec![(o.id, Side::Fixed); (o.multiplicity / 2) as usize]]
                }
            } else {
                (0..=o.multiplicity)
                    .map(|k| {
                        let mut v = vec![(o.id, Side::Plus); k as usize];
                        v.extend(std::iter::repeat_n((o.id, Side::Minus), (o.multiplicity - k) as usize));
                        v
                    })
                    .collect()
            }
        })
        .collect();
    let mut out: Vec<Vec<(usize, Side)>> = vec![vec![]];
    for options in per_orbit {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |opt| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(opt);
                    v
                })
            })
            .collect();
    }
    let mut choices: Vec<Choice> = out
        .into_iter()
        .map(Choice::new)
        .filter(|c| !f.singular || one_per_component(f, c))
        .collect();
    choices.sort();
    choices
}

fn one_per_component(f: &MarkedFiber, c: &Choice) -> bool {
    let touches_node = c.0.iter().any(|&(o, _)| f.orbits[o].at_node);
    let plus = c.0.iter().filter(|(_, s)| *s == Side::Plus).count();
    let minus = c.0.iter().filter(|(_, s)| *s == Side::Minus).count();
    !touches_node && plus == 1 && minus == 1
}

/// The marked fiber determined by the stratum alone.
pub fn marked_fiber_of_stratum(s: &Stratum) -> MarkedFiber {
    let (singular, orbits) = match s.case {
        Case::Case1 => (false, vec![Orbit::free(0, 1), Orbit::free(1, 1)]),
        Case::Case2 => (false, vec![Orbit::free(0, 2)]),
        Case::Case3 => (false, vec![Orbit::fixed(0, 2), Orbit::free(1, 1)]),
        Case::Case4 => (false, vec![Orbit::fixed(0, 2), Orbit::fixed(1, 2)]),
        Case::Case5 => (false, vec![Orbit::fixed(0, 4)]),
        Case::Case6 => (true, vec![Orbit::free(0, 1), Orbit::free(1, 1)]),
        Case::Case7 => (true, vec![Orbit::free(0, 2)]),
        Case::Case8 => (true, vec![Orbit::node(0, 2), Orbit::free(1, 1)]),
    };
    MarkedFiber::new(singular, orbits).expect("table entries are valid")
}

/// The marked fiber read off from l_p ∩ E′: a point off E has two preimages
/// swapped by σ; a point on E has one, with doubled multiplicity.
pub fn marked_fiber_geometric(p: &ProjPoint, pair: &ConicPair) -> Result<MarkedFiber, FiberError> {
    let s = classify_point(p, pair)?;
    let orbits = meet_with_incidence(&p.as_line(), &pair.e_prime, &pair.e)
        .into_iter()
        .enumerate()
        .map(|(id, m)| {
            if m.on_second {
                let at_node = m.point.is_some() && m.point == s.e_touch;
                Orbit { id, multiplicity: 2 * m.multiplicity, sigma_fixed: true, at_node }
            } else {
                Orbit::free(id, m.multiplicity)
            }
        })
        .collect();
    MarkedFiber::new(s.tangent_e, orbits)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "choice")]
pub enum PointKind {
    StructurePlus(Choice),
    StructureMinus(Choice),
    ExtraF,
    ExtraFPrime,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FiberPoint {
    pub kind: PointKind,
    pub ram_index: u32,
    pub branch_label: String,
}

impl FiberPoint {
    pub fn is_extra(&self) -> bool {
        matches!(self.kind, PointKind::ExtraF | PointKind::ExtraFPrime)
    }
}

/// Ramification index at a fiber point: a factor 2 for a σ-invariant choice
/// over E′∨, a factor 2 for an extra (over E∨), a factor 2 per bitangent
/// through p.
pub fn assign_ram(kind: &PointKind, s: &Stratum) -> u32 {
    let mut e = 1;
    match kind {
        PointKind::StructurePlus(c) | PointKind::StructureMinus(c) => {
            if s.tangent_e_prime && c.is_sigma_invariant() {
                e *= 2;
            }
        }
        PointKind::ExtraF | PointKind::ExtraFPrime => e *= 2,
    }
    e * 2u32.pow(s.bitangent_count() as u32)
}

/// All quotients over the point: ± structures per choice, plus the extras when nodal.
pub fn fiber(f: &MarkedFiber, s: &Stratum) -> Vec<FiberPoint> {
    let mut pts = Vec::new();
    for (j, c) in enumerate_choices(f).into_iter().enumerate() {
        for (kind, tag) in [(PointKind::StructurePlus(c.clone()), 'a'), (PointKind::StructureMinus(c.clone()), 'b')] {
            pts.push(FiberPoint { ram_index: assign_ram(&kind, s), kind, branch_label: format!("{}{}", j + 1, tag) });
        }
    }
    if f.singular {
        for (kind, label) in [(PointKind::ExtraF, "F"), (PointKind::ExtraFPrime, "F'")] {
            pts.push(FiberPoint { ram_index: assign_ram(&kind, s), kind, branch_label: label.to_string() });
        }
    }
    pts
}

/// Fiber over a stratum using its table marked fiber.
pub fn fiber_of_stratum(s: &Stratum) -> Vec<FiberPoint> {
    fiber(&marked_fiber_of_stratum(s), s)
}

/// The involution τ: m ↦ −m on O_C-type quotients; extras are fixed.
pub fn tau(pt: &FiberPoint) -> FiberPoint {
    let (kind, label) = match &pt.kind {
        PointKind::StructurePlus(c) => (PointKind::StructureMinus(c.clone()), swap_suffix(&pt.branch_label)),
        PointKind::StructureMinus(c) => (PointKind::StructurePlus(c.clone()), swap_suffix(&pt.branch_label)),
        k => (k.clone(), pt.branch_label.clone()),
    };
    FiberPoint { kind, ram_index: pt.ram_index, branch_label: label }
}

fn swap_suffix(label: &str) -> String {
    match label.strip_suffix('a') {
        Some(stem) => format!("{stem}b"),
        None => match label.strip_suffix('b') {
            Some(stem) => format!("{stem}a"),
            None => label.to_string(),
        },
    }
}

/// Published fiber cardinality per case.
pub fn expected_count(case: Case) -> usize {
    match case {
        Case::Case1 => 8,
        Case::Case2 => 6,
        Case::Case3 => 4,
        Case::Case4 => 2,
        Case::Case5 => 2,
        Case::Case6 => 6,
        Case::Case7 => 4,
        Case::Case8 => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyMismatch {
    pub point: ProjPoint,
    pub case: Case,
    pub fiber_size: usize,
    pub expected: usize,
    pub ram_sum: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyReport {
    pub generator: &'static str,
    pub seed: u64,
    pub samples: usize,
    /// Points sampled per case.
    pub histogram: BTreeMap<Case, usize>,
    /// Observed fiber sizes per case.
    pub fiber_sizes: BTreeMap<Case, Vec<usize>>,
    /// Number of sampled points per fiber size.
    pub size_histogram: BTreeMap<usize, usize>,
    pub mismatches: Vec<SurveyMismatch>,
    /// Points whose incidence fell outside the eight strata.
    pub unclassified: Vec<ProjPoint>,
}

impl SurveyReport {
    fn new(seed: u64) -> Self {
        SurveyReport {
            generator: "ChaCha8Rng::seed_from_u64, integer coordinates uniform in [-1000000, 1000000]",
            seed,
            samples: 0,
            histogram: BTreeMap::new(),
            fiber_sizes: BTreeMap::new(),
            size_histogram: BTreeMap::new(),
            mismatches: Vec::new(),
            unclassified: Vec::new(),
        }
    }

    fn record(&mut self, p: &ProjPoint, pair: &ConicPair) {
        self.samples += 1;
        let Ok(s) = classify_point(p, pair) else {
            self.unclassified.push(p.clone());
            return;
        };
        let pts = match marked_fiber_geometric(p, pair) {
            Ok(f) => fiber(&f, &s),
            Err(_) => {
                self.unclassified.push(p.clone());
                return;
            }
        };
        let size = pts.len();
        let ram_sum: u32 = pts.iter().map(|q| q.ram_index).sum();
        *self.histogram.entry(s.case).or_default() += 1;
        *self.size_histogram.entry(size).or_default() += 1;
        let sizes = self.fiber_sizes.entry(s.case).or_default();
        if !sizes.contains(&size) {
            sizes.push(size);
            sizes.sort();
        }
        if size != expected_count(s.case) || ram_sum != DEGREE {
            self.mismatches.push(SurveyMismatch {
                point: p.clone(),
                case: s.case,
                fiber_size: size,
                expected: expected_count(s.case),
                ram_sum,
            });
        }
    }

    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.unclassified.is_empty()
    }
}

/// Half-width of the coordinate box for random dual-plane points.
pub const SAMPLE_BOUND: i64 = 1_000_000;

/// Random rational dual-plane points, deterministic in the seed.
pub fn sample_points(n: usize, seed: u64) -> Vec<ProjPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: [i64; 3] = std::array::from_fn(|_| rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND));
        if let Ok(p) = ProjPoint::new(v[0], v[1], v[2]) {
            out.push(p);
        }
    }
    out
}

/// Classify `n` seeded random points and count their fibers.
pub fn survey(pair: &ConicPair, n: usize, seed: u64) -> SurveyReport {
    survey_points(pair, &sample_points(n, seed), seed)
}

pub fn survey_points(pair: &ConicPair, points: &[ProjPoint], seed: u64) -> SurveyReport {
    let mut report = SurveyReport::new(seed);
    for p in points {
        report.record(p, pair);
    }
    report
}

/// Survey over the pair's special points (bitangent crossings, tangents at base points, common tangents).
pub fn survey_special(pair: &ConicPair) -> SurveyReport {
    let pts: Vec<ProjPoint> = pair.special_points().into_iter().map(|(_, p)| p).collect();
    SurveyReport { generator: "special points of the pair (no sampling)", ..survey_points(pair, &pts, 0) }
}
