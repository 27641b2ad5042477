//! Fixture loading and the aggregated verification report.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chowring::{discriminant, whitney_div, ChowClassY, DivisorClassY};
use crate::cohomology::{ext_a_from_induced, ext_sums, h_y, hom_a_tangent, LineBundleSum, TangentCase};
use crate::conics::{build_pair, classify_point, Case, Conic, ConicError, ConicPair, ProjPoint};
use crate::fibers::{self, fiber, marked_fiber_geometric, DEGREE};
use crate::intersect::{self, canonical_audit, euler_cross_check, genus_of_pic, RamExpr, RuleTable, StratumCensus};
use crate::order::{self, chern_of_a, chern_of_induced, OrderData};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Default survey seed when a fixture does not carry one.
pub const DEFAULT_SEED: u64 = 20091;

/// Sample count of the generic-degree check.
pub const GENERIC_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed fixture: {0}")]
    Parse(#[from] serde_json::Error),
    /// Bad input that is not a geometric degeneracy (asymmetric matrix, zero
    /// vector, base point off a conic).
    #[error("invalid fixture: {0}")]
    Invalid(ConicError),
    /// A well-formed but degenerate configuration.
    #[error("degenerate fixture: {0}")]
    Degenerate(ConicError),
}

impl FixtureError {
    fn from_conic(e: ConicError) -> Self {
        match e {
            ConicError::ZeroVector | ConicError::NotSymmetric | ConicError::NotIncident { .. } => {
                FixtureError::Invalid(e)
            }
            _ => FixtureError::Degenerate(e),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, FixtureError::Degenerate(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    #[serde(rename = "E")]
    pub e: [[i64; 3]; 3],
    #[serde(rename = "Eprime")]
    pub e_prime: [[i64; 3]; 3],
    pub base_points: [[i64; 3]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A parsed and validated fixture.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub file: FixtureFile,
    pub pair: ConicPair,
    /// sha256 of the fixture bytes, hex.
    pub digest: String,
}

impl Fixture {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FixtureError> {
        let file: FixtureFile = serde_json::from_slice(bytes)?;
        let pair = file.to_pair()?;
        Ok(Fixture { file, pair, digest: hex::encode(Sha256::digest(bytes)) })
    }

    pub fn load(path: &Path) -> Result<Self, FixtureError> {
        Fixture::from_bytes(&std::fs::read(path)?)
    }

    /// The bundled fixture.
    pub fn bundled() -> Self {
        Fixture::from_bytes(BUNDLED_FIXTURE.as_bytes()).expect("bundled fixture is valid")
    }

    pub fn seed(&self) -> u64 {
        self.file.seed.unwrap_or(DEFAULT_SEED)
    }
}

pub const BUNDLED_FIXTURE: &str = include_str!("../fixtures/ellipses.json");

impl FixtureFile {
    pub fn to_pair(&self) -> Result<ConicPair, FixtureError> {
        let e = Conic::from_matrix(self.e).map_err(FixtureError::from_conic)?;
        let ep = Conic::from_matrix(self.e_prime).map_err(FixtureError::from_conic)?;
        let mut pts = Vec::with_capacity(4);
        for [a, b, c] in self.base_points {
            pts.push(ProjPoint::new(a, b, c).map_err(FixtureError::from_conic)?);
        }
        let pts: [ProjPoint; 4] = pts.try_into().expect("four points");
        build_pair(e, ep, pts).map_err(FixtureError::from_conic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub fixture_digest: String,
    pub seed: u64,
    pub generator: String,
    pub records: Vec<Record>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("# Verification report\n\n");
        s.push_str(&format!("- tool: {}\n", self.tool_version));
        s.push_str(&format!("- fixture sha256: `{}`\n", self.fixture_digest));
        s.push_str(&format!("- seed: {} ({})\n", self.seed, self.generator));
        s.push_str(&format!("- result: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        if let Some(t) = self.timing_ms {
            s.push_str(&format!("- time: {t} ms\n"));
        }
        s.push_str("\n| check | anchor | expected | actual | pass |\n|---|---|---|---|---|\n");
        for r in &self.records {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                r.name,
                r.anchor,
                r.expected,
                r.actual,
                if r.pass { "yes" } else { "**no**" }
            ));
        }
        s
    }
}

struct Recorder(Vec<Record>);

impl Recorder {
    fn check<T: PartialEq + std::fmt::Debug>(&mut self, name: &str, anchor: &str, expected: T, actual: T) {
        let pass = expected == actual;
        self.0.push(Record {
            name: name.to_string(),
            anchor: anchor.to_string(),
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
            pass,
        });
    }
}

/// Fiber size and ramification sum over a concrete point of the pair.
pub fn fiber_profile(p: &ProjPoint, pair: &ConicPair) -> Result<(Case, usize, u32), fibers::FiberError> {
    let s = classify_point(p, pair)?;
    let pts = fiber(&marked_fiber_geometric(p, pair)?, &s);
    Ok((s.case, pts.len(), pts.iter().map(|q| q.ram_index).sum()))
}

/// Runs every check against the fixture.
pub fn run_verification(fx: &Fixture, with_timing: bool) -> Report {
    let started = Instant::now();
    let pair = &fx.pair;
    let mut r = Recorder(Vec::new());

    // Fiber table over representative points.
    let reps = pair.representative_points();
    for case in Case::ALL {
        let name = format!("fiber count {case}");
        let anchor = format!("case table {}", case.number());
        match reps.iter().find(|(c, _)| *c == case) {
            Some((_, p)) => {
                let (_, size, ram) = fiber_profile(p, pair).expect("representative classifies");
                r.check(&name, &anchor, fibers::expected_count(case), size);
                r.check(&format!("ramification sum {case}"), "indices sum to the degree", DEGREE, ram);
            }
            None => r.check(&name, &anchor, "rational representative".to_string(), "none found".to_string()),
        }
    }

    // Generic degree.
    let survey = fibers::survey(pair, GENERIC_SAMPLES, fx.seed());
    r.check(
        "generic fiber size",
        "8:1 cover",
        vec![(8usize, GENERIC_SAMPLES)],
        survey.size_histogram.iter().map(|(&k, &v)| (k, v)).collect(),
    );
    r.check("survey mismatches", "8:1 cover", 0, survey.mismatches.len() + survey.unclassified.len());
    let special = fibers::survey_special(pair);
    r.check(
        "special points",
        "strata census",
        vec![(Case::Case4, 6), (Case::Case5, 4), (Case::Case7, 4), (Case::Case8, 4)],
        special.histogram.iter().map(|(&k, &v)| (k, v)).collect(),
    );
    r.check("special point fibers", "case tables", 0, special.mismatches.len());

    // Intersection numbers.
    let t = RuleTable::standard();
    let pk = RamExpr::pullback(-3);
    let pair_int = |x: &RamExpr, y: &RamExpr| t.pairing(x, y).map(|v| v.to_string()).unwrap_or_else(|e| e.to_string());
    let r3 = RamExpr::basis(intersect::Basis::R3);
    let r4 = RamExpr::basis(intersect::Basis::R4);
    let bullets: [(&str, &str, RamExpr, RamExpr, i64); 12] = [
        ("(Ψ*K)²", "pullback square", pk.clone(), pk.clone(), 72),
        ("Ψ*K·R1", "projection formula over E'∨", pk.clone(), RamExpr::r1(), -12),
        ("Ψ*K·R2", "projection formula over E∨", pk.clone(), RamExpr::r2(), -12),
        ("Ψ*K·R3", "projection formula over a bitangent", pk.clone(), r3.clone(), -12),
        ("R1·R2", "no common points over a Case 7 point", RamExpr::r1(), RamExpr::r2(), 0),
        ("R1·R3", "substitution R_i = ½Ψ*L_i", RamExpr::r1(), r3.clone(), 2),
        ("R2·R3", "substitution R_i = ½Ψ*L_i", RamExpr::r2(), r3.clone(), 2),
        ("R3·R4", "substitution R_i = ½Ψ*L_i", r3.clone(), r4.clone(), 2),
        ("R3²", "substitution R_i = ½Ψ*L_i", r3.clone(), r3.clone(), 2),
        ("R1²", "adjunction on genus-0 components", RamExpr::r1(), RamExpr::r1(), 0),
        ("R2²", "adjunction on genus-0 components", RamExpr::r2(), RamExpr::r2(), 0),
        ("K²", "canonical class Ψ*K + R", RamExpr::canonical(), RamExpr::canonical(), -8),
    ];
    for (name, anchor, x, y, v) in bullets {
        r.check(name, anchor, v.to_string(), pair_int(&x, &y));
    }
    let audit = canonical_audit(&t).expect("table is total");
    r.check(
        "K² audit",
        "72 − 144 + 8 + 56",
        (72, -144, 8, 56, -8),
        (audit.pullback_square, audit.cross_pullback, audit.ram_self, audit.cross_ram, audit.total),
    );
    let k2 = intersect::canonical_self_intersection();
    r.check("genus of Pic", "K² = 8(1 − g)", "2".to_string(), genus_of_pic(k2).map(|g| g.to_string()).unwrap_or_default());
    let census = StratumCensus::of_pair(pair);
    r.check("stratum census", "general position", Ok(StratumCensus::general_position()), census.clone());
    r.check(
        "Euler characteristic",
        "ruled surface over genus 2: 4(1 − g)",
        -4,
        census.map(|c| euler_cross_check(&c)).unwrap_or(i64::MIN),
    );

    // Cohomology.
    let order = OrderData::main_instance();
    let a = LineBundleSum::new(vec![DivisorClassY::ZERO, DivisorClassY::new(-1, -1)]).expect("nonempty");
    r.check("Ext¹_A(A,A)", "rigidity of A", 0, ext_a_from_induced(DivisorClassY::ZERO, &a)[1]);
    let m = order::induced_summands(&order, DivisorClassY::new(-1, 0));
    r.check("Ext¹(O(−1,0), M)", "tangent dimension at A⊗O(−1,0)", 1, ext_sums(&LineBundleSum::single(DivisorClassY::new(-1, 0)), &m)[1]);
    for case in TangentCase::ALL {
        let expected = match case {
            TangentCase::SmoothnessObstructionInducedF | TangentCase::SmoothnessObstructionSplit => 0,
            _ => 2,
        };
        r.check(case.name(), "Hom/Ext dimension", expected, hom_a_tangent(case));
    }
    let mut serre = true;
    for x in -6..=6 {
        for y in -6..=6 {
            let h = h_y(DivisorClassY::new(x, y));
            let mut d = h_y(DivisorClassY::new(-2 - x, -2 - y));
            d.reverse();
            serre &= h == d && h[0] as i64 - h[1] as i64 + h[2] as i64 == (x + 1) * (y + 1);
        }
    }
    r.check("Serre duality and χ on |a|,|b| ≤ 6", "Künneth", true, serre);

    // Chern calculus.
    r.check("Δ(A)", "discriminant bound", -2, discriminant(&chern_of_a()));
    r.check("Δ(A⊗O(−1,0))", "discriminant", 0, discriminant(&chern_of_induced(DivisorClassY::new(-1, 0))));
    let min_delta = (-5..=5)
        .flat_map(|x| (-5..=5).map(move |y| discriminant(&chern_of_induced(DivisorClassY::new(x, y)))))
        .min()
        .expect("nonempty grid");
    r.check("min Δ over |a|,|b| ≤ 5", "Δ ≥ −2", -2, min_delta);
    let q = whitney_div(
        ChowClassY::total_chern(&chern_of_a()),
        ChowClassY::total_chern(&chern_of_induced(DivisorClassY::new(-1, 0))),
    );
    r.check("c(Q) = c(A)/c(M)", "kernel bookkeeping", Ok(ChowClassY::new(1, DivisorClassY::H, 2)), q);

    // Canonical bimodule.
    r.check("canonical twist", "ω_A = A ⊗ O(−H)", -DivisorClassY::H, order.canonical_twist());
    r.check("del Pezzo", "−(L + D + K_Y) ample", true, order::is_del_pezzo(&order));

    let records = r.0;
    let pass = records.iter().all(|x| x.pass);
    Report {
        tool_version: TOOL_VERSION.to_string(),
        fixture_digest: fx.digest.clone(),
        seed: fx.seed(),
        generator: survey.generator.to_string(),
        records,
        pass,
        timing_ms: with_timing.then(|| started.elapsed().as_millis()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture_verifies() {
        let fx = Fixture::bundled();
        let report = run_verification(&fx, false);
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
        assert_eq!(report.timing_ms, None);
    }

    #[test]
    fn fixture_errors_are_classified() {
        let same = r#"{"E":[[1,0,0],[0,4,0],[0,0,-5]],"Eprime":[[2,0,0],[0,8,0],[0,0,-10]],
            "base_points":[[1,1,1],[1,-1,1],[-1,1,1],[-1,-1,1]]}"#;
        assert!(Fixture::from_bytes(same.as_bytes()).unwrap_err().is_degenerate());
        let off = r#"{"E":[[1,0,0],[0,4,0],[0,0,-5]],"Eprime":[[4,0,0],[0,1,0],[0,0,-5]],
            "base_points":[[1,1,1],[1,-1,1],[-1,1,1],[1,0,1]]}"#;
        assert!(matches!(Fixture::from_bytes(off.as_bytes()), Err(FixtureError::Invalid(_))));
        assert!(matches!(Fixture::from_bytes(b"{"), Err(FixtureError::Parse(_))));
    }

    #[test]
    fn digest_tracks_bytes() {
        let a = Fixture::bundled();
        let b = Fixture::from_bytes(format!("{} ", BUNDLED_FIXTURE).as_bytes()).unwrap();
        assert_eq!(a.pair, b.pair);
        assert_ne!(a.digest, b.digest);
        assert_eq!(a.digest.len(), 64);
    }
}
