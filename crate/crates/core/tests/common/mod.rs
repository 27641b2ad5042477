//! Brute-force enumeration of the halves of a marked divisor, written
//! independently of `fibers::enumerate_choices`.

#![allow(dead_code)]

use std::collections::BTreeMap;

use cyclic_order::fibers::{Choice, MarkedFiber, Orbit, Side};

/// A point of D̄: orbit id and side.
type Pt = (usize, Side);

fn sigma(p: Pt) -> Pt {
    let side = match p.1 {
        Side::Plus => Side::Minus,
        Side::Minus => Side::Plus,
        Side::Fixed => Side::Fixed,
    };
    (p.0, side)
}

/// D̄ as a multiset of points.
fn divisor(f: &MarkedFiber) -> BTreeMap<Pt, u32> {
    let mut d = BTreeMap::new();
    for o in f.orbits() {
        if o.sigma_fixed {
            d.insert((o.id, Side::Fixed), o.multiplicity);
        } else {
            d.insert((o.id, Side::Plus), o.multiplicity);
            d.insert((o.id, Side::Minus), o.multiplicity);
        }
    }
    d
}

/// Every multiset of at most two points of D̄ with D̄′ + σD̄′ = D̄, subject
/// on a nodal curve to: no node point, one point on each component.
pub fn brute_force_choices(f: &MarkedFiber) -> Vec<Choice> {
    let d = divisor(f);
    let support: Vec<Pt> = d.keys().copied().collect();
    let mut candidates: Vec<Vec<Pt>> = vec![vec![]];
    for (i, &p) in support.iter().enumerate() {
        candidates.push(vec![p]);
        for &q in &support[i..] {
            candidates.push(vec![p, q]);
        }
    }
    let node: Option<usize> = f.orbits().iter().find(|o| o.at_node).map(|o| o.id);
    let mut out: Vec<Choice> = candidates
        .into_iter()
        .filter(|c| {
            let mut sum: BTreeMap<Pt, u32> = BTreeMap::new();
            for &p in c {
                *sum.entry(p).or_default() += 1;
                *sum.entry(sigma(p)).or_default() += 1;
            }
            sum == d
        })
        .filter(|c| {
            if !f.singular {
                return true;
            }
            let on_f = c.iter().filter(|p| p.1 == Side::Plus).count();
            let on_f_prime = c.iter().filter(|p| p.1 == Side::Minus).count();
            let at_node = c.iter().any(|p| Some(p.0) == node);
            !at_node && on_f == 1 && on_f_prime == 1
        })
        .map(Choice::new)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Validity of raw orbit data, recomputed from the definitions.
pub fn independently_valid(singular: bool, orbits: &[Orbit]) -> bool {
    let degree: u32 = orbits.iter().map(|o| if o.sigma_fixed { o.multiplicity } else { 2 * o.multiplicity }).sum();
    let nodes = orbits.iter().filter(|o| o.at_node).count();
    degree == 4
        && nodes <= 1
        && orbits.iter().all(|o| {
            o.multiplicity > 0
                && (!o.at_node || (singular && o.sigma_fixed))
                && (!singular || !o.sigma_fixed || o.at_node)
        })
}

/// An edit to raw orbit data.
#[derive(Debug, Clone, Copy)]
pub enum Perturbation {
    Multiplicity { orbit: usize, delta: i32 },
    ToggleFixed { orbit: usize },
    ToggleNode { orbit: usize },
    Split { orbit: usize },
    Merge,
    ToggleSingular,
}

/// Applies edits to (singular, orbits); orbit indices are taken modulo the length.
pub fn perturb(singular: bool, mut orbits: Vec<Orbit>, edits: &[Perturbation]) -> (bool, Vec<Orbit>) {
    let mut singular = singular;
    for e in edits {
        if orbits.is_empty() {
            break;
        }
        let n = orbits.len();
        match *e {
            Perturbation::Multiplicity { orbit, delta } => {
                let o = &mut orbits[orbit % n];
                o.multiplicity = (o.multiplicity as i32 + delta).max(0) as u32;
            }
            Perturbation::ToggleFixed { orbit } => orbits[orbit % n].sigma_fixed ^= true,
            Perturbation::ToggleNode { orbit } => orbits[orbit % n].at_node ^= true,
            Perturbation::Split { orbit } => {
                let o = orbits[orbit % n];
                if o.multiplicity >= 2 {
                    let half = o.multiplicity / 2;
                    orbits[orbit % n].multiplicity -= half;
                    orbits.push(Orbit { id: n, multiplicity: half, at_node: false, ..o });
                }
            }
            Perturbation::Merge => {
                if n >= 2 && orbits[0].sigma_fixed == orbits[1].sigma_fixed {
                    let extra = orbits.remove(1).multiplicity;
                    orbits[0].multiplicity += extra;
                }
            }
            Perturbation::ToggleSingular => singular ^= true,
        }
    }
    for (i, o) in orbits.iter_mut().enumerate() {
        o.id = i;
    }
    (singular, orbits)
}

pub fn perturbation() -> impl proptest::strategy::Strategy<Value = Perturbation> {
    use proptest::prelude::*;
    prop_oneof![
        (0usize..4, -2i32..=2).prop_map(|(orbit, delta)| Perturbation::Multiplicity { orbit, delta }),
        (0usize..4).prop_map(|orbit| Perturbation::ToggleFixed { orbit }),
        (0usize..4).prop_map(|orbit| Perturbation::ToggleNode { orbit }),
        (0usize..4).prop_map(|orbit| Perturbation::Split { orbit }),
        Just(Perturbation::Merge),
        Just(Perturbation::ToggleSingular),
    ]
}
