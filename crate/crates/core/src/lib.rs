//! Divisor-class arithmetic, conic geometry and fiber combinatorics for a
//! cyclic order on P¹×P¹ ramified over a conic, and the intersection
//! computation giving the genus of its Picard scheme.

pub mod chowring;
pub mod cohomology;
pub mod conics;
pub mod fibers;
pub mod intersect;
pub mod order;
pub mod verify;
