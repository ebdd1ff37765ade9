//! The degree-5 polynomial whose `s = 2` starved set is a curved tetrahedron.

use std::f64::consts::{E, PI, SQRT_2};

use crate::compositions::Composition;
use crate::polynomials::{MonicPoly, RootMultiset};

/// Roots in increasing order. The fourth is `1.23456789123456789` rounded to
/// double precision (the source writes it with a decimal comma).
pub const TETRA_ROOTS: [f64; 5] = [-PI, -SQRT_2, 0.0, 1.234_567_891_234_567_9, E];

pub fn tetra_poly() -> MonicPoly {
    let r = RootMultiset::new(TETRA_ROOTS.to_vec(), Composition::top(5).expect("d > 0")).expect("distinct increasing roots");
    MonicPoly::from_roots(&r)
}
