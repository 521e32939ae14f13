//! Zealous fixed-precision p-adic arithmetic.

mod element;
mod poly;
mod residue;
mod ring;

pub use element::{ApproxElement, Inspection};
pub use poly::ApproxPoly;
pub use residue::{Residue, ResidueField};
pub use ring::{ApproxRing, Decision, DefiningSource, ExtMode, Family};
