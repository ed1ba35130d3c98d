pub mod curve;
pub mod eval;
pub mod grid;
pub mod invariants;
pub mod reflect;
