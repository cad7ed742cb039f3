//! Weighted Morse category of line bundles on toric projective spaces and
//! their products, with an exact weight arithmetic, a DG comparison model and
//! numeric cross-checks.

pub mod dg_model;
pub mod exact_weight;
pub mod flow_verifier;
pub mod lagrangian;
pub mod morse_category;
pub mod polytope;
pub mod svg;
pub mod table;
pub mod verify;

pub use exact_weight::{ExactLog, PosExact};
pub use lagrangian::{LineObject, MultiIndex};
pub use morse_category::{compose, hom_space, HomGenerator, HomSpace};
pub use polytope::ProductPolytope;
