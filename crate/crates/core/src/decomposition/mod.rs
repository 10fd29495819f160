//! Doléans correspondence between optional measures and non-decreasing
//! processes, and the deflator/discount decomposition with exact
//! verification.

mod decompose;
mod measure;
mod verify;

pub use decompose::{
    closing_bracket_vanishes, decompose_alternative, decompose_optional,
    decompose_optional_any_mass, decompose_predictable, potential, recompose, Decomposition,
    DecompositionMode,
};
pub use measure::{
    linear_form, paired_linear_form, paired_linear_form_projected, OptionalMeasure, PairedMeasure,
};
pub use verify::{
    associate_measure, measure_association_sides, verify_decomposition, AssociatedMeasure,
    DecompositionReport,
};
