//! Wilson-loop observables: iterated integrals of the superfields along a
//! framed loop, their expansion, and the closedness checks.

mod closedness;
mod family;
mod iterated;
mod series;

pub use closedness::{
    connection_slot, family_sequences, interaction_sign, onshell_differential, slot_operator, superfield_letters, superfield_observable,
    verify_closedness, ClosednessReport, ResidualTerm,
};
pub use family::{
    coeff_order, lambda_name, mu_name, order_weight, project_coeff, required_mu, theorem4_conditions, CoefficientSequences, Family, Parity,
    Projection, Theorem4Check, KAPPA,
};
pub use iterated::{
    derive_word, form_degree, total_degree, words_up_to, BarDifferential, Face, FaceSum, IteratedTerm, LoopExpr,
    SlotPoly, SlotWord,
};
pub use series::{
    auxiliary_reports, build_observable, build_unprojected, cubic_interaction, exponential, expand_components, expand_holonomy, interaction,
    power_interaction, project_ghost_zero, strand, strand_pairs, superfield_components, ObsKey, ObservableSeries,
    SeriesGroup, Strand, StrandCount,
};
