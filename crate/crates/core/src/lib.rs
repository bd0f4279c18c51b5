//! Multilinear forms on the Boolean cube, their slice norms and
//! commuting-contraction decompositions, and exhaustively verified SDP
//! feasibility certificates that rule out low-query quantum approximation
//! of the resulting bounded polynomials.
//!
//! The crate builds two counterexample families — random sign cubic forms
//! and explicit arithmetic-progression forms with Mobius coefficients —
//! computes the invariants that make them hard to approximate
//! (`||f||_2^2 / Delta(f)`, Gowers `U^3` norms, the generalized von Neumann
//! bound), realizes each form through explicit commuting contractions, and
//! emits machine-checkable certificates whose every claim is reproduced by
//! exhaustive enumeration at desk scale.
//!
//! Everything is deterministic: enumeration reduces through a fixed block
//! tree ([`par`]), randomness comes from a documented portable generator
//! ([`rng`]), and certificates serialize canonically ([`certificate`]).
//! The `parallel` feature (default on) executes the block tree on rayon;
//! disabling it changes nothing but wall-clock time.

pub mod certificate;
pub mod constructions;
pub mod error;
pub mod par;
pub mod poly;
pub mod report;
pub mod rng;
pub mod slices;
pub mod varopoulos;
pub mod witness;

pub use certificate::{CertKind, Certificate, Provenance, Reverification};
pub use constructions::{
    ap_form, check_von_neumann, counterexample_ratio, gowers_u3, mobius, random_cubic,
    squarefree_count, ApForm, ApFormIndex, VonNeumannReport, ZnFunction,
};
pub use error::{Error, Result};
pub use poly::{orthogonality_check, MultilinearPoly, RawPoly, DEFAULT_ENUM_CAP, MAX_VARS};
pub use report::{CheckReport, PropertyCheck};
pub use slices::{all_slices, delta, operator_norm, slice, SliceMatrix};
pub use varopoulos::{
    build_chsh, build_trilinear, chsh_form, four_index_vanishing, quartic_moment, verify_tuple,
    CommutingTuple, FourIndexReport,
};
pub use witness::{
    build_chsh_witness, certify, certify_scaled, correlation, objective, objective_with_constant,
    quartic_lower_bound, verify_membership, ContractionMap, MembershipReport, QuarticBound,
    SdpWitness,
};
