//! Checkers for the hypotheses behind the dimension formula.
//!
//! Separation is certified with disc arithmetic where the maps allow it;
//! non-elementarity is certified by exhibiting repelling points; hyperbolicity
//! and expansion are empirical screens and say so in their reports.

mod bsc;
mod checks;
mod expansion;

pub use bsc::{
    certified_form, check_bsc_certified, preimage_enclosure, BscCertificate, BscVerdict, CertifiedForm, Disc, Enclosure,
};
pub use checks::{
    check_hyperbolic_heuristic, check_loxodromic_condition, check_non_elementary, exceptional_screen,
    non_elementary_search, totally_invariant_points, CheckOutcome, HyperbolicReport, LoxodromicReport, DISTINCT_TOL,
};
pub use expansion::{estimate_expansion, expansion_from_minima, ExpansionEstimate};
