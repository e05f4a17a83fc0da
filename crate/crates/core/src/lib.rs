//! Differential analysis of the generalized Ness-Helleseth function family
//! f_u(x) = u*x^((q-1)/2 - 1) + x^(q-2) over F_{p^n} with q = 3 (mod 4).
//!
//! The crate pits closed-form results (classification by the coefficient u,
//! formula spectra, character-sum identities) against an exhaustive
//! brute-force oracle. The oracle is normative: every formula result carries
//! an agreement flag.

pub mod charsum;
pub mod field;
pub mod nh;
pub mod oracle;

pub use field::{Elem, FieldCtx, FieldError};
