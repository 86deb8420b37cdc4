//! Global dynamics of the generalized Rayleigh system
//! `x'' + x = a(1 - x'^{2n}) x'`.
//!
//! The crate covers exact construction of the family, its Poincaré
//! compactification, local classification of finite and infinite
//! equilibria (including the two blow-ups needed at the degenerate point at
//! infinity), return-map based limit-cycle detection, the Liénard uniqueness
//! hypotheses, and Poincaré-disc phase portraits.

pub mod error;
pub mod flow;
pub mod poly;
pub mod portrait;
pub mod roots;
pub mod compactification;
pub mod lienardcheck;
pub mod limitcycle;
pub mod localanalysis;
pub mod vectorfield;
pub mod verify;

pub use error::{Error, Result};
