//! Equilibria of all-pay mechanisms: construction, simulation, and
//! numeric verification of the efficiency, revenue, and maximum-bid bounds.
//!
//! The crate is organised by mechanism:
//!
//! - [`strategies`]: tabulated bid distributions and mixed profiles.
//! - [`valuations`]: XOS and multi-unit valuations, optimal welfare.
//! - [`single_item`]: closed-form single-item equilibria (all-pay, prize
//!   vectors, first-price) and their welfare/revenue analytics.
//! - [`multi_unit_psam`]: the randomized proportional-share all-pay mechanism for
//!   identical units and its pure equilibrium.
//! - [`simultaneous`]: simultaneous item-bidding all-pay auctions and the
//!   welfare inequalities checked on mixed profiles.
//! - [`bounds_kernel`]: standalone checks of the analytic lemmas behind the
//!   combinatorial bound.
//! - [`nash_verify`]: mechanism-agnostic epsilon-Nash certification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds_kernel;
pub mod error;
pub mod mc;
pub mod multi_unit_psam;
pub mod nash_verify;
pub mod numeric;
pub mod simultaneous;
pub mod single_item;
pub mod strategies;
pub mod valuations;

pub use error::{Error, Result};
pub use mc::{Estimate, McConfig};
pub use strategies::{Integrand, MixedProfile, PiecewiseCdf};
