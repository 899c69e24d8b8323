//! Computational toolkit for bending deformations of (quasi)fuchsian groups.
//!
//! The library works in the upper half-plane model of the hyperbolic plane and
//! the upper half-space model of hyperbolic 3-space. It provides:
//!
//! * exact-as-possible `PSL(2, C)` arithmetic: Mobius actions, fixed points,
//!   complex translation length, cross-ratios and the complex distance
//!   between oriented geodesics ([`moebius`]);
//! * finite-leaved measured geodesic laminations, group-invariant orbit
//!   presentations, transverse measures and L-roundness ([`lamination`]);
//! * bending cocycles, locally convex pleated maps into hyperbolic 3-space,
//!   bend angles and bilipschitz estimates ([`pleating`]);
//! * bending deformations of representations, complex-length curves, the
//!   closed-form derivative of complex length and a finite-difference
//!   oracle for it ([`bending`]);
//! * Jordan/Cartan projections, Margulis invariants, cocycles from bending
//!   and normalized Margulis spectra with properness verdicts ([`margulis`]);
//! * the closed-form threshold functions and constants used to certify
//!   moderate bending ([`thresholds`]);
//! * concrete fuchsian example groups, word batteries, limit-set samples
//!   and a desk-scale critical-exponent estimator ([`groups`]).

pub mod bending;
pub mod groups;
pub mod lamination;
pub mod margulis;
pub mod moebius;
pub(crate) mod numeric;
pub mod pleating;
pub mod thresholds;
