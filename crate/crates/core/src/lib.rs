//! Group equations compiled to EDT0L systems.
//!
//! The crate builds explicit EDT0L systems whose accepted language is the
//! solution language of a system of group equations, for groups assembled
//! from free abelian and finite pieces by direct products, wreath products
//! with finite groups and finite extensions. It also ships the supporting
//! algebra: NFAs with the regular closure constructions, EDT0L closure
//! operations, hash-separation constructions, exact integer-lattice and
//! semilinear-set machinery, Schreier generators and normal forms, and a
//! brute-force oracle for cross-checking everything at desk scale.

pub mod error;
pub mod abelian;
pub mod automata;
pub mod edt0l;
pub mod separation;
pub mod fixtures;
pub mod groups;
pub mod words;

pub use error::{Error, Result};
