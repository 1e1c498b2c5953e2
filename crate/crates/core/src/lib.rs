//! Dipolar refocusing in hyperfine-mixed donor spins.
//!
//! The crate computes the eigenstructure of a donor electron spin coupled to
//! its host nucleus, locates the fields where a Hahn echo removes the full
//! secular dipolar interaction between two such donors (dipolar refocusing
//! points, DRPs) or only its diagonal part (optimal working points, OWPs),
//! simulates the two-donor echo exactly, and builds pair-product coherence
//! decays for dilute ensembles.
//!
//! ```
//! use donor_drp::{magic, species::SpeciesParams, transitions::TransitionId};
//!
//! let bi = SpeciesParams::bismuth();
//! let line: TransitionId = "-4+,-5u".parse().unwrap();
//! let drps = magic::find_drps(&line, &bi, (0.01, 0.3), 400).unwrap();
//! assert_eq!(drps.len(), 1);
//! assert!((drps[0].field - 0.21).abs() < 0.01);
//! ```

pub mod decoherence;
pub mod donor;
pub mod echo;
pub mod error;
pub mod magic;
pub mod species;
pub mod transitions;

pub use error::{Error, Result};
