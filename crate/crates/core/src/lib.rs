//! A uniformly bounded orthonormal basis of `L_p[0, 1]` that is almost greedy,
//! built by rotating dyadic blocks of Rademacher functions (plus one spare
//! Walsh function per block) with Olevskiĭ matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`walsh`] - Walsh/Rademacher indexing and exact arithmetic on Walsh series.
//! * [`olevskii`] - the orthogonal matrices used to mix each block.
//! * [`basis`] - block schedules and the basis elements as Walsh series.
//! * [`norms`] - exact and sampled `L_p` norms.
//! * [`greedy`] - coefficient expansions, greedy ordering, approximants.
//! * [`experiments`] - the empirical checks and their CSV output.

pub mod basis;
pub mod error;
pub mod experiments;
pub mod greedy;
pub mod norms;
pub mod olevskii;
pub mod walsh;

pub use error::{Error, Result};
