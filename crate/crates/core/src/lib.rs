//! Balanced urn schemes with infinitely many colors indexed by lattices.
//!
//! An urn starts from a finite configuration `U_0`; at each step a ball is
//! drawn with probability proportional to the color masses and the
//! replacement row of its color (the walk's step distribution, shifted to
//! that color) is added. The crate computes the exact law of the drawn
//! color `Z_n` by thinned convolution, simulates urn paths, evaluates the
//! martingales `U_n x(λ) / Π_n(e(λ))` and their second moments, and
//! measures central and local limit behavior.

pub mod colors;
pub mod diagnostics;
pub mod error;
pub mod exact_law;
pub mod numeric;
pub mod product_formula;
pub mod rng;
pub mod urn_process;

pub use colors::{build_model, ColorPoint, Embedding, IncrementModel, LatticeSpec, ModelSpec, MomentSummary};
pub use error::{Result, UrnError};
pub use exact_law::{brute_force_law, exact_law_cf, exact_law_dp, law_moments, DpOptions, SparseLaw};
pub use product_formula::LogComplex;
pub use urn_process::{sample_path, sample_path_naive, MartingaleTrace, UrnPath};
