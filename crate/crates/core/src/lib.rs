//! Bias auditing for joint language-vision embedding spaces.
//!
//! The crate measures how strongly images of two target groups associate with
//! two sets of text prompts (the embedding association test), how often
//! emotion words appear in generated captions, and how often classifier or
//! annotator labels mark generated images as sexualized.
//!
//! Embeddings are produced elsewhere and handed over as `.npy` matrices with a
//! JSONL manifest; see [`embedding_io`].
//!
//! ```
//! use eat_audit::eat::{evaluate, EatInput, PermutationPlan};
//!
//! let input = EatInput::new(
//!     vec![vec![1.0, 0.0], vec![0.6, 0.8]],
//!     vec![vec![0.0, 1.0], vec![0.8, 0.6]],
//!     vec![vec![1.0, 0.0]],
//!     vec![vec![0.0, 1.0]],
//! )?;
//! let result = evaluate(&input, &PermutationPlan::default())?;
//! assert!((result.d - 1.1094).abs() < 1e-4);
//! assert_eq!(result.p, 1.0 / 3.0);
//! # Ok::<(), eat_audit::eat::EatError>(())
//! ```
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod captions;
pub mod cli;
pub mod eat;
pub mod embedding_io;
pub mod ratings;
pub mod report;
pub mod stimuli;

/// Seed used when none is configured.
pub const DEFAULT_SEED: u64 = 20_230_612;
