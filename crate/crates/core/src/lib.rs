//! Read/write path algebra for simultaneous machine translation.
//!
//! A simultaneous translator interleaves READ (consume a source token) and
//! WRITE (emit a target token) actions. This crate covers:
//!
//! * [`path`]: action strings, g-sequences, and prefix-coverage matrices;
//! * [`transpose`]: segmenting a path into segment pairs and transposing it
//!   into the reverse translation direction;
//! * [`loss`]: the duality regularizer between one direction's writing
//!   probabilities and the other direction's transposed path, with gradient;
//! * [`metrics`]: AL, AP, DAL, alignment sufficiency/necessity, and IoU duality;
//! * [`policy`]: wait-k and alignment-oracle path generators;
//! * [`io`] and [`batch`]: corpus file formats and per-sentence evaluation;
//! * [`cli`]: the `dualpath` command-line tool.
//!
//! ```
//! use dualpath::path::ReadWritePath;
//! use dualpath::transpose::transpose_g;
//!
//! let forward = ReadWritePath::from_values(vec![2, 2, 2, 3, 4], 4).unwrap();
//! let backward = transpose_g(&forward).unwrap().backward_path();
//! assert_eq!(backward.g().values(), &[3, 3, 4, 5]);
//! assert_eq!(backward.to_actions().to_string(), "RRRWWRWRW");
//! ```

pub mod batch;
pub mod cli;
pub mod error;
pub mod io;
pub mod loss;
pub mod matrix;
pub mod metrics;
pub mod path;
pub mod policy;
pub mod transpose;

pub use error::{Error, Result};
pub use matrix::{GammaMatrix, Matrix, WritingProbabilityMatrix};
pub use path::{Action, ActionSequence, CoverageMatrix, GSequence, ReadWritePath};
pub use transpose::{SegmentPair, SegmentPairSequence, Span, Transposition};
