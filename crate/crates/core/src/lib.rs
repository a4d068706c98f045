//! Library for LDA-based literature mapping.
//!
//! The pipeline goes: bibliographic CSV ingestion ([`corpus`]), deterministic
//! text preprocessing ([`textprep`]), document-term matrix construction
//! ([`dtm`]), collapsed-Gibbs LDA inference ([`lda`]), statistical selection
//! of the topic count ([`modelselect`]), and science-map analytics
//! ([`scimap`]). All stages are seeded and reproducible; [`artifact`] defines
//! the on-disk JSON/CSV formats shared with the `litmap` CLI.
//!
//! # Example
//!
//! ```
//! use litmap_core::{dtm, lda, textprep};
//!
//! let standard = textprep::StopwordSet::builtin_standard();
//! let custom = textprep::StopwordSet::builtin_domain();
//! let docs: Vec<textprep::TokenizedDoc> = [
//!     "Wolves and foxes range across the northern forest.",
//!     "Gold and iron deposits run along the canyon floor.",
//!     "Wolf packs avoid the iron mine after nightfall.",
//! ]
//! .iter()
//! .enumerate()
//! .map(|(i, text)| textprep::TokenizedDoc {
//!     id: format!("d{i}"),
//!     tokens: textprep::preprocess_text(text, &standard, &custom),
//! })
//! .collect();
//!
//! let vocab = dtm::build_vocabulary(&docs, 1)?;
//! let matrix = dtm::build_matrix(&docs, &vocab).matrix;
//!
//! let mut cfg = lda::LdaConfig::for_topics(2);
//! cfg.iterations = 50;
//! cfg.thin = 10;
//! let model = lda::fit_best_of_runs(&matrix, &cfg)?;
//! assert_eq!(model.phi.len(), 2);
//! assert_eq!(model.retained_samples, 5);
//! # Ok::<(), litmap_core::Error>(())
//! ```

pub mod artifact;
pub mod corpus;
pub mod dtm;
pub mod error;
pub mod lda;
pub mod modelselect;
pub mod scimap;
pub mod synthetic;
pub mod textprep;

pub use error::{Error, Result};
