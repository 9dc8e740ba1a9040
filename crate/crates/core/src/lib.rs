//! Generate artificial languages at a controlled phonological, morphological
//! and lexical distance from a source corpus, estimate the noise parameters
//! that relate two real languages, and measure how task performance degrades
//! as the distance grows.
//!
//! The four noisers are applied to a [`Corpus`] and their global replacement
//! maps are recorded in a replayable [`NoiseManifest`]:
//!
//! * [`phonology`]: regular sound change over character trigrams (`theta_p`),
//! * [`morphology`]: replacement of frequent content-word suffixes (`theta_m`),
//! * [`lexical`]: function-word change (`theta_f`) and non-cognate
//!   content-word replacement (`theta_c`).
//!
//! [`posterior`] inverts the process from a bilingual lexicon, [`alignment`]
//! induces such lexicons from bitext, and [`analytics`] turns external task
//! scores into performance-degradation trends.

pub mod alignment;
pub mod analytics;
pub mod compose;
pub mod corpus_io;
pub mod error;
pub mod lexical;
pub mod morphology;
pub mod phonology;
pub mod posterior;
pub mod rng;

pub use compose::{compose, pseudo_crl, NoiseManifest, Resources, ThetaParams};
pub use corpus_io::{Corpus, FunctionWordList, Lexicon, Normalization};
pub use error::{Error, Result};
pub use phonology::PhonologyTables;
pub use posterior::{estimate_thetas, PosteriorConfig, ThetaEstimate};
