//! Gradient-boosted ensembles of weak shift-reduce classifiers for
//! RST-style discourse tree prediction.
//!
//! The crate is organized bottom-up:
//!
//! * [`treebank`]: discourse trees, the bracketed file format, validation
//!   and a synthetic treebank generator.
//! * [`transition`]: the shift-reduce transition system and its static oracle.
//! * [`encoder`]: hashed bag-of-words state features and span truncation.
//! * [`weak_learner`]: a small two-headed classifier with analytic gradients.
//! * [`boosting`]: staged training against frozen predecessors, prefix
//!   aggregation and greedy parsing.
//! * [`metrics`]: RST-Parseval span / nuclearity / relation scoring.

pub mod boosting;
pub mod encoder;
pub mod metrics;
pub mod transition;
pub mod treebank;
pub mod weak_learner;

pub use boosting::{BoostConfig, BoostError, BoostedEnsemble, StepReport, TrainReport};
pub use encoder::{EncoderConfig, FeatureVector, TruncationStrategy};
pub use metrics::{CurveRow, CurveTable, MetricsError, ParsevalScores};
pub use transition::{Action, ParserState, TransitionError};
pub use treebank::{
    DiscourseNode, Document, Edu, Nuclearity, SynthConfig, Treebank, TreebankError,
};
pub use weak_learner::{LearnerConfig, LearnerError, LogitPair, WeakLearner};
