//! Class scoring, argmax labelling and count-constrained redistribution.

mod distribute;
mod provider;
mod scores;

pub use distribute::{distribute, expected_counts, DistributionReport, ExpectedCounts, Move, Residual};
pub use provider::{FileScoreProvider, GeometricScoreProvider, ScoreProvider};
pub use scores::{argmax_assign, Assigned, Assignment, AssignmentSource, ClassLabel, ScoreMatrix, ScoreRow, ScoresFile};
