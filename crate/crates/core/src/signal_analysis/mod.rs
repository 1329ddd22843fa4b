//! Case-count transforms, polynomial trends, SDAR change-point scores, and
//! the pairing of case and prediction trends.

mod cases;
mod joint;
mod sdar;
mod trend;

pub use cases::{centered_rolling_mean, transform_cases, CaseCountSeries};
pub use joint::{joint_dynamics, JointDynamics};
pub use sdar::{
    sdar_change_points, sdar_scores, trailing_mean, ChangePoint, ChangePointReport, Detection,
    SdarModel, SdarParams,
};
pub use trend::{fit_trend, TrendFit};
