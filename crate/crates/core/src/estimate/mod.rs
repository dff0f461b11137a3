//! Recovery by weighted least squares on exponential features.

mod continuous;
mod discrete;
mod lsq;
mod noiseless;
mod report;

pub use continuous::{
    estimate_1d, estimate_1d_accurate, estimate_1d_optimal, estimate_hd, EstimateConfig, EstimateMode,
};
pub use discrete::set_query_discrete;
pub use lsq::{weighted_lsq, RegressionProblem, LSQ_RANK_TOLERANCE};
pub use noiseless::{recover_noiseless, NOISELESS_RETRIES};
pub use report::{pruned_sparsity, EstimationReport, ReportRecord, SetQueryReport};
