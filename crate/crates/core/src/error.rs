use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Config(String),

    #[error("no terrestrial site available")]
    NoTerrestrialSite,

    /// Demand points that no single site could ever serve. Holds the indices
    /// into the planner input.
    #[error("{} demand point(s) exceed the site capacity: {offenders:?}", offenders.len())]
    InfeasiblePoints { offenders: Vec<usize> },

    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
}
