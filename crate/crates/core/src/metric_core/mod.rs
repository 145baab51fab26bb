//! Metric-space kernel: finite systems, Bowen metrics, covers, covering
//! numbers, Lebesgue numbers, cover joins and growth rates.

mod cover;
mod covering;
mod growth;
pub mod setcover;
mod system;
mod xor;

pub use cover::{
    cover_join_count, lebesgue_cover, lebesgue_number, sandwich_check, Cover, JoinCount,
    SandwichReport, SandwichRow,
};
pub use covering::{
    covering_number, covering_number_with_witness, greedy_upper_bound, packing_lower_bound,
    Convention, CountMethod, CoverCount, CoverOptions,
};
pub use growth::{
    growth_from_counts, growth_rate, tame_growth_diagnostic, CountingTag, GrowthPoint,
    GrowthSeries, RateMethod, TameRow, TameTable, TameVerdict,
};
pub use system::{
    bowen_distance, BowenMetric, DistTable, FiniteMetricSystem, Metric, MetricData, WordSpace,
};
