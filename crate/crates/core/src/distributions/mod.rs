//! Distribution functions and seeded sampling.

mod normal;
mod sampling;
pub mod special;
mod student_t;

pub use normal::{erfc, normal_cdf, normal_pdf, normal_quantile, normal_sf};
pub use sampling::{sample_bivariate, RngStream};
pub use student_t::{t_cdf, t_pdf, t_quantile};
