//! Exact and statistical tools for joint ergodicity of interval maps.

pub mod catalog;
pub mod cylinders;
pub mod entropy;
pub mod error;
pub mod interval;
pub mod jointlab;
pub mod maps;
pub mod measures;
pub mod numeric;
pub mod orbit;
pub mod quadrature;
pub mod rankone;

pub use error::{Error, Result};
pub use interval::{Endpoint, Interval, IntervalSet};
pub use maps::PiecewiseMap;
pub use measures::DensityMeasure;
