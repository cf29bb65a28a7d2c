pub mod convolution;
pub mod error;
pub mod fit;
pub mod group;
pub mod periodicity;
pub mod ratio_limit;
pub mod spectral;
pub mod surd;
pub mod weight;

pub use convolution::{SparseMeasure, SupportSet};
pub use error::{Result, WalkError};
pub use group::{GroupElem, GroupSpec};
pub use surd::QuadSurd;
pub use weight::Weight;
