pub mod error;
pub mod estimator;
pub mod kinematics;
pub mod matching;
pub mod metrics;
pub mod pointmap;
pub mod seeds;
pub mod sim;
pub mod urdf;

pub use error::{Error, Result};
