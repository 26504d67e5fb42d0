pub mod congruence;
pub mod error;
pub mod expsum;
pub mod hrr;
pub mod modarith;
pub mod numctx;
pub mod oracle;
pub mod trig;

pub use error::{Error, Result};
