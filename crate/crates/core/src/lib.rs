pub mod bits;
pub mod channel;
pub mod cli;
pub mod codec;
pub mod error;
pub mod link;
pub mod report;
pub mod token;
mod wire;

pub use error::{Error, Result};
