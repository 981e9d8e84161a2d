pub mod bounds;
pub mod error;
pub mod fsb;
pub mod io;
pub mod model;
pub mod obbt;
pub mod oracle;
pub mod pdhg;
pub mod sparse;
pub mod tuner;

pub use error::{Error, Result};
