pub mod criterion;
pub mod error;
pub mod invariants;
pub mod modforms;
pub mod named;
pub mod rat;
pub mod series;

pub use error::{Error, Result};
pub use rat::Rat;
pub use series::QExp;
