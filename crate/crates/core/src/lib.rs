pub mod divergences;
pub mod equivalence;
pub mod error;
pub mod interval;
pub mod lambert;
pub mod measures;
pub mod oracle;
pub mod solver;

pub use divergences::{Builtin, DivergenceSpec, Generator};
pub use error::{Error, Infeasibility, Result};
pub use interval::Interval;
