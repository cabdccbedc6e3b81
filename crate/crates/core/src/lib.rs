pub mod dynamics;
pub mod error;
pub mod groups;
pub mod hamiltonian;
pub mod numerics;
pub mod oracle;
pub mod phase;
pub mod quantum;
pub mod reduction;
pub mod runner;
pub mod verify;

pub use error::{Error, Result};
