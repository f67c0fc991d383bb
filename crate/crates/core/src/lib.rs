//! Learning interfaces that maximize information transfer.
//!
//! An interface knows hidden information (a goal position) that a human
//! cannot see and shows the human bounded signals. [`learner::LimitLearner`]
//! learns, online and without access to the human's reward, a signal policy
//! under which the human's actions become predictable from the hidden
//! information. The remaining modules provide the simulated worlds and
//! humans, the linear baselines, an exact discrete mutual-information oracle,
//! the experiment runner with paired statistics, and the playground session
//! logic used by the web demo and the HTTP service.

pub mod baselines;
pub mod env;
pub mod error;
pub mod humans;
pub mod info;
pub mod learner;
pub mod net;
pub mod playground;
pub mod plot;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
