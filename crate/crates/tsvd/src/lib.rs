pub mod baselines;
pub mod cli;
pub mod demo;
pub mod format;
pub mod sampling;
pub mod studies;
