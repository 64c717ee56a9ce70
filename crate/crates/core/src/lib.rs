//! Networked discrete-event systems with bounded delays and losses on FIFO
//! observation and control channels: exact online state estimation and
//! synthesis of safe networked supervisors.

pub mod automaton;
pub mod baseline;
pub mod channels;
pub mod cli;
pub mod comm;
pub mod estimator;
pub mod examples;
pub mod format;
pub mod fuzz;
pub mod grammar;
pub mod synthesis;
