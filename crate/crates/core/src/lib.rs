//! Discovery of block-structured programs from event logs.
//!
//! The miner builds the directly-follows graph of a log, bracketed by
//! artificial begin/end activities, and condenses it bottom-up with local
//! rewriting rules until one node is left; the program stored at that node
//! is the discovered model. Around it sit an automaton semantics for
//! programs, conformance and program-recovery metrics, and a synthetic
//! benchmark that mines programs back from a handful of their traces.
//!
//! ```
//! use structmine::event_log::EventLog;
//! use structmine::miner::discover;
//!
//! let log = EventLog::from_strs(&["a c", "a b c"]);
//! let (program, _) = discover(&log).unwrap();
//! assert_eq!(program.to_expr(), "(a (b?) c)");
//! ```

pub mod event_log;
pub mod program;
pub mod dfg;
pub mod miner;
pub mod semantics;
pub mod metrics;
pub mod bench;
pub mod cli;
