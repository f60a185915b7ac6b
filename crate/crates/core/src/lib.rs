//! Desk-scale social robot platform.
//!
//! The crate is organised around a topic-routed message [`bus`] that connects
//! three kinds of live components:
//!
//! * [`avatar`]: a simulated humanoid that streams five sensor feeds and
//!   executes motion, posture and speech commands,
//! * [`fuzzy`]: a Mamdani fuzzy-logic library and the head-tracking
//!   controller built on it,
//! * [`behavior`]: an event-driven finite state machine that turns perception
//!   events into a tour-guide routine.
//!
//! [`harness`] glues the pieces together: a deterministic virtual-clock
//! scheduler, scripted scenarios, transcripts and a latency benchmark.

pub mod avatar;
pub mod behavior;
pub mod bus;
pub mod clock;
pub mod fuzzy;
pub mod harness;
pub mod runtime;

pub use clock::{Clock, Millis, SystemClock, VirtualClock};
