//! Event-driven behavior: a generic FSM engine, a keyword intent matcher,
//! the shipped tour-guide machine and the bus-facing orchestrator.

pub mod brain;
pub mod fsm;
pub mod intent;
pub mod tour;

pub use brain::{Brain, BrainNode, Output};
pub use fsm::{fsm_dispatch, fsm_validate, Action, BehaviorEvent, EventKind, FsmDefinition, Transition, Violation};
pub use intent::{intent_parse, Intent, IntentName};
pub use tour::tour_fsm;
