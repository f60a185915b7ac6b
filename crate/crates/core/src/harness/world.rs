//! In-process assemblies of broker, avatar, controller, brain and scenario.

use std::sync::{Arc, Mutex};

use super::scenario::{ScenarioPlayer, ScenarioStep};
use super::transcript::Transcript;
use crate::avatar::{avatar_nodes, AvatarHandle, SensorRates};
use crate::behavior::fsm::Violation;
use crate::behavior::{tour_fsm, Brain, BrainNode, FsmDefinition};
use crate::bus::{Broker, BrokerConfig, BusError, Connector};
use crate::clock::{Millis, VirtualClock};
use crate::fuzzy::tracker::HeadTracker;
use crate::fuzzy::{build_head_controller, FuzzyError, HeadControllerConfig};
use crate::runtime::{Node, RealtimeRunner, Scheduler};

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error(transparent)]
    Bus(#[from] BusError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("invalid FSM: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Fsm(Vec<Violation>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct WorldConfig {
    /// Run the head tracker with this configuration.
    pub head_tracking: Option<HeadControllerConfig>,
    /// Run the brain with this machine.
    pub fsm: Option<FsmDefinition>,
    pub rates: SensorRates,
    pub broker: BrokerConfig,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            head_tracking: None,
            fsm: Some(tour_fsm()),
            rates: SensorRates::default(),
            broker: BrokerConfig::default(),
        }
    }
}

impl WorldConfig {
    /// Everything on: tracker with default settings plus the tour brain.
    pub fn full() -> Self {
        Self {
            head_tracking: Some(HeadControllerConfig::default()),
            ..Self::default()
        }
    }
}

/// Components wired to one broker. Shared handles let callers inspect nodes
/// while a scheduler or runner drives them.
pub struct Assembly {
    pub broker: Broker,
    pub avatar: AvatarHandle,
    pub brain: Option<Arc<Mutex<BrainNode>>>,
    pub tracker: Option<Arc<Mutex<HeadTracker>>>,
    pub player: Option<Arc<Mutex<ScenarioPlayer>>>,
    nodes: Vec<Box<dyn Node>>,
}

impl Assembly {
    /// Builds nodes in scheduling order: scenario, avatar, tracker, brain.
    pub fn build(broker: Broker, cfg: &WorldConfig, scenario: Option<Vec<ScenarioStep>>) -> Result<Self, WorldError> {
        let connector: Arc<dyn Connector> = Arc::new(broker.clone());
        let mut nodes: Vec<Box<dyn Node>> = Vec::new();
        let player = match scenario {
            Some(steps) => {
                let p = Arc::new(Mutex::new(ScenarioPlayer::new(connector.clone(), steps)?));
                nodes.push(Box::new(p.clone()));
                Some(p)
            }
            None => None,
        };
        let avatar = AvatarHandle::default();
        nodes.extend(avatar_nodes(connector.clone(), &avatar, cfg.rates)?);
        let tracker = match &cfg.head_tracking {
            Some(head) => {
                let controller = build_head_controller(*head)?;
                let t = Arc::new(Mutex::new(HeadTracker::new(connector.clone(), controller)?));
                nodes.push(Box::new(t.clone()));
                Some(t)
            }
            None => None,
        };
        let brain = match &cfg.fsm {
            Some(def) => {
                let brain = Brain::new(def.clone()).map_err(WorldError::Fsm)?;
                let b = Arc::new(Mutex::new(BrainNode::new(connector, brain)?));
                nodes.push(Box::new(b.clone()));
                Some(b)
            }
            None => None,
        };
        Ok(Self {
            broker,
            avatar,
            brain,
            tracker,
            player,
            nodes,
        })
    }

    pub fn brain_state(&self) -> Option<String> {
        self.brain.as_ref().map(|b| b.lock().unwrap().brain().state().to_owned())
    }

    pub fn scenario_done(&self) -> bool {
        self.player.as_ref().is_none_or(|p| p.lock().unwrap().is_done())
    }

    pub fn transcript(&self) -> Option<Transcript> {
        self.player.as_ref().map(|p| p.lock().unwrap().transcript().clone())
    }

    fn take_nodes(&mut self) -> Vec<Box<dyn Node>> {
        std::mem::take(&mut self.nodes)
    }
}

/// An [`Assembly`] under the deterministic scheduler.
pub struct VirtualWorld {
    pub scheduler: Scheduler,
    pub parts: Assembly,
}

impl VirtualWorld {
    pub fn new(cfg: &WorldConfig, scenario: Option<Vec<ScenarioStep>>) -> Result<Self, WorldError> {
        let clock = VirtualClock::new(0);
        let broker = Broker::new(cfg.broker, Arc::new(clock.clone()));
        let mut parts = Assembly::build(broker, cfg, scenario)?;
        let mut scheduler = Scheduler::new(clock);
        for node in parts.take_nodes() {
            scheduler.add_boxed(node);
        }
        Ok(Self { scheduler, parts })
    }

    pub fn now(&self) -> Millis {
        self.scheduler.now()
    }

    /// Runs until every scenario step has played and all expectations are
    /// settled, then `tail` more milliseconds. Gives up after `limit`.
    pub fn play(&mut self, tail: Millis, limit: Millis) -> Transcript {
        let parts = &self.parts;
        self.scheduler.run_while(limit, || !parts.scenario_done());
        self.scheduler.run_for(tail);
        self.parts.transcript().unwrap_or_default()
    }
}

/// Virtual time allowed past the last step for commands to drain.
pub const SCENARIO_TAIL_MS: Millis = 1000;

/// Plays `steps` in a fresh virtual world and returns the transcript.
pub fn run_scenario_virtual(steps: Vec<ScenarioStep>, cfg: &WorldConfig) -> Result<Transcript, WorldError> {
    let last = steps.iter().map(|s| s.t).max().unwrap_or(0);
    let mut world = VirtualWorld::new(cfg, Some(steps))?;
    Ok(world.play(SCENARIO_TAIL_MS, last + 600_000))
}

/// Starts an assembly on realtime threads.
pub fn spawn_realtime(
    broker: Broker,
    cfg: &WorldConfig,
    scenario: Option<Vec<ScenarioStep>>,
) -> Result<(Assembly, RealtimeRunner), WorldError> {
    let mut parts = Assembly::build(broker.clone(), cfg, scenario)?;
    let mut runner = RealtimeRunner::new(broker.clock());
    for node in parts.take_nodes() {
        runner.spawn(node)?;
    }
    Ok((parts, runner))
}
