//! Rollout storage for one training iteration.

/// Per-agent trajectory sequences. All sequences share the same length; the
/// stored values and log-probabilities were produced by the behavior
/// parameters at collection time.
#[derive(Clone, Debug, Default)]
pub struct AgentTrajectory {
    pub obs: Vec<Vec<f64>>,
    /// Pre-squash action samples (the squashed action is `tanh` of this).
    pub pre_squash: Vec<Vec<f64>>,
    pub log_prob: Vec<f64>,
    pub reward: Vec<f64>,
    pub value: Vec<f64>,
    pub done: Vec<bool>,
}

/// One agent's record for one slot.
#[derive(Clone, Debug)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub pre_squash: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
}

/// Synchronized multi-agent rollout buffer plus the shared global states.
#[derive(Clone, Debug, Default)]
pub struct RolloutBuffer {
    pub agents: Vec<AgentTrajectory>,
    pub global_states: Vec<Vec<f64>>,
}

impl RolloutBuffer {
    pub fn new(num_agents: usize) -> Self {
        RolloutBuffer {
            agents: vec![AgentTrajectory::default(); num_agents],
            global_states: Vec::new(),
        }
    }

    pub fn push_slot(&mut self, global_state: Vec<f64>, transitions: Vec<Transition>, done: bool) {
        assert_eq!(transitions.len(), self.agents.len(), "one transition per agent");
        for (traj, t) in self.agents.iter_mut().zip(transitions) {
            traj.obs.push(t.obs);
            traj.pre_squash.push(t.pre_squash);
            traj.log_prob.push(t.log_prob);
            traj.reward.push(t.reward);
            traj.value.push(t.value);
            traj.done.push(done);
        }
        self.global_states.push(global_state);
    }

    /// Number of stored slots.
    pub fn len(&self) -> usize {
        self.global_states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global_states.is_empty()
    }

    pub fn clear(&mut self) {
        for traj in &mut self.agents {
            *traj = AgentTrajectory::default();
        }
        self.global_states.clear();
    }
}
