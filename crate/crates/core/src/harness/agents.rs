//! Per-agent network construction.

use crate::config::SimConfig;
use crate::happo::AgentNets;
use crate::nn::{ActorNet, ActorVariant, CriticNet, NnError};
use crate::pomdp::{action_dim_for_agent, global_state_len, obs_len_for_agent};
use crate::rng::{stream, StreamKind};

/// Builds every agent's actor and critic for a scenario. Agents are
/// heterogeneous: no parameters are shared. Initialization draws from
/// per-network streams keyed by the agent index, so adding an agent never
/// shifts another agent's weights.
pub fn build_agents(cfg: &SimConfig, variant: ActorVariant) -> Result<Vec<AgentNets>, NnError> {
    let n = cfg.num_users + cfg.num_uavs;
    let global_len = global_state_len(cfg);
    (0..n)
        .map(|i| {
            let mut actor_rng = stream(cfg.seed, StreamKind::ParamInit, 2 * i as u64);
            let mut critic_rng = stream(cfg.seed, StreamKind::ParamInit, 2 * i as u64 + 1);
            Ok(AgentNets {
                actor: ActorNet::build(
                    variant,
                    obs_len_for_agent(cfg, i),
                    action_dim_for_agent(cfg, i),
                    &mut actor_rng,
                )?,
                critic: CriticNet::build(global_len, &mut critic_rng)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_one_net_pair_per_agent_with_matching_dims() {
        let cfg = SimConfig::desk_scale();
        for variant in ActorVariant::ALL {
            let agents = build_agents(&cfg, variant).unwrap();
            assert_eq!(agents.len(), 6);
            for (i, a) in agents.iter().enumerate() {
                assert_eq!(a.actor.obs_len, obs_len_for_agent(&cfg, i));
                assert_eq!(a.actor.out_dim, action_dim_for_agent(&cfg, i));
                assert_eq!(a.critic.in_len, global_state_len(&cfg));
            }
        }
    }

    #[test]
    fn same_seed_same_weights() {
        let cfg = SimConfig::desk_scale();
        let a = build_agents(&cfg, ActorVariant::Ckan).unwrap();
        let b = build_agents(&cfg, ActorVariant::Ckan).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for (ex, ey) in x.actor.params.entries().zip(y.actor.params.entries()) {
                assert_eq!(ex.value, ey.value);
            }
        }
        let c = build_agents(&SimConfig { seed: 1, ..cfg }, ActorVariant::Ckan).unwrap();
        assert_ne!(
            a[0].actor.params.entries().next().unwrap().value,
            c[0].actor.params.entries().next().unwrap().value
        );
    }
}
