//! Batch storage for collected experience.

use crate::scalar::Real;

/// How an episode segment inside a trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeEnd {
    /// Environment reported a terminal state; bootstrap value is zero.
    Terminated,
    /// Step limit reached; bootstrap from the critic.
    Truncated,
    /// The rollout ran out of steps mid-episode; bootstrap from the critic.
    Cut,
}

impl EpisodeEnd {
    /// Completed episodes contribute to episodic statistics.
    pub fn is_complete(self) -> bool {
        !matches!(self, EpisodeEnd::Cut)
    }
}

/// Time-ordered records of one or more episodes collected under a single
/// policy. All per-step sequences share the same length `T`.
///
/// `episode_ends[k]` is the exclusive end index of episode `k`; ends are
/// strictly increasing and the last end equals `T`. `bootstrap_values[k]`
/// holds the (reward, cost) critic values used past the end of episode `k`
/// (zero when the episode terminated).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<S: Real> {
    pub observations: Vec<Vec<S>>,
    pub actions: Vec<Vec<S>>,
    pub log_probs: Vec<S>,
    pub rewards: Vec<S>,
    pub costs: Vec<S>,
    pub value_r: Vec<S>,
    pub value_c: Vec<S>,
    pub episode_ends: Vec<usize>,
    pub episode_kinds: Vec<EpisodeEnd>,
    pub bootstrap_values: Vec<(S, S)>,
}

impl<S: Real> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn n_episodes(&self) -> usize {
        self.episode_ends.len()
    }

    /// Half-open index ranges of the episode segments.
    pub fn episode_ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let starts = std::iter::once(0).chain(self.episode_ends.iter().copied());
        starts.zip(self.episode_ends.iter().copied()).map(|(a, b)| a..b)
    }

    /// Undiscounted cost sum per episode.
    pub fn episodic_costs(&self) -> Vec<S> {
        self.episode_ranges().map(|r| self.costs[r].iter().copied().sum()).collect()
    }

    /// Undiscounted reward sum per episode.
    pub fn episodic_rewards(&self) -> Vec<S> {
        self.episode_ranges().map(|r| self.rewards[r].iter().copied().sum()).collect()
    }

    /// Mean undiscounted episodic cost over completed episodes. Falls back
    /// to all segments when no episode completed inside the batch.
    pub fn mean_episodic_cost(&self) -> S {
        self.episodic_mean(&self.episodic_costs())
    }

    /// Mean undiscounted episodic reward over completed episodes, with the
    /// same fallback as [`Trajectory::mean_episodic_cost`].
    pub fn mean_episodic_reward(&self) -> S {
        self.episodic_mean(&self.episodic_rewards())
    }

    fn episodic_mean(&self, per_episode: &[S]) -> S {
        if per_episode.is_empty() {
            return S::zero();
        }
        let complete: Vec<S> = per_episode
            .iter()
            .zip(&self.episode_kinds)
            .filter(|(_, k)| k.is_complete())
            .map(|(&v, _)| v)
            .collect();
        let pool = if complete.is_empty() { per_episode } else { &complete };
        pool.iter().copied().sum::<S>() / S::c(pool.len() as f64)
    }

    /// Internal consistency: aligned lengths, strictly increasing ends.
    pub fn check(&self) {
        let t = self.len();
        assert_eq!(self.observations.len(), t);
        assert_eq!(self.actions.len(), t);
        assert_eq!(self.log_probs.len(), t);
        assert_eq!(self.costs.len(), t);
        assert_eq!(self.value_r.len(), t);
        assert_eq!(self.value_c.len(), t);
        assert_eq!(self.episode_ends.len(), self.bootstrap_values.len());
        assert_eq!(self.episode_ends.len(), self.episode_kinds.len());
        let mut prev = 0;
        for (i, &e) in self.episode_ends.iter().enumerate() {
            assert!(e > prev || (e == 0 && prev == 0), "episode ends must increase");
            if i + 1 == self.episode_ends.len() {
                assert_eq!(e, t, "last episode end must equal T");
            }
            prev = e;
        }
    }
}

/// Joint experience of a cooperative game: per-agent streams plus a shared
/// reward and centralized critic estimates. The centralized state is the
/// concatenation of the agent observations in agent order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointTrajectory<S: Real> {
    /// `observations[i][t]` is agent `i`'s observation at step `t`.
    pub observations: Vec<Vec<Vec<S>>>,
    pub actions: Vec<Vec<Vec<S>>>,
    pub log_probs: Vec<Vec<S>>,
    /// Shared reward, identical for every agent.
    pub rewards: Vec<S>,
    /// `costs[i][t]` is agent `i`'s cost at step `t`.
    pub costs: Vec<Vec<S>>,
    /// Centralized state per step.
    pub central_states: Vec<Vec<S>>,
    pub value_r: Vec<S>,
    /// `value_c[i][t]` from agent `i`'s centralized cost critic.
    pub value_c: Vec<Vec<S>>,
    pub episode_ends: Vec<usize>,
    pub episode_kinds: Vec<EpisodeEnd>,
    /// Per episode: reward bootstrap plus one cost bootstrap per agent.
    pub bootstrap_r: Vec<S>,
    pub bootstrap_c: Vec<Vec<S>>,
}

impl<S: Real> JointTrajectory<S> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn n_agents(&self) -> usize {
        self.observations.len()
    }

    pub fn episode_ranges(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let starts = std::iter::once(0).chain(self.episode_ends.iter().copied());
        starts.zip(self.episode_ends.iter().copied()).map(|(a, b)| a..b)
    }

    /// Mean undiscounted episodic cost of one agent (completed episodes,
    /// falling back to all segments).
    pub fn mean_episodic_cost(&self, agent: usize) -> S {
        let per: Vec<S> = self
            .episode_ranges()
            .map(|r| self.costs[agent][r].iter().copied().sum())
            .collect();
        if per.is_empty() {
            return S::zero();
        }
        let complete: Vec<S> = per
            .iter()
            .zip(&self.episode_kinds)
            .filter(|(_, k)| k.is_complete())
            .map(|(&v, _)| v)
            .collect();
        let pool = if complete.is_empty() { &per } else { &complete };
        pool.iter().copied().sum::<S>() / S::c(pool.len() as f64)
    }
}
