//! Episode lifecycle: reset, step, fractional time accounting, reward and
//! trace recording.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{resolve_action, TerminationReason};
use crate::grid::{observe, Action, GridState, SymbolicGrid};
use crate::level::{sample_instance, EnvInstance, LevelRegistry, LevelSpec, Mode};
use crate::text::{self, TextMode};
use crate::{rng, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Running,
    Success,
    Trap,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Running => "running",
            Outcome::Success => "success",
            Outcome::Trap => "trap",
            Outcome::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What the agent receives each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub grid: SymbolicGrid,
    pub descriptions: Vec<String>,
    pub instruction: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub time: f64,
    pub steps: u32,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Reward for completing the mission at time `time`.
pub fn success_reward(time: f64, max_steps: u32) -> f64 {
    1.0 - 0.9 * time / max_steps as f64
}

/// The horizon is measured on the fractional time counter.
pub fn timed_out(time: f64, max_steps: u32) -> bool {
    time >= max_steps as f64
}

/// One running episode. Owns its state; nothing is shared between episodes.
#[derive(Debug, Clone)]
pub struct Episode {
    instance: EnvInstance,
    grid: GridState,
    time: f64,
    steps: u32,
    outcome: Outcome,
    descriptions: Vec<String>,
    instruction: String,
    actions: Vec<Action>,
    rewards: Vec<f64>,
}

impl Episode {
    /// Samples an instance and starts an episode with descriptive text.
    pub fn reset(level: &LevelSpec, mode: Mode, seed: u64) -> Result<(Observation, Episode), Error> {
        Episode::reset_with_text(level, mode, seed, TextMode::Descriptive)
    }

    pub fn reset_with_text(
        level: &LevelSpec,
        mode: Mode,
        seed: u64,
        text_mode: TextMode,
    ) -> Result<(Observation, Episode), Error> {
        let episode = Episode::from_instance(sample_instance(level, mode, seed)?, text_mode);
        Ok((episode.observation(), episode))
    }

    pub fn from_instance(instance: EnvInstance, text_mode: TextMode) -> Episode {
        let text_seed = rng::derive_seed(instance.seed, "text");
        let descriptions = match text_mode {
            TextMode::Descriptive => {
                text::describe(&instance.dynamics, instance.level.partial_text, text_seed).sentences
            }
            mode => text::ablation_text(mode, &instance.dynamics, text_seed).sentences,
        };
        Episode {
            grid: instance.grid.clone(),
            instruction: text::instruction(&instance.mission),
            instance,
            time: 0.0,
            steps: 0,
            outcome: Outcome::Running,
            descriptions,
            actions: Vec::new(),
            rewards: Vec::new(),
        }
    }

    pub fn instance(&self) -> &EnvInstance {
        &self.instance
    }

    pub fn grid(&self) -> &GridState {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn is_done(&self) -> bool {
        self.outcome != Outcome::Running
    }

    pub fn descriptions(&self) -> &[String] {
        &self.descriptions
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Sum of per-step rewards; only the final step can be nonzero.
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn observation(&self) -> Observation {
        Observation {
            grid: observe(&self.grid, &self.instance.dynamics),
            descriptions: self.descriptions.clone(),
            instruction: self.instruction.clone(),
        }
    }

    fn info(&self) -> StepInfo {
        StepInfo {
            time: self.time,
            steps: self.steps,
            outcome: self.outcome,
        }
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if self.is_done() {
            return Err(Error::SteppingTerminatedEpisode);
        }
        let transition = resolve_action(&self.grid, action, &self.instance.dynamics);
        self.grid = transition.next_state;
        self.time += transition.time_delta;
        self.steps += 1;

        let max_steps = self.instance.level.max_steps;
        let mut reward = 0.0;
        if transition.termination_reason == TerminationReason::Trap {
            self.outcome = Outcome::Trap;
        } else if self.instance.mission_satisfied(&self.grid) {
            self.outcome = Outcome::Success;
            reward = success_reward(self.time, max_steps);
        } else if timed_out(self.time, max_steps) {
            self.outcome = Outcome::Timeout;
        }

        self.actions.push(action);
        self.rewards.push(reward);
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.is_done(),
            info: self.info(),
        })
    }

    pub fn record_trace(&self) -> EpisodeTrace {
        EpisodeTrace {
            seed: self.instance.seed,
            level: self.instance.level.name.clone(),
            mode: self.instance.mode,
            actions: self.actions.clone(),
            rewards: self.rewards.clone(),
            outcome: self.outcome,
            time: self.time,
            steps: self.steps,
        }
    }
}

/// Self-contained record of one episode, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub level: String,
    pub mode: Mode,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub outcome: Outcome,
    pub time: f64,
    pub steps: u32,
}

impl EpisodeTrace {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn final_reward(&self) -> f64 {
        self.rewards.last().copied().unwrap_or(0.0)
    }

    /// Re-runs the recorded actions from a fresh reset.
    pub fn replay(&self, registry: &LevelRegistry) -> Result<EpisodeTrace, Error> {
        let level = registry.get(&self.level)?;
        let (_, mut episode) = Episode::reset(level, self.mode, self.seed)?;
        for &a in &self.actions {
            episode.step(a)?;
        }
        Ok(episode.record_trace())
    }
}

impl FromStr for EpisodeTrace {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(line)?)
    }
}

/// Parses a JSON-lines trace file, skipping blank lines.
pub fn parse_traces(text: &str) -> Result<Vec<EpisodeTrace>, Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::parse)
        .collect()
}
