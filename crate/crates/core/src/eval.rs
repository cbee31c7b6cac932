//! Batched policy evaluation: success rate, average reward and average
//! episode length, each as mean and standard error over n episodes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::episode::{Episode, EpisodeTrace, Outcome};
use crate::level::{LevelSpec, Mode};
use crate::oracle::{run_policy, Policy, PolicyKind};
use crate::text::TextMode;
use crate::Error;

/// Result of one evaluated episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub outcome: Outcome,
    pub reward: f64,
    pub steps: u32,
}

impl EpisodeSummary {
    pub fn from_trace(trace: &EpisodeTrace) -> Self {
        EpisodeSummary {
            seed: trace.seed,
            outcome: trace.outcome,
            reward: trace.final_reward(),
            steps: trace.steps,
        }
    }

    pub fn success(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalStats {
    pub level: String,
    pub mode: Mode,
    pub n: usize,
    pub succ_mean: f64,
    pub succ_se: f64,
    pub r_mean: f64,
    pub r_se: f64,
    pub nepi_mean: f64,
    pub nepi_se: f64,
    pub successes: usize,
}

/// Mean and standard error (sample sd with n - 1 denominator, over sqrt n).
/// Values are summed in sorted order so the result does not depend on the
/// order episodes finished in. A single value has standard error 0.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt() / (n as f64).sqrt())
}

impl EvalStats {
    pub fn from_episodes(level: &str, mode: Mode, episodes: &[EpisodeSummary]) -> EvalStats {
        let succ: Vec<f64> = episodes.iter().map(|e| if e.success() { 1.0 } else { 0.0 }).collect();
        let rewards: Vec<f64> = episodes.iter().map(|e| e.reward).collect();
        let steps: Vec<f64> = episodes.iter().map(|e| e.steps as f64).collect();
        let (succ_mean, succ_se) = mean_and_se(&succ);
        let (r_mean, r_se) = mean_and_se(&rewards);
        let (nepi_mean, nepi_se) = mean_and_se(&steps);
        EvalStats {
            level: level.to_string(),
            mode,
            n: episodes.len(),
            succ_mean,
            succ_se,
            r_mean,
            r_se,
            nepi_mean,
            nepi_se,
            successes: episodes.iter().filter(|e| e.success()).count(),
        }
    }
}

/// Runs `n_episodes` episodes with seeds `base_seed..base_seed + n`,
/// building a fresh policy per episode from its seed. Episodes run in
/// parallel; traces come back in seed order.
pub fn evaluate_with<F>(
    make_policy: F,
    level: &LevelSpec,
    mode: Mode,
    text_mode: TextMode,
    n_episodes: usize,
    base_seed: u64,
) -> Result<(EvalStats, Vec<EpisodeTrace>), Error>
where
    F: Fn(u64) -> Box<dyn Policy + Send> + Sync,
{
    if n_episodes == 0 {
        return Err(Error::InvalidArgument("n_episodes must be at least 1".into()));
    }
    let traces: Vec<EpisodeTrace> = (0..n_episodes as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let (_, mut episode) = Episode::reset_with_text(level, mode, seed, text_mode)?;
            let mut policy = make_policy(seed);
            run_policy(&mut episode, policy.as_mut());
            Ok(episode.record_trace())
        })
        .collect::<Result<_, Error>>()?;
    let summaries: Vec<EpisodeSummary> = traces.iter().map(EpisodeSummary::from_trace).collect();
    Ok((EvalStats::from_episodes(&level.name, mode, &summaries), traces))
}

/// [`evaluate_with`] for one of the scripted policies.
pub fn evaluate(
    policy: PolicyKind,
    policy_seed: u64,
    level: &LevelSpec,
    mode: Mode,
    n_episodes: usize,
    base_seed: u64,
) -> Result<(EvalStats, Vec<EpisodeTrace>), Error> {
    evaluate_with(
        |seed| policy.build(policy_seed, seed),
        level,
        mode,
        TextMode::Descriptive,
        n_episodes,
        base_seed,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Best,
    Second,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub stats: EvalStats,
    pub succ_rank: Rank,
    pub reward_rank: Rank,
    pub nepi_rank: Rank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Ranks values by distinct magnitude; ties share a rank.
fn ranks(values: &[f64], higher_is_better: bool) -> Vec<Rank> {
    let mut distinct = values.to_vec();
    distinct.sort_by(|a, b| if higher_is_better { b.total_cmp(a) } else { a.total_cmp(b) });
    distinct.dedup();
    values
        .iter()
        .map(|v| {
            if Some(v) == distinct.first() {
                Rank::Best
            } else if Some(v) == distinct.get(1) {
                Rank::Second
            } else {
                Rank::Other
            }
        })
        .collect()
}

/// Side-by-side table flagging the best and second-best entry per column.
/// Success and reward are higher-is-better; episode length lower-is-better.
pub fn compare(stats: &[EvalStats], labels: &[String]) -> Result<ComparisonTable, Error> {
    if stats.len() < 2 || stats.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "compare needs at least two entries and one label per entry".into(),
        ));
    }
    let first = &stats[0];
    if let Some(bad) = stats
        .iter()
        .find(|s| s.n != first.n || s.level != first.level || s.mode != first.mode)
    {
        return Err(Error::MismatchedMetrics(format!(
            "{} ({}, n={}) vs {} ({}, n={})",
            first.level, first.mode, first.n, bad.level, bad.mode, bad.n
        )));
    }
    let succ = ranks(&stats.iter().map(|s| s.succ_mean).collect::<Vec<_>>(), true);
    let reward = ranks(&stats.iter().map(|s| s.r_mean).collect::<Vec<_>>(), true);
    let nepi = ranks(&stats.iter().map(|s| s.nepi_mean).collect::<Vec<_>>(), false);
    let rows = stats
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (s, label))| ComparisonRow {
            label: label.clone(),
            stats: s.clone(),
            succ_rank: succ[i],
            reward_rank: reward[i],
            nepi_rank: nepi[i],
        })
        .collect();
    Ok(ComparisonTable { rows })
}

fn cell(mean: f64, se: f64, rank: Rank) -> String {
    let mark = match rank {
        Rank::Best => "**",
        Rank::Second => "*",
        Rank::Other => "",
    };
    format!("{mean:.3} ± {se:.3}{mark}")
}

impl ComparisonTable {
    /// Plain-text table; `**` marks the best and `*` the second-best value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.rows.first() {
            out.push_str(&format!(
                "level {} ({}), n = {}\n",
                first.stats.level, first.stats.mode, first.stats.n
            ));
        }
        out.push_str(&format!(
            "{:<12} {:>20} {:>20} {:>20}\n",
            "policy", "Succ", "R_avg", "N_epi"
        ));
        for row in &self.rows {
            let s = &row.stats;
            out.push_str(&format!(
                "{:<12} {:>20} {:>20} {:>20}\n",
                row.label,
                cell(s.succ_mean, s.succ_se, row.succ_rank),
                cell(s.r_mean, s.r_se, row.reward_rank),
                cell(s.nepi_mean, s.nepi_se, row.nepi_rank),
            ));
        }
        out
    }

    /// One JSON object per row.
    pub fn to_json_lines(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
            .collect()
    }
}

/// Single-entry text rendering of one stats record.
pub fn format_stats(label: &str, s: &EvalStats) -> String {
    format!(
        "{label}: level {} ({}), n = {}\n  Succ  {:.3} ± {:.3}\n  R_avg {:.3} ± {:.3}\n  N_epi {:.2} ± {:.2}\n",
        s.level, s.mode, s.n, s.succ_mean, s.succ_se, s.r_mean, s.r_se, s.nepi_mean, s.nepi_se
    )
}
