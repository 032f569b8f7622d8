use serde::{Deserialize, Serialize};

use super::{PerfThresholds, SelectionError};
use crate::cost_model;
use crate::dataset::Sweep;

/// Change between two concurrency levels of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingStep {
    pub from_conc: u32,
    pub to_conc: u32,
    pub delta_total_time_s: f64,
    pub delta_avg_throughput: f64,
    pub delta_avg_ttft: f64,
    /// Cost at `to_conc` minus cost at `from_conc`, USD.
    pub marginal_cost_change: f64,
    /// Total time still falls but the target level breaks a threshold.
    pub past_knee: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingAnalysis {
    pub model_id: String,
    pub steps: Vec<ScalingStep>,
    /// First step flagged `past_knee`: adding concurrency still saves time
    /// but service quality no longer meets the thresholds.
    pub knee: Option<ScalingStep>,
}

impl ScalingAnalysis {
    /// Cumulative change from level `from` to level `to`.
    pub fn span(&self, from: u32, to: u32) -> Option<ScalingStep> {
        let start = self.steps.iter().position(|s| s.from_conc == from)?;
        let end = self.steps.iter().position(|s| s.to_conc == to)?;
        if end < start {
            return None;
        }
        let steps = &self.steps[start..=end];
        Some(ScalingStep {
            from_conc: from,
            to_conc: to,
            delta_total_time_s: steps.iter().map(|s| s.delta_total_time_s).sum(),
            delta_avg_throughput: steps.iter().map(|s| s.delta_avg_throughput).sum(),
            delta_avg_ttft: steps.iter().map(|s| s.delta_avg_ttft).sum(),
            marginal_cost_change: steps.iter().map(|s| s.marginal_cost_change).sum(),
            past_knee: steps.iter().any(|s| s.past_knee),
        })
    }
}

/// Consecutive-level deltas of a sweep, with the knee where more concurrency
/// stops paying off in service quality.
pub fn scaling_analysis(
    sweep: &Sweep,
    thresholds: &PerfThresholds,
    hourly_usd: f64,
) -> Result<ScalingAnalysis, SelectionError> {
    thresholds.validate()?;
    let runs = sweep.runs();
    if runs.len() < 2 {
        return Err(SelectionError::TooFewRuns {
            model_id: sweep.model_id().to_string(),
            runs: runs.len(),
        });
    }
    let mut steps = Vec::with_capacity(runs.len() - 1);
    for pair in runs.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        let delta_time = to.total_time_s - from.total_time_s;
        let marginal = cost_model::run_cost(hourly_usd, to.total_time_s)?
            - cost_model::run_cost(hourly_usd, from.total_time_s)?;
        steps.push(ScalingStep {
            from_conc: from.concurrency,
            to_conc: to.concurrency,
            delta_total_time_s: delta_time,
            delta_avg_throughput: to.avg_throughput_tok_s - from.avg_throughput_tok_s,
            delta_avg_ttft: to.avg_ttft_s - from.avg_ttft_s,
            marginal_cost_change: marginal,
            past_knee: delta_time < 0.0 && !thresholds.admits(to),
        });
    }
    let knee = steps.iter().find(|s| s.past_knee).copied();
    Ok(ScalingAnalysis {
        model_id: sweep.model_id().to_string(),
        steps,
        knee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{canonical_fixture, BenchmarkRun};

    fn fixture_sweep(model: &str) -> Sweep {
        canonical_fixture()
            .0
            .into_iter()
            .find(|s| s.model_id() == model)
            .unwrap()
    }

    #[test]
    fn wingpt35_time_drop_from_8_to_48() {
        let a = scaling_analysis(&fixture_sweep("WiNGPT-3.5"), &PerfThresholds::default(), 1.58).unwrap();
        let span = a.span(8, 48).unwrap();
        assert!((span.delta_total_time_s - (774.11 - 2034.05)).abs() < 1e-9);
        assert!(!span.past_knee);
        // 48 -> 64 drops below 20 tok/s while time keeps falling.
        assert_eq!((a.knee.unwrap().from_conc, a.knee.unwrap().to_conc), (48, 64));
    }

    #[test]
    fn wingpt30_ttft_blowup() {
        let a = scaling_analysis(&fixture_sweep("WiNGPT-3.0"), &PerfThresholds::default(), 1.58).unwrap();
        let last = a.steps.last().unwrap();
        assert_eq!((last.from_conc, last.to_conc), (64, 128));
        assert!((last.delta_avg_ttft - 52.185).abs() < 1e-9);
        assert!(last.past_knee);
        assert!(last.marginal_cost_change < 0.0);
        assert_eq!(a.knee.unwrap().to_conc, 32);
    }

    #[test]
    fn constant_sweep_has_no_knee() {
        let template = fixture_sweep("WiNGPT-3.5").runs()[0].clone();
        let runs: Vec<BenchmarkRun> = [8, 16, 32]
            .iter()
            .map(|&c| BenchmarkRun {
                concurrency: c,
                ..template.clone()
            })
            .collect();
        let sweep = Sweep::new("WiNGPT-3.5", runs).unwrap();
        let a = scaling_analysis(&sweep, &PerfThresholds::default(), 1.58).unwrap();
        assert!(a.knee.is_none());
        for s in &a.steps {
            assert_eq!(s.delta_total_time_s, 0.0);
            assert_eq!(s.delta_avg_throughput, 0.0);
            assert_eq!(s.delta_avg_ttft, 0.0);
            assert_eq!(s.marginal_cost_change, 0.0);
        }
    }

    #[test]
    fn needs_two_runs() {
        let one = Sweep::new("m", vec![fixture_sweep("WiNGPT-3.5").runs()[0].clone()]);
        assert!(one.is_err()); // wrong model id guard
        let run = BenchmarkRun {
            model_id: "m".into(),
            ..fixture_sweep("WiNGPT-3.5").runs()[0].clone()
        };
        let one = Sweep::new("m", vec![run]).unwrap();
        assert!(matches!(
            scaling_analysis(&one, &PerfThresholds::default(), 1.58),
            Err(SelectionError::TooFewRuns { runs: 1, .. })
        ));
    }
}
