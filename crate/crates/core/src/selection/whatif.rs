use serde::{Deserialize, Serialize};

use super::{pareto_frontier, select_optimal, Frontier, OptimalChoice, ParetoPoint, PerfThresholds, SelectionError};
use crate::cost_model::{cluster_hourly, ClusterSpec, GpuCostParams};
use crate::dataset::{ModelCard, Sweep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResult {
    pub hourly_rate_usd: f64,
    pub thresholds: PerfThresholds,
    /// One choice per sweep, in sweep order.
    pub optima: Vec<OptimalChoice>,
    /// Frontier over the feasible optima; infeasible models are absent.
    pub frontier: Frontier,
}

/// Selects every model's optimum at `hourly_usd` and builds the frontier.
/// Every sweep needs a matching model card.
pub fn evaluate(
    sweeps: &[Sweep],
    cards: &[ModelCard],
    hourly_usd: f64,
    thresholds: &PerfThresholds,
) -> Result<WhatIfResult, SelectionError> {
    if sweeps.is_empty() {
        return Err(SelectionError::EmptyDataset);
    }
    let card_for = |model_id: &str| {
        cards
            .iter()
            .find(|c| c.model_id == model_id)
            .ok_or_else(|| SelectionError::MissingScore(model_id.to_string()))
    };
    for sweep in sweeps {
        card_for(sweep.model_id())?;
    }

    let optima = sweeps
        .iter()
        .map(|s| select_optimal(s, thresholds, hourly_usd))
        .collect::<Result<Vec<_>, _>>()?;

    let mut points = Vec::new();
    for choice in optima.iter().filter(|c| c.feasible) {
        let card = card_for(&choice.model_id)?;
        points.push(ParetoPoint {
            model_id: choice.model_id.clone(),
            cost_usd: choice.cost_usd.expect("feasible choice carries a cost"),
            quality: card.quality_score,
            params_billion: card.params_billion,
        });
    }
    let frontier = if points.is_empty() {
        Frontier {
            points: Vec::new(),
            dominated: Vec::new(),
        }
    } else {
        pareto_frontier(&points)?
    };

    Ok(WhatIfResult {
        hourly_rate_usd: hourly_usd,
        thresholds: *thresholds,
        optima,
        frontier,
    })
}

/// Re-derives the hourly rate from hardware parameters, then re-runs
/// selection and the frontier. Same inputs always give the same result.
pub fn what_if(
    sweeps: &[Sweep],
    cards: &[ModelCard],
    cost_params: &GpuCostParams,
    gpu_count: u32,
    thresholds: &PerfThresholds,
) -> Result<WhatIfResult, SelectionError> {
    let hourly = cluster_hourly(&ClusterSpec {
        gpu_count,
        params: *cost_params,
    })?;
    evaluate(sweeps, cards, hourly, thresholds)
}
