use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::SelectionError;

/// A model placed at its optimal configuration: lower cost and higher
/// quality are better. `params_billion` only sizes the plotted bubble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub model_id: String,
    pub cost_usd: f64,
    pub quality: f64,
    pub params_billion: f64,
}

impl ParetoPoint {
    fn validate(&self) -> Result<(), SelectionError> {
        let reason = if !(self.cost_usd.is_finite() && self.cost_usd > 0.0) {
            format!("cost_usd must be finite and > 0, got {}", self.cost_usd)
        } else if !(self.quality.is_finite() && (0.0..=100.0).contains(&self.quality)) {
            format!("quality must be in [0, 100], got {}", self.quality)
        } else if !(self.params_billion.is_finite() && self.params_billion >= 0.0) {
            format!("params_billion must be finite and >= 0, got {}", self.params_billion)
        } else {
            return Ok(());
        };
        Err(SelectionError::InvalidPoint {
            model_id: self.model_id.clone(),
            reason,
        })
    }
}

/// `a` dominates `b`: no more expensive, no worse, and strictly better on at
/// least one axis.
pub fn dominates(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.cost_usd <= b.cost_usd
        && a.quality >= b.quality
        && (a.cost_usd < b.cost_usd || a.quality > b.quality)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatedPoint {
    pub point: ParetoPoint,
    /// A frontier model that dominates this point.
    pub dominated_by: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    /// Non-dominated points, cost ascending.
    pub points: Vec<ParetoPoint>,
    /// Everything else, in input order, each with a frontier witness.
    pub dominated: Vec<DominatedPoint>,
}

impl Frontier {
    pub fn contains(&self, model_id: &str) -> bool {
        self.points.iter().any(|p| p.model_id == model_id)
    }

    pub fn model_ids(&self) -> Vec<&str> {
        self.points.iter().map(|p| p.model_id.as_str()).collect()
    }

    /// Every point, frontier first.
    pub fn all_points(&self) -> impl Iterator<Item = &ParetoPoint> {
        self.points.iter().chain(self.dominated.iter().map(|d| &d.point))
    }

    pub fn len(&self) -> usize {
        self.points.len() + self.dominated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits `points` into the non-dominated set and the dominated remainder.
///
/// Runs in O(n log n): after sorting by (cost asc, quality desc), a point is
/// on the frontier iff it has the best quality within its cost group and that
/// quality beats everything strictly cheaper. Exact duplicates in both
/// coordinates are all kept.
pub fn pareto_frontier(points: &[ParetoPoint]) -> Result<Frontier, SelectionError> {
    if points.is_empty() {
        return Err(SelectionError::NoPoints);
    }
    let mut seen = HashSet::new();
    for p in points {
        p.validate()?;
        if !seen.insert(p.model_id.as_str()) {
            return Err(SelectionError::DuplicateModel(p.model_id.clone()));
        }
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| cost_order(&points[i], &points[j]));

    let mut witness: Vec<Option<usize>> = vec![None; points.len()];
    let mut on_frontier = vec![false; points.len()];
    // Best (quality, index) among strictly cheaper points.
    let mut best_cheaper: Option<(f64, usize)> = None;
    let mut start = 0;
    while start < order.len() {
        let cost = points[order[start]].cost_usd;
        let end = order[start..]
            .iter()
            .position(|&i| points[i].cost_usd != cost)
            .map_or(order.len(), |n| start + n);
        let leader = order[start];
        let group_best = points[leader].quality;
        let leader_survives = best_cheaper.is_none_or(|(q, _)| group_best > q);

        for &i in &order[start..end] {
            let q = points[i].quality;
            match best_cheaper {
                Some((bq, bi)) if bq >= q => witness[i] = Some(bi),
                _ if q < group_best => witness[i] = Some(leader),
                _ => on_frontier[i] = true,
            }
        }
        if leader_survives {
            best_cheaper = Some((group_best, leader));
        }
        start = end;
    }

    let frontier_points = order
        .iter()
        .filter(|&&i| on_frontier[i])
        .map(|&i| points[i].clone())
        .collect();
    let dominated = (0..points.len())
        .filter_map(|i| {
            witness[i].map(|w| DominatedPoint {
                point: points[i].clone(),
                dominated_by: points[w].model_id.clone(),
            })
        })
        .collect();
    Ok(Frontier {
        points: frontier_points,
        dominated,
    })
}

/// Orders points by cost, then quality descending, then id.
pub(crate) fn cost_order(a: &ParetoPoint, b: &ParetoPoint) -> Ordering {
    a.cost_usd
        .total_cmp(&b.cost_usd)
        .then(b.quality.total_cmp(&a.quality))
        .then_with(|| a.model_id.cmp(&b.model_id))
}
