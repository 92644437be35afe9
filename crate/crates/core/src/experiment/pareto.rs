use serde::{Deserialize, Serialize};

/// A labelled (energy efficiency, latency) operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub label: String,
    /// Bits per mJ; larger is better.
    pub e_b: f64,
    /// Milliseconds; smaller is better.
    pub latency_ms: f64,
}

impl ParetoPoint {
    pub fn new(label: impl Into<String>, e_b: f64, latency_ms: f64) -> Self {
        ParetoPoint {
            label: label.into(),
            e_b,
            latency_ms,
        }
    }

    /// Strictly better in both coordinates.
    pub fn dominates(&self, other: &ParetoPoint) -> bool {
        self.e_b > other.e_b && self.latency_ms < other.latency_ms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParetoSet {
    pub points: Vec<ParetoPoint>,
    /// Indices into `points` of the frontier, in input order.
    pub frontier: Vec<usize>,
}

impl ParetoSet {
    pub fn frontier_points(&self) -> impl Iterator<Item = &ParetoPoint> {
        self.frontier.iter().map(|&i| &self.points[i])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.frontier.binary_search(&i).is_ok()
    }
}

/// Points not strictly dominated by any other point.
///
/// Sweeps in decreasing `e_b`; a point survives iff its latency does not
/// exceed the best latency among points with strictly larger `e_b`.
pub fn pareto_frontier(points: Vec<ParetoPoint>) -> ParetoSet {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].e_b.total_cmp(&points[a].e_b));

    let mut frontier = Vec::new();
    let mut best_above = f64::INFINITY;
    let mut k = 0;
    while k < order.len() {
        let e = points[order[k]].e_b;
        let mut end = k;
        let mut group_best = f64::INFINITY;
        while end < order.len() && points[order[end]].e_b == e {
            let i = order[end];
            if points[i].latency_ms <= best_above {
                frontier.push(i);
            }
            group_best = group_best.min(points[i].latency_ms);
            end += 1;
        }
        best_above = best_above.min(group_best);
        k = end;
    }
    frontier.sort_unstable();
    ParetoSet { points, frontier }
}
