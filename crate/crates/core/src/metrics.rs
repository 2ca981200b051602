//! Structural metrics over a single (possibly merged) graph, and Spearman
//! rank correlation.

use std::collections::VecDeque;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::network::Graph;

/// Two-sided 95% normal quantile used for the Fisher-z interval.
const Z_975: f64 = 1.959_963_984_540_054;

/// How nodes with fewer than two neighbours enter the clustering average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowDegreeRule {
    /// Skip them (igraph's `transitivity(type = "average")` behaviour).
    #[default]
    Exclude,
    /// Count them with a local coefficient of zero.
    AsZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLengthStats {
    /// Mean hop count over unordered reachable pairs.
    pub mean: f64,
    /// Reachable unordered pairs over all unordered pairs.
    pub reachable_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphProperties {
    pub edge_count: usize,
    pub clustering_coefficient: f64,
    pub avg_path_length: f64,
    pub reachable_pair_fraction: f64,
}

impl GraphProperties {
    pub fn measure(graph: &Graph, rule: LowDegreeRule) -> Result<Self> {
        let paths = average_path_length(graph)?;
        Ok(GraphProperties {
            edge_count: graph.edge_count(),
            clustering_coefficient: clustering_coefficient(graph, rule),
            avg_path_length: paths.mean,
            reachable_pair_fraction: paths.reachable_fraction,
        })
    }
}

/// Mean shortest-path length by breadth-first search from every node.
///
/// Disconnected pairs are left out of the mean and show up as a
/// `reachable_fraction` below one.
pub fn average_path_length(graph: &Graph) -> Result<PathLengthStats> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::UndefinedMetric(
            "average path length needs at least two nodes".into(),
        ));
    }
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut total: u64 = 0;
    let mut reachable: u64 = 0;

    for source in 0..n {
        dist.fill(u32::MAX);
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in graph.neighbours(u) {
                let v = v as usize;
                if dist[v] == u32::MAX {
                    dist[v] = next;
                    if v > source {
                        total += next as u64;
                        reachable += 1;
                    }
                    queue.push_back(v);
                }
            }
        }
    }

    if reachable == 0 {
        return Err(Error::UndefinedMetric(
            "graph has no reachable node pairs".into(),
        ));
    }
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    Ok(PathLengthStats {
        mean: total as f64 / reachable as f64,
        reachable_fraction: reachable as f64 / pairs as f64,
    })
}

/// Local clustering coefficient of `node`, or `None` when its degree is
/// below two.
pub fn local_clustering(graph: &Graph, node: usize) -> Option<f64> {
    let neighbours = graph.neighbours(node);
    let degree = neighbours.len();
    if degree < 2 {
        return None;
    }
    let mut links = 0usize;
    for (i, &a) in neighbours.iter().enumerate() {
        let adj_a = graph.neighbours(a as usize);
        // both lists are sorted: count common members past position i
        links += count_sorted_intersection(&neighbours[i + 1..], adj_a);
    }
    Some(2.0 * links as f64 / (degree * (degree - 1)) as f64)
}

fn count_sorted_intersection(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Watts–Strogatz average of local clustering coefficients.
pub fn clustering_coefficient(graph: &Graph, rule: LowDegreeRule) -> f64 {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for node in 0..graph.node_count() {
        match (local_clustering(graph, node), rule) {
            (Some(c), _) => {
                sum += c;
                counted += 1;
            }
            (None, LowDegreeRule::AsZero) => counted += 1,
            (None, LowDegreeRule::Exclude) => {}
        }
    }
    if counted == 0 {
        0.0
    } else {
        sum / counted as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub rho: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

/// Ranks with ties replaced by the mean of the positions they span
/// (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Product-moment correlation. `None` when either input is constant or the
/// lengths differ.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of `rho` from the t-approximation with `m - 2`
/// degrees of freedom.
pub fn correlation_p_value(rho: f64, samples: usize) -> f64 {
    let df = samples as f64 - 2.0;
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = rho * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive for m >= 4");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// 95% interval for `rho` via the Fisher z-transform.
pub fn fisher_interval(rho: f64, samples: usize) -> (f64, f64) {
    if rho.abs() >= 1.0 {
        return (rho, rho);
    }
    let z = rho.atanh();
    let half = Z_975 / (samples as f64 - 3.0).sqrt();
    ((z - half).tanh(), (z + half).tanh())
}

/// Spearman's rank correlation with t-test p-value and Fisher-z interval.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<CorrelationReport> {
    if xs.len() != ys.len() {
        return Err(Error::param(
            "ys",
            format!("length {} differs from xs length {}", ys.len(), xs.len()),
        ));
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "spearman needs at least 4 pairs, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("input contains NaN".into()));
    }
    let rho = pearson(&average_ranks(xs), &average_ranks(ys))
        .ok_or_else(|| Error::UndefinedCorrelation("an input vector is constant".into()))?;
    let (ci_low, ci_high) = fisher_interval(rho, xs.len());
    Ok(CorrelationReport {
        rho,
        p_value: correlation_p_value(rho, xs.len()),
        ci_low,
        ci_high,
        samples: xs.len(),
    })
}
