//! Monte Carlo bond percolation: sampling, clustering, spanning detection
//! and the estimators built on them.
//!
//! Every trial draws its randomness from its own ChaCha stream, selected by
//! `(master seed, trial index)`, and per-trial results are reduced in trial
//! order. Estimates are therefore identical for any rayon thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{build_lattice, Boundary, LatticeKind, LatticeSpec, Network, NetworkError, NodeId};
use crate::state::SchmidtVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PercolationError {
    #[error("open probability {value} for edge {edge} is outside [0, 1]")]
    Probability { edge: usize, value: f64 },
    #[error("expected {expected} per-edge probabilities, got {got}")]
    ProbabilityCount { expected: usize, got: usize },
    #[error("network has no lattice geometry")]
    NoGeometry,
    #[error("axis must be 0 or 1, got {0}")]
    Axis(usize),
    #[error("threshold estimation needs a 2D lattice, got {0}")]
    NotLattice(LatticeKind),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("tolerance {0} is below the supported minimum of 0.005")]
    Tolerance(f64),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// RNG stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Disjoint sets with union by size and path halving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Root lookup without compression; depth is logarithmic under union by size.
    pub fn root(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if they were already one.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.root(a) == self.root(b)
    }

    pub fn component_size(&self, x: usize) -> usize {
        self.size[self.root(x)]
    }

    /// Sizes of all components, one entry per root, in root order.
    pub fn component_sizes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&x| self.parent[x] == x)
            .map(|x| self.size[x])
            .collect()
    }

    pub fn largest_component(&self) -> usize {
        self.component_sizes().into_iter().max().unwrap_or(0)
    }
}

/// Union-find that also records each node's unwrapped displacement from its
/// root, so that an edge closing a loop with non-zero net displacement
/// reveals a cluster winding around the torus.
#[derive(Debug, Clone)]
struct WrappingUnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    offset: Vec<[i64; 2]>,
    wraps: [bool; 2],
}

impl WrappingUnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            offset: vec![[0, 0]; n],
            wraps: [false; 2],
        }
    }

    /// Root of `x` and the displacement of `x` relative to that root.
    fn find(&mut self, x: usize) -> (usize, [i64; 2]) {
        let mut root = x;
        let mut total = [0i64; 2];
        while self.parent[root] != root {
            total = add(total, self.offset[root]);
            root = self.parent[root];
        }
        // Second pass: point everything on the path straight at the root.
        let mut node = x;
        let mut remaining = total;
        while self.parent[node] != node {
            let next = self.parent[node];
            let step = self.offset[node];
            self.parent[node] = root;
            self.offset[node] = remaining;
            remaining = sub(remaining, step);
            node = next;
        }
        (root, total)
    }

    /// Adds the edge `u → v` whose endpoints differ by `shift` cells.
    fn union(&mut self, u: usize, v: usize, shift: [i64; 2]) {
        let (ru, ou) = self.find(u);
        let (rv, ov) = self.find(v);
        // Displacement of rv's frame relative to ru's frame.
        let delta = sub(add(ou, shift), ov);
        if ru == rv {
            for (wrapped, d) in self.wraps.iter_mut().zip(delta) {
                *wrapped |= d != 0;
            }
            return;
        }
        if self.size[ru] >= self.size[rv] {
            self.parent[rv] = ru;
            self.offset[rv] = delta;
            self.size[ru] += self.size[rv];
        } else {
            self.parent[ru] = rv;
            self.offset[ru] = [-delta[0], -delta[1]];
            self.size[rv] += self.size[ru];
        }
    }
}

fn add(a: [i64; 2], b: [i64; 2]) -> [i64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: [i64; 2], b: [i64; 2]) -> [i64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Open probability of every edge.
#[derive(Debug, Clone, PartialEq)]
pub enum OpenProbability {
    Uniform(f64),
    PerEdge(Vec<f64>),
}

impl OpenProbability {
    pub fn get(&self, edge: usize) -> f64 {
        match self {
            OpenProbability::Uniform(p) => *p,
            OpenProbability::PerEdge(ps) => ps[edge],
        }
    }

    pub fn validate(&self, edges: usize) -> Result<(), PercolationError> {
        let check = |edge: usize, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(PercolationError::Probability { edge, value })
            }
        };
        match self {
            OpenProbability::Uniform(p) => check(0, *p),
            OpenProbability::PerEdge(ps) => {
                if ps.len() != edges {
                    return Err(PercolationError::ProbabilityCount {
                        expected: edges,
                        got: ps.len(),
                    });
                }
                ps.iter().enumerate().try_for_each(|(e, &p)| check(e, p))
            }
        }
    }

    /// Uniform when every entry agrees, which keeps reports compact.
    pub fn common_value(&self) -> Option<f64> {
        match self {
            OpenProbability::Uniform(p) => Some(*p),
            OpenProbability::PerEdge(ps) => {
                let first = *ps.first()?;
                ps.iter().all(|&p| p == first).then_some(first)
            }
        }
    }
}

/// One realization of open and closed edges.
///
/// `weights[e]` is the uniform variate of edge `e`, and `open[e]` is
/// `weights[e] < p_e`. Reusing the weights at another `p` couples the two
/// samples so that the open set can only grow with `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationSample {
    pub open: Vec<bool>,
    pub weights: Vec<f64>,
    pub clusters: UnionFind,
}

impl PercolationSample {
    /// Number of nodes in the largest cluster.
    pub fn largest_cluster(&self) -> usize {
        self.clusters.largest_component()
    }
}

/// Draws one uniform weight per edge in edge order.
pub fn draw_weights<R: Rng + ?Sized>(edges: usize, rng: &mut R) -> Vec<f64> {
    (0..edges).map(|_| rng.gen::<f64>()).collect()
}

/// Opens every edge independently with its probability.
pub fn sample<R: Rng + ?Sized>(
    net: &Network,
    probs: &OpenProbability,
    rng: &mut R,
) -> Result<PercolationSample, PercolationError> {
    let weights = draw_weights(net.edges().len(), rng);
    sample_with_weights(net, probs, weights)
}

/// Builds a sample from pre-drawn weights.
pub fn sample_with_weights(
    net: &Network,
    probs: &OpenProbability,
    weights: Vec<f64>,
) -> Result<PercolationSample, PercolationError> {
    probs.validate(net.edges().len())?;
    let mut clusters = UnionFind::new(net.node_count());
    let open: Vec<bool> = weights.iter().enumerate().map(|(e, &w)| w < probs.get(e)).collect();
    for (edge, _) in net.edges().iter().zip(&open).filter(|(_, o)| **o) {
        clusters.union(edge.u.0, edge.v.0);
    }
    Ok(PercolationSample {
        open,
        weights,
        clusters,
    })
}

pub fn connected(sample: &PercolationSample, a: NodeId, b: NodeId) -> bool {
    sample.clusters.same(a.0, b.0)
}

/// Whether some open cluster spans the lattice along `axis` (0 or 1, in cell
/// coordinates).
///
/// On a periodic lattice a cluster spans if it winds around the torus with a
/// non-zero component along `axis`. On an open lattice it spans if it
/// touches both faces `cell[axis] = 0` and `cell[axis] = L − 1`.
pub fn spans(net: &Network, sample: &PercolationSample, axis: usize) -> Result<bool, PercolationError> {
    if axis > 1 {
        return Err(PercolationError::Axis(axis));
    }
    let spec = net.spec().ok_or(PercolationError::NoGeometry)?;
    match spec.boundary {
        Boundary::Periodic => Ok(wrapping(net, &sample.open)?[axis]),
        Boundary::Open => {
            let cells = net.cells().ok_or(PercolationError::NoGeometry)?;
            let far = spec.size as i64 - 1;
            let mut low = vec![false; net.node_count()];
            for (x, cell) in cells.iter().enumerate() {
                if cell[axis] == 0 {
                    low[sample.clusters.root(x)] = true;
                }
            }
            Ok(cells
                .iter()
                .enumerate()
                .any(|(x, cell)| cell[axis] == far && low[sample.clusters.root(x)]))
        }
    }
}

/// Winding flags per axis of the open subgraph.
fn wrapping(net: &Network, open: &[bool]) -> Result<[bool; 2], PercolationError> {
    let shifts = net.shifts().ok_or(PercolationError::NoGeometry)?;
    let mut uf = WrappingUnionFind::new(net.node_count());
    for ((edge, shift), _) in net.edges().iter().zip(shifts).zip(open).filter(|(_, o)| **o) {
        uf.union(edge.u.0, edge.v.0, *shift);
        if uf.wraps == [true, true] {
            break;
        }
    }
    Ok(uf.wraps)
}

/// Mean and standard error of the mean over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    /// Reduces per-trial values in the given order.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            trials: n,
        }
    }

    /// Binomial estimate from a success count.
    pub fn from_count(successes: usize, trials: usize) -> Self {
        let mean = successes as f64 / trials as f64;
        Self {
            mean,
            stderr: (mean * (1.0 - mean) / trials as f64).sqrt(),
            trials,
        }
    }

    /// Distance from `value` in units of the standard error; zero error
    /// counts as infinitely far unless the values agree exactly.
    pub fn sigmas_from(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

fn require_trials(trials: usize) -> Result<(), PercolationError> {
    if trials == 0 {
        Err(PercolationError::NoTrials)
    } else {
        Ok(())
    }
}

/// Runs `f` once per trial in parallel and returns the results in trial order.
pub fn per_trial<T, F>(trials: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|t| f(&mut trial_rng(seed, t)))
        .collect()
}

/// Finite-size proxy for θ(p): mean fraction of nodes in the largest cluster.
pub fn estimate_theta(
    net: &Network,
    probs: &OpenProbability,
    trials: usize,
    seed: u64,
) -> Result<Estimate, PercolationError> {
    require_trials(trials)?;
    probs.validate(net.edges().len())?;
    let n = net.node_count() as f64;
    let fractions = per_trial(trials, seed, |rng| {
        let s = sample(net, probs, rng).expect("validated");
        s.largest_cluster() as f64 / n
    });
    Ok(Estimate::from_values(&fractions))
}

/// Fraction of trials in which an open cluster spans along `axis`.
pub fn spanning_frequency(
    net: &Network,
    probs: &OpenProbability,
    axis: usize,
    trials: usize,
    seed: u64,
) -> Result<Estimate, PercolationError> {
    require_trials(trials)?;
    probs.validate(net.edges().len())?;
    if axis > 1 {
        return Err(PercolationError::Axis(axis));
    }
    if net.spec().is_none() {
        return Err(PercolationError::NoGeometry);
    }
    let hits = per_trial(trials, seed, |rng| {
        let s = sample(net, probs, rng).expect("validated");
        spans(net, &s, axis).expect("validated")
    });
    Ok(Estimate::from_count(hits.iter().filter(|&&h| h).count(), trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub kind: LatticeKind,
    #[serde(rename = "L")]
    pub size: usize,
    pub p_th_hat: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Bisects on `p` for the point where the axis-0 wrapping frequency of a
/// periodic `L × L` lattice crosses one half.
///
/// All bisection steps reuse the same per-trial weights, so the frequency
/// is monotone in `p` and the bisection is well posed. The reported error
/// combines the binomial error at the crossing, divided by the local slope
/// of the frequency, with the bisection resolution.
pub fn estimate_threshold(
    kind: LatticeKind,
    size: usize,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<ThresholdEstimate, PercolationError> {
    if kind == LatticeKind::Chain {
        return Err(PercolationError::NotLattice(kind));
    }
    require_trials(trials)?;
    // Also rejects NaN.
    if tol.is_nan() || tol < 0.005 {
        return Err(PercolationError::Tolerance(tol));
    }
    let net = build_lattice(&LatticeSpec::periodic(kind, size), &SchmidtVector::bell(), 1)?;
    let edges = net.edges().len();

    let frequency = |p: f64| -> f64 {
        let hits = per_trial(trials, seed, |rng| {
            let weights = draw_weights(edges, rng);
            let open: Vec<bool> = weights.iter().map(|&w| w < p).collect();
            wrapping(&net, &open).expect("lattice")[0]
        });
        hits.iter().filter(|&&h| h).count() as f64 / trials as f64
    };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if frequency(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_hat = 0.5 * (lo + hi);

    const SLOPE_HALF_WIDTH: f64 = 0.02;
    let slope = (frequency((p_hat + SLOPE_HALF_WIDTH).min(1.0)) - frequency((p_hat - SLOPE_HALF_WIDTH).max(0.0)))
        / (2.0 * SLOPE_HALF_WIDTH);
    let resolution = (hi - lo).powi(2) / 12.0;
    let stderr = if slope > 0.0 {
        (0.25 / trials as f64 / (slope * slope) + resolution).sqrt()
    } else {
        SLOPE_HALF_WIDTH
    };
    Ok(ThresholdEstimate {
        kind,
        size,
        p_th_hat: p_hat,
        stderr,
        trials,
    })
}

/// One row of a connectivity curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConnectivityCurve {
    pub points: Vec<CurvePoint>,
}

/// Node pairs sharing one abscissa value.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBucket {
    pub x: f64,
    pub pairs: Vec<(NodeId, NodeId)>,
}

/// Probability that the pairs of each bucket are connected.
///
/// Each trial contributes the fraction of the bucket's pairs that are
/// connected; the estimate is the mean over trials and the error is the
/// standard error of that mean, which is the binomial error (up to the
/// `n/(n − 1)` correction) for single-pair buckets.
pub fn two_point(
    net: &Network,
    probs: &OpenProbability,
    buckets: &[PairBucket],
    trials: usize,
    seed: u64,
) -> Result<ConnectivityCurve, PercolationError> {
    require_trials(trials)?;
    probs.validate(net.edges().len())?;
    for (a, b) in buckets.iter().flat_map(|bucket| &bucket.pairs) {
        for node in [a, b] {
            if node.0 >= net.node_count() {
                return Err(NetworkError::NodeOutOfRange {
                    node: *node,
                    nodes: net.node_count(),
                }
                .into());
            }
        }
    }
    let per_trial_fractions: Vec<Vec<f64>> = per_trial(trials, seed, |rng| {
        let s = sample(net, probs, rng).expect("validated");
        buckets
            .iter()
            .map(|bucket| {
                let hits = bucket.pairs.iter().filter(|(a, b)| connected(&s, *a, *b)).count();
                hits as f64 / bucket.pairs.len().max(1) as f64
            })
            .collect()
    });
    let points = buckets
        .iter()
        .enumerate()
        .map(|(k, bucket)| {
            let values: Vec<f64> = per_trial_fractions.iter().map(|row| row[k]).collect();
            let est = Estimate::from_values(&values);
            CurvePoint {
                x: bucket.x,
                p_hat: est.mean,
                stderr: est.stderr,
                trials,
            }
        })
        .collect();
    Ok(ConnectivityCurve { points })
}

/// Pairs separated by `d` cells along axis 0, one pair per source cell, for
/// every requested `d`. `x` is the hop distance of the pair, measured on the
/// first source (lattices are vertex-transitive on each sublattice).
pub fn axis_pairs(
    net: &Network,
    displacements: &[usize],
    site: crate::network::Sublattice,
) -> Result<Vec<PairBucket>, PercolationError> {
    let spec = *net.spec().ok_or(PercolationError::NoGeometry)?;
    let l = spec.size as i64;
    let rows = if spec.kind == LatticeKind::Chain { 1 } else { l };
    let mut buckets = Vec::with_capacity(displacements.len());
    for &d in displacements {
        let d = d as i64;
        let mut pairs = Vec::new();
        for j in 0..rows {
            for i in 0..l {
                if let (Some(a), Some(b)) = (net.node_at(i, j, site), net.node_at(i + d, j, site)) {
                    pairs.push((a, b));
                }
            }
        }
        let x = match pairs.first() {
            Some(&(a, b)) => net.graph_distance(a, b).map_or(f64::INFINITY, |h| h as f64),
            None => continue,
        };
        buckets.push(PairBucket { x, pairs });
    }
    Ok(buckets)
}

/// Least-squares fit of `ln p = ln A − x/ξ`, weighted by `(p/σ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub correlation_length: f64,
    /// Weighted RMS of the residuals in units of the point errors.
    pub residual: f64,
}

impl ExponentialFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.amplitude * (-x / self.correlation_length).exp()
    }
}

/// Fits the points with `p_hat > 0`; needs at least two of them.
pub fn fit_exponential(points: &[CurvePoint]) -> Option<ExponentialFit> {
    let usable: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|pt| pt.p_hat > 0.0 && pt.stderr > 0.0)
        .map(|pt| {
            let sigma_log = pt.stderr / pt.p_hat;
            (pt.x, pt.p_hat.ln(), 1.0 / (sigma_log * sigma_log))
        })
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let sw: f64 = usable.iter().map(|u| u.2).sum();
    let sx: f64 = usable.iter().map(|u| u.2 * u.0).sum();
    let sy: f64 = usable.iter().map(|u| u.2 * u.1).sum();
    let sxx: f64 = usable.iter().map(|u| u.2 * u.0 * u.0).sum();
    let sxy: f64 = usable.iter().map(|u| u.2 * u.0 * u.1).sum();
    let det = sw * sxx - sx * sx;
    if det <= 0.0 {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let chi2: f64 = usable
        .iter()
        .map(|(x, y, w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    Some(ExponentialFit {
        amplitude: intercept.exp(),
        correlation_length: -1.0 / slope,
        residual: (chi2 / usable.len() as f64).sqrt(),
    })
}
