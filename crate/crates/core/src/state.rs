//! Schmidt-coefficient algebra for pure bipartite bond states.
//!
//! A bond `|φ⟩ = Σ √λ_i |ii⟩` is represented only by its Schmidt
//! coefficients; local unitaries are quotiented out. Measurements are
//! represented by the distribution of post-measurement states they produce.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total weight of a stored vector or distribution.
pub const NORM_TOL: f64 = 1e-12;

/// Inputs whose total weight is within this distance of 1 are renormalized.
pub const RENORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("schmidt vector must have at least one coefficient")]
    Empty,
    #[error("coefficient {index} is not a finite non-negative number: {value}")]
    InvalidCoefficient { index: usize, value: f64 },
    #[error("coefficients sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("coefficients are not sorted in descending order")]
    Unsorted,
    #[error("expected a state of dimension at most {max}, got {got}")]
    Dimension { max: usize, got: usize },
    #[error("invalid outcome probability {0}")]
    InvalidProbability(f64),
    #[error("outcome probabilities sum to {sum}, expected 1")]
    ProbabilitiesNotNormalized { sum: f64 },
    #[error("a chain needs at least one bond")]
    EmptyChain,
}

/// Descending, normalized Schmidt coefficients `λ_1 ≥ … ≥ λ_d ≥ 0`.
///
/// `d = 1` is a product state. Zero coefficients are kept, so `(1, 0)` is a
/// two-qubit product state distinct from `(1)` only in its dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SchmidtVector {
    coeffs: Vec<f64>,
}

impl SchmidtVector {
    /// Builds a vector from arbitrary-order weights.
    ///
    /// The weights are stably sorted in descending order. A total weight
    /// within [`RENORM_TOL`] of 1 is renormalized; anything further away is
    /// rejected.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self, StateError> {
        check_entries(&coeffs)?;
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > RENORM_TOL {
            return Err(StateError::NotNormalized { sum });
        }
        if sum != 1.0 {
            coeffs.iter_mut().for_each(|c| *c /= sum);
        }
        coeffs.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { coeffs })
    }

    /// Like [`SchmidtVector::new`], but rejects input that is not already in
    /// descending order or whose weight is off by more than [`NORM_TOL`].
    pub fn from_sorted(coeffs: Vec<f64>) -> Result<Self, StateError> {
        check_entries(&coeffs)?;
        if coeffs.windows(2).any(|w| w[0] < w[1]) {
            return Err(StateError::Unsorted);
        }
        let sum: f64 = coeffs.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized { sum });
        }
        Ok(Self { coeffs })
    }

    /// Two-qubit state `(λ_1, 1 − λ_1)`, in either order.
    pub fn qubit(lambda1: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&lambda1) {
            return Err(StateError::InvalidCoefficient {
                index: 0,
                value: lambda1,
            });
        }
        Self::new(vec![lambda1, 1.0 - lambda1])
    }

    /// `(1/2, 1/2)`.
    pub fn bell() -> Self {
        Self { coeffs: vec![0.5, 0.5] }
    }

    /// The one-dimensional product state `(1)`.
    pub fn product() -> Self {
        Self { coeffs: vec![1.0] }
    }

    /// Divides non-negative weights by their positive total and sorts.
    fn from_weights(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        weights.sort_by(|a, b| b.total_cmp(a));
        Self { coeffs: weights }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest Schmidt coefficient.
    pub fn lambda1(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_qubit(&self) -> bool {
        self.dim() <= 2
    }

    /// Coefficients as a two-entry array, padding product states with a zero.
    fn qubit_pair(&self) -> Result<(f64, f64), StateError> {
        match self.coeffs.as_slice() {
            [a] => Ok((*a, 0.0)),
            [a, b] => Ok((*a, *b)),
            _ => Err(StateError::Dimension {
                max: 2,
                got: self.dim(),
            }),
        }
    }
}

impl TryFrom<Vec<f64>> for SchmidtVector {
    type Error = StateError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(coeffs)
    }
}

impl From<SchmidtVector> for Vec<f64> {
    fn from(s: SchmidtVector) -> Self {
        s.coeffs
    }
}

fn check_entries(coeffs: &[f64]) -> Result<(), StateError> {
    if coeffs.is_empty() {
        return Err(StateError::Empty);
    }
    if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite() || **c < 0.0) {
        return Err(StateError::InvalidCoefficient { index, value });
    }
    Ok(())
}

/// One measurement outcome: its probability and the resulting bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub prob: f64,
    pub state: SchmidtVector,
}

/// Finite distribution over post-measurement bond states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    outcomes: Vec<Outcome>,
}

impl OutcomeDistribution {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self, StateError> {
        if let Some(o) = outcomes.iter().find(|o| !o.prob.is_finite() || o.prob < 0.0) {
            return Err(StateError::InvalidProbability(o.prob));
        }
        let sum: f64 = outcomes.iter().map(|o| o.prob).sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(StateError::ProbabilitiesNotNormalized { sum });
        }
        Ok(Self { outcomes })
    }

    /// A distribution with a single certain outcome.
    pub fn certain(state: SchmidtVector) -> Self {
        Self {
            outcomes: vec![Outcome { prob: 1.0, state }],
        }
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// Inverse-CDF selection over the listed order for a uniform `u ∈ [0, 1)`.
    pub fn select(&self, u: f64) -> &SchmidtVector {
        let mut cumulative = 0.0;
        for o in &self.outcomes {
            cumulative += o.prob;
            if u < cumulative {
                return &o.state;
            }
        }
        // Rounding can leave the total a hair below u.
        &self
            .outcomes
            .iter()
            .rev()
            .find(|o| o.prob > 0.0)
            .unwrap_or(&self.outcomes[self.outcomes.len() - 1])
            .state
    }
}

/// Singlet conversion probability `min(1, 2(1 − λ_1))`.
pub fn scp(s: &SchmidtVector) -> f64 {
    (2.0 * (1.0 - s.lambda1())).clamp(0.0, 1.0)
}

/// Concurrence `2√(λ_1 λ_2)` of a state with at most two coefficients.
pub fn concurrence(s: &SchmidtVector) -> Result<f64, StateError> {
    let (a, b) = s.qubit_pair()?;
    Ok((2.0 * (a * b).sqrt()).min(1.0))
}

/// Schmidt coefficients of `|a⟩ ⊗ |b⟩`, viewed as one bipartite bond.
pub fn tensor(a: &SchmidtVector, b: &SchmidtVector) -> SchmidtVector {
    let mut coeffs = Vec::with_capacity(a.dim() * b.dim());
    for x in a.coeffs() {
        for y in b.coeffs() {
            coeffs.push(x * y);
        }
    }
    coeffs.sort_by(|p, q| q.total_cmp(p));
    SchmidtVector { coeffs }
}

/// Bell-basis measurement at a repeater holding one half of `a` and one
/// half of `b`, both expressed in their Schmidt bases.
///
/// With `a = (λ1, λ2)` and `b = (μ1, μ2)`, two outcomes occur with
/// probability `(λ1μ1 + λ2μ2)/2` each and leave `∝ (λ1μ1, λ2μ2)`; the other
/// two occur with probability `(λ1μ2 + λ2μ1)/2` and leave `∝ (λ1μ2, λ2μ1)`.
/// A zero-probability outcome is kept with a product-state placeholder.
pub fn bell_swap(a: &SchmidtVector, b: &SchmidtVector) -> Result<OutcomeDistribution, StateError> {
    let (l1, l2) = a.qubit_pair()?;
    let (m1, m2) = b.qubit_pair()?;

    let branch = |x: f64, y: f64| {
        let weight = x + y;
        let state = if weight > 0.0 {
            SchmidtVector::from_weights(vec![x, y])
        } else {
            SchmidtVector { coeffs: vec![1.0, 0.0] }
        };
        Outcome {
            prob: weight / 2.0,
            state,
        }
    };
    let aligned = branch(l1 * m1, l2 * m2);
    let crossed = branch(l1 * m2, l2 * m1);

    Ok(OutcomeDistribution {
        outcomes: vec![aligned.clone(), aligned, crossed.clone(), crossed],
    })
}

/// Expected singlet conversion probability over the outcomes.
pub fn average_scp(dist: &OutcomeDistribution) -> f64 {
    dist.outcomes.iter().map(|o| o.prob * scp(&o.state)).sum()
}

/// Expected concurrence over the outcomes.
pub fn average_concurrence(dist: &OutcomeDistribution) -> Result<f64, StateError> {
    dist.outcomes
        .iter()
        .map(|o| concurrence(&o.state).map(|c| o.prob * c))
        .sum()
}

/// True iff `a` can be converted into `b` deterministically by LOCC, that
/// is `Σ_{i≤k} a_i ≤ Σ_{i≤k} b_i` for every `k` (shorter vector zero-padded).
pub fn majorizes(a: &SchmidtVector, b: &SchmidtVector) -> bool {
    let d = a.dim().max(b.dim());
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..d {
        sa += a.coeffs.get(k).copied().unwrap_or(0.0);
        sb += b.coeffs.get(k).copied().unwrap_or(0.0);
        if sa > sb + NORM_TOL {
            return false;
        }
    }
    true
}

/// Deterministic reduction to a two-qubit state with the same singlet
/// conversion probability: `(λ_1, 1 − λ_1)`, or the Bell state when
/// `λ_1 < 1/2`.
pub fn nielsen_reduce(s: &SchmidtVector) -> SchmidtVector {
    let top = s.lambda1().max(0.5);
    SchmidtVector {
        coeffs: vec![top, 1.0 - top],
    }
}

/// Best average concurrence reachable from `s` with rank-2 measurements on
/// one side: `√(p(2 − p))` with `p = scp(s)`.
pub fn rank2_concurrence_bound(s: &SchmidtVector) -> f64 {
    let p = scp(s);
    (p * (2.0 - p)).sqrt()
}

/// Optimal average end-to-end concurrence of a qubit repeater chain,
/// `Π_k 2√(λ_1^(k) λ_2^(k))`.
pub fn chain_concurrence_exact(bonds: &[SchmidtVector]) -> Result<f64, StateError> {
    if bonds.is_empty() {
        return Err(StateError::EmptyChain);
    }
    bonds.iter().map(concurrence).product()
}

/// Average concurrence for left-to-right one-way measurement strategies:
/// `C(first) · Π_j √(p_j (2 − p_j))`.
pub fn oneway_chain_concurrence(first: &SchmidtVector, rest: &[SchmidtVector]) -> Result<f64, StateError> {
    let head = concurrence(first)?;
    Ok(head * rest.iter().map(rank2_concurrence_bound).product::<f64>())
}

/// Draws one post-measurement state.
pub fn sample_outcome<'a, R: Rng + ?Sized>(dist: &'a OutcomeDistribution, rng: &mut R) -> &'a SchmidtVector {
    dist.select(rng.gen::<f64>())
}
