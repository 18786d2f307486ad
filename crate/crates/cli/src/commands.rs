use entperc::network::{build_lattice, Boundary, LatticeKind, LatticeSpec, Network, NodeId, Sublattice};
use entperc::percolation::{
    axis_pairs, estimate_threshold, fit_exponential, per_trial, two_point, CurvePoint, Estimate, ExponentialFit,
    OpenProbability, ThresholdEstimate,
};
use entperc::protocols::{cep, cep_probabilities, chain_swap, honeycomb_demo, square2x2, square2x2_network, strategy};
use entperc::report::{curve_csv, thresholds_csv, ProtocolReport, ReportEstimate};
use entperc::state::{
    average_concurrence, average_scp, bell_swap, concurrence, nielsen_reduce, rank2_concurrence_bound, sample_outcome,
    scp, SchmidtVector,
};
use serde::{Deserialize, Serialize};

use crate::args::{
    BondArgs, BoundaryArg, ChainArgs, Command, Format, HoneycombArgs, Kind2d, Square2x2Args, SwapArgs, ThresholdArgs,
    TwoPointArgs,
};
use crate::error::CliError;

/// Rendered results of one command.
pub struct Output {
    pub main: String,
    /// Curve table written next to the main CSV file.
    pub curves: Option<String>,
    pub network: Option<Network>,
}

/// Largest coefficient of the honeycomb bond at which doubled-edge CEP sits
/// exactly at the honeycomb threshold.
pub fn critical_lambda1() -> f64 {
    (0.5 + (std::f64::consts::PI / 18.0).sin()).sqrt()
}

impl BondArgs {
    pub fn state(&self) -> Result<Option<SchmidtVector>, CliError> {
        let state = match (&self.coeffs, self.lambda1) {
            (Some(c), _) => Some(SchmidtVector::new(c.clone())?),
            (None, Some(l1)) => Some(qubit(l1)?),
            (None, None) => None,
        };
        Ok(state)
    }

    pub fn require(&self) -> Result<SchmidtVector, CliError> {
        self.state()?
            .ok_or_else(|| CliError::Invalid("a bond is required: pass --coeffs or --lambda1".into()))
    }
}

fn qubit(lambda1: f64) -> Result<SchmidtVector, CliError> {
    if !(0.5..=1.0).contains(&lambda1) {
        return Err(CliError::Invalid(format!("--lambda1 {lambda1} is outside [0.5, 1]")));
    }
    Ok(SchmidtVector::qubit(lambda1)?)
}

impl From<Kind2d> for LatticeKind {
    fn from(k: Kind2d) -> Self {
        match k {
            Kind2d::Square => LatticeKind::Square,
            Kind2d::Triangular => LatticeKind::Triangular,
            Kind2d::Honeycomb => LatticeKind::Honeycomb,
        }
    }
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Open => Boundary::Open,
            BoundaryArg::Periodic => Boundary::Periodic,
        }
    }
}

/// Rejects `--dump-network` for commands that do not use a single network,
/// before any work is done.
pub fn check_dump(command: &Command) -> Result<(), CliError> {
    let ok = match command {
        Command::Scp(_) | Command::Swap(_) => false,
        Command::Thresholds(a) => a.kind.len() == 1,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Invalid(
            "--dump-network needs a command that uses one network (thresholds: exactly one --kind)".into(),
        ))
    }
}

pub fn run(command: &Command, format: Format, seed: u64) -> Result<Output, CliError> {
    match command {
        Command::Scp(a) => scp_cmd(a, format),
        Command::Swap(a) => swap_cmd(a, format, seed),
        Command::Chain(a) => chain_cmd(a, format, seed),
        Command::Thresholds(a) => thresholds_cmd(a, format, seed),
        Command::Square2x2(a) => square_cmd(a, format, seed),
        Command::HoneycombDemo(a) => honeycomb_cmd(a, format, seed),
        Command::TwoPoint(a) => two_point_cmd(a, format, seed),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    s
}

fn report_output(report: &ProtocolReport, format: Format, network: Option<Network>) -> Output {
    match format {
        Format::Json => Output {
            main: to_json(report),
            curves: None,
            network,
        },
        Format::Csv => Output {
            main: report.estimates_csv(),
            curves: report.curves_csv(),
            network,
        },
    }
}

/// Single-bond quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScpResult {
    pub coeffs: Vec<f64>,
    pub lambda1: f64,
    pub scp: f64,
    /// Only defined for qubit bonds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    pub rank2_bound: f64,
    /// Largest coefficient of the qubit bond with the same SCP.
    pub reduced_lambda1: f64,
}

fn scp_cmd(a: &BondArgs, format: Format) -> Result<Output, CliError> {
    let s = a.require()?;
    let r = ScpResult {
        coeffs: s.coeffs().to_vec(),
        lambda1: s.lambda1(),
        scp: scp(&s),
        concurrence: if s.is_qubit() { Some(concurrence(&s)?) } else { None },
        rank2_bound: rank2_concurrence_bound(&s),
        reduced_lambda1: nielsen_reduce(&s).lambda1(),
    };
    let main = match format {
        Format::Json => to_json(&r),
        Format::Csv => {
            let coeffs: Vec<String> = r.coeffs.iter().map(f64::to_string).collect();
            format!(
                "coeffs,lambda1,scp,concurrence,rank2_bound,reduced_lambda1\n{},{},{},{},{},{}\n",
                coeffs.join(";"),
                r.lambda1,
                r.scp,
                r.concurrence.map(|c| c.to_string()).unwrap_or_default(),
                r.rank2_bound,
                r.reduced_lambda1,
            )
        }
    };
    Ok(Output {
        main,
        curves: None,
        network: None,
    })
}

fn swap_cmd(a: &SwapArgs, format: Format, seed: u64) -> Result<Output, CliError> {
    crate::require_trials(a.trials)?;
    let first = a.bond.require()?;
    let other = BondArgs {
        coeffs: a.other_coeffs.clone(),
        lambda1: a.other_lambda1,
    };
    let second = other.state()?.unwrap_or_else(|| first.clone());
    let dist = bell_swap(&first, &second)?;

    eprintln!("swap: {} trials", a.trials);
    let draws = per_trial(a.trials, seed, |rng| {
        let s = sample_outcome(&dist, rng);
        (scp(s), concurrence(s).expect("swap outcomes are qubits"))
    });
    let scps: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let concurrences: Vec<f64> = draws.iter().map(|d| d.1).collect();

    let mut report = ProtocolReport::new("swap", a.trials, seed);
    report.lambda1 = Some(first.lambda1());
    report.coeffs = Some(first.coeffs().to_vec());
    report.estimates.push(
        ReportEstimate::new(strategy::SWAP, "scp", Estimate::from_values(&scps))
            .with_exact(average_scp(&dist), if first == second { "optimal" } else { "achieved" }),
    );
    report.estimates.push(
        ReportEstimate::new(strategy::SWAP, "concurrence", Estimate::from_values(&concurrences))
            .with_exact(average_concurrence(&dist)?, "optimal"),
    );
    report.constants.insert("other_lambda1".into(), second.lambda1());
    for (k, o) in dist.outcomes().iter().enumerate() {
        report.constants.insert(format!("outcome{k}_prob"), o.prob);
        report
            .constants
            .insert(format!("outcome{k}_lambda1"), o.state.lambda1());
    }
    Ok(report_output(&report, format, None))
}

fn chain_cmd(a: &ChainArgs, format: Format, seed: u64) -> Result<Output, CliError> {
    crate::require_trials(a.trials)?;
    if a.repeaters == 0 {
        return Err(CliError::Invalid("--N must be at least 1".into()));
    }
    let bond = a.bond.require()?;
    let mut report = ProtocolReport::new("chain", a.trials, seed);
    report.lambda1 = Some(bond.lambda1());
    report.coeffs = Some(bond.coeffs().to_vec());
    report.repeaters = Some(a.repeaters);
    let mut network = None;
    for n in 1..=a.repeaters {
        eprintln!("chain: N = {n}");
        let net = build_lattice(&LatticeSpec::chain(n + 2), &bond, 1)?;
        let classical = cep(&net, NodeId(0), NodeId(n + 1), a.trials, seed)?;
        report
            .estimates
            .extend(classical.estimates.into_iter().map(|e| e.with_repeaters(n)));
        report.estimates.extend(chain_swap(n, &bond, a.trials, seed)?.estimates);
        network = Some(net);
    }
    if !bond.is_qubit() {
        report
            .notes
            .push("swapping uses the qubit bond with the same conversion probability".into());
    }
    Ok(report_output(&report, format, network))
}

/// Threshold estimates of several lattices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdsResult {
    pub seed: u64,
    pub tol: f64,
    pub thresholds: Vec<ThresholdEstimate>,
}

fn thresholds_cmd(a: &ThresholdArgs, format: Format, seed: u64) -> Result<Output, CliError> {
    crate::require_trials(a.trials)?;
    let kinds = if a.kind.is_empty() {
        vec![Kind2d::Square, Kind2d::Triangular, Kind2d::Honeycomb]
    } else {
        a.kind.clone()
    };
    let mut thresholds = Vec::with_capacity(kinds.len());
    for &k in &kinds {
        eprintln!("thresholds: {} L = {}", LatticeKind::from(k), a.size);
        thresholds.push(estimate_threshold(k.into(), a.size, a.trials, a.tol, seed)?);
    }
    let network = match kinds.as_slice() {
        [k] => Some(build_lattice(
            &LatticeSpec::periodic((*k).into(), a.size),
            &SchmidtVector::bell(),
            1,
        )?),
        _ => None,
    };
    let main = match format {
        Format::Json => to_json(&ThresholdsResult {
            seed,
            tol: a.tol,
            thresholds,
        }),
        Format::Csv => thresholds_csv(&thresholds),
    };
    Ok(Output {
        main,
        curves: None,
        network,
    })
}

fn square_cmd(a: &Square2x2Args, format: Format, seed: u64) -> Result<Output, CliError> {
    let bond = a.bond.require()?;
    eprintln!("square2x2: {} trials", a.trials);
    let report = square2x2(&bond, a.trials, seed)?;
    Ok(report_output(&report, format, Some(square2x2_network(&bond)?)))
}

fn honeycomb_cmd(a: &HoneycombArgs, format: Format, seed: u64) -> Result<Output, CliError> {
    let l1 = a.lambda1.unwrap_or_else(critical_lambda1);
    eprintln!("honeycomb-demo: lambda1 = {l1}, L = {}", a.size);
    let report = honeycomb_demo(l1, a.size, a.trials, seed)?;
    let network = build_lattice(
        &LatticeSpec::periodic(LatticeKind::Honeycomb, a.size),
        &SchmidtVector::qubit(l1)?,
        2,
    )?;
    Ok(report_output(&report, format, Some(network)))
}

/// Connection probability against hop distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointResult {
    pub kind: LatticeKind,
    #[serde(rename = "L")]
    pub size: usize,
    pub boundary: Boundary,
    /// Common open probability of the edges.
    pub p_edge: f64,
    pub trials: usize,
    pub seed: u64,
    pub points: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<ExponentialFit>,
}

fn two_point_cmd(a: &TwoPointArgs, format: Format, seed: u64) -> Result<Output, CliError> {
    crate::require_trials(a.trials)?;
    if a.copies == 0 {
        return Err(CliError::Invalid("--copies must be at least 1".into()));
    }
    let spec = LatticeSpec::new(a.kind.into(), a.size, a.boundary.into());
    let (net, probs) = match a.p {
        Some(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Invalid(format!("--p {p} is outside [0, 1]")));
            }
            let net = build_lattice(&spec, &SchmidtVector::bell(), a.copies)?;
            (net, OpenProbability::Uniform(p))
        }
        None => {
            let net = build_lattice(&spec, &a.bond.require()?, a.copies)?;
            let probs = cep_probabilities(&net);
            (net, probs)
        }
    };
    let distances = a.distances.clone().unwrap_or_else(|| (1..=a.size / 2).collect());
    if distances.is_empty() || distances.contains(&0) {
        return Err(CliError::Invalid("--distances must be positive".into()));
    }
    let site = if spec.kind == LatticeKind::Honeycomb {
        Sublattice::A
    } else {
        Sublattice::None
    };
    eprintln!("two-point: {} L = {}, {} distances", spec.kind, a.size, distances.len());
    let buckets = axis_pairs(&net, &distances, site)?;
    let curve = two_point(&net, &probs, &buckets, a.trials, seed)?;
    let main = match format {
        Format::Csv => curve_csv(&curve),
        Format::Json => to_json(&TwoPointResult {
            kind: spec.kind,
            size: a.size,
            boundary: spec.boundary,
            p_edge: probs.common_value().unwrap_or(f64::NAN),
            trials: a.trials,
            seed,
            fit: fit_exponential(&curve.points)
                .filter(|f| f.correlation_length.is_finite() && f.correlation_length > 0.0),
            points: curve.points,
        }),
    };
    Ok(Output {
        main,
        curves: None,
        network: Some(net),
    })
}
