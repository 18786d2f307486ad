//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use entperc::network::{build_lattice, Edge, LatticeKind, LatticeSpec, Network, NodeId};
use entperc::percolation::{
    connected, draw_weights, per_trial, sample, sample_with_weights, spans, trial_rng, Estimate, OpenProbability,
};
use entperc::protocols::{chain_swap, honeycomb_demo, square2x2, square2x2_cep_exact, square2x2_swap_exact, strategy};
use entperc::state::{
    average_scp, bell_swap, concurrence, rank2_concurrence_bound, sample_outcome, scp, tensor, SchmidtVector,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SIGMAS: f64 = 4.0;
const EXACT: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_qubits(seed: u64, n: usize) -> Vec<SchmidtVector> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| SchmidtVector::qubit(rng.gen_range(0.5..=1.0)).unwrap())
        .collect()
}

fn entperc(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_entperc"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "entperc {} exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn thresholds_table() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("thresholds.csv");
    entperc(&[
        "thresholds",
        "--L",
        "64",
        "--trials",
        "2000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ])?;
    let csv = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    let mut ok = true;
    let mut seen = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (kind, p_hat): (&str, f64) = (cols[0], cols[2].parse().map_err(|_| line.to_string())?);
        let target = match kind {
            "square" => 0.500,
            "triangular" => 0.347,
            "honeycomb" => 0.653,
            other => return Err(format!("unexpected kind {other}")),
        };
        seen += 1;
        ok &= (p_hat - target).abs() <= 0.015;
        details.push(format!("{kind} {p_hat:.4} (target {target})"));
    }
    let msg = details.join(", ");
    ensure(ok && seen == 3, msg.clone())?;
    Ok(msg)
}

fn one_repeater_optimality() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in random_qubits(2, 1000) {
        let lambda2 = s.coeffs()[1];
        worst = worst.max((average_scp(&bell_swap(&s, &s).unwrap()) - 2.0 * lambda2).abs());
    }
    ensure(worst <= EXACT, format!("max |<scp> - 2 lambda2| = {worst:e}"))?;
    let mut details = vec![format!("exact max error {worst:.1e}")];
    for l1 in [0.6, 0.8, 0.95] {
        let s = SchmidtVector::qubit(l1).unwrap();
        let dist = bell_swap(&s, &s).unwrap();
        let values = per_trial(100_000, 20 + (l1 * 100.0) as u64, |rng| scp(sample_outcome(&dist, rng)));
        let est = Estimate::from_values(&values);
        let z = est.sigmas_from(2.0 * (1.0 - l1));
        ensure(
            z <= SIGMAS,
            format!("lambda1 {l1}: MC {} is {z:.2} sigma off", est.mean),
        )?;
        details.push(format!("lambda1 {l1}: {z:.2} sigma"));
    }
    Ok(details.join(", "))
}

fn chain_decay() -> Outcome {
    let bond = SchmidtVector::qubit(0.8).unwrap();
    let mut worst_z: f64 = 0.0;
    for n in 1..=10 {
        let r = chain_swap(n, &bond, 100_000, 300 + n as u64).map_err(|e| e.to_string())?;
        let row = r.find(strategy::SWAP, "concurrence").ok_or("missing concurrence row")?;
        let want = 0.8f64.powi(n as i32 + 1);
        let exact = row.exact.ok_or("missing closed form")?;
        ensure(
            (exact - want).abs() <= EXACT,
            format!("N = {n}: closed form {exact} vs {want}"),
        )?;
        let z = row.estimate().sigmas_from(want);
        ensure(
            z <= SIGMAS,
            format!("N = {n}: MC {} is {z:.2} sigma from {want}", row.value),
        )?;
        worst_z = worst_z.max(z);
    }
    Ok(format!("N = 1..10, worst deviation {worst_z:.2} sigma"))
}

fn rank2_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in random_qubits(4, 1000) {
        worst = worst.max((rank2_concurrence_bound(&s) - concurrence(&s).unwrap()).abs());
    }
    ensure(worst <= EXACT, format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} over 1000 states"))
}

fn square_two_by_two() -> Outcome {
    let r = square2x2(&SchmidtVector::qubit(0.8).unwrap(), 100_000, 5).map_err(|e| e.to_string())?;
    let mut details = Vec::new();
    for (name, want) in [(strategy::CEP, 0.2944), (strategy::SWAP, 0.64)] {
        let row = r.find(name, "connect_prob").ok_or("missing row")?;
        let z = row.estimate().sigmas_from(want);
        ensure(
            z <= SIGMAS,
            format!("{name}: {} is {z:.2} sigma from {want}", row.value),
        )?;
        details.push(format!("{name} {:.4} ({z:.2} sigma)", row.value));
    }
    for k in 1..100 {
        let p = k as f64 / 100.0;
        ensure(
            square2x2_swap_exact(p) > square2x2_cep_exact(p),
            format!("swap does not dominate at p_ok = {p}"),
        )?;
    }
    ensure(
        square2x2_swap_exact(0.0) == square2x2_cep_exact(0.0) && square2x2_swap_exact(1.0) == square2x2_cep_exact(1.0),
        "endpoints differ",
    )?;
    details.push("swap > cep on the interior of the 101-point grid".into());
    Ok(details.join(", "))
}

fn honeycomb() -> Outcome {
    let r = honeycomb_demo(0.823, 32, 2000, 12).map_err(|e| e.to_string())?;
    let plain = r.find(strategy::CEP, "spanning_freq").ok_or("missing cep row")?;
    let swapped = r
        .find(strategy::SWAP_CEP, "spanning_freq")
        .ok_or("missing swap-cep row")?;
    let sigma = (plain.stderr.powi(2) + swapped.stderr.powi(2)).sqrt();
    let gap = (swapped.value - plain.value) / sigma;
    let (p_cep, p_swap) = (plain.p_edge.ok_or("no p_edge")?, swapped.p_edge.ok_or("no p_edge")?);
    let summary = format!(
        "cep {:.4} vs swap-cep {:.4} ({gap:.1} sigma), p_edge {p_cep:.4} / {p_swap:.4}",
        plain.value, swapped.value
    );
    ensure(gap >= 5.0, summary.clone())?;
    ensure((p_cep - 0.6453).abs() < 5e-5 && p_cep < 0.6527, summary.clone())?;
    ensure((p_swap - 0.354).abs() < 5e-4 && p_swap > 0.3473, summary.clone())?;

    let critical = (0.5 + (std::f64::consts::PI / 18.0).sin()).sqrt();
    let ill = honeycomb_demo(critical, 32, 2000, 12).map_err(|e| e.to_string())?;
    let (a, b) = (
        ill.find(strategy::CEP, "spanning_freq").ok_or("missing row")?,
        ill.find(strategy::SWAP_CEP, "spanning_freq").ok_or("missing row")?,
    );
    Ok(format!(
        "{summary}; at lambda1 = {critical:.5} (no threshold): cep {:.4}, swap-cep {:.4}",
        a.value, b.value
    ))
}

fn tensor_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in random_qubits(7, 1000) {
        let l1 = s.lambda1();
        let want = (2.0 * (1.0 - l1 * l1)).min(1.0);
        worst = worst.max((scp(&tensor(&s, &s)) - want).abs());
    }
    ensure(worst <= EXACT, format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} over 1000 states"))
}

fn bfs_labels(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut label = vec![usize::MAX; n];
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if label[y] == usize::MAX {
                    label[y] = start;
                    queue.push_back(y);
                }
            }
        }
    }
    label
}

fn oracle_equivalence() -> Outcome {
    let bell = SchmidtVector::bell();
    for g in 0..200u64 {
        let mut rng = trial_rng(8, g);
        let n = rng.gen_range(1..=50);
        let density: f64 = rng.gen_range(0.01..0.25);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < density {
                    edges.push(Edge::new(NodeId(u), NodeId(v), vec![bell.clone()]));
                }
            }
        }
        let net = Network::custom(n, edges).map_err(|e| e.to_string())?;
        let s = sample(&net, &OpenProbability::Uniform(0.5), &mut rng).map_err(|e| e.to_string())?;
        let open: Vec<(usize, usize)> = net
            .edges()
            .iter()
            .zip(&s.open)
            .filter(|(_, o)| **o)
            .map(|(e, _)| (e.u.0, e.v.0))
            .collect();
        let labels = bfs_labels(n, &open);
        for a in 0..n {
            for b in 0..n {
                ensure(
                    connected(&s, NodeId(a), NodeId(b)) == (labels[a] == labels[b]),
                    format!("graph {g}: nodes {a}, {b} disagree"),
                )?;
            }
        }
    }

    let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
    let mut checked = 0;
    for kind in [LatticeKind::Square, LatticeKind::Triangular, LatticeKind::Honeycomb] {
        let net = build_lattice(&LatticeSpec::periodic(kind, 12), &bell, 1).map_err(|e| e.to_string())?;
        let probe = [(0, 1), (0, net.node_count() / 2), (5, net.node_count() - 1)];
        for t in 0..50 {
            let weights = draw_weights(net.edges().len(), &mut trial_rng(9, t));
            let mut prev: Option<entperc::percolation::PercolationSample> = None;
            for &p in &grid {
                let s = sample_with_weights(&net, &OpenProbability::Uniform(p), weights.clone())
                    .map_err(|e| e.to_string())?;
                if let Some(lo) = &prev {
                    ensure(
                        lo.open.iter().zip(&s.open).all(|(a, b)| !a || *b),
                        "open sets not nested",
                    )?;
                    for axis in 0..2 {
                        let (was, now) = (spans(&net, lo, axis).unwrap(), spans(&net, &s, axis).unwrap());
                        ensure(!was || now, format!("{kind}: spanning lost at p = {p}"))?;
                    }
                    for &(a, b) in &probe {
                        ensure(
                            !connected(lo, NodeId(a), NodeId(b)) || connected(&s, NodeId(a), NodeId(b)),
                            format!("{kind}: connection lost at p = {p}"),
                        )?;
                    }
                    ensure(s.largest_cluster() >= lo.largest_cluster(), "largest cluster shrank")?;
                }
                checked += 1;
                prev = Some(s);
            }
        }
    }
    Ok(format!(
        "200 random graphs agree with BFS; {checked} coupled samples monotone"
    ))
}

fn comparable_files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let bytes = if name.ends_with(".manifest.json") {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
            let obj = v.as_object_mut().ok_or("manifest is not an object")?;
            for volatile in ["timestamp", "threads", "outputs"] {
                obj.remove(volatile);
            }
            serde_json::to_vec(&v).unwrap()
        } else {
            bytes
        };
        files.push((name, bytes));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 8] = [
        &["scp", "--coeffs", "0.6,0.3,0.1"],
        &["swap", "--lambda1", "0.8", "--trials", "20000"],
        &["chain", "--lambda1", "0.8", "--N", "3", "--trials", "20000"],
        &["thresholds", "--kind", "square", "--L", "16", "--trials", "200"],
        &["square2x2", "--lambda1", "0.8", "--trials", "20000"],
        &["honeycomb-demo", "--lambda1", "0.823", "--L", "8", "--trials", "300"],
        &["honeycomb-demo", "--L", "8", "--trials", "300", "--format", "json"],
        &[
            "two-point",
            "--kind",
            "triangular",
            "--L",
            "16",
            "--p",
            "0.3",
            "--trials",
            "300",
        ],
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let dir = tmp.path().join(format!("run{k}-t{threads}"));
            std::fs::create_dir(&dir).map_err(|e| e.to_string())?;
            let out = dir.join("result.out");
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--seed", "99", "--threads", threads, "--out", out.to_str().unwrap()]);
            let dump = dir.join("network.json");
            if !matches!(args[0], "scp" | "swap") {
                full.extend(["--dump-network", dump.to_str().unwrap()]);
            }
            entperc(&full)?;
            outputs.push(comparable_files(&dir)?);
        }
        ensure(
            outputs[0] == outputs[1],
            format!("`{}` differs between 1 and 3 threads", args.join(" ")),
        )?;
    }
    Ok(format!(
        "{} subcommand runs identical under 1 and 3 threads",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("bond percolation thresholds at L = 64", thresholds_table),
        ("one-repeater swapping SCP equals 2 lambda2", one_repeater_optimality),
        ("chain concurrence decays as 0.8^(N+1)", chain_decay),
        ("rank-2 bound equals concurrence for qubits", rank2_identity),
        ("2x2 square strategies", square_two_by_two),
        ("honeycomb swap-then-CEP beats CEP", honeycomb),
        ("SCP of a doubled bond", tensor_identity),
        ("union-find oracle and coupled monotonicity", oracle_equivalence),
        ("results independent of thread count", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
