//! Chain and 2D lattice networks whose edges carry pure bond states.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{scp, SchmidtVector, StateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Chain,
    Square,
    Triangular,
    Honeycomb,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Chain => "chain",
            LatticeKind::Square => "square",
            LatticeKind::Triangular => "triangular",
            LatticeKind::Honeycomb => "honeycomb",
        }
    }

    /// Exact bond percolation threshold for the 2D kinds.
    pub fn bond_threshold(self) -> Option<f64> {
        let s = (std::f64::consts::PI / 18.0).sin();
        match self {
            LatticeKind::Chain => None,
            LatticeKind::Square => Some(0.5),
            LatticeKind::Triangular => Some(2.0 * s),
            LatticeKind::Honeycomb => Some(1.0 - 2.0 * s),
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    #[default]
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

/// Lattice geometry.
///
/// Node counts: a chain has `L` nodes, square and triangular lattices `L²`,
/// honeycomb `2L²` (one A and one B site per cell). Chains are open only.
/// Periodic square and triangular lattices need `L ≥ 3` so that no two
/// sites are joined twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    #[serde(rename = "L")]
    pub size: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, size: usize, boundary: Boundary) -> Self {
        Self { kind, size, boundary }
    }

    pub fn periodic(kind: LatticeKind, size: usize) -> Self {
        Self::new(kind, size, Boundary::Periodic)
    }

    pub fn chain(nodes: usize) -> Self {
        Self::new(LatticeKind::Chain, nodes, Boundary::Open)
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.size < 2 {
            return Err(NetworkError::TooSmall(self.size));
        }
        let ok = match (self.kind, self.boundary) {
            (LatticeKind::Chain, Boundary::Periodic) => false,
            (LatticeKind::Square | LatticeKind::Triangular, Boundary::Periodic) => self.size >= 3,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(NetworkError::Unsupported(*self))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub copies: Vec<SchmidtVector>,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId, copies: Vec<SchmidtVector>) -> Self {
        Self { u, v, copies }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("lattice size {0} is too small (need L >= 2)")]
    TooSmall(usize),
    #[error("unsupported lattice: {} with {} boundary and L = {}", .0.kind, .0.boundary, .0.size)]
    Unsupported(LatticeSpec),
    #[error("each edge needs at least one bond copy")]
    NoCopies,
    #[error("node {node} out of range for a network of {nodes} nodes")]
    NodeOutOfRange { node: NodeId, nodes: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) is not part of the declared lattice")]
    NotInLattice(NodeId, NodeId),
    #[error("unknown network kind {0:?}")]
    UnknownKind(String),
    #[error("expected a honeycomb lattice")]
    NotHoneycomb,
    #[error("edge {edge} carries {got} copies, expected {expected}")]
    CopyCount { edge: usize, expected: usize, got: usize },
    #[error("bond states differ across copies or edges")]
    Heterogeneous,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Graph of nodes joined by bond-carrying edges.
///
/// Lattice networks additionally carry integer cell coordinates per node and
/// the unwrapped cell displacement of every edge, which percolation uses to
/// detect clusters that wrap around a periodic boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: Option<LatticeSpec>,
    node_count: usize,
    edges: Vec<Edge>,
    coords: Option<Vec<[f64; 2]>>,
    cells: Option<Vec<[i64; 2]>>,
    shifts: Option<Vec<[i64; 2]>>,
    sublattice: Vec<Sublattice>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Network {
    /// A network without lattice geometry.
    pub fn custom(node_count: usize, edges: Vec<Edge>) -> Result<Self, NetworkError> {
        Self::assemble(
            None,
            node_count,
            edges,
            None,
            None,
            None,
            vec![Sublattice::None; node_count],
        )
    }

    fn assemble(
        spec: Option<LatticeSpec>,
        node_count: usize,
        edges: Vec<Edge>,
        coords: Option<Vec<[f64; 2]>>,
        cells: Option<Vec<[i64; 2]>>,
        shifts: Option<Vec<[i64; 2]>>,
        sublattice: Vec<Sublattice>,
    ) -> Result<Self, NetworkError> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); node_count];
        for (index, e) in edges.iter().enumerate() {
            for node in [e.u, e.v] {
                if node.0 >= node_count {
                    return Err(NetworkError::NodeOutOfRange {
                        node,
                        nodes: node_count,
                    });
                }
            }
            if e.u == e.v {
                return Err(NetworkError::SelfLoop(e.u));
            }
            if e.copies.is_empty() {
                return Err(NetworkError::NoCopies);
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(NetworkError::DuplicateEdge(e.u, e.v));
            }
            adjacency[e.u.0].push((e.v.0, index));
            adjacency[e.v.0].push((e.u.0, index));
        }
        Ok(Self {
            spec,
            node_count,
            edges,
            coords,
            cells,
            shifts,
            sublattice,
            adjacency,
        })
    }

    pub fn spec(&self) -> Option<&LatticeSpec> {
        self.spec.as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    /// Integer lattice cell of each node.
    pub fn cells(&self) -> Option<&[[i64; 2]]> {
        self.cells.as_deref()
    }

    /// Unwrapped cell displacement `cell(v) − cell(u)` of each edge.
    pub fn shifts(&self) -> Option<&[[i64; 2]]> {
        self.shifts.as_deref()
    }

    pub fn sublattice(&self) -> &[Sublattice] {
        &self.sublattice
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    /// `(neighbor, edge index)` pairs incident to `node`, in edge order.
    pub fn incident(&self, node: NodeId) -> &[(usize, usize)] {
        &self.adjacency[node.0]
    }

    /// Node at lattice cell `(i, j)`; for honeycomb lattices, the site of the
    /// requested sublattice.
    pub fn node_at(&self, i: i64, j: i64, site: Sublattice) -> Option<NodeId> {
        let spec = self.spec?;
        let l = spec.size as i64;
        let (i, j) = match spec.boundary {
            Boundary::Periodic => (i.rem_euclid(l), j.rem_euclid(l)),
            Boundary::Open => (i, j),
        };
        let in_range = |x: i64| (0..l).contains(&x);
        match spec.kind {
            LatticeKind::Chain => (j == 0 && in_range(i)).then_some(NodeId(i as usize)),
            LatticeKind::Square | LatticeKind::Triangular => {
                (in_range(i) && in_range(j)).then(|| NodeId((i + j * l) as usize))
            }
            LatticeKind::Honeycomb => {
                let offset = match site {
                    Sublattice::A => 0,
                    Sublattice::B => 1,
                    Sublattice::None => return None,
                };
                (in_range(i) && in_range(j)).then(|| NodeId((2 * (i + j * l) + offset) as usize))
            }
        }
    }

    /// Breadth-first hop distance; `None` if `b` is unreachable from `a`.
    pub fn graph_distance(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.distances_from(a).get(b.0).copied().flatten()
    }

    /// Hop distance from `source` to every node.
    pub fn distances_from(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        if source.0 >= self.node_count {
            return dist;
        }
        dist[source.0] = Some(0);
        let mut queue = VecDeque::from([source.0]);
        while let Some(x) = queue.pop_front() {
            let next = dist[x].map(|d| d + 1);
            for &(y, _) in &self.adjacency[x] {
                if dist[y].is_none() {
                    dist[y] = next;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// The serializable edge-list form of this network.
    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            kind: self
                .spec
                .map_or_else(|| "custom".to_string(), |s| s.kind.name().to_string()),
            size: self.spec.map(|s| s.size),
            boundary: self.spec.map(|s| s.boundary),
            nodes: self.node_count,
            edges: self.edges.iter().map(|e| (e.u.0, e.v.0, e.copies.clone())).collect(),
        }
    }

    /// Rebuilds a network from its document. Lattice documents recover their
    /// geometry from the declared kind; every listed edge must belong to it.
    pub fn from_document(doc: NetworkDocument) -> Result<Self, NetworkError> {
        let edges: Vec<Edge> = doc
            .edges
            .into_iter()
            .map(|(u, v, copies)| Edge::new(NodeId(u), NodeId(v), copies))
            .collect();
        let kind = match doc.kind.as_str() {
            "chain" => LatticeKind::Chain,
            "square" => LatticeKind::Square,
            "triangular" => LatticeKind::Triangular,
            "honeycomb" => LatticeKind::Honeycomb,
            "custom" => return Self::custom(doc.nodes, edges),
            other => return Err(NetworkError::UnknownKind(other.to_string())),
        };
        let spec = LatticeSpec::new(
            kind,
            doc.size.ok_or(NetworkError::TooSmall(0))?,
            doc.boundary.unwrap_or_default(),
        );
        let geometry = build_lattice(&spec, &SchmidtVector::bell(), 1)?;
        if geometry.node_count != doc.nodes {
            return Err(NetworkError::Unsupported(spec));
        }
        let lookup: HashMap<(NodeId, NodeId), [i64; 2]> = geometry
            .edges
            .iter()
            .zip(geometry.shifts.as_deref().unwrap_or_default())
            .flat_map(|(e, s)| [((e.u, e.v), *s), ((e.v, e.u), [-s[0], -s[1]])])
            .collect();
        let shifts = edges
            .iter()
            .map(|e| {
                lookup
                    .get(&(e.u, e.v))
                    .copied()
                    .ok_or(NetworkError::NotInLattice(e.u, e.v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::assemble(
            Some(spec),
            doc.nodes,
            edges,
            geometry.coords,
            geometry.cells,
            Some(shifts),
            geometry.sublattice,
        )
    }
}

/// JSON form `{kind, L, boundary, nodes, edges: [[u, v, [schmidt...]]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub kind: String,
    #[serde(rename = "L")]
    pub size: Option<usize>,
    pub boundary: Option<Boundary>,
    pub nodes: usize,
    pub edges: Vec<(usize, usize, Vec<SchmidtVector>)>,
}

/// Builds a lattice whose every edge carries `copies_per_edge` copies of
/// `bond`. Edge order is deterministic: cells in row-major order, and within
/// a cell the fixed direction list of the lattice kind.
pub fn build_lattice(
    spec: &LatticeSpec,
    bond: &SchmidtVector,
    copies_per_edge: usize,
) -> Result<Network, NetworkError> {
    spec.validate()?;
    if copies_per_edge == 0 {
        return Err(NetworkError::NoCopies);
    }
    let l = spec.size as i64;
    let periodic = spec.boundary == Boundary::Periodic;
    let copies = vec![bond.clone(); copies_per_edge];

    let mut coords = Vec::new();
    let mut cells = Vec::new();
    let mut sublattice = Vec::new();
    let mut edges = Vec::new();
    let mut shifts = Vec::new();

    // Joins cell-local site `from` to the site at `(i + di, j + dj)`.
    let mut link = |from: usize, i: i64, j: i64, di: i64, dj: i64, index: &dyn Fn(i64, i64) -> usize| {
        let (ti, tj) = (i + di, j + dj);
        let inside = (0..l).contains(&ti) && (0..l).contains(&tj);
        if !inside && !periodic {
            return;
        }
        let to = index(ti.rem_euclid(l), tj.rem_euclid(l));
        edges.push(Edge::new(NodeId(from), NodeId(to), copies.clone()));
        shifts.push([di, dj]);
    };

    match spec.kind {
        LatticeKind::Chain => {
            for i in 0..l {
                coords.push([i as f64, 0.0]);
                cells.push([i, 0]);
                sublattice.push(Sublattice::None);
            }
            let index = |i: i64, _: i64| i as usize;
            for i in 0..l - 1 {
                link(i as usize, i, 0, 1, 0, &index);
            }
        }
        LatticeKind::Square | LatticeKind::Triangular => {
            let triangular = spec.kind == LatticeKind::Triangular;
            let half_sqrt3 = 3f64.sqrt() / 2.0;
            for j in 0..l {
                for i in 0..l {
                    coords.push(if triangular {
                        [i as f64 + 0.5 * j as f64, half_sqrt3 * j as f64]
                    } else {
                        [i as f64, j as f64]
                    });
                    cells.push([i, j]);
                    sublattice.push(Sublattice::None);
                }
            }
            let index = |i: i64, j: i64| (i + j * l) as usize;
            for j in 0..l {
                for i in 0..l {
                    let here = index(i, j);
                    link(here, i, j, 1, 0, &index);
                    link(here, i, j, 0, 1, &index);
                    if triangular {
                        link(here, i, j, 1, -1, &index);
                    }
                }
            }
        }
        LatticeKind::Honeycomb => {
            // Brick-wall embedding: A(i, j) at (2i + j, j), B(i, j) one step right.
            for j in 0..l {
                for i in 0..l {
                    let x = (2 * i + j) as f64;
                    coords.push([x, j as f64]);
                    coords.push([x + 1.0, j as f64]);
                    cells.push([i, j]);
                    cells.push([i, j]);
                    sublattice.push(Sublattice::A);
                    sublattice.push(Sublattice::B);
                }
            }
            let b_index = |i: i64, j: i64| (2 * (i + j * l) + 1) as usize;
            for j in 0..l {
                for i in 0..l {
                    let a = (2 * (i + j * l)) as usize;
                    for [di, dj] in HONEYCOMB_A_TO_B {
                        link(a, i, j, di, dj, &b_index);
                    }
                }
            }
        }
    }

    let n = cells.len();
    Network::assemble(
        Some(*spec),
        n,
        edges,
        Some(coords),
        Some(cells),
        Some(shifts),
        sublattice,
    )
}

/// Cell offsets from an A site to its three B neighbors, in the cyclic order
/// used to pair edges for swapping.
const HONEYCOMB_A_TO_B: [[i64; 2]; 3] = [[0, 0], [-1, 0], [0, -1]];

/// Result of swapping at every A site of a doubled-bond honeycomb lattice.
#[derive(Debug, Clone)]
pub struct SwappedLattice {
    /// Triangular lattice on the former B sites; B(i, j) becomes node `i + jL`.
    pub network: Network,
    /// Singlet conversion probability of each new edge, in edge order.
    pub edge_scp: Vec<f64>,
}

/// Turns a honeycomb lattice with two copies of the same qubit bond on every
/// edge into a triangular lattice on the B sublattice.
///
/// Each A site takes its incident edges in the fixed cyclic order
/// `(e1, e2), (e2, e3), (e3, e1)` and performs one entanglement swap per
/// pair, consuming one copy from each edge. Every copy is used exactly once
/// and each swap yields a B–B bond whose conversion probability equals
/// `scp(φ2)`. The new edges carry `φ2` itself, the state with that same
/// conversion probability. On open lattices a boundary A site with only two
/// edges performs a single swap.
pub fn honeycomb_to_triangular(net: &Network) -> Result<SwappedLattice, NetworkError> {
    let spec = match net.spec {
        Some(s) if s.kind == LatticeKind::Honeycomb => s,
        _ => return Err(NetworkError::NotHoneycomb),
    };
    let shifts = net.shifts.as_deref().ok_or(NetworkError::NotHoneycomb)?;
    let cells = net.cells.as_deref().ok_or(NetworkError::NotHoneycomb)?;

    let mut bond: Option<&SchmidtVector> = None;
    for (index, e) in net.edges.iter().enumerate() {
        if e.copies.len() != 2 {
            return Err(NetworkError::CopyCount {
                edge: index,
                expected: 2,
                got: e.copies.len(),
            });
        }
        for c in &e.copies {
            match bond {
                None => bond = Some(c),
                Some(b) if b != c => return Err(NetworkError::Heterogeneous),
                Some(_) => {}
            }
        }
    }
    let bond = bond.ok_or(NetworkError::NotHoneycomb)?.clone();
    if !bond.is_qubit() {
        return Err(StateError::Dimension {
            max: 2,
            got: bond.dim(),
        }
        .into());
    }
    let new_scp = scp(&bond);

    let l = spec.size as i64;
    let b_to_tri = |node: usize| {
        let [i, j] = cells[node];
        NodeId((i + j * l) as usize)
    };

    let mut edges = Vec::with_capacity(net.edges.len());
    let mut new_shifts = Vec::with_capacity(net.edges.len());
    let mut consumed = vec![0usize; net.edges.len()];
    for a in (0..net.node_count).filter(|&x| net.sublattice[x] == Sublattice::A) {
        // Incident edges in direction order, with the displacement A → B.
        let mut spokes: Vec<(usize, usize, [i64; 2])> = Vec::with_capacity(3);
        for dir in HONEYCOMB_A_TO_B {
            let outward = |e: usize| {
                let s = shifts[e];
                if net.edges[e].u.0 == a {
                    s
                } else {
                    [-s[0], -s[1]]
                }
            };
            if let Some(&(b, e)) = net.adjacency[a].iter().find(|&&(_, e)| outward(e) == dir) {
                spokes.push((b, e, dir));
            }
        }
        let pairs: &[(usize, usize)] = match spokes.len() {
            3 => &[(0, 1), (1, 2), (2, 0)],
            2 => &[(0, 1)],
            _ => &[],
        };
        for &(x, y) in pairs {
            let (bx, ex, sx) = spokes[x];
            let (by, ey, sy) = spokes[y];
            consumed[ex] += 1;
            consumed[ey] += 1;
            edges.push(Edge::new(b_to_tri(bx), b_to_tri(by), vec![bond.clone()]));
            new_shifts.push([sy[0] - sx[0], sy[1] - sx[1]]);
        }
    }
    debug_assert!(consumed.iter().all(|&c| c <= 2));

    let tri_spec = LatticeSpec::new(LatticeKind::Triangular, spec.size, spec.boundary);
    let geometry = build_lattice(&tri_spec, &bond, 1)?;
    let edge_scp = vec![new_scp; edges.len()];
    let network = Network::assemble(
        Some(tri_spec),
        geometry.node_count,
        edges,
        geometry.coords,
        geometry.cells,
        Some(new_shifts),
        geometry.sublattice,
    )?;
    Ok(SwappedLattice { network, edge_scp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{average_scp, bell_swap};

    fn bond() -> SchmidtVector {
        SchmidtVector::qubit(0.8).unwrap()
    }

    fn degree_histogram(net: &Network) -> HashMap<usize, usize> {
        let mut h = HashMap::new();
        for x in 0..net.node_count() {
            *h.entry(net.degree(NodeId(x))).or_default() += 1;
        }
        h
    }

    fn handshake(net: &Network) {
        let total: usize = (0..net.node_count()).map(|x| net.degree(NodeId(x))).sum();
        assert_eq!(total, 2 * net.edges().len());
    }

    #[test]
    fn chain_counts() {
        let net = build_lattice(&LatticeSpec::chain(3), &bond(), 1).unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edges().len(), 2);
        handshake(&net);
    }

    #[test]
    fn periodic_lattice_counts() {
        for l in [3usize, 4, 7] {
            let sq = build_lattice(&LatticeSpec::periodic(LatticeKind::Square, l), &bond(), 1).unwrap();
            assert_eq!((sq.node_count(), sq.edges().len()), (l * l, 2 * l * l));
            assert_eq!(degree_histogram(&sq), HashMap::from([(4, l * l)]));
            handshake(&sq);

            let tri = build_lattice(&LatticeSpec::periodic(LatticeKind::Triangular, l), &bond(), 1).unwrap();
            assert_eq!((tri.node_count(), tri.edges().len()), (l * l, 3 * l * l));
            assert_eq!(degree_histogram(&tri), HashMap::from([(6, l * l)]));
            handshake(&tri);
        }
        for l in [2usize, 3, 8] {
            let hc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, l), &bond(), 2).unwrap();
            assert_eq!((hc.node_count(), hc.edges().len()), (2 * l * l, 3 * l * l));
            assert_eq!(degree_histogram(&hc), HashMap::from([(3, 2 * l * l)]));
            handshake(&hc);
        }
    }

    #[test]
    fn honeycomb_is_bipartite() {
        let hc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 2), &bond(), 1).unwrap();
        assert_eq!(hc.node_count(), 8);
        assert_eq!(hc.edges().len(), 12);
        for (x, tag) in hc.sublattice().iter().enumerate() {
            assert_eq!(*tag, if x % 2 == 0 { Sublattice::A } else { Sublattice::B });
        }
        for e in hc.edges() {
            assert_ne!(hc.sublattice()[e.u.0], hc.sublattice()[e.v.0]);
        }
    }

    #[test]
    fn open_lattices() {
        let sq = build_lattice(&LatticeSpec::new(LatticeKind::Square, 4, Boundary::Open), &bond(), 1).unwrap();
        assert_eq!(sq.edges().len(), 2 * 4 * 3);
        handshake(&sq);
        let corner = sq.node_at(0, 0, Sublattice::None).unwrap();
        let opposite = sq.node_at(3, 3, Sublattice::None).unwrap();
        assert_eq!(sq.graph_distance(corner, opposite), Some(6));
        assert_eq!(sq.graph_distance(corner, corner), Some(0));
        assert_eq!(sq.graph_distance(corner, NodeId(1)), Some(1));

        let tri = build_lattice(
            &LatticeSpec::new(LatticeKind::Triangular, 4, Boundary::Open),
            &bond(),
            1,
        )
        .unwrap();
        assert_eq!(tri.edges().len(), 2 * 4 * 3 + 9);
        let hc = build_lattice(&LatticeSpec::new(LatticeKind::Honeycomb, 3, Boundary::Open), &bond(), 1).unwrap();
        handshake(&hc);
        assert_eq!(hc.edges().len(), 9 + 6 + 6);
    }

    #[test]
    fn unsupported_specs() {
        let b = bond();
        assert!(matches!(
            build_lattice(&LatticeSpec::new(LatticeKind::Chain, 4, Boundary::Periodic), &b, 1),
            Err(NetworkError::Unsupported(_))
        ));
        assert!(matches!(
            build_lattice(&LatticeSpec::periodic(LatticeKind::Square, 2), &b, 1),
            Err(NetworkError::Unsupported(_))
        ));
        assert_eq!(
            build_lattice(&LatticeSpec::periodic(LatticeKind::Square, 1), &b, 1),
            Err(NetworkError::TooSmall(1))
        );
        assert_eq!(
            build_lattice(&LatticeSpec::chain(3), &b, 0),
            Err(NetworkError::NoCopies)
        );
    }

    #[test]
    fn build_is_deterministic() {
        let spec = LatticeSpec::periodic(LatticeKind::Triangular, 5);
        assert_eq!(build_lattice(&spec, &bond(), 1), build_lattice(&spec, &bond(), 1));
    }

    #[test]
    fn custom_network_validation() {
        let b = vec![bond()];
        let e = |u, v| Edge::new(NodeId(u), NodeId(v), b.clone());
        assert!(Network::custom(3, vec![e(0, 1), e(1, 2)]).is_ok());
        assert_eq!(
            Network::custom(3, vec![e(0, 0)]),
            Err(NetworkError::SelfLoop(NodeId(0)))
        );
        assert_eq!(
            Network::custom(3, vec![e(0, 1), e(1, 0)]),
            Err(NetworkError::DuplicateEdge(NodeId(1), NodeId(0)))
        );
        assert!(matches!(
            Network::custom(2, vec![e(0, 5)]),
            Err(NetworkError::NodeOutOfRange { .. })
        ));
        assert_eq!(
            Network::custom(2, vec![Edge::new(NodeId(0), NodeId(1), vec![])]),
            Err(NetworkError::NoCopies)
        );
        let split = Network::custom(4, vec![e(0, 1), e(2, 3)]).unwrap();
        assert_eq!(split.graph_distance(NodeId(0), NodeId(3)), None);
    }

    #[test]
    fn document_round_trip() {
        let spec = LatticeSpec::periodic(LatticeKind::Honeycomb, 3);
        let net = build_lattice(&spec, &bond(), 2).unwrap();
        let json = serde_json::to_string(&net.to_document()).unwrap();
        assert!(json.starts_with(r#"{"kind":"honeycomb","L":3,"boundary":"periodic","nodes":18,"edges":[[0,1,[[0.8,"#));
        let back = Network::from_document(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, net);

        let custom = Network::custom(2, vec![Edge::new(NodeId(0), NodeId(1), vec![bond()])]).unwrap();
        let back = Network::from_document(custom.to_document()).unwrap();
        assert_eq!(back, custom);

        let mut doc = net.to_document();
        doc.edges.push((0, 8, vec![bond()]));
        assert!(Network::from_document(doc).is_err());
    }

    #[test]
    fn swap_transform_counts() {
        let hc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 4), &bond(), 2).unwrap();
        assert_eq!((hc.node_count(), hc.edges().len()), (32, 48));
        let out = honeycomb_to_triangular(&hc).unwrap();
        let tri = &out.network;
        assert_eq!((tri.node_count(), tri.edges().len()), (16, 48));
        assert_eq!(degree_histogram(tri), HashMap::from([(6, 16)]));
        let a_nodes = hc.sublattice().iter().filter(|s| **s == Sublattice::A).count();
        assert_eq!(3 * a_nodes, tri.edges().len());
    }

    #[test]
    fn swap_transform_yields_the_triangular_lattice() {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let l = 5;
            let hc = build_lattice(&LatticeSpec::new(LatticeKind::Honeycomb, l, boundary), &bond(), 2).unwrap();
            let out = honeycomb_to_triangular(&hc).unwrap();
            let reference = build_lattice(&LatticeSpec::new(LatticeKind::Triangular, l, boundary), &bond(), 1).unwrap();
            let key = |e: &Edge| (e.u.min(e.v), e.u.max(e.v));
            let got: HashSet<_> = out.network.edges().iter().map(key).collect();
            let want: HashSet<_> = reference.edges().iter().map(key).collect();
            assert_eq!(got, want, "{boundary}");
            // Neighbor offsets, with the shift sign following edge direction.
            let mut offsets = HashSet::new();
            for (e, s) in out.network.edges().iter().zip(out.network.shifts().unwrap()) {
                let cu = out.network.cells().unwrap()[e.u.0];
                let cv = out.network.cells().unwrap()[e.v.0];
                let l = l as i64;
                assert_eq!((cu[0] + s[0]).rem_euclid(l), cv[0]);
                assert_eq!((cu[1] + s[1]).rem_euclid(l), cv[1]);
                offsets.insert(*s);
                offsets.insert([-s[0], -s[1]]);
            }
            assert_eq!(offsets.len(), 6);
        }
    }

    #[test]
    fn swap_transform_scp_matches_swap_oracle() {
        let l1 = (0.5 + (std::f64::consts::PI / 18.0).sin()).sqrt();
        for lambda1 in [0.5, 0.6, 0.8, l1, 0.95] {
            let phi = SchmidtVector::qubit(lambda1).unwrap();
            let hc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 3), &phi, 2).unwrap();
            let out = honeycomb_to_triangular(&hc).unwrap();
            let oracle = average_scp(&bell_swap(&phi, &phi).unwrap());
            for p in &out.edge_scp {
                assert!((p - oracle).abs() < 1e-12);
            }
        }
        let phi = SchmidtVector::qubit(l1).unwrap();
        let hc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 3), &phi, 2).unwrap();
        let p = honeycomb_to_triangular(&hc).unwrap().edge_scp[0];
        let threshold = LatticeKind::Triangular.bond_threshold().unwrap();
        assert!((p - 0.358).abs() < 1e-3 && p > threshold);
    }

    #[test]
    fn swap_transform_rejects_bad_input() {
        let sq = build_lattice(&LatticeSpec::periodic(LatticeKind::Square, 3), &bond(), 2).unwrap();
        assert_eq!(honeycomb_to_triangular(&sq).unwrap_err(), NetworkError::NotHoneycomb);
        let single = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 3), &bond(), 1).unwrap();
        assert!(matches!(
            honeycomb_to_triangular(&single),
            Err(NetworkError::CopyCount {
                expected: 2,
                got: 1,
                ..
            })
        ));
        let qutrit = SchmidtVector::new(vec![0.6, 0.3, 0.1]).unwrap();
        let hc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 3), &qutrit, 2).unwrap();
        assert!(matches!(honeycomb_to_triangular(&hc), Err(NetworkError::State(_))));

        let mut doc = build_lattice(&LatticeSpec::periodic(LatticeKind::Honeycomb, 3), &bond(), 2)
            .unwrap()
            .to_document();
        doc.edges[4].2[1] = SchmidtVector::qubit(0.7).unwrap();
        let mixed = Network::from_document(doc).unwrap();
        assert_eq!(
            honeycomb_to_triangular(&mixed).unwrap_err(),
            NetworkError::Heterogeneous
        );
    }

    #[test]
    fn bell_bonds_give_certain_new_bonds() {
        let hc = build_lattice(
            &LatticeSpec::periodic(LatticeKind::Honeycomb, 3),
            &SchmidtVector::bell(),
            2,
        )
        .unwrap();
        assert!(honeycomb_to_triangular(&hc).unwrap().edge_scp.iter().all(|&p| p == 1.0));
    }
}
