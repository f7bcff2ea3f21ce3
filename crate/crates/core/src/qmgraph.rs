//! Finite balls in the graph of diagram classes and checks of their
//! quasi-median structure.
//!
//! Vertices are classes `[Δ]` of reduced `(w, ∗)`-diagrams up to a permutation
//! of the bottom boundary allowed by the geometry. Distances always come from
//! the global formula `length(Δ₁⁻¹·Δ₂)`, so they are exact even near the edge
//! of the ball; checks whose witnesses could fall outside the ball are
//! skipped and counted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::GroupElement;
use crate::picture::{
    canonical_key, class_ball, factorize, invert, length, marked_class_key, multiply, reduce, unitary_moves,
    Context, Diagram, DiagramError, Geometry, KeyMode, MoveKind,
};
use crate::presentation::{Direction, Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QmError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("hyperplane {0} does not exist")]
    UnknownHyperplane(usize),
    #[error("hyperplane {0} is not dual to linear edges")]
    NotLinear(usize),
    #[error("hyperplane {0} is not interior")]
    NotInterior(usize),
}

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug)]
pub struct Vertex {
    pub key: Vec<u8>,
    pub rep: Diagram,
    /// Distance to the basepoint.
    pub dist: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Transistor { relation: usize, dir: Direction },
    /// Seen from the smaller endpoint: its bottom wire at `position` is
    /// multiplied by `delta`.
    Linear { position: usize, letter: Letter, delta: GroupElement, pin: usize },
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, EdgeKind::Linear { .. })
    }
}

/// A clique of classes differing only in the coefficient of one bottom wire.
#[derive(Clone, Debug)]
pub struct Pin {
    pub key: Vec<u8>,
    pub letter: Letter,
    pub members: Vec<VertexId>,
}

#[derive(Clone, Debug)]
pub struct BallGraph {
    pub geometry: Geometry,
    pub radius: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub pins: Vec<Pin>,
    adjacency: Vec<BTreeSet<VertexId>>,
    edge_at: HashMap<(VertexId, VertexId), EdgeId>,
    index: HashMap<Vec<u8>, VertexId>,
    distances: OnceLock<Vec<Vec<u32>>>,
}

/// Distinct neighbouring classes with one move reaching each.
pub fn neighbors(d: &Diagram, geom: Geometry) -> Result<Vec<(Vec<u8>, Diagram, MoveKind)>, QmError> {
    let own = canonical_key(d, KeyMode::Class);
    let mut out: BTreeMap<Vec<u8>, (Diagram, MoveKind)> = BTreeMap::new();
    for m in unitary_moves(d, geom)? {
        let k = canonical_key(&m.result, KeyMode::Class);
        if k != own {
            out.entry(k).or_insert((m.result, m.kind));
        }
    }
    Ok(out.into_iter().map(|(k, (d, m))| (k, d, m)).collect())
}

/// `length(a⁻¹·b)`.
pub fn pair_distance(a: &Diagram, b: &Diagram) -> Result<usize, QmError> {
    Ok(length(&multiply(&invert(a), b)?))
}

/// Reduced representatives along the factorization of `a⁻¹·b`, from `[a]` to `[b]`.
pub fn geodesic(a: &Diagram, b: &Diagram) -> Result<Vec<Diagram>, QmError> {
    let f = factorize(&multiply(&invert(a), b)?)?;
    (0..=f.steps.len()).map(|k| Ok(multiply(a, &f.prefix(k)?)?)).collect()
}

fn pin_keys(d: &Diagram) -> Vec<(usize, Vec<u8>)> {
    d.bottom_ports()
        .iter()
        .enumerate()
        .filter(|(_, &w)| d.coeffs().spec(d.wires()[w].label).order().is_some_and(|o| o > 1))
        .map(|(i, &w)| (i, marked_class_key(d, w)))
        .collect()
}

/// The ball of radius `radius` around the class of `base`, as an induced subgraph.
pub fn ball(base: &Diagram, geom: Geometry, radius: usize) -> Result<BallGraph, QmError> {
    let found = class_ball(base, geom, radius)?;
    let vertices: Vec<Vertex> = found.into_iter().map(|(key, rep, dist)| Vertex { key, rep, dist }).collect();
    let index: HashMap<Vec<u8>, VertexId> = vertices.iter().enumerate().map(|(i, v)| (v.key.clone(), i)).collect();

    let mut pin_ids: BTreeMap<Vec<u8>, (Letter, Vec<VertexId>)> = BTreeMap::new();
    for (i, v) in vertices.iter().enumerate() {
        for (pos, key) in pin_keys(&v.rep) {
            let letter = v.rep.wires()[v.rep.bottom_ports()[pos]].label;
            pin_ids.entry(key).or_insert_with(|| (letter, Vec::new())).1.push(i);
        }
    }
    let pins: Vec<Pin> = pin_ids.into_iter().map(|(key, (letter, members))| Pin { key, letter, members }).collect();
    let pin_of: HashMap<&[u8], usize> = pins.iter().enumerate().map(|(i, p)| (p.key.as_slice(), i)).collect();

    let moves: Vec<Vec<(Vec<u8>, Diagram, MoveKind)>> =
        vertices.par_iter().map(|v| neighbors(&v.rep, geom)).collect::<Result<_, _>>()?;
    let mut edge_map: BTreeMap<(VertexId, VertexId), EdgeKind> = BTreeMap::new();
    for (a, list) in moves.into_iter().enumerate() {
        for (key, _, kind) in list {
            let Some(&b) = index.get(&key) else { continue };
            if b < a {
                continue;
            }
            let kind = match kind {
                MoveKind::Transistor(p) => EdgeKind::Transistor { relation: p.relation, dir: p.dir },
                MoveKind::Linear { position, letter, delta } => {
                    let rep = &vertices[a].rep;
                    let pin = pin_of[marked_class_key(rep, rep.bottom_ports()[position]).as_slice()];
                    EdgeKind::Linear { position, letter, delta, pin }
                }
            };
            edge_map.entry((a, b)).or_insert(kind);
        }
    }
    let edges: Vec<Edge> = edge_map.into_iter().map(|((a, b), kind)| Edge { a, b, kind }).collect();
    Ok(BallGraph::assemble(geom, radius, vertices, edges, pins, index))
}

impl BallGraph {
    fn assemble(
        geometry: Geometry,
        radius: usize,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        pins: Vec<Pin>,
        index: HashMap<Vec<u8>, VertexId>,
    ) -> Self {
        let mut adjacency = vec![BTreeSet::new(); vertices.len()];
        let mut edge_at = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].insert(e.b);
            adjacency[e.b].insert(e.a);
            edge_at.insert((e.a, e.b), i);
            edge_at.insert((e.b, e.a), i);
        }
        BallGraph { geometry, radius, vertices, edges, pins, adjacency, edge_at, index, distances: OnceLock::new() }
    }

    pub fn context(&self) -> &Context {
        self.vertices[0].rep.context()
    }

    pub fn vertex_of(&self, key: &[u8]) -> Option<VertexId> {
        self.index.get(key).copied()
    }

    pub fn vertex_of_diagram(&self, d: &Diagram) -> Option<VertexId> {
        self.vertex_of(&canonical_key(&reduce(d), KeyMode::Class))
    }

    pub fn neighbours(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_at.get(&(a, b)).copied()
    }

    /// Formula distances between all pairs of vertices.
    pub fn distances(&self) -> &Vec<Vec<u32>> {
        self.distances.get_or_init(|| {
            let reps: Vec<&Diagram> = self.vertices.iter().map(|v| &v.rep).collect();
            let inverses: Vec<Diagram> = reps.par_iter().map(|d| invert(d)).collect();
            (0..reps.len())
                .into_par_iter()
                .map(|i| {
                    (0..reps.len())
                        .map(|j| if i == j { 0 } else { length(&multiply(&inverses[i], reps[j]).expect("same baseword")) as u32 })
                        .collect()
                })
                .collect()
        })
    }

    /// Breadth-first distances inside the ball.
    pub fn graph_distances(&self, from: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued");
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// The same ball with one vertex and its edges removed.
    pub fn without_vertex(&self, dead: VertexId) -> BallGraph {
        let renum = |v: VertexId| if v > dead { v - 1 } else { v };
        let vertices: Vec<Vertex> = self.vertices.iter().enumerate().filter(|(i, _)| *i != dead).map(|(_, v)| v.clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| e.a != dead && e.b != dead)
            .map(|e| Edge { a: renum(e.a), b: renum(e.b), kind: e.kind.clone() })
            .collect();
        let pins = self
            .pins
            .iter()
            .map(|p| Pin { members: p.members.iter().filter(|&&m| m != dead).map(|&m| renum(m)).collect(), ..p.clone() })
            .collect();
        let index = vertices.iter().enumerate().map(|(i, v)| (v.key.clone(), i)).collect();
        BallGraph::assemble(self.geometry, self.radius, vertices, edges, pins, index)
    }

    fn within(&self, v: VertexId, margin: usize) -> bool {
        self.vertices[v].dist + margin <= self.radius
    }

    fn triangles(&self) -> Vec<[VertexId; 3]> {
        let mut out = Vec::new();
        for e in &self.edges {
            for &c in self.adjacency[e.a].intersection(&self.adjacency[e.b]) {
                if c > e.b {
                    out.push([e.a, e.b, c]);
                }
            }
        }
        out
    }

    /// Induced 4-cycles `a-b-c-d` listed once each.
    fn squares(&self) -> Vec<[VertexId; 4]> {
        let mut out = Vec::new();
        for a in 0..self.vertices.len() {
            let nb: Vec<VertexId> = self.adjacency[a].iter().copied().filter(|&x| x > a).collect();
            for (i, &b) in nb.iter().enumerate() {
                for &d in &nb[i + 1..] {
                    if self.adjacent(b, d) {
                        continue;
                    }
                    for &c in self.adjacency[b].intersection(&self.adjacency[d]) {
                        if c > a && !self.adjacent(a, c) {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let pres = self.context().pres().clone();
        let coeffs = self.context().coeffs().clone();
        let mut s = String::from("graph ball {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let bottom = pres.format_word(&v.rep.bottom_word());
            let _ = writeln!(s, "  v{i} [label=\"v{i} {bottom}\\nd={} t={}\"];", v.dist, v.rep.transistor_count());
        }
        for e in &self.edges {
            match &e.kind {
                EdgeKind::Transistor { .. } => {
                    let _ = writeln!(s, "  v{} -- v{};", e.a, e.b);
                }
                EdgeKind::Linear { letter, delta, .. } => {
                    let g = coeffs.spec(*letter).format_element(delta);
                    let _ = writeln!(s, "  v{} -- v{} [style=dashed, label=\"({}, {g})\"];", e.a, e.b, pres.letter_name(*letter));
                }
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pres = self.context().pres();
        let coeffs = self.context().coeffs();
        let hex = |k: &[u8]| k.iter().map(|b| format!("{b:02x}")).collect::<String>();
        let vertices: Vec<serde_json::Value> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                serde_json::json!({
                    "id": i,
                    "key": hex(&v.key),
                    "length": v.dist,
                    "bottom": pres.format_word(&v.rep.bottom_word()),
                })
            })
            .collect();
        let edges: Vec<serde_json::Value> = self
            .edges
            .iter()
            .map(|e| match &e.kind {
                EdgeKind::Transistor { relation, dir } => serde_json::json!({
                    "a": e.a, "b": e.b, "kind": "transistor", "relation": relation, "dir": dir.sign().to_string(),
                }),
                EdgeKind::Linear { position, letter, delta, pin } => serde_json::json!({
                    "a": e.a, "b": e.b, "kind": "linear", "position": position,
                    "letter": pres.letter_name(*letter), "delta": coeffs.spec(*letter).format_element(delta), "pin": pin,
                }),
            })
            .collect();
        serde_json::json!({
            "geometry": self.geometry.to_string(),
            "radius": self.radius,
            "presentation": pres.to_string(),
            "coeffs": pres.letters().map(|l| (pres.letter_name(l).to_string(), coeffs.spec(l).to_string())).collect::<BTreeMap<_, _>>(),
            "vertices": vertices,
            "edges": edges,
        })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PremiseCount {
    pub checked: usize,
    /// Premises whose witness could lie outside the ball.
    pub skipped: usize,
    pub violations: Vec<Vec<VertexId>>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub vertices: usize,
    pub edges: usize,
    pub triangle: PremiseCount,
    pub quadrangle: PremiseCount,
    pub k4_minus: Vec<Vec<VertexId>>,
    pub k32: Vec<Vec<VertexId>>,
    pub triangles: usize,
    pub triangle_free: bool,
    /// Pairs at distance two with more than two middle vertices.
    pub geodesic_claim: PremiseCount,
    /// Edges along which the length changes other than the move allows.
    pub length_law: Vec<EdgeId>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.triangle.violations.is_empty()
            && self.quadrangle.violations.is_empty()
            && self.k4_minus.is_empty()
            && self.k32.is_empty()
            && self.geodesic_claim.violations.is_empty()
            && self.length_law.is_empty()
    }
}

pub fn verify_qm_axioms(g: &BallGraph) -> AxiomReport {
    let n = g.vertices.len();
    let dist = g.distances();
    let mut rep = AxiomReport { vertices: n, edges: g.edges.len(), ..Default::default() };

    let per_u: Vec<(PremiseCount, PremiseCount)> = (0..n)
        .into_par_iter()
        .map(|u| {
            let du = &dist[u];
            let mut tri = PremiseCount::default();
            let mut quad = PremiseCount::default();
            for e in &g.edges {
                let (v, w) = (e.a, e.b);
                if du[v] != du[w] || du[v] == 0 {
                    continue;
                }
                if !(g.within(v, 1) && g.within(w, 1)) {
                    tri.skipped += 1;
                    continue;
                }
                tri.checked += 1;
                let k = du[v];
                if !g.adjacency[v].intersection(&g.adjacency[w]).any(|&x| du[x] + 1 == k) {
                    tri.violations.push(vec![u, v, w]);
                }
            }
            for z in 0..n {
                let nb: Vec<VertexId> = g.adjacency[z].iter().copied().filter(|&v| du[v] + 1 == du[z]).collect();
                for (i, &v) in nb.iter().enumerate() {
                    for &w in &nb[i + 1..] {
                        if g.adjacent(v, w) {
                            continue;
                        }
                        if !(g.within(v, 1) && g.within(w, 1)) {
                            quad.skipped += 1;
                            continue;
                        }
                        quad.checked += 1;
                        let k = du[v];
                        if !g.adjacency[v].intersection(&g.adjacency[w]).any(|&x| du[x] + 1 == k) {
                            quad.violations.push(vec![u, v, w, z]);
                        }
                    }
                }
            }
            (tri, quad)
        })
        .collect();
    for (t, q) in per_u {
        for (acc, part) in [(&mut rep.triangle, t), (&mut rep.quadrangle, q)] {
            acc.checked += part.checked;
            acc.skipped += part.skipped;
            acc.violations.extend(part.violations);
        }
    }

    // Induced K4 minus an edge: an edge whose common neighbourhood holds a non-edge.
    for e in &g.edges {
        let common: Vec<VertexId> = g.adjacency[e.a].intersection(&g.adjacency[e.b]).copied().collect();
        for (i, &c) in common.iter().enumerate() {
            for &d in &common[i + 1..] {
                if !g.adjacent(c, d) {
                    rep.k4_minus.push(vec![e.a, e.b, c, d]);
                }
            }
        }
    }
    // Induced K3,2: a non-adjacent pair with three pairwise non-adjacent common neighbours.
    for p in 0..n {
        for q in p + 1..n {
            if g.adjacent(p, q) {
                continue;
            }
            let common: Vec<VertexId> = g.adjacency[p].intersection(&g.adjacency[q]).copied().collect();
            if common.len() < 3 {
                continue;
            }
            'outer: for (i, &x) in common.iter().enumerate() {
                for (j, &y) in common.iter().enumerate().skip(i + 1) {
                    if g.adjacent(x, y) {
                        continue;
                    }
                    for &z in &common[j + 1..] {
                        if !g.adjacent(x, z) && !g.adjacent(y, z) {
                            rep.k32.push(vec![p, q, x, y, z]);
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    rep.triangles = g.triangles().len();
    rep.triangle_free = rep.triangles == 0;

    for u in 0..n {
        for v in u + 1..n {
            if dist[u][v] != 2 {
                continue;
            }
            if !(g.within(u, 1) && g.within(v, 1)) {
                rep.geodesic_claim.skipped += 1;
                continue;
            }
            rep.geodesic_claim.checked += 1;
            let mids = g.adjacency[u].intersection(&g.adjacency[v]).count();
            if mids > 2 {
                rep.geodesic_claim.violations.push(vec![u, v]);
            }
        }
    }

    for (i, e) in g.edges.iter().enumerate() {
        let (la, lb) = (g.vertices[e.a].dist, g.vertices[e.b].dist);
        let ok = match e.kind {
            EdgeKind::Transistor { .. } => la.abs_diff(lb) == 1,
            EdgeKind::Linear { .. } => la.abs_diff(lb) <= 1,
        };
        if !ok {
            rep.length_law.push(i);
        }
    }
    rep
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MedianReport {
    pub triples_checked: usize,
    /// Triples with no median or more than one.
    pub violations: Vec<Vec<VertexId>>,
}

/// Medians of every triple for which one pairwise interval provably lies
/// inside the ball.
pub fn medians(g: &BallGraph) -> MedianReport {
    let n = g.vertices.len();
    let d = g.distances();
    let r = g.radius as u32;
    let depth: Vec<u32> = g.vertices.iter().map(|v| v.dist as u32).collect();
    let interval = |a: VertexId, b: VertexId| -> Vec<VertexId> { (0..n).filter(|&m| d[a][m] + d[m][b] == d[a][b]).collect() };
    let parts: Vec<MedianReport> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut rep = MedianReport::default();
            for b in a + 1..n {
                if (depth[a] + depth[b] + d[a][b]) / 2 > r {
                    continue;
                }
                let iab = interval(a, b);
                for c in 0..n {
                    if c == a || c == b {
                        continue;
                    }
                    // Each triple once: through its first certified pair.
                    let certified = |x: VertexId, y: VertexId| (depth[x] + depth[y] + d[x][y]) / 2 <= r;
                    let pairs = [(a.min(c), a.max(c)), (b.min(c), b.max(c))];
                    if pairs.iter().any(|&(x, y)| certified(x, y) && (x, y) < (a, b)) {
                        continue;
                    }
                    rep.triples_checked += 1;
                    let count = iab
                        .iter()
                        .filter(|&&m| d[a][m] + d[m][c] == d[a][c] && d[b][m] + d[m][c] == d[b][c])
                        .count();
                    if count != 1 {
                        rep.violations.push(vec![a, b, c]);
                    }
                }
            }
            rep
        })
        .collect();
    let mut out = MedianReport::default();
    for p in parts {
        out.triples_checked += p.triples_checked;
        out.violations.extend(p.violations);
    }
    out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PinReport {
    pub pins: usize,
    pub largest: usize,
    /// Pins through a vertex within distance `radius − 1` whose size is not the group order.
    pub size_violations: Vec<usize>,
    pub not_cliques: Vec<usize>,
    /// Pairs of pins sharing two or more vertices.
    pub intersection_violations: Vec<(usize, usize)>,
    pub triangles_checked: usize,
    pub triangles_outside_pins: Vec<Vec<VertexId>>,
}

impl PinReport {
    pub fn passed(&self) -> bool {
        self.size_violations.is_empty()
            && self.not_cliques.is_empty()
            && self.intersection_violations.is_empty()
            && self.triangles_outside_pins.is_empty()
    }
}

pub fn pins_report(g: &BallGraph) -> PinReport {
    let coeffs = g.context().coeffs();
    let mut rep = PinReport { pins: g.pins.len(), ..Default::default() };
    let mut of_vertex: Vec<HashSet<usize>> = vec![HashSet::new(); g.vertices.len()];
    for (i, p) in g.pins.iter().enumerate() {
        rep.largest = rep.largest.max(p.members.len());
        let order = coeffs.spec(p.letter).order().expect("finite groups in balls");
        if p.members.iter().any(|&m| g.within(m, 1)) && p.members.len() != order {
            rep.size_violations.push(i);
        }
        if p.members.iter().enumerate().any(|(j, &a)| p.members[j + 1..].iter().any(|&b| !g.adjacent(a, b))) {
            rep.not_cliques.push(i);
        }
        for &m in &p.members {
            of_vertex[m].insert(i);
        }
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for pins in &of_vertex {
        let mut v: Vec<usize> = pins.iter().copied().collect();
        v.sort();
        for (i, &p) in v.iter().enumerate() {
            for &q in &v[i + 1..] {
                *shared.entry((p, q)).or_default() += 1;
            }
        }
    }
    rep.intersection_violations = shared.into_iter().filter(|&(_, c)| c > 1).map(|(k, _)| k).collect();
    for t in g.triangles() {
        rep.triangles_checked += 1;
        if !of_vertex[t[0]].iter().any(|p| of_vertex[t[1]].contains(p) && of_vertex[t[2]].contains(p)) {
            rep.triangles_outside_pins.push(t.to_vec());
        }
    }
    rep
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Hyperplane {
    pub id: usize,
    pub edges: Vec<EdgeId>,
    /// Pins for linear hyperplanes, single edges otherwise.
    pub cliques: Vec<Vec<VertexId>>,
    pub linear: bool,
    /// Every edge has both endpoints within distance `radius − 2`.
    pub interior: bool,
}

/// Edge classes generated by triangles, pins and opposite sides of induced squares.
pub fn hyperplanes(g: &BallGraph) -> Vec<Hyperplane> {
    let mut uf = UnionFind((0..g.edges.len()).collect());
    let e = |a: VertexId, b: VertexId| g.edge_between(a, b).expect("edge of the ball");
    let mut first_in_pin: HashMap<usize, EdgeId> = HashMap::new();
    for (i, edge) in g.edges.iter().enumerate() {
        if let EdgeKind::Linear { pin, .. } = edge.kind {
            let f = *first_in_pin.entry(pin).or_insert(i);
            uf.union(f, i);
        }
    }
    for [a, b, c] in g.triangles() {
        uf.union(e(a, b), e(b, c));
        uf.union(e(a, b), e(a, c));
    }
    for [a, b, c, d] in g.squares() {
        uf.union(e(a, b), e(d, c));
        uf.union(e(a, d), e(b, c));
    }
    let mut classes: BTreeMap<usize, Vec<EdgeId>> = BTreeMap::new();
    for i in 0..g.edges.len() {
        let r = uf.find(i);
        classes.entry(r).or_default().push(i);
    }
    classes
        .into_values()
        .enumerate()
        .map(|(id, edges)| {
            let linear = edges.iter().all(|&i| g.edges[i].is_linear());
            let mut cliques: BTreeSet<Vec<VertexId>> = BTreeSet::new();
            for &i in &edges {
                match g.edges[i].kind {
                    EdgeKind::Linear { pin, .. } => {
                        let mut m = g.pins[pin].members.clone();
                        m.sort();
                        cliques.insert(m);
                    }
                    EdgeKind::Transistor { .. } => {
                        cliques.insert(vec![g.edges[i].a, g.edges[i].b]);
                    }
                }
            }
            let interior = edges.iter().all(|&i| g.within(g.edges[i].a, 2) && g.within(g.edges[i].b, 2));
            Hyperplane { id, edges, cliques: cliques.into_iter().collect(), linear, interior }
        })
        .collect()
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HyperplaneReport {
    pub hyperplanes: usize,
    pub interior: usize,
    /// Interior vertices in one component of the ball minus `J` but in different fibers.
    pub sector_violations: Vec<(usize, VertexId, VertexId)>,
    pub crossing_violations: Vec<(usize, VertexId, VertexId)>,
    pub gate_violations: Vec<(usize, VertexId)>,
    pub linear_witness_violations: Vec<EdgeId>,
    /// Checks that could not be settled inside the ball.
    pub boundary_inconclusive: usize,
}

impl HyperplaneReport {
    pub fn passed(&self) -> bool {
        self.sector_violations.is_empty()
            && self.crossing_violations.is_empty()
            && self.gate_violations.is_empty()
            && self.linear_witness_violations.is_empty()
    }
}

fn components_without(g: &BallGraph, cut: &HashSet<EdgeId>) -> Vec<usize> {
    let n = g.vertices.len();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &g.adjacency[v] {
                if comp[w] == usize::MAX && !cut.contains(&g.edge_between(v, w).expect("edge")) {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Vertex path of a formula geodesic, or `None` when it leaves the ball.
fn geodesic_in_ball(g: &BallGraph, a: VertexId, b: VertexId) -> Option<Vec<VertexId>> {
    let path = geodesic(&g.vertices[a].rep, &g.vertices[b].rep).ok()?;
    path.iter().map(|d| g.vertex_of_diagram(d)).collect()
}

pub fn hyperplanes_report(g: &BallGraph) -> HyperplaneReport {
    let hs = hyperplanes(g);
    let dist = g.distances();
    let interior_vertices: Vec<VertexId> = (0..g.vertices.len()).filter(|&v| g.within(v, 2)).collect();
    let mut rep = HyperplaneReport { hyperplanes: hs.len(), interior: hs.iter().filter(|h| h.interior).count(), ..Default::default() };
    let mut plane_of = vec![0; g.edges.len()];
    for h in &hs {
        for &e in &h.edges {
            plane_of[e] = h.id;
        }
    }

    for h in hs.iter().filter(|h| h.interior) {
        // Gates: a unique closest vertex in every carrier clique.
        let mut gates: Vec<Vec<VertexId>> = Vec::new();
        for clique in &h.cliques {
            let mut gate = vec![usize::MAX; g.vertices.len()];
            for &v in &interior_vertices {
                let best = clique.iter().map(|&x| dist[v][x]).min().expect("nonempty clique");
                let at: Vec<VertexId> = clique.iter().copied().filter(|&x| dist[v][x] == best).collect();
                if at.len() != 1 || clique.iter().any(|&x| dist[v][x] > best + 1) {
                    rep.gate_violations.push((h.id, v));
                } else {
                    gate[v] = at[0];
                }
            }
            gates.push(gate);
        }
        // Sectors: components of the ball minus J against fibers of the projection to one clique.
        let cut: HashSet<EdgeId> = h.edges.iter().copied().collect();
        let comp = components_without(g, &cut);
        let fiber = &gates[0];
        for (i, &u) in interior_vertices.iter().enumerate() {
            for &v in &interior_vertices[i + 1..] {
                if fiber[u] == usize::MAX || fiber[v] == usize::MAX {
                    continue;
                }
                let same_comp = comp[u] == comp[v];
                let same_fiber = fiber[u] == fiber[v];
                if same_comp && !same_fiber {
                    rep.sector_violations.push((h.id, u, v));
                } else if !same_comp && same_fiber {
                    match geodesic_in_ball(g, u, v) {
                        None => rep.boundary_inconclusive += 1,
                        Some(_) => rep.sector_violations.push((h.id, u, v)),
                    }
                }
            }
        }
    }

    // A geodesic crosses each hyperplane at most once.
    let interior_plane: Vec<bool> = hs.iter().map(|h| h.interior).collect();
    for (i, &u) in interior_vertices.iter().enumerate() {
        for &v in &interior_vertices[i + 1..] {
            let Some(path) = geodesic_in_ball(g, u, v) else {
                rep.boundary_inconclusive += 1;
                continue;
            };
            let mut seen = HashSet::new();
            for w in path.windows(2) {
                let Some(e) = g.edge_between(w[0], w[1]) else {
                    rep.crossing_violations.push((usize::MAX, u, v));
                    break;
                };
                if !seen.insert(plane_of[e]) {
                    if interior_plane[plane_of[e]] {
                        rep.crossing_violations.push((plane_of[e], u, v));
                    } else {
                        rep.boundary_inconclusive += 1;
                    }
                }
            }
        }
    }

    for (i, e) in g.edges.iter().enumerate() {
        if let EdgeKind::Linear { position, delta, .. } = &e.kind {
            let moved = g.vertices[e.a].rep.twist_bottom(*position, delta).map(|d| canonical_key(&reduce(&d), KeyMode::Class));
            if moved.ok().as_deref() != Some(g.vertices[e.b].key.as_slice()) {
                rep.linear_witness_violations.push(i);
            }
        }
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct RotativeReport {
    pub label: &'static str,
    pub hyperplane: usize,
    pub candidates: usize,
    /// Candidates mapping every carrier clique of the hyperplane onto itself.
    pub preserving: usize,
    /// The candidates act freely and transitively on the witness pin.
    pub regular_on_pin: bool,
}

/// The elements `Δ·(ε(m)+ε(ℓ,g))·Δ⁻¹` read off a linear edge of `J`, and
/// their action on `J`'s pins. Only candidates for the rotative stabiliser;
/// the full stabiliser may be larger when the conjugation condition fails.
pub fn rotative_stab_probe(g: &BallGraph, hyperplane: usize) -> Result<RotativeReport, QmError> {
    let hs = hyperplanes(g);
    let h = hs.get(hyperplane).ok_or(QmError::UnknownHyperplane(hyperplane))?;
    if !h.linear {
        return Err(QmError::NotLinear(hyperplane));
    }
    if !h.interior {
        return Err(QmError::NotInterior(hyperplane));
    }
    let edge = &g.edges[h.edges[0]];
    let EdgeKind::Linear { position, letter, pin, .. } = &edge.kind else { unreachable!("linear hyperplane") };
    let base = &g.vertices[edge.a].rep;
    let elements = g.context().coeffs().spec(*letter).elements().expect("finite groups in balls");
    let act = |s: &Diagram, v: VertexId| -> Result<Vec<u8>, QmError> {
        Ok(canonical_key(&multiply(s, &g.vertices[v].rep)?, KeyMode::Class))
    };
    let mut preserving = 0;
    let mut orbit = BTreeSet::new();
    for h_el in &elements {
        let s = multiply(&base.twist_bottom(*position, h_el)?, &invert(base))?;
        let mut keeps = true;
        for clique in &h.cliques {
            let keys: BTreeSet<Vec<u8>> = clique.iter().map(|&v| g.vertices[v].key.clone()).collect();
            let images = clique.iter().map(|&v| act(&s, v)).collect::<Result<BTreeSet<_>, _>>()?;
            keeps &= images == keys;
        }
        preserving += keeps as usize;
        orbit.insert(act(&s, edge.a)?);
    }
    let pin_keys: BTreeSet<Vec<u8>> = g.pins[*pin].members.iter().map(|&v| g.vertices[v].key.clone()).collect();
    Ok(RotativeReport {
        label: "candidates under (+)",
        hyperplane,
        candidates: elements.len(),
        preserving,
        regular_on_pin: orbit.len() == elements.len() && orbit == pin_keys,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PlusWord {
    pub word: String,
    pub permutations: usize,
    pub excluded: usize,
    /// Nontrivial permutations with no witness within the budget.
    pub inconclusive: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlusReport {
    pub words: Vec<PlusWord>,
    pub holds: bool,
}

/// Searches, for every relevant word `m` and every nontrivial permutation
/// `(m,m)`-diagram `P`, a transistor diagram `U` of length at most `budget`
/// such that `U⁻¹·P·U` is not a permutation diagram. A word `m` is relevant
/// when some `(w, mℓ)`-diagram within `m_max` moves of `ε(w)` ends in a letter
/// `ℓ` with nontrivial coefficient group; words are taken up to reordering.
pub fn condition_plus_check(ctx: &Context, w: &Word, m_max: usize, budget: usize) -> Result<PlusReport, QmError> {
    let plain = ctx.forget_coefficients();
    let pres = plain.pres();
    let mut relevant: BTreeSet<Word> = BTreeSet::new();
    for (_, d, _) in class_ball(&plain.eps_word(w)?, Geometry::Braided, m_max)? {
        let bottom = d.bottom_word();
        for i in 0..bottom.len() {
            if ctx.coeffs().spec(bottom[i]).order().is_some_and(|o| o == 1) {
                continue;
            }
            let mut m = bottom.clone();
            m.remove(i);
            m.sort();
            if !m.is_empty() && m.len() <= m_max {
                relevant.insert(m);
            }
        }
    }
    let mut words = Vec::new();
    for m in relevant {
        let expansions: Vec<Diagram> = class_ball(&plain.eps_word(&m)?, Geometry::Braided, budget)?
            .into_iter()
            .filter(|(_, _, d)| *d > 0)
            .map(|(_, u, _)| u)
            .collect();
        let mut entry = PlusWord { word: pres.format_word(&m), permutations: 0, excluded: 0, inconclusive: Vec::new() };
        for perm in letter_permutations(&m) {
            if perm.iter().enumerate().all(|(i, &p)| i == p) {
                continue;
            }
            entry.permutations += 1;
            let p = plain.atom_permutation(&m, &perm)?;
            let mut witnessed = false;
            for u in &expansions {
                let conj = multiply(&multiply(&invert(u), &p)?, u)?;
                if conj.transistor_count() > 0 {
                    witnessed = true;
                    break;
                }
            }
            if witnessed {
                entry.excluded += 1;
            } else {
                entry.inconclusive.push(perm);
            }
        }
        words.push(entry);
    }
    let holds = words.iter().all(|w| w.inconclusive.is_empty());
    Ok(PlusReport { words, holds })
}

fn letter_permutations(m: &[Letter]) -> Vec<Vec<usize>> {
    fn go(m: &[Letter], acc: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if acc.len() == m.len() {
            out.push(acc.clone());
            return;
        }
        let l = m[acc.len()];
        for j in 0..m.len() {
            if !used[j] && m[j] == l {
                used[j] = true;
                acc.push(j);
                go(m, acc, used, out);
                acc.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(m, &mut Vec::new(), &mut vec![false; m.len()], &mut out);
    out
}
