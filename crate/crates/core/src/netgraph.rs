//! Interaction graphs: threshold filtering, node clustering, and greedy
//! Eulerian trails for the zigzag partial dependence display.
//!
//! The Eulerian machinery produces, per connected component, a trail that
//! visits every edge at least once, starts with a maximum-weight edge, and at
//! each step prefers the highest-weight unused edge (with Hierholzer
//! splicing for dead-end recovery). Components whose odd-degree vertices
//! prevent an exact trail are repaired by duplicating existing edges along
//! cheapest inverse-weight paths; duplicated steps carry a `revisited` flag.
//! Even connected components are always traversed exactly once.

use serde::{Deserialize, Serialize};

use crate::arrange::{linkage_cluster, Linkage};
use crate::error::Error;
use crate::vivi::ViviMatrix;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViviNode {
    pub name: String,
    pub importance: f64,
}

/// Undirected edge between node indices `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViviEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViviGraph {
    /// Nodes in the order of the source matrix (minus isolated variables).
    pub nodes: Vec<ViviNode>,
    pub edges: Vec<ViviEdge>,
    /// Variables dropped because no incident interaction exceeded the
    /// threshold.
    pub isolated: Vec<String>,
}

/// Keeps edges with interaction strictly above `threshold`; nodes without a
/// surviving edge move to the `isolated` side list.
pub fn build_graph(m: &ViviMatrix, threshold: f64) -> ViviGraph {
    let p = m.p();
    let mut keep = vec![false; p];
    let mut raw_edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let w = m.get(i, j);
            if w > threshold {
                raw_edges.push((i, j, w));
                keep[i] = true;
                keep[j] = true;
            }
        }
    }
    let mut index_of = vec![usize::MAX; p];
    let mut nodes = Vec::new();
    let mut isolated = Vec::new();
    for i in 0..p {
        if keep[i] {
            index_of[i] = nodes.len();
            nodes.push(ViviNode { name: m.names[i].clone(), importance: m.importance(i) });
        } else {
            isolated.push(m.names[i].clone());
        }
    }
    let edges = raw_edges
        .into_iter()
        .map(|(i, j, weight)| ViviEdge { a: index_of[i], b: index_of[j], weight })
        .collect();
    ViviGraph { nodes, edges, isolated }
}

impl ViviGraph {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn weight_between(&self, a: usize, b: usize) -> f64 {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map_or(0.0, |e| e.weight)
    }
}

fn silhouette(d: &[f64], n: usize, labels: &[usize], n_clusters: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![0.0; n_clusters];
        let mut counts = vec![0usize; n_clusters];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += d[i * n + j];
                counts[labels[j]] += 1;
            }
        }
        let own = labels[i];
        if counts[own] == 0 {
            continue; // singleton contributes 0
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..n_clusters)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

fn cut_labels(merges: &[(usize, usize)], n: usize, k: usize) -> Vec<usize> {
    // Union-find over the first n - k merges.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in merges.iter().take(n - k) {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        let root = find(&mut parent, i);
        if labels[root] == usize::MAX {
            labels[root] = next;
            next += 1;
        }
        labels[i] = labels[root];
    }
    labels
}

/// Dendrogram merges flattened to leaf-set unions, for cutting.
fn merge_pairs(d: &crate::arrange::Dendrogram) -> Vec<(usize, usize)> {
    d.merges
        .iter()
        .map(|m| {
            let la = d.leaves_under(m.a)[0];
            let lb = d.leaves_under(m.b)[0];
            (la, lb)
        })
        .collect()
}

/// Hierarchical clustering of graph nodes on edge-weight similarity
/// (absent edges count as similarity 0). The cut count maximizes the mean
/// silhouette over `k` in `[2, min(6, p - 1)]`; graphs with at most two
/// nodes fall back to a single cluster.
pub fn cluster_nodes(g: &ViviGraph) -> Result<Vec<usize>> {
    let n = g.nodes.len();
    if n == 0 {
        return Err(Error::arg("cannot cluster an empty graph"));
    }
    if n <= 2 {
        return Ok(vec![0; n]);
    }
    let max_w = g.edges.iter().map(|e| e.weight).fold(0.0, f64::max);
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i * n + j] = max_w - g.weight_between(i, j);
            }
        }
    }
    let dendro = linkage_cluster(&d, n, Linkage::Average)?;
    let merges = merge_pairs(&dendro);
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for k in 2..=(6usize.min(n - 1)) {
        let labels = cut_labels(&merges, n, k);
        let score = silhouette(&d, n, &labels, k);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, k, labels));
        }
    }
    Ok(best.map(|(_, _, labels)| labels).unwrap_or_else(|| vec![0; n]))
}

/// One step of an Eulerian trail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerStep {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    /// True when this step re-traverses an edge (a duplicated copy inserted
    /// to repair odd degrees).
    pub revisited: bool,
}

/// Trail of one connected component: `nodes.len() == steps.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trail {
    pub nodes: Vec<usize>,
    pub steps: Vec<EulerStep>,
}

/// Eulerian trails for all components, in descending order of component
/// maximum edge weight. Component boundaries are the trail boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerSequence {
    pub node_names: Vec<String>,
    pub trails: Vec<Trail>,
}

impl EulerSequence {
    pub fn total_steps(&self) -> usize {
        self.trails.iter().map(|t| t.steps.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes") + "\n"
    }
}

/// Multigraph edge instance during trail construction.
#[derive(Debug, Clone, Copy)]
struct Inst {
    a: usize,
    b: usize,
    weight: f64,
    dup: bool,
}

impl Inst {
    fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

struct TrailBuilder {
    insts: Vec<Inst>,
    /// Incident instance ids per node, sorted by (weight desc, neighbour asc,
    /// id asc); greedy steps take the first unused entry.
    adj: Vec<Vec<usize>>,
}

impl TrailBuilder {
    fn new(n_nodes: usize, insts: Vec<Inst>) -> Self {
        let mut adj = vec![Vec::new(); n_nodes];
        for (id, inst) in insts.iter().enumerate() {
            adj[inst.a].push(id);
            adj[inst.b].push(id);
        }
        for (node, list) in adj.iter_mut().enumerate() {
            list.sort_by(|&x, &y| {
                insts[y]
                    .weight
                    .partial_cmp(&insts[x].weight)
                    .unwrap()
                    .then(insts[x].other(node).cmp(&insts[y].other(node)))
                    .then(x.cmp(&y))
            });
        }
        TrailBuilder { insts, adj }
    }

    fn greedy_next(&self, node: usize, used: &[bool]) -> Option<usize> {
        self.adj[node].iter().copied().find(|&id| !used[id])
    }

    /// Attempts a trail from `start` whose first step is `first`. Splices
    /// leftover closed subwalks at positions >= 1 so the first step is
    /// preserved; fails when edges remain unreachable that way.
    fn attempt(&self, start: usize, first: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut used = vec![false; self.insts.len()];
        let mut nodes = vec![start];
        let mut trail = Vec::new();
        used[first] = true;
        nodes.push(self.insts[first].other(start));
        trail.push(first);
        let mut at = *nodes.last().unwrap();
        while let Some(id) = self.greedy_next(at, &used) {
            used[id] = true;
            at = self.insts[id].other(at);
            nodes.push(at);
            trail.push(id);
        }
        loop {
            let mut spliced = false;
            for pos in 1..nodes.len() {
                let v = nodes[pos];
                if self.greedy_next(v, &used).is_none() {
                    continue;
                }
                let mut sub_nodes = Vec::new();
                let mut sub_trail = Vec::new();
                let mut cur = v;
                while let Some(id) = self.greedy_next(cur, &used) {
                    used[id] = true;
                    cur = self.insts[id].other(cur);
                    sub_nodes.push(cur);
                    sub_trail.push(id);
                }
                if cur != v {
                    // Open subwalk: this start/first-edge choice cannot give
                    // a valid trail.
                    return None;
                }
                let tail_nodes: Vec<usize> = nodes.splice(pos + 1..pos + 1, sub_nodes).collect();
                debug_assert!(tail_nodes.is_empty());
                let tail_trail: Vec<usize> = trail.splice(pos..pos, sub_trail).collect();
                debug_assert!(tail_trail.is_empty());
                spliced = true;
                break;
            }
            if !spliced {
                break;
            }
        }
        if used.iter().all(|&u| u) {
            Some((nodes, trail))
        } else {
            None
        }
    }
}

/// All-pairs-lite Dijkstra with edge length 1/weight, over one component.
fn shortest_path(
    n_nodes: usize,
    edges: &[(usize, usize, f64)],
    from: usize,
    to: usize,
) -> Option<(f64, Vec<usize>)> {
    let mut dist = vec![f64::INFINITY; n_nodes];
    let mut prev_edge = vec![usize::MAX; n_nodes];
    let mut done = vec![false; n_nodes];
    dist[from] = 0.0;
    loop {
        let mut cur = usize::MAX;
        for v in 0..n_nodes {
            if !done[v]
                && dist[v].is_finite()
                && (cur == usize::MAX || dist[v] < dist[cur])
            {
                cur = v;
            }
        }
        if cur == usize::MAX {
            break;
        }
        if cur == to {
            break;
        }
        done[cur] = true;
        for (eid, &(a, b, w)) in edges.iter().enumerate() {
            let next = if a == cur {
                b
            } else if b == cur {
                a
            } else {
                continue;
            };
            let cand = dist[cur] + 1.0 / w;
            if cand < dist[next] {
                dist[next] = cand;
                prev_edge[next] = eid;
            }
        }
    }
    if !dist[to].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut at = to;
    while at != from {
        let eid = prev_edge[at];
        path.push(eid);
        let (a, b, _) = edges[eid];
        at = if a == at { b } else { a };
    }
    path.reverse();
    Some((dist[to], path))
}

/// Greedy Eulerian trails over the filtered interaction graph.
pub fn eulerian(g: &ViviGraph) -> Result<EulerSequence> {
    if g.edges.is_empty() {
        return Err(Error::arg("the graph has no edges to traverse"));
    }
    let n = g.nodes.len();

    // Connected components over nodes with edges.
    let mut comp = vec![usize::MAX; n];
    let mut n_comps = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = n_comps;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for e in &g.edges {
                let next = if e.a == v {
                    e.b
                } else if e.b == v {
                    e.a
                } else {
                    continue;
                };
                if comp[next] == usize::MAX {
                    comp[next] = n_comps;
                    stack.push(next);
                }
            }
        }
        n_comps += 1;
    }

    let mut component_trails: Vec<(f64, usize, Trail)> = Vec::new();
    for c in 0..n_comps {
        let edges: Vec<(usize, usize, f64)> = g
            .edges
            .iter()
            .filter(|e| comp[e.a] == c)
            .map(|e| (e.a, e.b, e.weight))
            .collect();
        if edges.is_empty() {
            continue;
        }
        let max_w = edges.iter().map(|&(_, _, w)| w).fold(f64::NEG_INFINITY, f64::max);
        let min_node = edges.iter().map(|&(a, b, _)| a.min(b)).min().unwrap();
        let trail = component_trail(n, &edges, max_w)?;
        component_trails.push((max_w, min_node, trail));
    }
    component_trails.sort_by(|x, y| {
        y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1))
    });

    Ok(EulerSequence {
        node_names: g.nodes.iter().map(|nd| nd.name.clone()).collect(),
        trails: component_trails.into_iter().map(|(_, _, t)| t).collect(),
    })
}

fn component_trail(
    n_nodes: usize,
    edges: &[(usize, usize, f64)],
    max_w: f64,
) -> Result<Trail> {
    let mut insts: Vec<Inst> =
        edges.iter().map(|&(a, b, weight)| Inst { a, b, weight, dup: false }).collect();

    let degree = |insts: &[Inst]| -> Vec<usize> {
        let mut deg = vec![0usize; n_nodes];
        for i in insts {
            deg[i.a] += 1;
            deg[i.b] += 1;
        }
        deg
    };
    let odd_nodes = |insts: &[Inst]| -> Vec<usize> {
        degree(insts)
            .iter()
            .enumerate()
            .filter(|&(_, d)| d % 2 == 1)
            .map(|(v, _)| v)
            .collect()
    };

    // Pair up odd vertices (cheapest inverse-weight path first) by
    // duplicating the connecting edges, until at most two remain.
    let mut odds = odd_nodes(&insts);
    while odds.len() > 2 {
        let mut best: Option<(f64, usize, usize, Vec<usize>)> = None;
        for x in 0..odds.len() {
            for y in (x + 1)..odds.len() {
                let (u, v) = (odds[x], odds[y]);
                if let Some((cost, path)) = shortest_path(n_nodes, edges, u, v) {
                    let better = match &best {
                        None => true,
                        Some((bc, bu, bv, _)) => {
                            cost < *bc || (cost == *bc && (u, v) < (*bu, *bv))
                        }
                    };
                    if better {
                        best = Some((cost, u, v, path));
                    }
                }
            }
        }
        let (_, _, _, path) =
            best.ok_or_else(|| Error::arg("odd vertices are not connected"))?;
        for eid in path {
            let (a, b, weight) = edges[eid];
            insts.push(Inst { a, b, weight, dup: true });
        }
        odds = odd_nodes(&insts);
    }

    // Candidate starts: both endpoints of every maximum-weight edge.
    let attempt_all = |insts: &[Inst]| -> Option<(Vec<usize>, Vec<usize>)> {
        let builder = TrailBuilder::new(n_nodes, insts.to_vec());
        let mut candidates: Vec<usize> = (0..insts.len())
            .filter(|&i| !insts[i].dup && insts[i].weight == max_w)
            .collect();
        candidates.sort_by_key(|&i| (insts[i].a.min(insts[i].b), insts[i].a.max(insts[i].b)));
        for inst_id in candidates {
            let e = insts[inst_id];
            for start in [e.a.min(e.b), e.a.max(e.b)] {
                if let Some(found) = builder.attempt(start, inst_id) {
                    return Some(found);
                }
            }
        }
        None
    };

    let walk = match attempt_all(&insts) {
        Some(w) => w,
        None => {
            // Two stubborn odd vertices: make the component even by
            // duplicating the cheapest path between them, then re-run.
            let odds = odd_nodes(&insts);
            debug_assert_eq!(odds.len(), 2);
            let (_, path) = shortest_path(n_nodes, edges, odds[0], odds[1])
                .ok_or_else(|| Error::arg("odd vertices are not connected"))?;
            for eid in path {
                let (a, b, weight) = edges[eid];
                insts.push(Inst { a, b, weight, dup: true });
            }
            attempt_all(&insts).ok_or_else(|| {
                Error::arg("internal: even component must admit a trail")
            })?
        }
    };

    let (nodes, trail) = walk;
    // A step is a revisit when its edge id (variable pair) appeared earlier.
    let mut seen_pair: Vec<(usize, usize)> = Vec::new();
    let mut steps = Vec::with_capacity(trail.len());
    for (i, &inst_id) in trail.iter().enumerate() {
        let inst = insts[inst_id];
        let pair = (inst.a.min(inst.b), inst.a.max(inst.b));
        let revisited = seen_pair.contains(&pair);
        seen_pair.push(pair);
        steps.push(EulerStep {
            from: nodes[i],
            to: nodes[i + 1],
            weight: inst.weight,
            revisited,
        });
    }
    Ok(Trail { nodes, steps })
}
