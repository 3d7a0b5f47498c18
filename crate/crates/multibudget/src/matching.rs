//! Matching polytope machinery and the 2-budgeted matching scheme.
//!
//! The pipeline per guess of heavy edges: solve the budgeted matching LP to
//! a certified vertex (degree and odd-set inequalities by brute-force
//! separation), express the vertex as a convex combination of at most three
//! matchings, then patch pairs of matchings together along the auxiliary
//! cycle of their symmetric difference. The patching step walks a
//! polygonal curve of interpolated lengths and uses the curve rotation to
//! hit the interpolation point exactly, so the final matching is never
//! longer than the fractional optimum in either budget.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::curve::{find_intersection, Point2, PolygonalCurve2};
use crate::error::{Error, Result};
use crate::instance::{BudgetedInstance, GraphSpec, GroundSpec};
use crate::lp::{solve_with_separation, Row, SeparationProblem, VertexSolution};
use crate::numeric::{Rat, RatMatrix, RatVec};
use crate::{oracle, Limits};

/// Edge set with pairwise-disjoint endpoints, checked at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    edges: BTreeSet<usize>,
}

impl Matching {
    pub fn new(graph: &GraphSpec, edges: BTreeSet<usize>) -> Result<Self> {
        if !graph.is_matching(edges.iter().copied())? {
            return Err(Error::InvalidInstance(
                "edge set is not a matching".into(),
            ));
        }
        Ok(Matching { edges })
    }

    pub fn empty() -> Self {
        Matching {
            edges: BTreeSet::new(),
        }
    }

    pub fn edges(&self) -> &BTreeSet<usize> {
        &self.edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }

    pub fn characteristic(&self, m: usize) -> RatVec {
        let mut x = vec![Rat::zero(); m];
        for &e in &self.edges {
            x[e] = Rat::one();
        }
        RatVec::new(x)
    }
}

/// A 2-budgeted matching problem over a subset of a graph's edges.
/// Reductions (after guessing heavy edges) shrink `active` and the budgets
/// but keep the full edge indexing, so fractional vectors stay m-long.
pub struct MatchingProblem<'a> {
    pub graph: &'a GraphSpec,
    pub weights: &'a RatVec,
    pub lengths: &'a RatMatrix,
    pub budgets: RatVec,
    pub active: Vec<usize>,
}

impl<'a> MatchingProblem<'a> {
    pub fn from_instance(inst: &'a BudgetedInstance) -> Result<Self> {
        let GroundSpec::Matching { graph } = inst.ground() else {
            return Err(Error::InvalidParameter(
                "this solver needs a matching ground structure".into(),
            ));
        };
        if inst.budget_count() != 2 {
            return Err(Error::InvalidParameter(format!(
                "this solver expects exactly 2 budgets, got {}",
                inst.budget_count()
            )));
        }
        Ok(MatchingProblem {
            graph,
            weights: inst.weights(),
            lengths: inst.lengths(),
            budgets: inst.budgets().clone(),
            active: (0..inst.element_count()).collect(),
        })
    }

    /// Residual problem after committing to `guess`: its endpoints leave
    /// the graph, heavier-than-guess edges leave the pool, and the budgets
    /// shrink by the guess lengths.
    pub fn reduced(inst: &'a BudgetedInstance, guess: &Matching) -> Result<Self> {
        let mut problem = Self::from_instance(inst)?;
        let guess_lengths = inst.lengths_of(guess.edges())?;
        problem.budgets = RatVec::new(
            inst.budgets()
                .iter()
                .zip(guess_lengths.iter())
                .map(|(cap, used)| cap - used)
                .collect(),
        );
        if problem.budgets.iter().any(Rat::is_negative) {
            return Err(Error::InvalidParameter(
                "guess exceeds the budgets".into(),
            ));
        }
        let mut blocked = vec![false; problem.graph.node_count()];
        for &e in guess.edges() {
            let (u, v) = problem.graph.endpoints(e)?;
            blocked[u] = true;
            blocked[v] = true;
        }
        let weight_cap = guess
            .edges()
            .iter()
            .map(|&e| inst.weights()[e].clone())
            .min();
        problem.active = (0..inst.element_count())
            .filter(|&e| !guess.contains(e))
            .filter(|&e| {
                let (u, v) = problem.graph.endpoints(e).expect("validated");
                !blocked[u] && !blocked[v]
            })
            .filter(|&e| match &weight_cap {
                Some(cap) => inst.weights()[e] <= *cap,
                None => true,
            })
            .collect();
        Ok(problem)
    }

    /// Largest weight among the edges still in play.
    pub fn w_max(&self) -> Rat {
        self.active
            .iter()
            .map(|&e| self.weights[e].clone())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// `(l1^T x, l2^T x)` for a full-length fractional vector.
    pub fn lengths_dot(&self, x: &RatVec) -> Result<RatVec> {
        self.lengths.transpose_mul(x)
    }

    pub fn weight_dot(&self, x: &RatVec) -> Result<Rat> {
        self.weights.dot(x)
    }

    fn active_nodes(&self) -> Vec<usize> {
        let mut present = vec![false; self.graph.node_count()];
        for &e in &self.active {
            let (u, v) = self.graph.endpoints(e).expect("validated");
            present[u] = true;
            present[v] = true;
        }
        (0..self.graph.node_count())
            .filter(|&v| present[v])
            .collect()
    }
}

/// Fractional point of the matching polytope (degree and odd-set
/// inequalities verified exhaustively at construction).
#[derive(Debug, Clone)]
pub struct FractionalMatching {
    x: RatVec,
}

impl FractionalMatching {
    pub fn new(problem: &MatchingProblem, x: RatVec, limits: &Limits) -> Result<Self> {
        let m = problem.graph.edge_count();
        if x.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: x.len(),
            });
        }
        for (e, v) in x.iter().enumerate() {
            if v.is_negative() || *v > Rat::one() {
                return Err(Error::InvalidParameter(format!(
                    "x[{e}] = {v} outside [0, 1]"
                )));
            }
            if v.is_positive() && !problem.active.contains(&e) {
                return Err(Error::InvalidParameter(format!(
                    "x[{e}] positive outside the active edge set"
                )));
            }
        }
        if let Some(violation) = separate_matching(problem, &x, limits)? {
            return Err(Error::InvalidParameter(format!(
                "point lies outside the matching polytope: {violation:?}"
            )));
        }
        Ok(FractionalMatching { x })
    }

    pub fn x(&self) -> &RatVec {
        &self.x
    }
}

/// Optimal dual multipliers of the two budget rows at an optimal matching
/// LP vertex, bundled with the data needed to evaluate Lagrangian weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagrangianDuals {
    pub lambda: Vec<Rat>,
    pub budgets: Vec<Rat>,
    /// Weight of the optimal LP vertex the duals certify.
    pub w_star: Rat,
}

/// `L(x) = w^T x - lambda . (l^T x - L)`; maximized at `w_star` over the
/// matching polytope, and equal to `w_star` on every optimal-face point.
pub fn lagrangian_weight(
    problem: &MatchingProblem,
    x: &RatVec,
    duals: &LagrangianDuals,
) -> Result<Rat> {
    let lengths = problem.lengths_dot(x)?;
    let mut value = problem.weight_dot(x)?;
    for i in 0..2 {
        value -= &(&duals.lambda[i] * &(&lengths[i] - &duals.budgets[i]));
    }
    Ok(value)
}

#[derive(Debug)]
enum MatchingViolation {
    Degree { node: usize },
    OddSet { nodes: Vec<usize> },
}

/// Most-violated degree or odd-set inequality at `x`, or `None` if `x` lies
/// in the matching polytope. Scans all odd subsets of the nodes touched by
/// active edges.
fn separate_matching(
    problem: &MatchingProblem,
    x: &RatVec,
    limits: &Limits,
) -> Result<Option<MatchingViolation>> {
    let nodes = problem.active_nodes();
    if nodes.len() > limits.odd_set_nodes {
        return Err(Error::ResourceBound(format!(
            "odd-set separation limited to {} nodes, got {}",
            limits.odd_set_nodes,
            nodes.len()
        )));
    }
    let mut best: Option<(Rat, MatchingViolation)> = None;
    let mut consider = |excess: Rat, v: MatchingViolation| {
        if excess.is_positive() && best.as_ref().map_or(true, |(b, _)| excess > *b) {
            best = Some((excess, v));
        }
    };
    let endpoints: Vec<(usize, usize)> = (0..problem.graph.edge_count())
        .map(|e| problem.graph.endpoints(e))
        .collect::<Result<_>>()?;
    for &v in &nodes {
        let mut total = Rat::zero();
        for &e in &problem.active {
            let (a, b) = endpoints[e];
            if a == v || b == v {
                total += &x[e];
            }
        }
        consider(total - Rat::one(), MatchingViolation::Degree { node: v });
    }
    let node_pos: std::collections::HashMap<usize, usize> =
        nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for mask in 1u64..(1 << nodes.len()) {
        let size = mask.count_ones() as usize;
        if size < 3 || size % 2 == 0 {
            continue;
        }
        let mut inside = Rat::zero();
        for &e in &problem.active {
            let (a, b) = endpoints[e];
            let a_in = node_pos.get(&a).is_some_and(|&i| mask >> i & 1 == 1);
            let b_in = node_pos.get(&b).is_some_and(|&i| mask >> i & 1 == 1);
            if a_in && b_in {
                inside += &x[e];
            }
        }
        let cap = Rat::from_int(((size - 1) / 2) as i64);
        consider(
            inside - cap,
            MatchingViolation::OddSet {
                nodes: nodes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect(),
            },
        );
    }
    Ok(best.map(|(_, v)| v))
}

pub struct MatchingLpOutcome {
    /// Full-length optimal vertex (zeros on inactive edges).
    pub x: RatVec,
    pub vertex: VertexSolution,
    pub duals: LagrangianDuals,
}

/// Maximum-weight point of the matching polytope under the two budget
/// rows, solved to a certified vertex with budget duals.
pub fn matching_lp_vertex(
    problem: &MatchingProblem,
    limits: &Limits,
) -> Result<MatchingLpOutcome> {
    let m = problem.graph.edge_count();
    let expand = |pos_x: &RatVec| -> RatVec {
        let mut full = vec![Rat::zero(); m];
        for (pos, &e) in problem.active.iter().enumerate() {
            full[e] = pos_x[pos].clone();
        }
        RatVec::new(full)
    };
    let endpoints: Vec<(usize, usize)> = (0..m)
        .map(|e| problem.graph.endpoints(e))
        .collect::<Result<_>>()?;
    let objective: RatVec = problem
        .active
        .iter()
        .map(|&e| problem.weights[e].clone())
        .collect();
    let budget_rows: Vec<Row> = (0..2)
        .map(|i| {
            let coeffs: RatVec = problem
                .active
                .iter()
                .map(|&e| problem.lengths.entry(e, i).clone())
                .collect();
            Row::le(coeffs, problem.budgets[i].clone())
        })
        .collect();
    let sep = |pos_x: &RatVec| -> Result<Option<Row>> {
        let full = expand(pos_x);
        let violation = separate_matching(problem, &full, limits)?;
        Ok(violation.map(|v| match v {
            MatchingViolation::Degree { node } => {
                let coeffs: RatVec = problem
                    .active
                    .iter()
                    .map(|&e| {
                        let (a, b) = endpoints[e];
                        if a == node || b == node {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect();
                Row::le(coeffs, Rat::one())
            }
            MatchingViolation::OddSet { nodes } => {
                let inside: BTreeSet<usize> = nodes.into_iter().collect();
                let coeffs: RatVec = problem
                    .active
                    .iter()
                    .map(|&e| {
                        let (a, b) = endpoints[e];
                        if inside.contains(&a) && inside.contains(&b) {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect();
                Row::le(coeffs, Rat::from_int(((inside.len() - 1) / 2) as i64))
            }
        }))
    };
    let outcome = solve_with_separation(
        SeparationProblem {
            objective,
            budget_rows,
            oracle: Box::new(sep),
        },
        limits,
    )?;
    let x = expand(&outcome.solution.x);
    let duals = LagrangianDuals {
        lambda: vec![
            outcome.solution.duals[0].clone(),
            outcome.solution.duals[1].clone(),
        ],
        budgets: problem.budgets.iter().cloned().collect(),
        w_star: outcome.solution.objective_value.clone(),
    };
    Ok(MatchingLpOutcome {
        x,
        vertex: outcome.solution,
        duals,
    })
}

/// Convex decomposition of a low-face polytope point into at most three
/// matchings: repeatedly find an integral vertex of the minimal face
/// containing the current point and peel off the largest multiple.
pub fn decompose_three(
    problem: &MatchingProblem,
    point: &FractionalMatching,
    limits: &Limits,
) -> Result<Vec<(Rat, Matching)>> {
    let m = problem.graph.edge_count();
    let endpoints: Vec<(usize, usize)> = (0..m)
        .map(|e| problem.graph.endpoints(e))
        .collect::<Result<_>>()?;
    let mut x = point.x().clone();
    let mut remaining = Rat::one();
    let mut terms: Vec<(Rat, Matching)> = Vec::new();

    for _round in 0..3 {
        if x.is_integral() {
            let edges: BTreeSet<usize> =
                (0..m).filter(|&e| x[e] == Rat::one()).collect();
            let z = Matching::new(problem.graph, edges)?;
            if !remaining.is_zero() {
                terms.push((remaining, z));
            }
            return Ok(terms);
        }
        let support: Vec<usize> = (0..m).filter(|&e| x[e].is_positive()).collect();
        let nodes = problem.active_nodes();
        if nodes.len() > limits.odd_set_nodes {
            return Err(Error::ResourceBound(format!(
                "decomposition limited to {} nodes",
                limits.odd_set_nodes
            )));
        }
        let degree = |x: &RatVec, v: usize| -> Rat {
            support_degree(&support, &endpoints, x, v)
        };
        let tight_nodes: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|&v| degree(&x, v) == Rat::one())
            .collect();
        let tight_odd_sets = tight_odd_sets(&nodes, &support, &endpoints, &x);

        let z = first_face_vertex(
            &support,
            &endpoints,
            &tight_nodes,
            &tight_odd_sets,
            problem.graph.node_count(),
        )
        .ok_or_else(|| {
            Error::InvariantViolation("no integral vertex on the minimal face".into())
        })?;
        let z = Matching::new(problem.graph, z)?;

        // largest step keeping (x - alpha z) / (1 - alpha) in the polytope
        let mut alpha: Option<Rat> = None;
        let mut shrink = |bound: Rat| {
            if alpha.as_ref().map_or(true, |a| bound < *a) {
                alpha = Some(bound);
            }
        };
        for &e in z.edges() {
            shrink(x[e].clone());
        }
        for &v in &nodes {
            let matched = z.edges().iter().any(|&e| {
                let (a, b) = endpoints[e];
                a == v || b == v
            });
            if !matched {
                shrink(Rat::one() - degree(&x, v));
            }
        }
        for (set_nodes, cap) in all_odd_sets(&nodes) {
            let in_set = |v: usize| set_nodes.contains(&v);
            let mut x_inside = Rat::zero();
            for &e in &support {
                let (a, b) = endpoints[e];
                if in_set(a) && in_set(b) {
                    x_inside += &x[e];
                }
            }
            let z_inside = z
                .edges()
                .iter()
                .filter(|&&e| {
                    let (a, b) = endpoints[e];
                    in_set(a) && in_set(b)
                })
                .count();
            let cap = Rat::from_int(cap as i64);
            let z_inside = Rat::from_int(z_inside as i64);
            if z_inside < cap {
                let bound = (&cap - &x_inside)
                    .checked_div(&(&cap - &z_inside))
                    .expect("cap > z_inside");
                shrink(bound);
            }
        }
        let alpha = alpha.unwrap_or_else(Rat::one);
        if !alpha.is_positive() || alpha >= Rat::one() {
            return Err(Error::InvariantViolation(format!(
                "degenerate peel step alpha = {alpha}"
            )));
        }
        let share = &remaining * &alpha;
        let chi = z.characteristic(m);
        let scale = Rat::one().checked_div(&(Rat::one() - &alpha))?;
        x = RatVec::new(
            (0..m)
                .map(|e| (&x[e] - &(&alpha * &chi[e])) * &scale)
                .collect(),
        );
        remaining = &remaining * &(Rat::one() - &alpha);
        terms.push((share, z));
    }
    Err(Error::InvariantViolation(
        "point needed more than three matchings; its face dimension exceeds two".into(),
    ))
}

fn support_degree(
    support: &[usize],
    endpoints: &[(usize, usize)],
    x: &RatVec,
    v: usize,
) -> Rat {
    let mut total = Rat::zero();
    for &e in support {
        let (a, b) = endpoints[e];
        if a == v || b == v {
            total += &x[e];
        }
    }
    total
}

fn all_odd_sets(nodes: &[usize]) -> Vec<(BTreeSet<usize>, usize)> {
    let mut out = Vec::new();
    for mask in 1u64..(1 << nodes.len()) {
        let size = mask.count_ones() as usize;
        if size < 3 || size % 2 == 0 {
            continue;
        }
        let set: BTreeSet<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        out.push((set, (size - 1) / 2));
    }
    out
}

fn tight_odd_sets(
    nodes: &[usize],
    support: &[usize],
    endpoints: &[(usize, usize)],
    x: &RatVec,
) -> Vec<(BTreeSet<usize>, usize)> {
    all_odd_sets(nodes)
        .into_iter()
        .filter(|(set, cap)| {
            let mut inside = Rat::zero();
            for &e in support {
                let (a, b) = endpoints[e];
                if set.contains(&a) && set.contains(&b) {
                    inside += &x[e];
                }
            }
            inside == Rat::from_int(*cap as i64)
        })
        .collect()
}

/// First matching (in DFS order over the support) lying on the minimal
/// face: it must match every tight node and fill every tight odd set.
fn first_face_vertex(
    support: &[usize],
    endpoints: &[(usize, usize)],
    tight_nodes: &[usize],
    tight_odd_sets: &[(BTreeSet<usize>, usize)],
    node_count: usize,
) -> Option<BTreeSet<usize>> {
    fn dfs(
        support: &[usize],
        endpoints: &[(usize, usize)],
        tight_nodes: &[usize],
        tight_odd_sets: &[(BTreeSet<usize>, usize)],
        idx: usize,
        used: &mut Vec<bool>,
        chosen: &mut BTreeSet<usize>,
    ) -> Option<BTreeSet<usize>> {
        if idx == support.len() {
            let all_matched = tight_nodes.iter().all(|&v| used[v]);
            let sets_full = tight_odd_sets.iter().all(|(set, cap)| {
                let inside = chosen
                    .iter()
                    .filter(|&&e| {
                        let (a, b) = endpoints[e];
                        set.contains(&a) && set.contains(&b)
                    })
                    .count();
                inside == *cap
            });
            return (all_matched && sets_full).then(|| chosen.clone());
        }
        let e = support[idx];
        let (a, b) = endpoints[e];
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            chosen.insert(e);
            if let Some(hit) = dfs(
                support,
                endpoints,
                tight_nodes,
                tight_odd_sets,
                idx + 1,
                used,
                chosen,
            ) {
                return Some(hit);
            }
            chosen.remove(&e);
            used[a] = false;
            used[b] = false;
        }
        dfs(
            support,
            endpoints,
            tight_nodes,
            tight_odd_sets,
            idx + 1,
            used,
            chosen,
        )
    }
    let mut used = vec![false; node_count];
    let mut chosen = BTreeSet::new();
    dfs(
        support,
        endpoints,
        tight_nodes,
        tight_odd_sets,
        0,
        &mut used,
        &mut chosen,
    )
}

/// One alternating component of a symmetric difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffComponent {
    pub is_cycle: bool,
    /// Edge ids in traversal order: paths from their smaller endpoint,
    /// cycles cut at their smallest edge id toward the smaller neighbor.
    pub edges: Vec<usize>,
}

/// Node-disjoint alternating paths and cycles of `x' Δ x''`, sorted by
/// smallest edge id.
pub fn sym_diff_decompose(
    graph: &GraphSpec,
    x1: &Matching,
    x2: &Matching,
) -> Result<Vec<DiffComponent>> {
    let diff: BTreeSet<usize> = x1
        .edges()
        .symmetric_difference(x2.edges())
        .copied()
        .collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); graph.node_count()];
    for &e in &diff {
        let (u, v) = graph.endpoints(e)?;
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut components = Vec::new();
    for &seed in &diff {
        if seen.contains(&seed) {
            continue;
        }
        // gather the component of the seed edge
        let mut comp_edges = BTreeSet::new();
        let mut stack = vec![seed];
        while let Some(e) = stack.pop() {
            if !comp_edges.insert(e) {
                continue;
            }
            let (u, v) = graph.endpoints(e)?;
            for &next in incident[u].iter().chain(&incident[v]) {
                if !comp_edges.contains(&next) {
                    stack.push(next);
                }
            }
        }
        seen.extend(comp_edges.iter().copied());

        // classify and orient
        let mut local_degree: std::collections::HashMap<usize, Vec<usize>> =
            std::collections::HashMap::new();
        for &e in &comp_edges {
            let (u, v) = graph.endpoints(e)?;
            local_degree.entry(u).or_default().push(e);
            local_degree.entry(v).or_default().push(e);
        }
        let mut path_ends: Vec<usize> = local_degree
            .iter()
            .filter(|(_, es)| es.len() == 1)
            .map(|(&v, _)| v)
            .collect();
        path_ends.sort_unstable();
        let is_cycle = path_ends.is_empty();
        let mut ordered = Vec::with_capacity(comp_edges.len());
        let mut used: BTreeSet<usize> = BTreeSet::new();
        if is_cycle {
            let first = *comp_edges.iter().next().expect("nonempty");
            let (u, v) = graph.endpoints(first)?;
            // walk toward the smaller-id neighbor of the starting edge
            let neighbor = |node: usize, exclude: usize| -> usize {
                *local_degree[&node]
                    .iter()
                    .find(|&&e| e != exclude)
                    .expect("cycle degree 2")
            };
            let (next_u, next_v) = (neighbor(u, first), neighbor(v, first));
            let mut node = if next_u < next_v { u } else { v };
            ordered.push(first);
            used.insert(first);
            let mut prev = first;
            while ordered.len() < comp_edges.len() {
                let e = neighbor(node, prev);
                ordered.push(e);
                used.insert(e);
                let (a, b) = graph.endpoints(e)?;
                node = if a == node { b } else { a };
                prev = e;
            }
        } else {
            let mut node = path_ends[0];
            while ordered.len() < comp_edges.len() {
                let e = *local_degree[&node]
                    .iter()
                    .find(|e| !used.contains(e))
                    .expect("path continues");
                ordered.push(e);
                used.insert(e);
                let (a, b) = graph.endpoints(e)?;
                node = if a == node { b } else { a };
            }
        }
        components.push(DiffComponent {
            is_cycle,
            edges: ordered,
        });
    }
    components.sort_by_key(|c| c.edges.iter().min().copied());
    Ok(components)
}

/// Cyclic edge order covering a symmetric difference: the components'
/// traversal orders concatenated. Consecutive entries are either adjacent
/// inside their component or belong to different components (the single
/// glued seam of a lone path being the one exception).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxCycle {
    order: Vec<usize>,
}

impl AuxCycle {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub fn build_aux_cycle(components: &[DiffComponent]) -> AuxCycle {
    AuxCycle {
        order: components
            .iter()
            .flat_map(|c| c.edges.iter().copied())
            .collect(),
    }
}

/// Fractional vector that becomes a matching after zeroing at most two
/// certified components.
#[derive(Debug, Clone)]
pub struct AlmostMatching {
    pub y: RatVec,
    /// Edge ids whose zeroing restores a matching (at most two).
    pub certificate: Vec<usize>,
}

impl AlmostMatching {
    fn validated(graph: &GraphSpec, y: RatVec, certificate: Vec<usize>) -> Result<Self> {
        let mut zeroed = y.clone();
        for &e in &certificate {
            zeroed.set(e, Rat::zero());
        }
        if !zeroed.is_integral() {
            return Err(Error::InvariantViolation(
                "certificate leaves fractional components".into(),
            ));
        }
        let edges: Vec<usize> = (0..zeroed.len())
            .filter(|&e| zeroed[e] == Rat::one())
            .collect();
        if !graph.is_matching(edges)? {
            return Err(Error::InvariantViolation(
                "certificate-zeroed vector is not a matching".into(),
            ));
        }
        Ok(AlmostMatching { y, certificate })
    }
}

/// Prefix indicator of the auxiliary cycle: position `i` carries 1 below
/// `floor(u)`, the fractional part at `floor(u)`, and 0 above.
fn prefix_vector(aux: &AuxCycle, u: &Rat) -> Vec<Rat> {
    let tau = aux.len();
    let whole = u.floor_usize().expect("parameter nonnegative");
    let frac = u - &u.floor();
    let mut s = vec![Rat::zero(); tau];
    for (i, entry) in s.iter_mut().enumerate() {
        if i < whole {
            *entry = Rat::one();
        } else if i == whole && i < tau {
            *entry = frac.clone();
        }
    }
    s
}

/// The rotated arc indicator `s^a(t)` over aux-cycle positions.
fn arc_vector(aux: &AuxCycle, a: &Rat, t: &Rat) -> Vec<Rat> {
    let tau = Rat::from_int(aux.len() as i64);
    let wrap = a + t;
    if wrap <= tau {
        let s_end = prefix_vector(aux, &wrap);
        let s_start = prefix_vector(aux, a);
        s_end
            .into_iter()
            .zip(s_start)
            .map(|(hi, lo)| hi - lo)
            .collect()
    } else {
        let s_end = prefix_vector(aux, &(&wrap - &tau));
        let s_start = prefix_vector(aux, a);
        s_end
            .into_iter()
            .zip(s_start)
            .map(|(hi, lo)| hi + Rat::one() - lo)
            .collect()
    }
}

/// `y^a(t) = x' Δ s^a(t)`: the interpolated 2-almost matching at arc
/// parameters `(a, t)`, certified on the two arc-boundary edges.
pub fn almost_matching_at(
    graph: &GraphSpec,
    x1: &Matching,
    aux: &AuxCycle,
    a: &Rat,
    t: &Rat,
) -> Result<AlmostMatching> {
    let tau_int = aux.len();
    let tau = Rat::from_int(tau_int as i64);
    if a.is_negative() || *a > tau || t.is_negative() || *t > tau {
        return Err(Error::InvalidParameter(format!(
            "arc parameters ({a}, {t}) outside [0, {tau}]"
        )));
    }
    if tau_int == 0 {
        return AlmostMatching::validated(
            graph,
            x1.characteristic(graph.edge_count()),
            Vec::new(),
        );
    }
    let s = arc_vector(aux, a, t);
    let mut y: Vec<Rat> = x1.characteristic(graph.edge_count()).into_iter().collect();
    for (i, &e) in aux.order().iter().enumerate() {
        let base = if x1.contains(e) {
            Rat::one()
        } else {
            Rat::zero()
        };
        y[e] = (&base - &s[i]).abs();
    }
    let first = a.floor_usize().expect("checked") % tau_int;
    let wrap = a + t;
    let wrapped = if wrap >= tau { &wrap - &tau } else { wrap };
    let second = wrapped.floor_usize().expect("checked") % tau_int;
    let mut certificate = vec![aux.order()[first]];
    if aux.order()[second] != aux.order()[first] {
        certificate.push(aux.order()[second]);
    }
    AlmostMatching::validated(graph, RatVec::new(y), certificate)
}

/// Corresponding matching of an almost matching: drop the fractional
/// components, then take a maximal matching in the remaining edges
/// greedily by descending weight (ties toward smaller edge ids). The
/// greedy order is what bounds the loss to two maximal weights.
pub fn to_matching(problem: &MatchingProblem, y: &AlmostMatching) -> Result<Matching> {
    let mut pool: Vec<usize> = (0..y.y.len())
        .filter(|&e| y.y[e] == Rat::one())
        .collect();
    pool.sort_by(|&a, &b| {
        problem.weights[b]
            .cmp(&problem.weights[a])
            .then(a.cmp(&b))
    });
    let mut used = vec![false; problem.graph.node_count()];
    let mut chosen = BTreeSet::new();
    for e in pool {
        let (u, v) = problem.graph.endpoints(e)?;
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            chosen.insert(e);
        }
    }
    let z = Matching::new(problem.graph, chosen)?;
    // exact loss bound against the fractional vector
    let w_max = problem.w_max();
    let zw = problem.weight_dot(&z.characteristic(problem.graph.edge_count()))?;
    let yw = problem.weight_dot(&y.y)?;
    if zw < &yw - &(Rat::from_int(2) * &w_max) {
        return Err(Error::InvariantViolation(format!(
            "matching weight {zw} fell more than two maxima below {yw}"
        )));
    }
    Ok(z)
}

pub struct PatchOutcome {
    pub matching: Matching,
    /// `w^T z - (w^T x_mu - 2 w_max - Gamma)`, nonnegative by construction.
    pub weight_slack: Rat,
    /// `l^T x_mu - l^T z` per budget, nonnegative by construction.
    pub length_slack: Vec<Rat>,
    /// Arc parameters chosen on the interpolation curve (`None` when the
    /// two matchings coincide and no curve was needed).
    pub arc: Option<(Rat, Rat)>,
}

/// The patching procedure: given matchings with Lagrangian weight at least
/// `w_star - gamma`, produce one matching no longer than the convex
/// combination `x_mu` in either length, and lighter by at most
/// `2 w_max + gamma`.
pub fn patch(
    problem: &MatchingProblem,
    x1: &Matching,
    x2: &Matching,
    mu: &Rat,
    duals: &LagrangianDuals,
    gamma: &Rat,
) -> Result<PatchOutcome> {
    if mu.is_negative() || *mu > Rat::one() {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in [0, 1], got {mu}"
        )));
    }
    let m = problem.graph.edge_count();
    let chi1 = x1.characteristic(m);
    let chi2 = x2.characteristic(m);
    let threshold = &duals.w_star - gamma;
    for (label, chi) in [("first", &chi1), ("second", &chi2)] {
        let lw = lagrangian_weight(problem, chi, duals)?;
        if lw < threshold {
            return Err(Error::InvalidParameter(format!(
                "{label} matching has Lagrangian weight {lw} below {threshold}"
            )));
        }
    }
    let x_mu: RatVec = (0..m)
        .map(|e| mu * &chi1[e] + (Rat::one() - mu) * &chi2[e])
        .collect();
    let mu_lengths = problem.lengths_dot(&x_mu)?;
    let mu_weight = problem.weight_dot(&x_mu)?;
    let w_max = problem.w_max();

    if x1 == x2 {
        let z_lengths = problem.lengths_dot(&chi1)?;
        return Ok(PatchOutcome {
            weight_slack: problem.weight_dot(&chi1)? - (&mu_weight - Rat::from_int(2) * &w_max - gamma),
            length_slack: (0..2).map(|i| &mu_lengths[i] - &z_lengths[i]).collect(),
            matching: x1.clone(),
            arc: None,
        });
    }

    let components = sym_diff_decompose(problem.graph, x1, x2)?;
    let aux = build_aux_cycle(&components);
    let tau = aux.len();

    // interpolated-lengths curve, one unit per aux-cycle edge
    let mut points = Vec::with_capacity(tau + 1);
    let mut current = {
        let l = problem.lengths_dot(&chi1)?;
        Point2::new(l[0].clone(), l[1].clone())
    };
    points.push(current.clone());
    for &e in aux.order() {
        let sign = if x1.contains(e) {
            -Rat::one()
        } else {
            Rat::one()
        };
        current = Point2::new(
            &current.x + &(problem.lengths.entry(e, 0) * &sign),
            &current.y + &(problem.lengths.entry(e, 1) * &sign),
        );
        points.push(current.clone());
    }
    let f = PolygonalCurve2::from_points(points)?;
    let (a, t) = find_intersection(&f, mu)?;

    let y = almost_matching_at(problem.graph, x1, &aux, &a, &t)?;
    let y_lengths = problem.lengths_dot(&y.y)?;
    if y_lengths.entries() != mu_lengths.entries() {
        return Err(Error::InvariantViolation(
            "almost matching misses the interpolated lengths".into(),
        ));
    }
    let z = to_matching(problem, &y)?;
    let chi_z = z.characteristic(m);
    let z_lengths = problem.lengths_dot(&chi_z)?;
    let z_weight = problem.weight_dot(&chi_z)?;
    for i in 0..2 {
        if z_lengths[i] > mu_lengths[i] {
            return Err(Error::InvariantViolation(format!(
                "patched matching longer than the interpolation in budget {i}"
            )));
        }
    }
    let floor = &mu_weight - &(Rat::from_int(2) * &w_max) - gamma;
    if z_weight < floor {
        return Err(Error::InvariantViolation(format!(
            "patched matching weight {z_weight} below the guaranteed {floor}"
        )));
    }
    Ok(PatchOutcome {
        weight_slack: &z_weight - &floor,
        length_slack: (0..2).map(|i| &mu_lengths[i] - &z_lengths[i]).collect(),
        matching: z,
        arc: Some((a, t)),
    })
}

/// Per-guess trace record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingGuessRecord {
    pub guess: Vec<usize>,
    pub w_star: Rat,
    pub lambda: Vec<Rat>,
    pub alphas: Vec<Rat>,
    pub mus: Vec<Rat>,
    pub weight_slacks: Vec<Rat>,
    pub candidate: Vec<usize>,
    pub weight: Rat,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct TwoBudgetOutcome {
    pub chosen: BTreeSet<usize>,
    pub weight: Rat,
    pub records: Vec<MatchingGuessRecord>,
}

/// The 2-budgeted matching scheme: guess up to `6/eps` heavy edges, reduce,
/// solve the budgeted matching LP, decompose the vertex into at most three
/// matchings, patch them pairwise, and keep the best feasible union.
/// Requires `6/eps` to be a positive integer; guarantees weight at least
/// `(1 - eps) * OPT`.
pub fn solve_2budget_matching(
    inst: &BudgetedInstance,
    eps: &Rat,
    limits: &Limits,
    jobs: usize,
) -> Result<TwoBudgetOutcome> {
    MatchingProblem::from_instance(inst)?; // validates ground and budget count
    let guess_cap = matching_guess_size(eps)?;
    let mut guesses: Vec<BTreeSet<usize>> = Vec::new();
    oracle::for_each_solution(inst, true, limits, &mut |set, _, _| {
        if set.len() <= guess_cap {
            guesses.push(set.clone());
        }
    })?;

    let evaluate =
        |guess: &BTreeSet<usize>| -> Result<MatchingGuessRecord> { evaluate_matching_guess(inst, guess, limits) };
    let records: Vec<MatchingGuessRecord> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            guesses.par_iter().map(evaluate).collect::<Result<_>>()
        })?
    } else {
        guesses.iter().map(evaluate).collect::<Result<_>>()?
    };

    let mut best: Option<(Rat, BTreeSet<usize>)> = None;
    for rec in &records {
        if !rec.feasible {
            return Err(Error::InvariantViolation(
                "candidate violates a budget despite the patching chain".into(),
            ));
        }
        let candidate: BTreeSet<usize> = rec.candidate.iter().copied().collect();
        let better = match &best {
            None => true,
            Some((bw, bs)) => rec.weight > *bw || (rec.weight == *bw && candidate < *bs),
        };
        if better {
            best = Some((rec.weight.clone(), candidate));
        }
    }
    let (weight, chosen) = best.expect("the empty guess always yields a candidate");
    Ok(TwoBudgetOutcome {
        chosen,
        weight,
        records,
    })
}

/// Guess size `6/eps`, required to be a positive integer.
pub fn matching_guess_size(eps: &Rat) -> Result<usize> {
    if !eps.is_positive() || *eps > Rat::one() {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    let six_over = Rat::from_int(6).checked_div(eps)?;
    if !six_over.is_integer() {
        return Err(Error::InvalidParameter(format!(
            "6/eps must be an integer, got eps = {eps}"
        )));
    }
    six_over
        .floor_usize()
        .ok_or_else(|| Error::InvalidParameter("guess size 6/eps does not fit in usize".into()))
}

fn evaluate_matching_guess(
    inst: &BudgetedInstance,
    guess_edges: &BTreeSet<usize>,
    limits: &Limits,
) -> Result<MatchingGuessRecord> {
    let GroundSpec::Matching { graph } = inst.ground() else {
        unreachable!("validated by the caller")
    };
    let guess = Matching::new(graph, guess_edges.clone())?;
    let problem = MatchingProblem::reduced(inst, &guess)?;
    let lp = matching_lp_vertex(&problem, limits)?;
    let fractional = FractionalMatching::new(&problem, lp.x.clone(), limits)?;
    let terms = decompose_three(&problem, &fractional, limits)?;
    let alphas: Vec<Rat> = terms.iter().map(|(a, _)| a.clone()).collect();

    let mut mus = Vec::new();
    let mut weight_slacks = Vec::new();
    let z_final = match terms.len() {
        0 => Matching::empty(),
        1 => terms[0].1.clone(),
        len @ (2 | 3) => {
            let head = &alphas[0] + &alphas[1];
            let mu1 = alphas[0].checked_div(&head)?;
            mus.push(mu1.clone());
            let first = patch(&problem, &terms[0].1, &terms[1].1, &mu1, &lp.duals, &Rat::zero())?;
            weight_slacks.push(first.weight_slack.clone());
            if len == 2 {
                first.matching
            } else {
                let mu2 = head; // alphas sum to one
                mus.push(mu2.clone());
                let gamma = Rat::from_int(2) * problem.w_max();
                let second = patch(
                    &problem,
                    &first.matching,
                    &terms[2].1,
                    &mu2,
                    &lp.duals,
                    &gamma,
                )?;
                weight_slacks.push(second.weight_slack.clone());
                second.matching
            }
        }
        n => {
            return Err(Error::InvariantViolation(format!(
                "decomposition produced {n} terms"
            )))
        }
    };

    let mut candidate: BTreeSet<usize> = guess_edges.clone();
    candidate.extend(z_final.edges().iter().copied());
    let weight = inst.weight_of(&candidate)?;
    let feasible = inst.feasible(&candidate)?;
    Ok(MatchingGuessRecord {
        guess: guess_edges.iter().copied().collect(),
        w_star: lp.duals.w_star.clone(),
        lambda: lp.duals.lambda.clone(),
        alphas,
        mus,
        weight_slacks,
        candidate: candidate.iter().copied().collect(),
        weight,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{GadgetKind, RandomGroundKind, RandomInstanceParams};

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn rv(entries: &[&str]) -> RatVec {
        entries.iter().map(|s| rat(s)).collect()
    }

    fn limits() -> Limits {
        Limits::default()
    }

    fn matching_instance(
        n: usize,
        edges: Vec<(usize, usize)>,
        weights: &[&str],
        l1: &[&str],
        l2: &[&str],
        budgets: (&str, &str),
    ) -> BudgetedInstance {
        let graph = GraphSpec::new(n, edges).unwrap();
        let rows: Vec<RatVec> = l1
            .iter()
            .zip(l2)
            .map(|(a, b)| rv(&[a, b]))
            .collect();
        BudgetedInstance::new(
            rv(weights),
            RatMatrix::new(rows, 2).unwrap(),
            rv(&[budgets.0, budgets.1]),
            GroundSpec::Matching { graph },
        )
        .unwrap()
    }

    fn triangle(budgets: (&str, &str)) -> BudgetedInstance {
        matching_instance(
            3,
            vec![(0, 1), (1, 2), (2, 0)],
            &["1", "1", "1"],
            &["1", "1", "1"],
            &["1", "1", "1"],
            budgets,
        )
    }

    #[test]
    fn slack_budgets_hit_max_weight_matching() {
        let inst = matching_instance(
            4,
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            &["3", "5", "2", "4"],
            &["1", "1", "1", "1"],
            &["1", "1", "1", "1"],
            ("10", "10"),
        );
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let lp = matching_lp_vertex(&problem, &limits()).unwrap();
        let (brute, _) = oracle::brute_opt(&inst, &limits()).unwrap().unwrap();
        assert!(lp.x.is_integral());
        assert_eq!(lp.duals.w_star, brute);
    }

    #[test]
    fn tight_budget_gives_fractional_vertex() {
        let inst = triangle(("1/2", "2"));
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let lp = matching_lp_vertex(&problem, &limits()).unwrap();
        assert_eq!(lp.duals.w_star, rat("1/2"));
        assert_eq!(lp.x, rv(&["1/2", "0", "0"]));
        assert!(lp.duals.lambda[0].is_positive());
    }

    #[test]
    fn odd_set_cut_caps_the_triangle() {
        let inst = triangle(("5", "5"));
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let lp = matching_lp_vertex(&problem, &limits()).unwrap();
        assert_eq!(lp.duals.w_star, rat("1"));
        assert!(lp.x.is_integral());
    }

    #[test]
    fn empty_graph_solves_to_zero() {
        let inst = matching_instance(2, vec![], &[], &[], &[], ("1", "1"));
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let lp = matching_lp_vertex(&problem, &limits()).unwrap();
        assert_eq!(lp.x.len(), 0);
        assert!(lp.duals.w_star.is_zero());
        assert!(lp.duals.lambda.iter().all(Rat::is_zero));
    }

    #[test]
    fn lagrangian_weight_reduces_to_plain_weight() {
        let inst = triangle(("5", "5"));
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let duals = LagrangianDuals {
            lambda: vec![Rat::zero(), Rat::zero()],
            budgets: vec![rat("5"), rat("5")],
            w_star: rat("1"),
        };
        let x = rv(&["1", "0", "0"]);
        assert_eq!(lagrangian_weight(&problem, &x, &duals).unwrap(), rat("1"));
    }

    #[test]
    fn decomposition_members_share_the_optimal_lagrangian_weight() {
        let inst = triangle(("1/2", "2"));
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let lp = matching_lp_vertex(&problem, &limits()).unwrap();
        let fm = FractionalMatching::new(&problem, lp.x.clone(), &limits()).unwrap();
        let terms = decompose_three(&problem, &fm, &limits()).unwrap();
        assert!(!terms.is_empty() && terms.len() <= 3);
        // exact reconstruction
        let m = inst.element_count();
        let mut recombined = RatVec::zeros(m);
        let mut total = Rat::zero();
        for (alpha, z) in &terms {
            total += alpha;
            let chi = z.characteristic(m);
            recombined = recombined.add(&chi.scale(alpha)).unwrap();
        }
        assert_eq!(total, Rat::one());
        assert_eq!(recombined, lp.x);
        for (_, z) in &terms {
            let lw =
                lagrangian_weight(&problem, &z.characteristic(m), &lp.duals).unwrap();
            assert_eq!(lw, lp.duals.w_star);
        }
    }

    #[test]
    fn integral_point_decomposes_to_itself() {
        let inst = triangle(("5", "5"));
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let x = rv(&["1", "0", "0"]);
        let fm = FractionalMatching::new(&problem, x.clone(), &limits()).unwrap();
        let terms = decompose_three(&problem, &fm, &limits()).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, Rat::one());
        assert_eq!(terms[0].1.characteristic(3), x);
    }

    #[test]
    fn midpoint_of_two_matchings_decomposes_evenly() {
        let inst = matching_instance(
            4,
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            &["1", "1", "1", "1"],
            &["1", "1", "1", "1"],
            &["1", "1", "1", "1"],
            ("4", "4"),
        );
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let x = rv(&["1/2", "1/2", "1/2", "1/2"]);
        let fm = FractionalMatching::new(&problem, x, &limits()).unwrap();
        let terms = decompose_three(&problem, &fm, &limits()).unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].0, rat("1/2"));
        assert_eq!(terms[1].0, rat("1/2"));
    }

    fn c4_matchings(inst: &BudgetedInstance) -> (Matching, Matching) {
        let GroundSpec::Matching { graph } = inst.ground() else {
            unreachable!()
        };
        let m1 = Matching::new(graph, [0, 2].into_iter().collect()).unwrap();
        let m2 = Matching::new(graph, [1, 3].into_iter().collect()).unwrap();
        (m1, m2)
    }

    fn c4_instance() -> BudgetedInstance {
        matching_instance(
            4,
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            &["2", "1", "3", "1"],
            &["1", "2", "1", "1"],
            &["2", "1", "1", "2"],
            ("4", "4"),
        )
    }

    #[test]
    fn symmetric_difference_of_equal_matchings_is_empty() {
        let inst = c4_instance();
        let GroundSpec::Matching { graph } = inst.ground() else {
            unreachable!()
        };
        let (m1, _) = c4_matchings(&inst);
        assert!(sym_diff_decompose(graph, &m1, &m1).unwrap().is_empty());
    }

    #[test]
    fn perfect_matchings_of_c4_differ_by_one_cycle() {
        let inst = c4_instance();
        let GroundSpec::Matching { graph } = inst.ground() else {
            unreachable!()
        };
        let (m1, m2) = c4_matchings(&inst);
        let comps = sym_diff_decompose(graph, &m1, &m2).unwrap();
        assert_eq!(comps.len(), 1);
        assert!(comps[0].is_cycle);
        assert_eq!(comps[0].edges, vec![0, 1, 2, 3]);
        let aux = build_aux_cycle(&comps);
        assert_eq!(aux.order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn components_alternate_and_stay_node_disjoint() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for round in 0..40 {
            let params = RandomInstanceParams {
                nodes: Some(8),
                ..RandomInstanceParams::new(RandomGroundKind::Matching, 10, 2, round)
            };
            let inst = crate::instance::random_instance(&params, &limits()).unwrap();
            let GroundSpec::Matching { graph } = inst.ground() else {
                unreachable!()
            };
            // two random matchings by greedy over shuffled edges
            let mut draw = || {
                let mut edges: Vec<usize> = (0..inst.element_count()).collect();
                for i in (1..edges.len()).rev() {
                    edges.swap(i, rng.gen_range(0..=i));
                }
                let mut used = vec![false; graph.node_count()];
                let mut chosen = BTreeSet::new();
                for e in edges {
                    let (u, v) = graph.endpoints(e).unwrap();
                    if !used[u] && !used[v] && rng.gen_bool(0.7) {
                        used[u] = true;
                        used[v] = true;
                        chosen.insert(e);
                    }
                }
                Matching::new(graph, chosen).unwrap()
            };
            let m1 = draw();
            let m2 = draw();
            let comps = sym_diff_decompose(graph, &m1, &m2).unwrap();
            let mut seen_nodes = BTreeSet::new();
            for comp in &comps {
                // edges alternate between the two matchings
                for pair in comp.edges.windows(2) {
                    assert_ne!(m1.contains(pair[0]), m1.contains(pair[1]));
                }
                let mut comp_nodes = BTreeSet::new();
                for &e in &comp.edges {
                    let (u, v) = graph.endpoints(e).unwrap();
                    comp_nodes.insert(u);
                    comp_nodes.insert(v);
                }
                for v in comp_nodes {
                    assert!(seen_nodes.insert(v), "components share node {v}");
                }
            }
        }
    }

    #[test]
    fn aux_cycle_concatenates_sorted_components() {
        let a = DiffComponent {
            is_cycle: false,
            edges: vec![4, 6],
        };
        let b = DiffComponent {
            is_cycle: false,
            edges: vec![1, 3],
        };
        let aux = build_aux_cycle(&[b.clone(), a.clone()]);
        assert_eq!(aux.order(), &[1, 3, 4, 6]);
        let single = build_aux_cycle(&[a]);
        assert_eq!(single.order(), &[4, 6]);
    }

    #[test]
    fn interpolation_endpoints_reproduce_the_matchings() {
        let inst = c4_instance();
        let GroundSpec::Matching { graph } = inst.ground() else {
            unreachable!()
        };
        let (m1, m2) = c4_matchings(&inst);
        let comps = sym_diff_decompose(graph, &m1, &m2).unwrap();
        let aux = build_aux_cycle(&comps);
        let tau = Rat::from_int(aux.len() as i64);
        for a in ["0", "1", "3/2", "4"] {
            let a = rat(a);
            let at_zero = almost_matching_at(graph, &m1, &aux, &a, &rat("0")).unwrap();
            assert_eq!(at_zero.y, m1.characteristic(4));
            let at_tau = almost_matching_at(graph, &m1, &aux, &a, &tau).unwrap();
            assert_eq!(at_tau.y, m2.characteristic(4));
        }
    }

    /// Every integer arc is a valid 2-almost matching (the constructor
    /// checks the certificate exactly).
    #[test]
    fn integer_arcs_are_two_almost_matchings() {
        let inst = matching_instance(
            6,
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)],
            &["1", "2", "1", "2", "1", "2", "3"],
            &["1", "1", "2", "1", "1", "2", "1"],
            &["2", "1", "1", "2", "1", "1", "1"],
            ("9", "9"),
        );
        let GroundSpec::Matching { graph } = inst.ground() else {
            unreachable!()
        };
        let m1 = Matching::new(graph, [0, 2, 4].into_iter().collect()).unwrap();
        let m2 = Matching::new(graph, [1, 3, 5].into_iter().collect()).unwrap();
        let comps = sym_diff_decompose(graph, &m1, &m2).unwrap();
        let aux = build_aux_cycle(&comps);
        let tau = aux.len();
        for a in 0..=tau {
            for t in 0..=tau {
                let y = almost_matching_at(
                    graph,
                    &m1,
                    &aux,
                    &Rat::from_int(a as i64),
                    &Rat::from_int(t as i64),
                )
                .unwrap();
                assert!(y.y.is_integral());
                assert!(y.certificate.len() <= 2);
            }
        }
    }

    #[test]
    fn to_matching_keeps_integral_inputs() {
        let inst = c4_instance();
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let (m1, _) = c4_matchings(&inst);
        let y = AlmostMatching {
            y: m1.characteristic(4),
            certificate: vec![],
        };
        let z = to_matching(&problem, &y).unwrap();
        assert_eq!(&z, &m1);
    }

    #[test]
    fn to_matching_drops_fractional_edges() {
        let inst = c4_instance();
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let y = AlmostMatching {
            y: rv(&["1", "0", "1/2", "0"]),
            certificate: vec![2],
        };
        let z = to_matching(&problem, &y).unwrap();
        assert_eq!(z.edges().iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn patch_of_equal_matchings_returns_them() {
        let inst = c4_instance();
        let problem = MatchingProblem::from_instance(&inst).unwrap();
        let (m1, _) = c4_matchings(&inst);
        let duals = LagrangianDuals {
            lambda: vec![Rat::zero(), Rat::zero()],
            budgets: vec![rat("4"), rat("4")],
            w_star: problem
                .weight_dot(&m1.characteristic(4))
                .unwrap(),
        };
        let out = patch(&problem, &m1, &m1, &rat("1/3"), &duals, &Rat::zero()).unwrap();
        assert_eq!(&out.matching, &m1);
    }

    /// Drive the patching chain off real LP vertices; all exactness
    /// guarantees are asserted inside `patch`.
    #[test]
    fn patching_chain_on_seeded_instances() {
        let limits = limits();
        for seed in 0..15u64 {
            let params = RandomInstanceParams {
                nodes: Some(7),
                ..RandomInstanceParams::new(RandomGroundKind::Matching, 9, 2, seed)
            };
            let inst = crate::instance::random_instance(&params, &limits).unwrap();
            let problem = MatchingProblem::from_instance(&inst).unwrap();
            let lp = matching_lp_vertex(&problem, &limits).unwrap();
            let fm = FractionalMatching::new(&problem, lp.x.clone(), &limits).unwrap();
            let terms = decompose_three(&problem, &fm, &limits).unwrap();
            if terms.len() < 2 {
                continue;
            }
            let head = &terms[0].0 + &terms[1].0;
            let mu = terms[0].0.checked_div(&head).unwrap();
            let out = patch(&problem, &terms[0].1, &terms[1].1, &mu, &lp.duals, &Rat::zero())
                .unwrap();
            assert!(!out.weight_slack.is_negative());
            assert!(out.length_slack.iter().all(|s| !s.is_negative()));
        }
    }

    #[test]
    fn full_guess_reaches_the_exact_optimum() {
        // eps = 1 guesses up to six edges, covering every optimum here
        let limits = limits();
        let inst = c4_instance();
        let out = solve_2budget_matching(&inst, &rat("1"), &limits, 1).unwrap();
        let (brute, _) = oracle::brute_opt(&inst, &limits).unwrap().unwrap();
        assert_eq!(out.weight, brute);
        assert!(inst.feasible(&out.chosen).unwrap());
    }

    #[test]
    fn approximation_on_seeded_instances() {
        let limits = limits();
        for seed in [3u64, 11, 27] {
            let params = RandomInstanceParams {
                nodes: Some(6),
                ..RandomInstanceParams::new(RandomGroundKind::Matching, 8, 2, seed)
            };
            let inst = crate::instance::random_instance(&params, &limits).unwrap();
            for eps in ["1", "1/2"] {
                let eps = rat(eps);
                let out = solve_2budget_matching(&inst, &eps, &limits, 1).unwrap();
                assert!(inst.feasible(&out.chosen).unwrap());
                let (brute, _) = oracle::brute_opt(&inst, &limits).unwrap().unwrap();
                assert!(
                    out.weight >= (Rat::one() - &eps) * &brute,
                    "seed {seed}: got {} against optimum {brute}",
                    out.weight
                );
            }
        }
    }

    #[test]
    fn eps_validation_for_matchings() {
        assert_eq!(matching_guess_size(&rat("1")).unwrap(), 6);
        assert_eq!(matching_guess_size(&rat("1/2")).unwrap(), 12);
        assert_eq!(matching_guess_size(&rat("3/4")).unwrap(), 8);
        assert!(matching_guess_size(&rat("5/7")).is_err());
        assert!(matching_guess_size(&rat("0")).is_err());
        let inst = triangle(("1", "1"));
        assert!(matches!(
            solve_2budget_matching(&inst, &rat("5/7"), &limits(), 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn wrong_budget_count_is_rejected() {
        let gadget = crate::instance::partition_gadget(
            GadgetKind::SpanningTree,
            &[rat("1")],
            &rat("1"),
            None,
        )
        .unwrap();
        assert!(matches!(
            MatchingProblem::from_instance(&gadget),
            Err(Error::InvalidParameter(_))
        ));
    }
}
