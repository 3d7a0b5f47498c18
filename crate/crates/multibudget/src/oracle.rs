//! Brute-force ground truth: exact optima, Pareto sets, and subset-sum
//! feasibility. Every approximation guarantee in the crate is checked
//! against these enumerators.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BudgetedInstance, GroundSpec};
use crate::matroid::RankOracle;
use crate::numeric::{Rat, RatVec};
use crate::Limits;

/// One nondominated objective vector with a witness solution. When several
/// solutions share the same objectives the lexicographically smallest
/// witness is kept.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub weight: Rat,
    pub lengths: RatVec,
    pub witness: BTreeSet<usize>,
}

struct Enumerator<'a> {
    inst: &'a BudgetedInstance,
    respect_budgets: bool,
    steps: u64,
    step_cap: u64,
    current: BTreeSet<usize>,
    weight: Rat,
    lengths: Vec<Rat>,
}

impl<'a> Enumerator<'a> {
    fn new(inst: &'a BudgetedInstance, respect_budgets: bool, limits: &Limits) -> Self {
        Enumerator {
            inst,
            respect_budgets,
            steps: 0,
            step_cap: limits.enumeration_steps,
            current: BTreeSet::new(),
            weight: Rat::zero(),
            lengths: vec![Rat::zero(); inst.budget_count()],
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.step_cap {
            return Err(Error::ResourceBound(format!(
                "solution enumeration exceeded {} steps",
                self.step_cap
            )));
        }
        Ok(())
    }

    fn fits_budgets_with(&self, e: usize) -> bool {
        if !self.respect_budgets {
            return true;
        }
        let row = self.inst.lengths().row(e);
        self.lengths
            .iter()
            .zip(row.iter())
            .zip(self.inst.budgets().iter())
            .all(|((cur, add), cap)| &(cur + add) <= cap)
    }

    fn push(&mut self, e: usize) {
        self.current.insert(e);
        self.weight += &self.inst.weights()[e];
        let row = self.inst.lengths().row(e);
        for (cur, add) in self.lengths.iter_mut().zip(row.iter()) {
            *cur += add;
        }
    }

    fn pop(&mut self, e: usize) {
        self.current.remove(&e);
        self.weight -= &self.inst.weights()[e];
        let row = self.inst.lengths().row(e);
        for (cur, add) in self.lengths.iter_mut().zip(row.iter()) {
            *cur -= add;
        }
    }

    fn emit(&self, f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat])) {
        f(&self.current, &self.weight, &self.lengths);
    }
}

/// Visits every solution of the instance's ground family, optionally pruned
/// to the budget-feasible ones. Pruning is sound because lengths are
/// nonnegative: a partial solution over budget can never recover.
pub(crate) fn for_each_solution(
    inst: &BudgetedInstance,
    respect_budgets: bool,
    limits: &Limits,
    f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat]),
) -> Result<()> {
    let mut en = Enumerator::new(inst, respect_budgets, limits);
    match inst.ground() {
        GroundSpec::Matroid { spec } => {
            let oracle = RankOracle::new(spec.clone())?;
            independence_dfs(&mut en, 0, f, &mut |en, e| {
                let mut trial = en.current.clone();
                trial.insert(e);
                oracle.independent(&trial)
            })
        }
        GroundSpec::Matching { graph } => {
            let endpoints: Vec<(usize, usize)> = (0..graph.edge_count())
                .map(|e| graph.endpoints(e))
                .collect::<Result<_>>()?;
            let mut used = vec![false; graph.node_count()];
            matching_dfs(&mut en, 0, &endpoints, &mut used, f)
        }
        GroundSpec::Forest { graph } => {
            let g = graph.clone();
            independence_dfs(&mut en, 0, f, &mut |en, e| {
                g.is_forest(en.current.iter().copied().chain([e]))
            })
        }
        GroundSpec::SpanningTree { graph } => {
            if graph.node_count() == 0 {
                return Ok(());
            }
            let g = graph.clone();
            spanning_tree_dfs(&mut en, 0, &g, f)
        }
        GroundSpec::PerfectMatching { graph } => {
            let g = graph.clone();
            let mut used = vec![false; g.node_count()];
            perfect_matching_dfs(&mut en, &g, &mut used, f)
        }
        GroundSpec::Path { graph, s, t } => {
            let g = graph.clone();
            let incidence = g.incidence();
            let mut visited = vec![false; g.node_count()];
            visited[*s] = true;
            path_dfs(&mut en, &g, &incidence, *s, *t, &mut visited, f)
        }
    }
}

/// Down-closed families: every DFS node is itself a solution.
fn independence_dfs(
    en: &mut Enumerator,
    start: usize,
    f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat]),
    can_add: &mut dyn FnMut(&Enumerator, usize) -> Result<bool>,
) -> Result<()> {
    en.tick()?;
    en.emit(f);
    for e in start..en.inst.element_count() {
        if !en.fits_budgets_with(e) || !can_add(en, e)? {
            continue;
        }
        en.push(e);
        independence_dfs(en, e + 1, f, can_add)?;
        en.pop(e);
    }
    Ok(())
}

fn matching_dfs(
    en: &mut Enumerator,
    start: usize,
    endpoints: &[(usize, usize)],
    used: &mut Vec<bool>,
    f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat]),
) -> Result<()> {
    en.tick()?;
    en.emit(f);
    for e in start..endpoints.len() {
        let (u, v) = endpoints[e];
        if used[u] || used[v] || !en.fits_budgets_with(e) {
            continue;
        }
        used[u] = true;
        used[v] = true;
        en.push(e);
        matching_dfs(en, e + 1, endpoints, used, f)?;
        en.pop(e);
        used[u] = false;
        used[v] = false;
    }
    Ok(())
}

fn spanning_tree_dfs(
    en: &mut Enumerator,
    start: usize,
    graph: &crate::instance::GraphSpec,
    f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat]),
) -> Result<()> {
    en.tick()?;
    let needed = graph.node_count() - 1;
    if en.current.len() == needed {
        en.emit(f);
        return Ok(());
    }
    let remaining = graph.edge_count().saturating_sub(start);
    if en.current.len() + remaining < needed {
        return Ok(());
    }
    for e in start..graph.edge_count() {
        if !en.fits_budgets_with(e) {
            continue;
        }
        if !graph.is_forest(en.current.iter().copied().chain([e]))? {
            continue;
        }
        en.push(e);
        spanning_tree_dfs(en, e + 1, graph, f)?;
        en.pop(e);
    }
    Ok(())
}

fn perfect_matching_dfs(
    en: &mut Enumerator,
    graph: &crate::instance::GraphSpec,
    used: &mut Vec<bool>,
    f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat]),
) -> Result<()> {
    en.tick()?;
    let Some(node) = used.iter().position(|u| !u) else {
        en.emit(f);
        return Ok(());
    };
    for e in 0..graph.edge_count() {
        let (u, v) = graph.endpoints(e)?;
        if u != node && v != node {
            continue;
        }
        let other = if u == node { v } else { u };
        if used[other] || !en.fits_budgets_with(e) {
            continue;
        }
        used[node] = true;
        used[other] = true;
        en.push(e);
        perfect_matching_dfs(en, graph, used, f)?;
        en.pop(e);
        used[node] = false;
        used[other] = false;
    }
    Ok(())
}

fn path_dfs(
    en: &mut Enumerator,
    graph: &crate::instance::GraphSpec,
    incidence: &[Vec<usize>],
    node: usize,
    target: usize,
    visited: &mut Vec<bool>,
    f: &mut dyn FnMut(&BTreeSet<usize>, &Rat, &[Rat]),
) -> Result<()> {
    en.tick()?;
    if node == target {
        en.emit(f);
        return Ok(());
    }
    for &e in &incidence[node] {
        if en.current.contains(&e) || !en.fits_budgets_with(e) {
            continue;
        }
        let (u, v) = graph.endpoints(e)?;
        let next = if u == node { v } else { u };
        if visited[next] {
            continue;
        }
        visited[next] = true;
        en.push(e);
        path_dfs(en, graph, incidence, next, target, visited, f)?;
        en.pop(e);
        visited[next] = false;
    }
    Ok(())
}

/// Exact optimum of the budgeted instance, or `None` when no solution meets
/// the budgets (possible only for the non-down-closed families). Ties are
/// broken toward the lexicographically smallest witness.
pub fn brute_opt(
    inst: &BudgetedInstance,
    limits: &Limits,
) -> Result<Option<(Rat, BTreeSet<usize>)>> {
    let mut best: Option<(Rat, BTreeSet<usize>)> = None;
    for_each_solution(inst, true, limits, &mut |set, weight, _| {
        let better = match &best {
            None => true,
            Some((bw, bs)) => weight > bw || (weight == bw && set < bs),
        };
        if better {
            best = Some((weight.clone(), set.clone()));
        }
    })?;
    Ok(best)
}

/// Complete Pareto set of the unbudgeted multi-objective problem
/// (maximize weight, minimize every length), sorted by weight descending.
pub fn pareto_enumerate(inst: &BudgetedInstance, limits: &Limits) -> Result<Vec<ParetoPoint>> {
    // one witness per distinct objective vector, lexicographically smallest
    let mut by_objective: BTreeMap<(Rat, Vec<Rat>), BTreeSet<usize>> = BTreeMap::new();
    for_each_solution(inst, false, limits, &mut |set, weight, lengths| {
        let key = (weight.clone(), lengths.to_vec());
        match by_objective.get_mut(&key) {
            Some(witness) => {
                if set < witness {
                    *witness = set.clone();
                }
            }
            None => {
                by_objective.insert(key, set.clone());
            }
        }
    })?;
    let points: Vec<ParetoPoint> = by_objective
        .into_iter()
        .map(|((weight, lengths), witness)| ParetoPoint {
            weight,
            lengths: RatVec::new(lengths),
            witness,
        })
        .collect();
    let mut front: Vec<ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p)))
        .cloned()
        .collect();
    front.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then_with(|| a.lengths.entries().cmp(b.lengths.entries()))
            .then_with(|| a.witness.cmp(&b.witness))
    });
    Ok(front)
}

fn dominates(p: &ParetoPoint, q: &ParetoPoint) -> bool {
    if p.weight < q.weight {
        return false;
    }
    if p
        .lengths
        .iter()
        .zip(q.lengths.iter())
        .any(|(pl, ql)| pl > ql)
    {
        return false;
    }
    p.weight > q.weight
        || p.lengths
            .iter()
            .zip(q.lengths.iter())
            .any(|(pl, ql)| pl < ql)
}

/// True iff some subset of `alphas` sums exactly to `target`. DFS with
/// suffix-range pruning; exact rationals throughout.
pub fn partition_bruteforce(alphas: &[Rat], target: &Rat, limits: &Limits) -> Result<bool> {
    if alphas.len() > limits.partition_items {
        return Err(Error::ResourceBound(format!(
            "subset-sum limited to {} items, got {}",
            limits.partition_items,
            alphas.len()
        )));
    }
    // suffix_lo[i] / suffix_hi[i]: least / greatest achievable sum of items i..
    let n = alphas.len();
    let mut suffix_lo = vec![Rat::zero(); n + 1];
    let mut suffix_hi = vec![Rat::zero(); n + 1];
    for i in (0..n).rev() {
        let a = &alphas[i];
        suffix_lo[i] = if a.is_negative() {
            &suffix_lo[i + 1] + a
        } else {
            suffix_lo[i + 1].clone()
        };
        suffix_hi[i] = if a.is_positive() {
            &suffix_hi[i + 1] + a
        } else {
            suffix_hi[i + 1].clone()
        };
    }
    fn dfs(
        alphas: &[Rat],
        suffix_lo: &[Rat],
        suffix_hi: &[Rat],
        i: usize,
        acc: &Rat,
        target: &Rat,
    ) -> bool {
        if acc == target {
            return true;
        }
        if i == alphas.len() {
            return false;
        }
        let lo = acc + &suffix_lo[i];
        let hi = acc + &suffix_hi[i];
        if target < &lo || target > &hi {
            return false;
        }
        dfs(
            alphas,
            suffix_lo,
            suffix_hi,
            i + 1,
            &(acc + &alphas[i]),
            target,
        ) || dfs(alphas, suffix_lo, suffix_hi, i + 1, acc, target)
    }
    Ok(dfs(
        alphas,
        &suffix_lo,
        &suffix_hi,
        0,
        &Rat::zero(),
        target,
    ))
}

/// Componentwise (min, max) achievable lengths over the ground family, or
/// `None` when the family is empty. Used to draw nontrivial budgets.
pub fn length_extremes(
    inst: &BudgetedInstance,
    limits: &Limits,
) -> Result<Option<(RatVec, RatVec)>> {
    let mut extremes: Option<(Vec<Rat>, Vec<Rat>)> = None;
    for_each_solution(inst, false, limits, &mut |_, _, lengths| {
        match &mut extremes {
            None => extremes = Some((lengths.to_vec(), lengths.to_vec())),
            Some((mins, maxs)) => {
                for ((lo, hi), l) in mins.iter_mut().zip(maxs.iter_mut()).zip(lengths) {
                    if l < lo {
                        *lo = l.clone();
                    }
                    if l > hi {
                        *hi = l.clone();
                    }
                }
            }
        }
    })?;
    Ok(extremes.map(|(lo, hi)| (RatVec::new(lo), RatVec::new(hi))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::GraphSpec;
    use crate::matroid::{greedy_max_weight, MatroidSpec};
    use crate::numeric::RatMatrix;

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn rv(entries: &[&str]) -> RatVec {
        entries.iter().map(|s| rat(s)).collect()
    }

    fn limits() -> Limits {
        Limits::default()
    }

    fn matroid_instance(budgets: &[&str]) -> BudgetedInstance {
        let spec = MatroidSpec::Graphic {
            graph: GraphSpec::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap(),
        };
        BudgetedInstance::new(
            rv(&["3", "1", "4", "2", "5"]),
            RatMatrix::new(
                vec![
                    rv(&["1"]),
                    rv(&["2"]),
                    rv(&["1"]),
                    rv(&["3"]),
                    rv(&["2"]),
                ],
                1,
            )
            .unwrap(),
            rv(budgets),
            GroundSpec::Matroid { spec },
        )
        .unwrap()
    }

    #[test]
    fn zero_budgets_force_empty() {
        let graph = GraphSpec::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let inst = BudgetedInstance::new(
            rv(&["1", "1"]),
            RatMatrix::new(vec![rv(&["1"]), rv(&["2"])], 1).unwrap(),
            rv(&["0"]),
            GroundSpec::Matching { graph },
        )
        .unwrap();
        let (value, witness) = brute_opt(&inst, &limits()).unwrap().unwrap();
        assert!(value.is_zero());
        assert!(witness.is_empty());
    }

    #[test]
    fn unbudgeted_matroid_matches_greedy() {
        let inst = matroid_instance(&["1000"]);
        let (value, _) = brute_opt(&inst, &limits()).unwrap().unwrap();
        let GroundSpec::Matroid { spec } = inst.ground() else {
            unreachable!()
        };
        let oracle = RankOracle::new(spec.clone()).unwrap();
        let greedy = greedy_max_weight(&oracle, inst.weights()).unwrap();
        assert_eq!(value, inst.weight_of(&greedy).unwrap());
    }

    #[test]
    fn pareto_front_is_nondominated_and_consistent() {
        let inst = matroid_instance(&["4"]);
        let front = pareto_enumerate(&inst, &limits()).unwrap();
        assert!(!front.is_empty());
        for (i, p) in front.iter().enumerate() {
            for (j, q) in front.iter().enumerate() {
                if i != j {
                    assert!(!dominates(q, p));
                }
            }
        }
        // optimum equals the best Pareto point meeting the budgets
        let (opt, _) = brute_opt(&inst, &limits()).unwrap().unwrap();
        let best_on_front = front
            .iter()
            .filter(|p| {
                p.lengths
                    .iter()
                    .zip(inst.budgets().iter())
                    .all(|(l, b)| l <= b)
            })
            .map(|p| p.weight.clone())
            .max()
            .unwrap();
        assert_eq!(opt, best_on_front);
    }

    #[test]
    fn single_element_pareto() {
        let inst = BudgetedInstance::new(
            rv(&["2"]),
            RatMatrix::new(vec![rv(&["3"])], 1).unwrap(),
            rv(&["3"]),
            GroundSpec::Matroid {
                spec: MatroidSpec::Uniform { size: 1, rank: 1 },
            },
        )
        .unwrap();
        let front = pareto_enumerate(&inst, &limits()).unwrap();
        assert!(front.len() <= 2);
        assert_eq!(front.len(), 2); // empty set and the element
    }

    #[test]
    fn partition_small_cases() {
        let l = limits();
        assert!(partition_bruteforce(&[rat("1"), rat("2"), rat("3")], &rat("3"), &l).unwrap());
        assert!(!partition_bruteforce(&[rat("2"), rat("2")], &rat("3"), &l).unwrap());
        assert!(partition_bruteforce(&[], &rat("0"), &l).unwrap());
        assert!(!partition_bruteforce(&[], &rat("1"), &l).unwrap());
        assert!(
            partition_bruteforce(&[rat("1/3"), rat("1/6"), rat("5")], &rat("1/2"), &l).unwrap()
        );
    }

    /// Meet-in-the-middle reimplementation as an independent oracle.
    fn mitm_partition(alphas: &[Rat], target: &Rat) -> bool {
        let (left, right) = alphas.split_at(alphas.len() / 2);
        let sums = |items: &[Rat]| -> Vec<Rat> {
            let mut out = vec![Rat::zero()];
            for a in items {
                let mut next = Vec::with_capacity(out.len() * 2);
                for s in &out {
                    next.push(s.clone());
                    next.push(s + a);
                }
                out = next;
            }
            out
        };
        let left_sums = sums(left);
        let mut right_sums = sums(right);
        right_sums.sort();
        left_sums
            .iter()
            .any(|s| right_sums.binary_search(&(target - s)).is_ok())
    }

    #[test]
    fn partition_agrees_with_meet_in_the_middle() {
        use rand::{Rng, SeedableRng};
        let l = limits();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let n = rng.gen_range(0..=12);
            let alphas: Vec<Rat> = (0..n)
                .map(|_| Rat::new(rng.gen_range(0..12), rng.gen_range(1..4)).unwrap())
                .collect();
            let target = Rat::new(rng.gen_range(0..20), rng.gen_range(1..4)).unwrap();
            assert_eq!(
                partition_bruteforce(&alphas, &target, &l).unwrap(),
                mitm_partition(&alphas, &target),
                "alphas={alphas:?} target={target}"
            );
        }
    }

    #[test]
    fn optimum_is_monotone_in_budgets() {
        let tighter = matroid_instance(&["3"]);
        let looser = matroid_instance(&["5"]);
        let (v1, _) = brute_opt(&tighter, &limits()).unwrap().unwrap();
        let (v2, _) = brute_opt(&looser, &limits()).unwrap().unwrap();
        assert!(v2 >= v1);
    }

    #[test]
    fn spanning_tree_enumeration_counts() {
        // triangle has 3 spanning trees
        let graph = GraphSpec::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let inst = BudgetedInstance::new(
            rv(&["1", "1", "1"]),
            RatMatrix::new(vec![rv(&[]), rv(&[]), rv(&[])], 0).unwrap(),
            rv(&[]),
            GroundSpec::SpanningTree { graph },
        )
        .unwrap();
        let mut count = 0;
        for_each_solution(&inst, true, &limits(), &mut |_, _, _| count += 1).unwrap();
        assert_eq!(count, 3);
    }

    #[test]
    fn enumeration_step_cap_enforced() {
        let inst = matroid_instance(&["1000"]);
        let mut tiny = limits();
        tiny.enumeration_steps = 3;
        assert!(matches!(
            brute_opt(&inst, &tiny),
            Err(Error::ResourceBound(_))
        ));
    }
}
