//! Turns budget-violating multi-criteria solvers into strictly feasible
//! ones.
//!
//! The wrapper guesses the heaviest elements of the optimum, reduces the
//! problem (smaller budgets, weight threshold, ground restricted to sets
//! that extend the guess), scales the residual budgets down by `(1 - delta)` with
//! `delta = eps / (k + 1)`, and hands the scaled problem to the solver. A
//! solver violating budgets by at most `(1 + delta)` then lands inside the
//! original budgets because `(1 + delta)(1 - delta) <= 1`, and a greedy
//! knapsack-style discarding argument shows the scaled problem still holds
//! a near-optimal solution.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BudgetedInstance, GraphSpec, GroundSpec};
use crate::matroid;
use crate::numeric::{Rat, RatMatrix, RatVec};
use crate::{oracle, Limits};

/// Plug-in contract: given an instance and a tolerance `delta`, return a
/// structurally valid solution whose `i`-th length is at most
/// `(1 + delta) * L_i`, with weight at least `(1 - delta)` times the best
/// such solution. The wrapper re-checks the budget part of the contract
/// and fails hard on a breach.
pub trait MultiCriteriaSolver {
    fn solve(
        &self,
        inst: &BudgetedInstance,
        delta: &Rat,
        limits: &Limits,
    ) -> Result<BTreeSet<usize>>;
}

/// Exhaustive stand-in for the published multi-criteria schemes: the exact
/// optimum over the `(1 + delta)`-relaxed budgets, so the `(1 - delta)`
/// factor is met with equality.
pub struct ExactMultiCriteriaOracle;

impl MultiCriteriaSolver for ExactMultiCriteriaOracle {
    fn solve(
        &self,
        inst: &BudgetedInstance,
        delta: &Rat,
        limits: &Limits,
    ) -> Result<BTreeSet<usize>> {
        exact_multicriteria_oracle(inst, delta, limits)
    }
}

/// Exact maximum-weight solution within budgets scaled by `(1 + delta)`.
pub fn exact_multicriteria_oracle(
    inst: &BudgetedInstance,
    delta: &Rat,
    limits: &Limits,
) -> Result<BTreeSet<usize>> {
    let relaxed = BudgetedInstance::new(
        inst.weights().clone(),
        inst.lengths().clone(),
        inst.budgets().scale(&(Rat::one() + delta)),
        inst.ground().clone(),
    )?;
    let best = oracle::brute_opt(&relaxed, limits)?;
    Ok(best.map(|(_, witness)| witness).unwrap_or_default())
}

/// Derived parameters of the wrapper: guess size `h = k / eps` and budget
/// scale `delta = eps / (k + 1)`, with `1/eps` a positive integer.
#[derive(Debug, Clone)]
pub struct FeasibilizeConfig {
    pub eps: Rat,
    pub h: usize,
    pub delta: Rat,
}

impl FeasibilizeConfig {
    pub fn new(eps: &Rat, k: usize) -> Result<Self> {
        if !eps.is_positive() || *eps > Rat::one() {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 1], got {eps}"
            )));
        }
        let inv = eps.recip()?;
        if !inv.is_integer() {
            return Err(Error::InvalidParameter(format!(
                "1/eps must be an integer, got eps = {eps}"
            )));
        }
        let h = (Rat::from_int(k as i64) * inv)
            .floor_usize()
            .ok_or_else(|| Error::InvalidParameter("guess size overflow".into()))?;
        let delta = eps.checked_div(&Rat::from_int(k as i64 + 1))?;
        Ok(FeasibilizeConfig {
            eps: eps.clone(),
            h,
            delta,
        })
    }
}

/// Reduced problem handed to the solver, with the map back to original
/// element ids.
struct Reduction {
    instance: BudgetedInstance,
    element_map: Vec<usize>,
}

/// Restriction of the ground structure to solutions extendable by the
/// guess: matroids are contracted, matchings lose the guessed endpoints,
/// forests contract the guessed edges.
fn reduce_ground(
    inst: &BudgetedInstance,
    guess: &BTreeSet<usize>,
    keep: &[usize],
) -> Result<GroundSpec> {
    match inst.ground() {
        GroundSpec::Matroid { spec } => {
            let contracted = matroid::contract(spec, guess)?;
            Ok(GroundSpec::Matroid {
                spec: matroid::relabel(&contracted, keep)?,
            })
        }
        GroundSpec::Matching { graph } => {
            let edges: Vec<(usize, usize)> = keep
                .iter()
                .map(|&e| graph.endpoints(e))
                .collect::<Result<_>>()?;
            Ok(GroundSpec::Matching {
                graph: GraphSpec::new(graph.node_count(), edges)?,
            })
        }
        GroundSpec::Forest { graph } => {
            // merge the endpoints of every guessed edge
            let mut uf = crate::instance::graph::UnionFind::new(graph.node_count());
            for &e in guess {
                let (u, v) = graph.endpoints(e)?;
                uf.union(u, v);
            }
            let mut relabeled = std::collections::BTreeMap::new();
            let mut edges = Vec::with_capacity(keep.len());
            for &e in keep {
                let (u, v) = graph.endpoints(e)?;
                let (ru, rv) = (uf.find(u), uf.find(v));
                edges.push((ru, rv));
                relabeled.entry(ru).or_insert(0);
                relabeled.entry(rv).or_insert(0);
            }
            // compact node ids in order of appearance of the roots
            for (next, (_, slot)) in relabeled.iter_mut().enumerate() {
                *slot = next;
            }
            let edges = edges
                .into_iter()
                .map(|(u, v)| (relabeled[&u], relabeled[&v]))
                .collect();
            Ok(GroundSpec::Forest {
                graph: GraphSpec::new(relabeled.len().max(2), edges)?,
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "feasibilization supports matroid, matching, and forest grounds, got {other:?}"
        ))),
    }
}

fn build_reduction(
    inst: &BudgetedInstance,
    cfg: &FeasibilizeConfig,
    guess: &BTreeSet<usize>,
) -> Result<Reduction> {
    let k = inst.budget_count();
    let guess_lengths = inst.lengths_of(guess)?;
    let weight_cap = guess.iter().map(|&e| inst.weights()[e].clone()).min();
    let keep: Vec<usize> = (0..inst.element_count())
        .filter(|e| !guess.contains(e))
        .filter(|&e| match &weight_cap {
            Some(cap) => inst.weights()[e] <= *cap,
            None => true,
        })
        .filter(|&e| match inst.ground() {
            // an edge clashing with the guess can never extend it
            GroundSpec::Matching { graph } => {
                let (u, v) = graph.endpoints(e).expect("validated");
                !guess.iter().any(|&g| {
                    let (a, b) = graph.endpoints(g).expect("validated");
                    a == u || a == v || b == u || b == v
                })
            }
            GroundSpec::Forest { graph } => {
                // self-loops after contraction close a cycle with the guess
                let mut uf = crate::instance::graph::UnionFind::new(graph.node_count());
                for &g in guess.iter() {
                    let (a, b) = graph.endpoints(g).expect("validated");
                    uf.union(a, b);
                }
                let (u, v) = graph.endpoints(e).expect("validated");
                uf.find(u) != uf.find(v)
            }
            _ => true,
        })
        .collect();

    let scale = Rat::one() - &cfg.delta;
    let budgets: RatVec = inst
        .budgets()
        .iter()
        .zip(guess_lengths.iter())
        .map(|(cap, used)| (cap - used) * &scale)
        .collect();
    let weights: RatVec = keep.iter().map(|&e| inst.weights()[e].clone()).collect();
    let lengths = RatMatrix::new(
        keep.iter().map(|&e| inst.lengths().row(e).clone()).collect(),
        k,
    )?;
    let ground = reduce_ground(inst, guess, &keep)?;
    Ok(Reduction {
        instance: BudgetedInstance::new(weights, lengths, budgets, ground)?,
        element_map: keep,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilizeRecord {
    pub guess: Vec<usize>,
    pub solver_picked: Vec<usize>,
    pub candidate: Vec<usize>,
    pub weight: Rat,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct FeasibilizeOutcome {
    pub chosen: BTreeSet<usize>,
    pub weight: Rat,
    pub records: Vec<FeasibilizeRecord>,
}

/// The feasibilization wrapper. With any solver honoring the
/// `(1 + delta)`-violation contract the output satisfies the original
/// budgets exactly; with the exact oracle the weight is at least
/// `(1 - eps) * OPT`.
pub fn feasibilize(
    inst: &BudgetedInstance,
    cfg: &FeasibilizeConfig,
    solver: &dyn MultiCriteriaSolver,
    limits: &Limits,
) -> Result<FeasibilizeOutcome> {
    if !inst.ground().is_independence_system() {
        return Err(Error::InvalidParameter(
            "feasibilization needs a down-closed ground family".into(),
        ));
    }
    let mut guesses: Vec<BTreeSet<usize>> = Vec::new();
    oracle::for_each_solution(inst, true, limits, &mut |set, _, _| {
        if set.len() <= cfg.h {
            guesses.push(set.clone());
        }
    })?;

    let mut best: Option<(Rat, BTreeSet<usize>)> = None;
    let mut records = Vec::with_capacity(guesses.len());
    for guess in &guesses {
        let reduction = build_reduction(inst, cfg, guess)?;
        let picked = solver.solve(&reduction.instance, &cfg.delta, limits)?;
        // post-hoc contract check: structure and the (1+delta) budget cap
        if !reduction.instance.ground().contains(&picked)? {
            return Err(Error::SolverContract(
                "solver returned a structurally invalid set".into(),
            ));
        }
        let picked_lengths = reduction.instance.lengths_of(&picked)?;
        let tolerance = Rat::one() + &cfg.delta;
        for (l, cap) in picked_lengths.iter().zip(reduction.instance.budgets().iter()) {
            if *l > cap * &tolerance {
                return Err(Error::SolverContract(format!(
                    "solver exceeded the tolerated budget: {l} > (1+delta) * {cap}"
                )));
            }
        }
        let mapped: BTreeSet<usize> = picked
            .iter()
            .map(|&e| reduction.element_map[e])
            .collect();
        let mut candidate: BTreeSet<usize> = guess.clone();
        candidate.extend(mapped.iter().copied());
        let weight = inst.weight_of(&candidate)?;
        let feasible = inst.feasible(&candidate)?;
        if !feasible {
            return Err(Error::InvariantViolation(
                "wrapper output violates the original budgets".into(),
            ));
        }
        let better = match &best {
            None => true,
            Some((bw, bs)) => weight > *bw || (weight == *bw && candidate < *bs),
        };
        if better {
            best = Some((weight.clone(), candidate.clone()));
        }
        records.push(FeasibilizeRecord {
            guess: guess.iter().copied().collect(),
            solver_picked: mapped.iter().copied().collect(),
            candidate: candidate.iter().copied().collect(),
            weight,
            feasible,
        });
    }
    let (weight, chosen) = best.expect("the empty guess always yields a candidate");
    Ok(FeasibilizeOutcome {
        chosen,
        weight,
        records,
    })
}

#[derive(Debug, Clone)]
pub struct GreedyDiscardOutcome {
    pub kept: BTreeSet<usize>,
    /// Elements removed while enforcing target `i`, in removal order.
    pub removed: Vec<Vec<usize>>,
}

/// Knapsack-style discarding: for each length function in index order,
/// remove the element with the smallest weight-to-length ratio until the
/// target is met. Zero-length elements are never removed (their ratio is
/// effectively infinite). Whenever the input set met the instance budget
/// for a coordinate, the removed weight is checked against the bound
/// `delta_i * w(S) + w_max` with `delta_i = 1 - target_i / budget_i`.
pub fn greedy_discard(
    set: &BTreeSet<usize>,
    inst: &BudgetedInstance,
    targets: &RatVec,
) -> Result<GreedyDiscardOutcome> {
    let k = inst.budget_count();
    if targets.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: targets.len(),
        });
    }
    let original_weight = inst.weight_of(set)?;
    let original_lengths = inst.lengths_of(set)?;
    let w_max = inst.weights().iter().max().cloned().unwrap_or_default();
    let mut kept: BTreeSet<usize> = set.clone();
    let mut removed: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut stage_removed = Vec::new();
        let mut current = inst.lengths_of(&kept)?[i].clone();
        while current > targets[i] {
            // smallest w/l ratio, i.e. lexicographically smallest
            // (w * l'other - ...) — compare w(a) * l(b) vs w(b) * l(a)
            let victim = kept
                .iter()
                .copied()
                .filter(|&e| inst.lengths().entry(e, i).is_positive())
                .min_by(|&a, &b| {
                    let wa = &inst.weights()[a];
                    let wb = &inst.weights()[b];
                    let la = inst.lengths().entry(a, i);
                    let lb = inst.lengths().entry(b, i);
                    (wa * lb).cmp(&(wb * la)).then(a.cmp(&b))
                });
            let Some(victim) = victim else {
                return Err(Error::InvariantViolation(
                    "positive residual length with no positive-length element".into(),
                ));
            };
            kept.remove(&victim);
            current -= inst.lengths().entry(victim, i);
            stage_removed.push(victim);
        }
        // the knapsack bound, checked whenever its preconditions hold
        if original_lengths[i] <= inst.budgets()[i]
            && targets[i] <= inst.budgets()[i]
            && inst.budgets()[i].is_positive()
        {
            let delta_i = Rat::one() - targets[i].checked_div(&inst.budgets()[i])?;
            let removed_weight: Rat = stage_removed
                .iter()
                .map(|&e| inst.weights()[e].clone())
                .sum();
            if removed_weight > &(&delta_i * &original_weight) + &w_max {
                return Err(Error::InvariantViolation(format!(
                    "greedy discard removed weight {removed_weight} beyond the bound"
                )));
            }
        }
        removed.push(stage_removed);
    }
    Ok(GreedyDiscardOutcome { kept, removed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{random_instance, RandomGroundKind, RandomInstanceParams};

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn rv(entries: &[&str]) -> RatVec {
        entries.iter().map(|s| rat(s)).collect()
    }

    fn limits() -> Limits {
        Limits::default()
    }

    fn forest_instance(budgets: &[&str]) -> BudgetedInstance {
        let graph = GraphSpec::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)])
            .unwrap();
        BudgetedInstance::new(
            rv(&["4", "2", "5", "1", "3", "2"]),
            RatMatrix::new(
                vec![
                    rv(&["2"]),
                    rv(&["1"]),
                    rv(&["3"]),
                    rv(&["1"]),
                    rv(&["2"]),
                    rv(&["2"]),
                ],
                1,
            )
            .unwrap(),
            rv(budgets),
            GroundSpec::Forest { graph },
        )
        .unwrap()
    }

    #[test]
    fn config_derivation() {
        let cfg = FeasibilizeConfig::new(&rat("1/2"), 3).unwrap();
        assert_eq!(cfg.h, 6);
        assert_eq!(cfg.delta, rat("1/8"));
        assert!(FeasibilizeConfig::new(&rat("2/3"), 1).is_err());
        // scaling identity: (1+delta)(1-delta) <= 1, exactly
        let prod = (Rat::one() + &cfg.delta) * (Rat::one() - &cfg.delta);
        assert!(prod <= Rat::one());
    }

    #[test]
    fn exact_oracle_edge_cases() {
        let inst = forest_instance(&["4"]);
        let l = limits();
        // delta = 0: the plain budgeted optimum
        let s = exact_multicriteria_oracle(&inst, &Rat::zero(), &l).unwrap();
        let (opt, _) = oracle::brute_opt(&inst, &l).unwrap().unwrap();
        assert_eq!(inst.weight_of(&s).unwrap(), opt);
        // huge delta: the unbudgeted optimum
        let s = exact_multicriteria_oracle(&inst, &rat("1000"), &l).unwrap();
        let unbudgeted = BudgetedInstance::new(
            inst.weights().clone(),
            inst.lengths().clone(),
            rv(&["1000000"]),
            inst.ground().clone(),
        )
        .unwrap();
        let (free_opt, _) = oracle::brute_opt(&unbudgeted, &l).unwrap().unwrap();
        assert_eq!(inst.weight_of(&s).unwrap(), free_opt);
    }

    #[test]
    fn wrapper_is_feasible_and_near_optimal_on_forests() {
        let l = limits();
        let inst = forest_instance(&["5"]);
        let (opt, _) = oracle::brute_opt(&inst, &l).unwrap().unwrap();
        for eps in ["1/2", "1/3"] {
            let cfg = FeasibilizeConfig::new(&rat(eps), inst.budget_count()).unwrap();
            let out = feasibilize(&inst, &cfg, &ExactMultiCriteriaOracle, &l).unwrap();
            assert!(inst.feasible(&out.chosen).unwrap());
            assert!(
                out.weight >= (Rat::one() - rat(eps)) * &opt,
                "eps {eps}: {} vs {opt}",
                out.weight
            );
        }
    }

    #[test]
    fn wrapper_handles_matroid_and_matching_grounds() {
        let l = limits();
        for kind in [RandomGroundKind::Graphic, RandomGroundKind::Matching] {
            let params = RandomInstanceParams {
                nodes: Some(5),
                ..RandomInstanceParams::new(kind, 7, 2, 42)
            };
            let inst = random_instance(&params, &l).unwrap();
            let cfg = FeasibilizeConfig::new(&rat("1/2"), 2).unwrap();
            let out = feasibilize(&inst, &cfg, &ExactMultiCriteriaOracle, &l).unwrap();
            assert!(inst.feasible(&out.chosen).unwrap());
            let (opt, _) = oracle::brute_opt(&inst, &l).unwrap().unwrap();
            assert!(out.weight >= rat("1/2") * &opt);
        }
    }

    #[test]
    fn unbudgeted_instance_degenerates_to_the_solver() {
        let graph = GraphSpec::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = BudgetedInstance::new(
            rv(&["1", "3", "2"]),
            RatMatrix::new(vec![rv(&[]), rv(&[]), rv(&[])], 0).unwrap(),
            rv(&[]),
            GroundSpec::Forest { graph },
        )
        .unwrap();
        let cfg = FeasibilizeConfig::new(&rat("1/2"), 0).unwrap();
        assert_eq!(cfg.h, 0);
        let l = limits();
        let out = feasibilize(&inst, &cfg, &ExactMultiCriteriaOracle, &l).unwrap();
        let (opt, _) = oracle::brute_opt(&inst, &l).unwrap().unwrap();
        assert_eq!(out.weight, opt);
    }

    /// Returns the structurally valid set maximizing total length inside
    /// the tolerated budgets: a legal solver that violates as much as the
    /// contract allows.
    struct AdversarialSolver;

    impl MultiCriteriaSolver for AdversarialSolver {
        fn solve(
            &self,
            inst: &BudgetedInstance,
            delta: &Rat,
            limits: &Limits,
        ) -> Result<BTreeSet<usize>> {
            let relaxed = BudgetedInstance::new(
                inst.weights().clone(),
                inst.lengths().clone(),
                inst.budgets().scale(&(Rat::one() + delta)),
                inst.ground().clone(),
            )?;
            let mut best: Option<(Rat, BTreeSet<usize>)> = None;
            oracle::for_each_solution(&relaxed, true, limits, &mut |set, _, lengths| {
                let total: Rat = lengths.iter().sum();
                let better = match &best {
                    None => true,
                    Some((bt, bs)) => total > *bt || (total == *bt && set < bs),
                };
                if better {
                    best = Some((total, set.clone()));
                }
            })?;
            Ok(best.map(|(_, s)| s).unwrap_or_default())
        }
    }

    #[test]
    fn adversarial_solver_still_yields_feasible_output() {
        let l = limits();
        for seed in [1u64, 2, 3, 4, 5] {
            let params =
                RandomInstanceParams::new(RandomGroundKind::Uniform, 7, 2, seed);
            let inst = random_instance(&params, &l).unwrap();
            let cfg = FeasibilizeConfig::new(&rat("1/2"), 2).unwrap();
            let out = feasibilize(&inst, &cfg, &AdversarialSolver, &l).unwrap();
            assert!(inst.feasible(&out.chosen).unwrap());
        }
    }

    /// Overshoots the tolerated budgets; the wrapper must refuse.
    struct BreachingSolver;

    impl MultiCriteriaSolver for BreachingSolver {
        fn solve(
            &self,
            inst: &BudgetedInstance,
            _delta: &Rat,
            limits: &Limits,
        ) -> Result<BTreeSet<usize>> {
            let free = BudgetedInstance::new(
                inst.weights().clone(),
                inst.lengths().clone(),
                inst.budgets().scale(&Rat::from_int(1000)),
                inst.ground().clone(),
            )?;
            let mut best: Option<(Rat, BTreeSet<usize>)> = None;
            oracle::for_each_solution(&free, true, limits, &mut |set, _, lengths| {
                let total: Rat = lengths.iter().sum();
                if best.as_ref().map_or(true, |(bt, _)| total > *bt) {
                    best = Some((total, set.clone()));
                }
            })?;
            Ok(best.map(|(_, s)| s).unwrap_or_default())
        }
    }

    #[test]
    fn contract_breach_is_a_hard_error() {
        let l = limits();
        let inst = forest_instance(&["3"]);
        let cfg = FeasibilizeConfig::new(&rat("1/2"), 1).unwrap();
        assert!(matches!(
            feasibilize(&inst, &cfg, &BreachingSolver, &l),
            Err(Error::SolverContract(_))
        ));
    }

    #[test]
    fn discard_leaves_compliant_sets_alone() {
        let inst = forest_instance(&["100"]);
        let set: BTreeSet<usize> = [0, 1].into_iter().collect();
        let out = greedy_discard(&set, &inst, &rv(&["50"])).unwrap();
        assert_eq!(out.kept, set);
        assert!(out.removed[0].is_empty());
    }

    #[test]
    fn discard_removes_the_single_offender() {
        let inst = forest_instance(&["100"]);
        // only element 2 (length 3) exceeds a target of 2 on its own
        let set: BTreeSet<usize> = [2].into_iter().collect();
        let out = greedy_discard(&set, &inst, &rv(&["2"])).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(out.removed[0], vec![2]);
    }

    #[test]
    fn discard_bound_holds_on_random_feasible_sets() {
        let l = limits();
        let mut checked = 0;
        for seed in 0..60u64 {
            let params = RandomInstanceParams::new(
                if seed % 2 == 0 {
                    RandomGroundKind::Uniform
                } else {
                    RandomGroundKind::Graphic
                },
                8,
                2,
                seed,
            );
            let inst = random_instance(&params, &l).unwrap();
            let delta = rat("1/6");
            let targets: RatVec = inst
                .budgets()
                .iter()
                .map(|b| b * &(Rat::one() - &delta))
                .collect();
            // discard from every feasible solution of the instance
            oracle::for_each_solution(&inst, true, &l, &mut |set, _, _| {
                let out = greedy_discard(set, &inst, &targets).unwrap();
                let final_lengths = inst.lengths_of(&out.kept).unwrap();
                for (lv, t) in final_lengths.iter().zip(targets.iter()) {
                    assert!(lv <= t);
                }
                checked += 1;
            })
            .unwrap();
        }
        assert!(checked >= 500, "only {checked} discard trials ran");
    }
}
