//! Instance generators: the subset-sum feasibility gadgets and seeded
//! random instances.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{BudgetedInstance, GraphSpec, GroundSpec};
use crate::matroid::MatroidSpec;
use crate::numeric::{Rat, RatMatrix, RatVec};
use crate::{oracle, Limits};

/// Ground family of a subset-sum gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    SpanningTree,
    PerfectMatching,
    Path,
}

/// Builds a 2-budget instance that is feasible iff some subset of `alphas`
/// sums to `target`.
///
/// The graph is a chain of 4-cycles `(a_i, b_i, c_i, d_i)`; for the
/// spanning-tree and path kinds consecutive cycles share `c_i = a_{i+1}`,
/// for the perfect-matching kind each cycle is its own component. Cycle `i`
/// carries the value `alphas[i]` on one designated edge (two for perfect
/// matchings), so a solution's first length is the sum over its "selected"
/// cycles. The first budget forces that sum `<= target`; the second length
/// is the shift-complement `shift - l'(e)` per edge, whose budget forces the
/// sum `>= target` because every solution has a fixed edge count.
///
/// `shift` defaults to `1 + sum(alphas)`; it must exceed `sum(alphas)` so
/// all complemented lengths stay positive.
pub fn partition_gadget(
    kind: GadgetKind,
    alphas: &[Rat],
    target: &Rat,
    shift: Option<Rat>,
) -> Result<BudgetedInstance> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter(
            "gadget needs at least one alpha".into(),
        ));
    }
    for a in alphas {
        if a.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "gadget alphas must be nonnegative, got {a}"
            )));
        }
    }
    if target.is_negative() {
        return Err(Error::InvalidParameter(format!(
            "gadget target must be nonnegative, got {target}"
        )));
    }
    let total: Rat = alphas.iter().sum();
    let shift = shift.unwrap_or_else(|| Rat::one() + &total);
    if shift <= total {
        return Err(Error::InvalidParameter(format!(
            "shift {shift} too small; it must exceed the alpha sum {total}"
        )));
    }
    let q = alphas.len();

    let mut edges = Vec::with_capacity(4 * q);
    let mut marked = Vec::new(); // edge ids carrying alpha_i
    let (ground, solution_size, first_budget) = match kind {
        GadgetKind::SpanningTree | GadgetKind::Path => {
            // chained cycles: nodes appear in order a_1, b_1, c_1, d_1,
            // then (b_i, c_i, d_i) per later cycle with a_i = c_{i-1}
            let node_a = |i: usize| if i == 0 { 0 } else { 3 * i - 1 };
            let node_b = |i: usize| 3 * i + 1;
            let node_c = |i: usize| 3 * i + 2;
            let node_d = |i: usize| 3 * i + 3;
            for i in 0..q {
                marked.push(edges.len());
                edges.push((node_a(i), node_b(i)));
                edges.push((node_b(i), node_c(i)));
                edges.push((node_c(i), node_d(i)));
                edges.push((node_d(i), node_a(i)));
            }
            let n = 3 * q + 1;
            let graph = GraphSpec::new(n, edges)?;
            match kind {
                GadgetKind::SpanningTree => (
                    GroundSpec::SpanningTree { graph },
                    n - 1,
                    target.clone(),
                ),
                GadgetKind::Path => (
                    GroundSpec::Path {
                        graph,
                        s: 0,
                        t: node_c(q - 1),
                    },
                    2 * q,
                    target.clone(),
                ),
                GadgetKind::PerfectMatching => unreachable!(),
            }
        }
        GadgetKind::PerfectMatching => {
            // disconnected cycles on nodes (4i, 4i+1, 4i+2, 4i+3)
            for i in 0..q {
                let base = 4 * i;
                marked.push(edges.len());
                edges.push((base, base + 1));
                edges.push((base + 1, base + 2));
                edges.push((base + 2, base + 3));
                edges.push((base + 3, base));
            }
            let n = 4 * q;
            let graph = GraphSpec::new(n, edges)?;
            (
                GroundSpec::PerfectMatching { graph },
                n / 2,
                Rat::from_int(2) * target,
            )
        }
    };

    let m = 4 * q;
    let mut marked_lengths = vec![Rat::zero(); m];
    for (i, &e) in marked.iter().enumerate() {
        marked_lengths[e] = alphas[i].clone();
        if kind == GadgetKind::PerfectMatching {
            // the opposite cycle edge (c_i, d_i) carries alpha_i as well
            marked_lengths[e + 2] = alphas[i].clone();
        }
    }
    let second_budget = Rat::from_int(solution_size as i64) * &shift - &first_budget;
    if second_budget.is_negative() {
        return Err(Error::InvalidParameter(format!(
            "target {target} unreachable: complement budget would be negative"
        )));
    }
    let lengths = RatMatrix::new(
        marked_lengths
            .iter()
            .map(|l| RatVec::new(vec![l.clone(), &shift - l]))
            .collect(),
        2,
    )?;
    BudgetedInstance::new(
        RatVec::new(vec![Rat::one(); m]),
        lengths,
        RatVec::new(vec![first_budget, second_budget]),
        ground,
    )
}

/// Ground family for [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomGroundKind {
    Uniform,
    Partition,
    Graphic,
    Linear,
    Matching,
    Forest,
    SpanningTree,
    PerfectMatching,
    Path,
}

/// Parameters for the seeded generator. Weights and lengths are drawn on a
/// twelfth-grid inside the given ranges; budgets are placed between the
/// least and greatest achievable solution length so instances are
/// nontrivially constrained.
#[derive(Debug, Clone)]
pub struct RandomInstanceParams {
    pub kind: RandomGroundKind,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    /// Node count for graph grounds; a sensible default is derived from `m`.
    pub nodes: Option<usize>,
    pub weight_range: (Rat, Rat),
    pub length_range: (Rat, Rat),
    /// Budget position in `[min, max]` achievable length; random in
    /// `[1/4, 3/4]` when unset.
    pub budget_fraction: Option<Rat>,
}

impl RandomInstanceParams {
    pub fn new(kind: RandomGroundKind, m: usize, k: usize, seed: u64) -> Self {
        RandomInstanceParams {
            kind,
            m,
            k,
            seed,
            nodes: None,
            weight_range: (Rat::zero(), Rat::from_int(10)),
            length_range: (Rat::zero(), Rat::from_int(10)),
            budget_fraction: None,
        }
    }
}

fn draw_rat(rng: &mut ChaCha8Rng, lo: &Rat, hi: &Rat) -> Rat {
    let step = rng.gen_range(0..=12i64);
    lo + &((hi - lo) * Rat::new(step, 12).expect("nonzero denominator"))
}

fn random_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    connected: bool,
    with_perfect_matching: bool,
) -> Result<GraphSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "graph grounds need at least two nodes".into(),
        ));
    }
    let mut edges = Vec::with_capacity(m);
    if connected {
        if m + 1 < n {
            return Err(Error::InvalidParameter(format!(
                "m = {m} cannot connect {n} nodes"
            )));
        }
        for v in 1..n {
            edges.push((rng.gen_range(0..v), v));
        }
    }
    if with_perfect_matching {
        if n % 2 != 0 {
            return Err(Error::InvalidParameter(
                "perfect-matching grounds need an even node count".into(),
            ));
        }
        if m < n / 2 {
            return Err(Error::InvalidParameter(format!(
                "m = {m} cannot perfectly match {n} nodes"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        for pair in order.chunks(2) {
            edges.push((pair[0], pair[1]));
        }
    }
    if edges.len() > m {
        return Err(Error::InvalidParameter(format!(
            "m = {m} too small for the requested structure"
        )));
    }
    while edges.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u, v));
        }
    }
    GraphSpec::new(n, edges)
}

fn default_nodes(m: usize) -> usize {
    let mut n = 2;
    while n * (n - 1) / 2 < m {
        n += 1;
    }
    n.max(3)
}

/// Deterministic seeded instance generator.
pub fn random_instance(
    params: &RandomInstanceParams,
    limits: &Limits,
) -> Result<BudgetedInstance> {
    let (wlo, whi) = &params.weight_range;
    let (llo, lhi) = &params.length_range;
    if wlo > whi || llo > lhi {
        return Err(Error::InvalidParameter("empty value range".into()));
    }
    if wlo.is_negative() || llo.is_negative() {
        return Err(Error::InvalidParameter(
            "weights and lengths must be nonnegative".into(),
        ));
    }
    let m = params.m;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let ground = match params.kind {
        RandomGroundKind::Uniform => GroundSpec::Matroid {
            spec: MatroidSpec::Uniform {
                size: m,
                rank: if m == 0 { 0 } else { rng.gen_range(1..=m) },
            },
        },
        RandomGroundKind::Partition => {
            if m == 0 {
                return Err(Error::InvalidParameter(
                    "partition matroid needs elements".into(),
                ));
            }
            let block_count = rng.gen_range(1..=m.min(4));
            let mut blocks: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); block_count];
            for e in 0..m {
                if e < block_count {
                    blocks[e].insert(e); // no block stays empty
                } else {
                    blocks[rng.gen_range(0..block_count)].insert(e);
                }
            }
            let caps = blocks
                .iter()
                .map(|b| rng.gen_range(1..=b.len()))
                .collect();
            GroundSpec::Matroid {
                spec: MatroidSpec::Partition { blocks, caps },
            }
        }
        RandomGroundKind::Linear => {
            let dim = rng.gen_range(2..=(m / 2 + 2).max(2));
            let rows: Vec<RatVec> = (0..m)
                .map(|_| {
                    (0..dim)
                        .map(|_| Rat::from_int(rng.gen_range(-2..=2)))
                        .collect()
                })
                .collect();
            GroundSpec::Matroid {
                spec: MatroidSpec::Linear {
                    vectors: RatMatrix::new(rows, dim)?,
                },
            }
        }
        RandomGroundKind::Graphic => {
            let n = params.nodes.unwrap_or_else(|| default_nodes(m));
            GroundSpec::Matroid {
                spec: MatroidSpec::Graphic {
                    graph: random_graph(&mut rng, n, m, false, false)?,
                },
            }
        }
        RandomGroundKind::Matching => {
            let n = params.nodes.unwrap_or_else(|| default_nodes(m));
            GroundSpec::Matching {
                graph: random_graph(&mut rng, n, m, false, false)?,
            }
        }
        RandomGroundKind::Forest => {
            let n = params.nodes.unwrap_or_else(|| default_nodes(m));
            GroundSpec::Forest {
                graph: random_graph(&mut rng, n, m, false, false)?,
            }
        }
        RandomGroundKind::SpanningTree => {
            let n = params.nodes.unwrap_or_else(|| default_nodes(m));
            GroundSpec::SpanningTree {
                graph: random_graph(&mut rng, n, m, true, false)?,
            }
        }
        RandomGroundKind::PerfectMatching => {
            let n = {
                let n = params.nodes.unwrap_or_else(|| default_nodes(m));
                if n % 2 == 0 {
                    n
                } else {
                    n + 1
                }
            };
            GroundSpec::PerfectMatching {
                graph: random_graph(&mut rng, n, m, false, true)?,
            }
        }
        RandomGroundKind::Path => {
            let n = params.nodes.unwrap_or_else(|| default_nodes(m));
            let graph = random_graph(&mut rng, n, m, true, false)?;
            GroundSpec::Path {
                graph,
                s: 0,
                t: n - 1,
            }
        }
    };

    let weights: RatVec = (0..m).map(|_| draw_rat(&mut rng, wlo, whi)).collect();
    let lengths = RatMatrix::new(
        (0..m)
            .map(|_| (0..params.k).map(|_| draw_rat(&mut rng, llo, lhi)).collect())
            .collect(),
        params.k,
    )?;

    let budgets = if params.k == 0 {
        RatVec::new(Vec::new())
    } else {
        let probe = BudgetedInstance::new(
            weights.clone(),
            lengths.clone(),
            RatVec::zeros(params.k),
            ground.clone(),
        )?;
        let (lo, hi) = oracle::length_extremes(&probe, limits)?.ok_or_else(|| {
            Error::InvalidParameter("ground family has no solutions".into())
        })?;
        (0..params.k)
            .map(|i| {
                let frac = params
                    .budget_fraction
                    .clone()
                    .unwrap_or_else(|| {
                        Rat::new(rng.gen_range(2..=6), 8).expect("nonzero denominator")
                    });
                &lo[i] + &((&hi[i] - &lo[i]) * frac)
            })
            .collect()
    };

    BudgetedInstance::new(weights, lengths, budgets, ground)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_opt, length_extremes};

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn rats(list: &[&str]) -> Vec<Rat> {
        list.iter().map(|s| rat(s)).collect()
    }

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn spanning_tree_gadget_feasible_case() {
        // subsets of {1, 2, 3} reach 3, so a tree meets both budgets; its
        // first length must be exactly the target and the second tight
        let inst =
            partition_gadget(GadgetKind::SpanningTree, &rats(&["1", "2", "3"]), &rat("3"), None)
                .unwrap();
        let best = brute_opt(&inst, &limits()).unwrap();
        let (_, witness) = best.expect("feasible gadget");
        let lengths = inst.lengths_of(&witness).unwrap();
        assert_eq!(lengths[0], rat("3"));
        assert_eq!(lengths[1], inst.budgets()[1]);
    }

    #[test]
    fn spanning_tree_gadget_infeasible_case() {
        // subset sums of {2, 2} are {0, 2, 4}
        let inst =
            partition_gadget(GadgetKind::SpanningTree, &rats(&["2", "2"]), &rat("3"), None)
                .unwrap();
        assert!(brute_opt(&inst, &limits()).unwrap().is_none());
    }

    #[test]
    fn perfect_matching_gadget_single_cycle() {
        let inst =
            partition_gadget(GadgetKind::PerfectMatching, &rats(&["1"]), &rat("1"), None)
                .unwrap();
        let (_, witness) = brute_opt(&inst, &limits()).unwrap().expect("feasible");
        // the only qualifying matching picks both alpha edges of the cycle
        assert_eq!(witness, [0, 2].into_iter().collect());
        assert_eq!(inst.lengths_of(&witness).unwrap()[0], rat("2"));
    }

    #[test]
    fn path_gadget_follows_the_subset_sum() {
        let inst =
            partition_gadget(GadgetKind::Path, &rats(&["1", "1/2"]), &rat("3/2"), None).unwrap();
        assert!(brute_opt(&inst, &limits()).unwrap().is_some());
        let inst =
            partition_gadget(GadgetKind::Path, &rats(&["1", "1/2"]), &rat("5/4"), None).unwrap();
        assert!(brute_opt(&inst, &limits()).unwrap().is_none());
    }

    #[test]
    fn gadget_rejects_small_shifts() {
        let err = partition_gadget(
            GadgetKind::SpanningTree,
            &rats(&["1", "2"]),
            &rat("1"),
            Some(rat("3")),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        assert!(partition_gadget(
            GadgetKind::SpanningTree,
            &rats(&["1", "2"]),
            &rat("1"),
            Some(rat("7/2")),
        )
        .is_ok());
    }

    #[test]
    fn gadget_rejects_empty_and_negative_input() {
        assert!(partition_gadget(GadgetKind::Path, &[], &rat("1"), None).is_err());
        assert!(
            partition_gadget(GadgetKind::Path, &rats(&["-1"]), &rat("1"), None).is_err()
        );
    }

    #[test]
    fn generator_is_deterministic_per_seed() {
        for kind in [
            RandomGroundKind::Uniform,
            RandomGroundKind::Linear,
            RandomGroundKind::Matching,
            RandomGroundKind::SpanningTree,
        ] {
            let params = RandomInstanceParams::new(kind, 7, 2, 7);
            let a = random_instance(&params, &limits()).unwrap();
            let b = random_instance(&params, &limits()).unwrap();
            assert_eq!(a.to_json(), b.to_json());
        }
    }

    #[test]
    fn unbudgeted_generation() {
        let params = RandomInstanceParams::new(RandomGroundKind::Graphic, 6, 0, 5);
        let inst = random_instance(&params, &limits()).unwrap();
        assert_eq!(inst.budget_count(), 0);
    }

    #[test]
    fn maximal_budgets_leave_the_optimum_unconstrained() {
        let params = RandomInstanceParams {
            budget_fraction: Some(Rat::one()),
            ..RandomInstanceParams::new(RandomGroundKind::Graphic, 7, 2, 12)
        };
        let inst = random_instance(&params, &limits()).unwrap();
        let (constrained, _) = brute_opt(&inst, &limits()).unwrap().unwrap();
        let (_, hi) = length_extremes(&inst, &limits()).unwrap().unwrap();
        assert_eq!(inst.budgets(), &hi);
        let free = BudgetedInstance::new(
            inst.weights().clone(),
            inst.lengths().clone(),
            hi.scale(&Rat::from_int(2)),
            inst.ground().clone(),
        )
        .unwrap();
        let (unconstrained, _) = brute_opt(&free, &limits()).unwrap().unwrap();
        assert_eq!(constrained, unconstrained);
    }

    #[test]
    fn connected_kinds_need_enough_edges() {
        let params = RandomInstanceParams {
            nodes: Some(8),
            ..RandomInstanceParams::new(RandomGroundKind::SpanningTree, 3, 1, 1)
        };
        assert!(matches!(
            random_instance(&params, &limits()),
            Err(Error::InvalidParameter(_))
        ));
    }
}
