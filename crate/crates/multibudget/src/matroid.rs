//! Matroid oracles: rank, independence, greedy, polytope separation, and
//! minors (contraction / deletion).
//!
//! All variants are answered exactly. Separation over the independent-set
//! polytope `{x >= 0 : x(S) <= r(S)}` scans subsets of the support, which
//! is the intended mode of operation at desk scale.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, PoisonError};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::graph::UnionFind;
use crate::instance::GraphSpec;
use crate::numeric::{self, Rat, RatMatrix, RatVec};
use crate::Limits;

/// Matroid description. `Minor` and `Relabel` wrap a base matroid instead
/// of rewriting it structurally, so every variant shares one rank code path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatroidSpec {
    /// Every set of at most `rank` elements out of `size` is independent.
    Uniform { size: usize, rank: usize },
    /// Blocks partition the universe; block `b` contributes at most
    /// `caps[b]` elements to an independent set.
    Partition {
        blocks: Vec<BTreeSet<usize>>,
        caps: Vec<usize>,
    },
    /// Edge sets of forests of the graph.
    Graphic { graph: GraphSpec },
    /// Row `e` of `vectors` is the vector representing element `e`;
    /// independence is linear independence over the rationals.
    Linear { vectors: RatMatrix },
    /// Base matroid with `contracted` contracted and `deleted` removed.
    Minor {
        base: Box<MatroidSpec>,
        contracted: BTreeSet<usize>,
        deleted: BTreeSet<usize>,
    },
    /// Ground set renamed: element `j` stands for base element `map[j]`.
    Relabel {
        base: Box<MatroidSpec>,
        map: Vec<usize>,
    },
}

impl MatroidSpec {
    pub fn universe(&self) -> BTreeSet<usize> {
        match self {
            MatroidSpec::Uniform { size, .. } => (0..*size).collect(),
            MatroidSpec::Partition { blocks, .. } => {
                blocks.iter().flat_map(|b| b.iter().copied()).collect()
            }
            MatroidSpec::Graphic { graph } => (0..graph.edge_count()).collect(),
            MatroidSpec::Linear { vectors } => (0..vectors.nrows()).collect(),
            MatroidSpec::Minor {
                base,
                contracted,
                deleted,
            } => base
                .universe()
                .into_iter()
                .filter(|e| !contracted.contains(e) && !deleted.contains(e))
                .collect(),
            MatroidSpec::Relabel { map, .. } => (0..map.len()).collect(),
        }
    }

    /// Universe size when ids are exactly `0..m`, as instance files require.
    pub fn contiguous_size(&self) -> Option<usize> {
        let universe = self.universe();
        let m = universe.len();
        universe.iter().copied().eq(0..m).then_some(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MatroidSpec::Uniform { size, rank } => {
                if rank > size {
                    return Err(Error::InvalidInstance(format!(
                        "uniform rank {rank} exceeds size {size}"
                    )));
                }
            }
            MatroidSpec::Partition { blocks, caps } => {
                if blocks.len() != caps.len() {
                    return Err(Error::InvalidInstance(
                        "partition blocks and caps differ in length".into(),
                    ));
                }
                let mut seen = BTreeSet::new();
                for (block, cap) in blocks.iter().zip(caps) {
                    if *cap > block.len() {
                        return Err(Error::InvalidInstance(format!(
                            "cap {cap} exceeds block size {}",
                            block.len()
                        )));
                    }
                    for &e in block {
                        if !seen.insert(e) {
                            return Err(Error::InvalidInstance(format!(
                                "element {e} appears in two partition blocks"
                            )));
                        }
                    }
                }
            }
            MatroidSpec::Graphic { .. } | MatroidSpec::Linear { .. } => {}
            MatroidSpec::Minor {
                base,
                contracted,
                deleted,
            } => {
                base.validate()?;
                let universe = base.universe();
                for &e in contracted.iter().chain(deleted) {
                    if !universe.contains(&e) {
                        return Err(Error::ElementOutOfRange {
                            id: e,
                            universe: universe.len(),
                        });
                    }
                }
                if contracted.intersection(deleted).next().is_some() {
                    return Err(Error::InvalidInstance(
                        "contracted and deleted sets overlap".into(),
                    ));
                }
                if rank_of(base, contracted)? != contracted.len() {
                    return Err(Error::DependentContraction);
                }
            }
            MatroidSpec::Relabel { base, map } => {
                base.validate()?;
                let universe = base.universe();
                let mut seen = BTreeSet::new();
                for &e in map {
                    if !universe.contains(&e) {
                        return Err(Error::ElementOutOfRange {
                            id: e,
                            universe: universe.len(),
                        });
                    }
                    if !seen.insert(e) {
                        return Err(Error::InvalidInstance(format!(
                            "relabel map repeats base element {e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn rank_of(spec: &MatroidSpec, set: &BTreeSet<usize>) -> Result<usize> {
    match spec {
        MatroidSpec::Uniform { rank, .. } => Ok(set.len().min(*rank)),
        MatroidSpec::Partition { blocks, caps } => {
            let mut total = 0;
            for (block, cap) in blocks.iter().zip(caps) {
                total += set.intersection(block).count().min(*cap);
            }
            Ok(total)
        }
        MatroidSpec::Graphic { graph } => {
            let mut uf = UnionFind::new(graph.node_count());
            let mut merges = 0;
            for &e in set {
                let (u, v) = graph.endpoints(e)?;
                if uf.union(u, v) {
                    merges += 1;
                }
            }
            Ok(merges)
        }
        MatroidSpec::Linear { vectors } => {
            let rows: Vec<RatVec> = set
                .iter()
                .map(|&e| {
                    if e >= vectors.nrows() {
                        return Err(Error::ElementOutOfRange {
                            id: e,
                            universe: vectors.nrows(),
                        });
                    }
                    Ok(vectors.row(e).clone())
                })
                .collect::<Result<_>>()?;
            Ok(numeric::rank(&rows))
        }
        MatroidSpec::Minor {
            base, contracted, ..
        } => {
            let mut merged = contracted.clone();
            merged.extend(set.iter().copied());
            Ok(rank_of(base, &merged)? - rank_of(base, contracted)?)
        }
        MatroidSpec::Relabel { base, map } => {
            let mapped: BTreeSet<usize> = set
                .iter()
                .map(|&e| {
                    map.get(e).copied().ok_or(Error::ElementOutOfRange {
                        id: e,
                        universe: map.len(),
                    })
                })
                .collect::<Result<_>>()?;
            rank_of(base, &mapped)
        }
    }
}

/// Rank oracle over a validated [`MatroidSpec`], with a memo keyed by the
/// queried set. The memo is behind a mutex so oracles can be shared across
/// threads; minors returned by [`contract`] and [`delete`] get fresh memos.
pub struct RankOracle {
    spec: MatroidSpec,
    universe: BTreeSet<usize>,
    memo: Mutex<HashMap<Vec<usize>, usize>>,
}

impl RankOracle {
    pub fn new(spec: MatroidSpec) -> Result<Self> {
        spec.validate()?;
        let universe = spec.universe();
        Ok(RankOracle {
            spec,
            universe,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &MatroidSpec {
        &self.spec
    }

    pub fn universe(&self) -> &BTreeSet<usize> {
        &self.universe
    }

    fn check_subset(&self, set: &BTreeSet<usize>) -> Result<()> {
        for &e in set {
            if !self.universe.contains(&e) {
                return Err(Error::ElementOutOfRange {
                    id: e,
                    universe: self.universe.len(),
                });
            }
        }
        Ok(())
    }

    pub fn rank(&self, set: &BTreeSet<usize>) -> Result<usize> {
        self.check_subset(set)?;
        let key: Vec<usize> = set.iter().copied().collect();
        {
            let memo = self.memo.lock().unwrap_or_else(PoisonError::into_inner);
            if let Some(&r) = memo.get(&key) {
                return Ok(r);
            }
        }
        let r = rank_of(&self.spec, set)?;
        self.memo
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .insert(key, r);
        Ok(r)
    }

    pub fn independent(&self, set: &BTreeSet<usize>) -> Result<bool> {
        Ok(self.rank(set)? == set.len())
    }

    pub fn full_rank(&self) -> Result<usize> {
        self.rank(&self.universe.clone())
    }
}

/// Most-violated rank inequality `x(S) <= r(S)` over subsets of the support
/// of `x`, or `None` when `x` lies in the independent-set polytope.
/// `elements[i]` names the matroid element carried by coordinate `i`.
#[derive(Debug, Clone)]
pub struct RankViolation {
    /// Violating set, as coordinate positions into `x`.
    pub positions: Vec<usize>,
    /// The same set as matroid element ids.
    pub elements: BTreeSet<usize>,
    pub rank: usize,
    pub excess: Rat,
}

pub fn separate(
    oracle: &RankOracle,
    x: &RatVec,
    elements: &[usize],
    limits: &Limits,
) -> Result<Option<RankViolation>> {
    if x.len() != elements.len() {
        return Err(Error::DimensionMismatch {
            expected: elements.len(),
            found: x.len(),
        });
    }
    if oracle.universe().len() > limits.separation_universe {
        return Err(Error::ResourceBound(format!(
            "separation scan limited to universes of size {}, got {}",
            limits.separation_universe,
            oracle.universe().len()
        )));
    }
    let one = Rat::one();
    for v in x.iter() {
        if v.is_negative() || *v > one {
            return Err(Error::InvalidParameter(
                "separation point must lie in [0,1] per coordinate".into(),
            ));
        }
    }
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i].is_positive()).collect();
    let mut best: Option<RankViolation> = None;
    // subsets in ascending mask order; strict improvement keeps the first
    // maximizer, so the result is deterministic
    for mask in 1u64..(1u64 << support.len()) {
        let mut positions = Vec::new();
        let mut sum = Rat::zero();
        for (bit, &pos) in support.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                positions.push(pos);
                sum += &x[pos];
            }
        }
        let ids: BTreeSet<usize> = positions.iter().map(|&p| elements[p]).collect();
        let rank = oracle.rank(&ids)?;
        let excess = sum - Rat::from_int(rank as i64);
        if excess.is_positive() && best.as_ref().map_or(true, |b| excess > b.excess) {
            best = Some(RankViolation {
                positions,
                elements: ids,
                rank,
                excess,
            });
        }
    }
    Ok(best)
}

/// Maximum-weight independent set by the matroid greedy rule
/// (weight descending, element id ascending on ties). Elements of negative
/// weight are never taken.
pub fn greedy_max_weight(oracle: &RankOracle, weights: &RatVec) -> Result<BTreeSet<usize>> {
    let mut order: Vec<usize> = oracle.universe().iter().copied().collect();
    if let Some(&max_id) = order.last() {
        if weights.len() <= max_id {
            return Err(Error::DimensionMismatch {
                expected: max_id + 1,
                found: weights.len(),
            });
        }
    }
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut chosen = BTreeSet::new();
    for e in order {
        if !weights[e].is_positive() {
            continue;
        }
        chosen.insert(e);
        if !oracle.independent(&chosen)? {
            chosen.remove(&e);
        }
    }
    Ok(chosen)
}

/// Contraction by an independent set, as a wrapping minor.
pub fn contract(spec: &MatroidSpec, set: &BTreeSet<usize>) -> Result<MatroidSpec> {
    if set.is_empty() {
        return Ok(spec.clone());
    }
    if rank_of(spec, set)? != set.len() {
        return Err(Error::DependentContraction);
    }
    Ok(match spec {
        MatroidSpec::Minor {
            base,
            contracted,
            deleted,
        } => {
            // set ids live in the minor's universe; lift them to the base
            let mut merged = contracted.clone();
            merged.extend(set.iter().copied());
            MatroidSpec::Minor {
                base: base.clone(),
                contracted: merged,
                deleted: deleted.clone(),
            }
        }
        other => MatroidSpec::Minor {
            base: Box::new(other.clone()),
            contracted: set.clone(),
            deleted: BTreeSet::new(),
        },
    })
}

/// Deletion of a set of elements, as a wrapping minor.
pub fn delete(spec: &MatroidSpec, set: &BTreeSet<usize>) -> Result<MatroidSpec> {
    if set.is_empty() {
        return Ok(spec.clone());
    }
    let universe = spec.universe();
    for &e in set {
        if !universe.contains(&e) {
            return Err(Error::ElementOutOfRange {
                id: e,
                universe: universe.len(),
            });
        }
    }
    Ok(match spec {
        MatroidSpec::Minor {
            base,
            contracted,
            deleted,
        } => {
            let mut merged = deleted.clone();
            merged.extend(set.iter().copied());
            MatroidSpec::Minor {
                base: base.clone(),
                contracted: contracted.clone(),
                deleted: merged,
            }
        }
        other => MatroidSpec::Minor {
            base: Box::new(other.clone()),
            contracted: BTreeSet::new(),
            deleted: set.clone(),
        },
    })
}

/// Renames the surviving elements of `spec` so that position `i` of `keep`
/// becomes element `i`. Used to expose minors as instances with contiguous
/// element ids.
pub fn relabel(spec: &MatroidSpec, keep: &[usize]) -> Result<MatroidSpec> {
    let relabeled = MatroidSpec::Relabel {
        base: Box::new(spec.clone()),
        map: keep.to_vec(),
    };
    relabeled.validate()?;
    Ok(relabeled)
}
