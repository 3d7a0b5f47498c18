//! (1-eps)-approximation for k-budgeted matroid independent set.
//!
//! The driver guesses the heaviest elements of the optimum, contracts them,
//! solves the budgeted matroid LP to a certified vertex, and rounds the
//! fractional coordinates down. Vertices of the matroid polytope cut by `k`
//! budget rows are nearly integral — at most `2d` fractional coordinates
//! summing to at most `d`, where `d` counts the tight budget rows — so the
//! rounding loses at most `k` heaviest-element weights, which the guessing
//! step makes negligible.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BudgetedInstance, GroundSpec};
use crate::lp::{
    solve_with_separation, Row, SeparationOutcome, SeparationProblem, VertexSolution,
};
use crate::matroid::{contract, separate, MatroidSpec, RankOracle};
use crate::numeric::{Rat, RatVec};
use crate::Limits;

/// Near-integrality data of an LP vertex over a matroid polytope cut by
/// budget rows. `frac_count <= 2 * d_bound` and `frac_sum <= d_bound` hold
/// on every certified vertex; [`check_face`] errors if they ever fail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceDiagnostics {
    /// Number of budget rows tight at the vertex (an upper bound on the
    /// dimension of the minimal polytope face through it).
    pub d_bound: usize,
    pub frac_count: usize,
    pub frac_sum: Rat,
}

/// Counts fractional coordinates of a vertex of (matroid polytope ∩ k
/// budget rows) and checks the near-integrality bounds. The first `k` rows
/// of the defining LP must be the budget rows.
pub fn check_face(sol: &VertexSolution, k: usize) -> Result<FaceDiagnostics> {
    if sol.duals.len() < k {
        return Err(Error::InvalidParameter(format!(
            "vertex carries {} rows, expected at least {k} budget rows",
            sol.duals.len()
        )));
    }
    let d_bound = (0..k).filter(|r| sol.tight_rows.contains(r)).count();
    let fracs = sol.frac_positions();
    let frac_count = fracs.len();
    let frac_sum: Rat = fracs.iter().map(|&j| sol.x[j].clone()).sum();
    if frac_count > 2 * d_bound {
        return Err(Error::InvariantViolation(format!(
            "{frac_count} fractional components on a face with d_bound = {d_bound}"
        )));
    }
    if frac_sum > Rat::from_int(d_bound as i64) {
        return Err(Error::InvariantViolation(format!(
            "fractional mass {frac_sum} exceeds d_bound = {d_bound}"
        )));
    }
    Ok(FaceDiagnostics {
        d_bound,
        frac_count,
        frac_sum,
    })
}

/// Keeps the coordinates at exactly 1; the result is an independent set
/// whenever `x` lies in the matroid polytope (checked against the oracle).
pub fn round_down(
    x: &RatVec,
    oracle: &RankOracle,
    elements: &[usize],
) -> Result<BTreeSet<usize>> {
    let kept: BTreeSet<usize> = (0..x.len())
        .filter(|&pos| x[pos] == Rat::one())
        .map(|pos| elements[pos])
        .collect();
    if !oracle.independent(&kept)? {
        return Err(Error::InvariantViolation(
            "rounded-down support is dependent".into(),
        ));
    }
    Ok(kept)
}

/// Solves `max w^T x` over the matroid polytope of `oracle` (restricted to
/// `elements`) intersected with the budget rows, to a certified vertex.
/// Budget rows come first in the returned LP, cuts after.
pub fn budgeted_matroid_vertex(
    oracle: &RankOracle,
    elements: &[usize],
    objective: RatVec,
    budget_rows: Vec<Row>,
    limits: &Limits,
) -> Result<SeparationOutcome> {
    let n = elements.len();
    let sep_oracle = move |x: &RatVec| -> Result<Option<Row>> {
        let violation = separate(oracle, x, elements, limits)?;
        Ok(violation.map(|v| {
            let mut coeffs = RatVec::zeros(n);
            for &pos in &v.positions {
                coeffs.set(pos, Rat::one());
            }
            Row::le(coeffs, Rat::from_int(v.rank as i64))
        }))
    };
    solve_with_separation(
        SeparationProblem {
            objective,
            budget_rows,
            oracle: Box::new(sep_oracle),
        },
        limits,
    )
}

/// Per-guess trace record, one JSON line each in verbose CLI mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuessRecord {
    pub guess: Vec<usize>,
    pub lp_value: Rat,
    pub d_bound: usize,
    pub frac_count: usize,
    pub frac_sum: Rat,
    pub candidate: Vec<usize>,
    pub weight: Rat,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct KBudgetOutcome {
    pub chosen: BTreeSet<usize>,
    pub weight: Rat,
    pub records: Vec<GuessRecord>,
}

/// The full scheme: for every feasible independent guess of at most
/// `k / eps` elements, contract it, drop elements heavier than the
/// lightest guessed one or over the residual budgets, solve the budgeted
/// matroid LP, round down, and keep the best union. Requires `1/eps` to be
/// a positive integer; guarantees weight at least `(1 - eps) * OPT`.
///
/// `jobs > 1` evaluates guesses on a thread pool; the result is merged
/// deterministically (best weight, then lexicographically smallest set).
pub fn solve_kbudget_matroid(
    inst: &BudgetedInstance,
    eps: &Rat,
    limits: &Limits,
    jobs: usize,
) -> Result<KBudgetOutcome> {
    let GroundSpec::Matroid { spec } = inst.ground() else {
        return Err(Error::InvalidParameter(
            "this solver needs a matroid ground structure".into(),
        ));
    };
    let k = inst.budget_count();
    if k == 0 {
        return Err(Error::InvalidParameter(
            "this solver expects at least one budget".into(),
        ));
    }
    let h = guess_size(eps, k)?;
    let base = RankOracle::new(spec.clone())?;
    let guesses = enumerate_guesses(inst, &base, h, limits)?;

    let evaluate = |guess: &BTreeSet<usize>| evaluate_guess(inst, spec, guess, limits);
    let records: Vec<GuessRecord> = if jobs > 1 {
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
                "candidate violates a budget despite LP feasibility".into(),
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
    Ok(KBudgetOutcome {
        chosen,
        weight,
        records,
    })
}

/// `h = k / eps` with the integrality requirement `1/eps` a positive
/// integer.
pub fn guess_size(eps: &Rat, k: usize) -> Result<usize> {
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
    let h = Rat::from_int(k as i64) * inv;
    h.floor_usize().ok_or_else(|| {
        Error::InvalidParameter("guess size k/eps does not fit in usize".into())
    })
}

/// All independent, budget-feasible guesses of size at most `h`, in
/// lexicographic order (the empty guess first).
fn enumerate_guesses(
    inst: &BudgetedInstance,
    oracle: &RankOracle,
    h: usize,
    limits: &Limits,
) -> Result<Vec<BTreeSet<usize>>> {
    let m = inst.element_count();
    let mut out = Vec::new();
    let mut current = BTreeSet::new();
    let mut lengths = vec![Rat::zero(); inst.budget_count()];
    let mut steps = 0u64;
    fn dfs(
        inst: &BudgetedInstance,
        oracle: &RankOracle,
        h: usize,
        m: usize,
        start: usize,
        current: &mut BTreeSet<usize>,
        lengths: &mut Vec<Rat>,
        steps: &mut u64,
        cap: u64,
        out: &mut Vec<BTreeSet<usize>>,
    ) -> Result<()> {
        *steps += 1;
        if *steps > cap {
            return Err(Error::ResourceBound(format!(
                "guess enumeration exceeded {cap} steps"
            )));
        }
        out.push(current.clone());
        if current.len() == h {
            return Ok(());
        }
        for e in start..m {
            let row = inst.lengths().row(e);
            let fits = lengths
                .iter()
                .zip(row.iter())
                .zip(inst.budgets().iter())
                .all(|((cur, add), cap)| &(cur + add) <= cap);
            if !fits {
                continue;
            }
            current.insert(e);
            if oracle.independent(current)? {
                for (cur, add) in lengths.iter_mut().zip(row.iter()) {
                    *cur += add;
                }
                dfs(inst, oracle, h, m, e + 1, current, lengths, steps, cap, out)?;
                for (cur, add) in lengths.iter_mut().zip(row.iter()) {
                    *cur -= add;
                }
            }
            current.remove(&e);
        }
        Ok(())
    }
    dfs(
        inst,
        oracle,
        h,
        m,
        0,
        &mut current,
        &mut lengths,
        &mut steps,
        limits.enumeration_steps,
        &mut out,
    )?;
    Ok(out)
}

fn evaluate_guess(
    inst: &BudgetedInstance,
    spec: &MatroidSpec,
    guess: &BTreeSet<usize>,
    limits: &Limits,
) -> Result<GuessRecord> {
    let k = inst.budget_count();
    let guess_lengths = inst.lengths_of(guess)?;
    let residual: RatVec = inst
        .budgets()
        .iter()
        .zip(guess_lengths.iter())
        .map(|(cap, used)| cap - used)
        .collect();
    let weight_cap = guess.iter().map(|&e| inst.weights()[e].clone()).min();

    // survivors: outside the guess, not heavier than the lightest guessed
    // element, and individually inside the residual budgets
    let elements: Vec<usize> = (0..inst.element_count())
        .filter(|e| !guess.contains(e))
        .filter(|&e| match &weight_cap {
            Some(cap) => inst.weights()[e] <= *cap,
            None => true,
        })
        .filter(|&e| {
            inst.lengths()
                .row(e)
                .iter()
                .zip(residual.iter())
                .all(|(l, r)| l <= r)
        })
        .collect();

    let reduced = RankOracle::new(contract(spec, guess)?)?;
    let objective: RatVec = elements.iter().map(|&e| inst.weights()[e].clone()).collect();
    let budget_rows: Vec<Row> = (0..k)
        .map(|i| {
            let coeffs: RatVec = elements
                .iter()
                .map(|&e| inst.lengths().entry(e, i).clone())
                .collect();
            Row::le(coeffs, residual[i].clone())
        })
        .collect();

    let outcome = budgeted_matroid_vertex(&reduced, &elements, objective, budget_rows, limits)?;
    let diag = check_face(&outcome.solution, k)?;
    let rounded = round_down(&outcome.solution.x, &reduced, &elements)?;

    let mut candidate: BTreeSet<usize> = guess.clone();
    candidate.extend(rounded.iter().copied());
    let weight = inst.weight_of(&candidate)?;
    let feasible = inst.feasible(&candidate)?;
    Ok(GuessRecord {
        guess: guess.iter().copied().collect(),
        lp_value: outcome.solution.objective_value.clone(),
        d_bound: diag.d_bound,
        frac_count: diag.frac_count,
        frac_sum: diag.frac_sum,
        candidate: candidate.iter().copied().collect(),
        weight,
        feasible,
    })
}
