//! Exact rational linear programming.
//!
//! [`solve_vertex`] maximizes over `{0 <= x <= 1, rows}` with a dense
//! two-phase simplex using Bland's rule, so runs are deterministic and
//! never cycle. Solutions come back as certified vertices: the tight
//! constraints are rank-checked exactly and the returned duals satisfy
//! dual feasibility and complementary slackness exactly, or the solver
//! refuses to answer.
//!
//! [`solve_with_separation`] grows the row set with a separation oracle:
//! solve the current relaxation to a vertex, ask the oracle for a violated
//! inequality, add it, repeat. Each accepted row must cut off the current
//! vertex, which bounds the loop.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{self, Rat, RatVec};
use crate::Limits;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: RatVec,
    pub relation: Relation,
    pub rhs: Rat,
}

impl Row {
    pub fn le(coeffs: RatVec, rhs: Rat) -> Self {
        Row {
            coeffs,
            relation: Relation::Le,
            rhs,
        }
    }

    pub fn eq(coeffs: RatVec, rhs: Rat) -> Self {
        Row {
            coeffs,
            relation: Relation::Eq,
            rhs,
        }
    }

    pub fn evaluate(&self, x: &RatVec) -> Result<Rat> {
        self.coeffs.dot(x)
    }
}

/// Maximization over the unit box intersected with the listed rows.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: RatVec,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if row.coeffs.len() != self.num_vars() {
                return Err(Error::DimensionMismatch {
                    expected: self.num_vars(),
                    found: row.coeffs.len(),
                });
            }
        }
        Ok(())
    }
}

/// Line-oriented equational dump, one row per line:
/// `max: c0 x0 + c1 x1 ...`, then `r<i>: a0 x0 + ... <= rhs`, then the
/// shared box line. Meant for debugging and the CLI's `--dump-lp`.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |c: &Rat, j: usize| format!("{c} x{j}");
        let expr = |coeffs: &RatVec| -> String {
            let terms: Vec<String> = coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| term(c, j))
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        };
        writeln!(f, "max: {}", expr(&self.objective))?;
        for (i, row) in self.rows.iter().enumerate() {
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
            };
            writeln!(f, "r{i}: {} {rel} {}", expr(&row.coeffs), row.rhs)?;
        }
        write!(f, "box: 0 <= x_j <= 1 for all j")
    }
}

/// Optimal basic solution with exact certificates.
#[derive(Debug, Clone)]
pub struct VertexSolution {
    pub x: RatVec,
    pub objective_value: Rat,
    /// User rows satisfied with equality at `x`.
    pub tight_rows: BTreeSet<usize>,
    /// One dual per user row, nonnegative on `<=` rows.
    pub duals: Vec<Rat>,
    /// Duals of the implicit `x_j <= 1` bounds.
    pub upper_bound_duals: RatVec,
}

impl VertexSolution {
    pub fn frac_positions(&self) -> Vec<usize> {
        (0..self.x.len())
            .filter(|&j| !self.x[j].is_integer())
            .collect()
    }
}

const COL_NONE: usize = usize::MAX;

struct Tableau {
    n_vars: usize,
    n_rows: usize,
    cols: usize,
    first_artificial: usize,
    /// Standard-form matrix as pivoted so far (`B^{-1} A`).
    a: Vec<Vec<Rat>>,
    b: Vec<Rat>,
    basis: Vec<usize>,
    /// Standard-form matrix as built, for dual extraction.
    orig: Vec<Vec<Rat>>,
    /// Which rows were negated to make the rhs nonnegative.
    negated: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars();
        let n_user = lp.rows.len();
        let n_rows = n_user + n; // user rows then x_j <= 1 bounds

        // count slacks: every <= row gets one; bound rows are all <=
        let mut slack_of_row = vec![COL_NONE; n_rows];
        let mut next_col = n;
        for (r, row) in lp.rows.iter().enumerate() {
            if row.relation == Relation::Le {
                slack_of_row[r] = next_col;
                next_col += 1;
            }
        }
        for r in n_user..n_rows {
            slack_of_row[r] = next_col;
            next_col += 1;
        }
        let first_artificial = next_col;

        let mut a: Vec<Vec<Rat>> = Vec::with_capacity(n_rows);
        let mut b: Vec<Rat> = Vec::with_capacity(n_rows);
        let mut negated = vec![false; n_rows];
        for (r, row) in lp
            .rows
            .iter()
            .map(|row| (row.coeffs.clone(), row.rhs.clone()))
            .chain((0..n).map(|j| {
                let mut coeffs = RatVec::zeros(n);
                coeffs.set(j, Rat::one());
                (coeffs, Rat::one())
            }))
            .enumerate()
        {
            let (coeffs, rhs) = row;
            let flip = rhs.is_negative();
            negated[r] = flip;
            let sign = if flip { -Rat::one() } else { Rat::one() };
            let mut dense = vec![Rat::zero(); first_artificial];
            for (j, c) in coeffs.iter().enumerate() {
                dense[j] = c * &sign;
            }
            if slack_of_row[r] != COL_NONE {
                dense[slack_of_row[r]] = sign.clone();
            }
            a.push(dense);
            b.push(&rhs * &sign);
        }

        // rows whose slack now has coefficient +1 start basic; the rest get
        // an artificial
        let mut basis = vec![COL_NONE; n_rows];
        let mut artificial_rows = Vec::new();
        for r in 0..n_rows {
            if slack_of_row[r] != COL_NONE && !negated[r] {
                basis[r] = slack_of_row[r];
            } else {
                artificial_rows.push(r);
            }
        }
        let cols = first_artificial + artificial_rows.len();
        for row in a.iter_mut() {
            row.resize(cols, Rat::zero());
        }
        for (i, &r) in artificial_rows.iter().enumerate() {
            a[r][first_artificial + i] = Rat::one();
            basis[r] = first_artificial + i;
        }
        let orig = a.clone();
        Tableau {
            n_vars: n,
            n_rows,
            cols,
            first_artificial,
            a,
            b,
            basis,
            orig,
            negated,
        }
    }

    /// Reduced-cost row and objective value for maximizing `costs`.
    fn priced_objective(&self, costs: &[Rat]) -> (Vec<Rat>, Rat) {
        let mut rc = costs.to_vec();
        let mut value = Rat::zero();
        for (r, &bv) in self.basis.iter().enumerate() {
            let c = &costs[bv];
            if c.is_zero() {
                continue;
            }
            value += &(c * &self.b[r]);
            for j in 0..self.cols {
                if !self.a[r][j].is_zero() {
                    let delta = c * &self.a[r][j];
                    rc[j] = &rc[j] - &delta;
                }
            }
        }
        (rc, value)
    }

    fn pivot(&mut self, row: usize, col: usize, rc: &mut Vec<Rat>, value: &mut Rat) {
        let pivot_val = self.a[row][col].clone();
        let inv = Rat::one().checked_div(&pivot_val).expect("nonzero pivot");
        for j in 0..self.cols {
            self.a[row][j] = &self.a[row][j] * &inv;
        }
        self.b[row] = &self.b[row] * &inv;
        for r in 0..self.n_rows {
            if r == row || self.a[r][col].is_zero() {
                continue;
            }
            let factor = self.a[r][col].clone();
            for j in 0..self.cols {
                if !self.a[row][j].is_zero() {
                    let delta = &self.a[row][j] * &factor;
                    self.a[r][j] = &self.a[r][j] - &delta;
                }
            }
            self.b[r] = &self.b[r] - &(&self.b[row] * &factor);
        }
        if !rc[col].is_zero() {
            let factor = rc[col].clone();
            for j in 0..self.cols {
                if !self.a[row][j].is_zero() {
                    let delta = &self.a[row][j] * &factor;
                    rc[j] = &rc[j] - &delta;
                }
            }
            *value += &(&self.b[row] * &factor);
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column is the smallest eligible index with a
    /// positive reduced cost; the leaving row minimizes the ratio, ties
    /// broken by smallest basic variable. Returns the final objective value.
    fn optimize(&mut self, costs: &[Rat], ban_artificials: bool) -> Result<Rat> {
        let (mut rc, mut value) = self.priced_objective(costs);
        loop {
            let eligible_cols = if ban_artificials {
                self.first_artificial
            } else {
                self.cols
            };
            let entering = (0..eligible_cols).find(|&j| rc[j].is_positive());
            let Some(col) = entering else {
                return Ok(value);
            };
            let mut leave: Option<(usize, Rat)> = None;
            for r in 0..self.n_rows {
                if !self.a[r][col].is_positive() {
                    continue;
                }
                let ratio = self.b[r].checked_div(&self.a[r][col]).expect("positive");
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::InvariantViolation(
                    "unbounded direction in a box-constrained program".into(),
                ));
            };
            self.pivot(row, col, &mut rc, &mut value);
        }
    }

    /// After a feasible phase 1, pivot artificials out of the basis where
    /// possible; rows that stay artificial are redundant and frozen at zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.n_rows {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            let col = (0..self.first_artificial).find(|&j| !self.a[r][j].is_zero());
            if let Some(col) = col {
                let (mut rc, mut value) = (vec![Rat::zero(); self.cols], Rat::zero());
                self.pivot(r, col, &mut rc, &mut value);
            }
        }
    }

    fn extract_x(&self) -> RatVec {
        let mut x = vec![Rat::zero(); self.n_vars];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.n_vars {
                x[bv] = self.b[r].clone();
            }
        }
        RatVec::new(x)
    }

    /// Row duals from the final basis: solve `B^T y = c_B` exactly, then
    /// undo row negations.
    fn extract_duals(&self, costs: &[Rat]) -> Result<Vec<Rat>> {
        let bt_rows: Vec<RatVec> = (0..self.n_rows)
            .map(|r| {
                // row r of B^T = column over rows of basis var coefficients
                self.basis
                    .iter()
                    .map(|&bv| self.orig[r][bv].clone())
                    .collect()
            })
            .collect();
        // transpose: entry (i, j) of B^T is orig[j][basis[i]]
        let bt: Vec<RatVec> = (0..self.n_rows)
            .map(|i| {
                (0..self.n_rows)
                    .map(|j| bt_rows[j][i].clone())
                    .collect()
            })
            .collect();
        let c_b: RatVec = self.basis.iter().map(|&bv| costs[bv].clone()).collect();
        let y = numeric::solve_square(&bt, &c_b).ok_or_else(|| {
            Error::InvariantViolation("singular basis while extracting duals".into())
        })?;
        Ok((0..self.n_rows)
            .map(|r| {
                if self.negated[r] {
                    -&y[r]
                } else {
                    y[r].clone()
                }
            })
            .collect())
    }
}

/// Exact optimal vertex of the LP, with duals. Deterministic via Bland's
/// rule. Errors with [`Error::Infeasible`] when the feasible region is
/// empty.
pub fn solve_vertex(lp: &LinearProgram) -> Result<VertexSolution> {
    lp.validate()?;
    let mut t = Tableau::build(lp);

    if t.first_artificial < t.cols {
        let mut phase1 = vec![Rat::zero(); t.cols];
        for c in phase1.iter_mut().skip(t.first_artificial) {
            *c = -Rat::one();
        }
        let reached = t.optimize(&phase1, false)?;
        if reached.is_negative() {
            return Err(Error::Infeasible);
        }
        t.drive_out_artificials();
    }

    let mut costs = vec![Rat::zero(); t.cols];
    for (j, c) in lp.objective.iter().enumerate() {
        costs[j] = c.clone();
    }
    t.optimize(&costs, true)?;

    let x = t.extract_x();
    let objective_value = lp.objective.dot(&x)?;
    let all_duals = t.extract_duals(&costs)?;
    let duals = all_duals[..lp.rows.len()].to_vec();
    let upper_bound_duals = RatVec::new(all_duals[lp.rows.len()..].to_vec());

    let mut tight_rows = BTreeSet::new();
    for (r, row) in lp.rows.iter().enumerate() {
        if row.evaluate(&x)? == row.rhs {
            tight_rows.insert(r);
        }
    }
    let solution = VertexSolution {
        x,
        objective_value,
        tight_rows,
        duals,
        upper_bound_duals,
    };
    certify(lp, &solution)?;
    Ok(solution)
}

/// Exact optimality and vertex certificates; every solver output passes
/// through here before being returned.
fn certify(lp: &LinearProgram, sol: &VertexSolution) -> Result<()> {
    let n = lp.num_vars();
    let fail = |what: &str| Err(Error::InvariantViolation(format!("vertex check: {what}")));

    // primal feasibility
    for (j, v) in sol.x.iter().enumerate() {
        if v.is_negative() || *v > Rat::one() {
            return fail(&format!("x{j} = {v} outside the unit box"));
        }
    }
    for (r, row) in lp.rows.iter().enumerate() {
        let lhs = row.evaluate(&sol.x)?;
        let ok = match row.relation {
            Relation::Le => lhs <= row.rhs,
            Relation::Eq => lhs == row.rhs,
        };
        if !ok {
            return fail(&format!("row {r} violated"));
        }
    }

    // dual feasibility: <=-row duals nonnegative, reduced costs of the
    // x-columns bounded by the bound duals
    for (r, row) in lp.rows.iter().enumerate() {
        if row.relation == Relation::Le && sol.duals[r].is_negative() {
            return fail(&format!("negative dual on <= row {r}"));
        }
    }
    for j in 0..n {
        if sol.upper_bound_duals[j].is_negative() {
            return fail(&format!("negative bound dual on x{j}"));
        }
        let mut reduced = lp.objective[j].clone();
        for (r, row) in lp.rows.iter().enumerate() {
            reduced -= &(&sol.duals[r] * &row.coeffs[j]);
        }
        reduced -= &sol.upper_bound_duals[j];
        // leftover must be covered by the x_j >= 0 multiplier
        if reduced.is_positive() {
            return fail(&format!("reduced cost of x{j} stays positive"));
        }
        // complementary slackness on x_j > 0
        if sol.x[j].is_positive() && !reduced.is_zero() {
            return fail(&format!("slack reduced cost on positive x{j}"));
        }
    }

    // complementary slackness on rows and bounds
    for (r, row) in lp.rows.iter().enumerate() {
        if sol.duals[r].is_positive()
            && row.relation == Relation::Le
            && !sol.tight_rows.contains(&r)
        {
            return fail(&format!("positive dual on slack row {r}"));
        }
    }
    for j in 0..n {
        if sol.upper_bound_duals[j].is_positive() && sol.x[j] != Rat::one() {
            return fail(&format!("positive bound dual with x{j} < 1"));
        }
    }

    // strong duality, exact
    let mut dual_value = Rat::zero();
    for (r, row) in lp.rows.iter().enumerate() {
        dual_value += &(&sol.duals[r] * &row.rhs);
    }
    dual_value += &sol.upper_bound_duals.sum();
    if dual_value != sol.objective_value {
        return fail("strong duality gap");
    }

    // vertex rank certificate: tight rows plus tight bounds span R^n
    let mut tight: Vec<RatVec> = sol
        .tight_rows
        .iter()
        .map(|&r| lp.rows[r].coeffs.clone())
        .collect();
    for j in 0..n {
        if sol.x[j].is_zero() || sol.x[j] == Rat::one() {
            let mut unit = RatVec::zeros(n);
            unit.set(j, Rat::one());
            tight.push(unit);
        }
    }
    if numeric::rank(&tight) != n {
        return fail("tight constraints do not pin the point");
    }
    Ok(())
}

/// A polytope reached through a separation callback, optimized together
/// with explicit budget rows. The callback must return an inequality
/// violated by its argument, or `None` when the point is inside.
pub struct SeparationProblem<'a> {
    pub objective: RatVec,
    pub budget_rows: Vec<Row>,
    pub oracle: Box<dyn FnMut(&RatVec) -> Result<Option<Row>> + 'a>,
}

pub struct SeparationOutcome {
    pub solution: VertexSolution,
    /// The final relaxation: budget rows first, then the accepted cuts.
    pub lp: LinearProgram,
    pub rounds: usize,
}

pub fn solve_with_separation(
    mut sp: SeparationProblem<'_>,
    limits: &Limits,
) -> Result<SeparationOutcome> {
    let mut lp = LinearProgram {
        objective: sp.objective.clone(),
        rows: sp.budget_rows.clone(),
    };
    for round in 0..limits.cut_rounds {
        let solution = solve_vertex(&lp)?;
        match (sp.oracle)(&solution.x)? {
            None => {
                return Ok(SeparationOutcome {
                    solution,
                    lp,
                    rounds: round,
                })
            }
            Some(cut) => {
                let lhs = cut.evaluate(&solution.x)?;
                let cuts_off = match cut.relation {
                    Relation::Le => lhs > cut.rhs,
                    Relation::Eq => lhs != cut.rhs,
                };
                if !cuts_off {
                    return Err(Error::InvariantViolation(
                        "separation oracle returned a non-violated row".into(),
                    ));
                }
                lp.rows.push(cut);
            }
        }
    }
    Err(Error::IterationCap(limits.cut_rounds))
}
