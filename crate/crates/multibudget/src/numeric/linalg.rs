//! Exact Gaussian elimination: rank and square-system solving.

use crate::numeric::{Rat, RatVec};

/// Rank of the row set, computed by fraction-exact elimination.
pub fn rank(rows: &[RatVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut work: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().cloned().collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        // first nonzero pivot below the current rank row
        let pivot = (rank..work.len()).find(|&i| !work[i][col].is_zero());
        let Some(pivot) = pivot else { continue };
        work.swap(rank, pivot);
        let pivot_row = work[rank].clone();
        let pivot_val = pivot_row[col].clone();
        for row in work.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].checked_div(&pivot_val).expect("nonzero pivot");
            for (entry, p) in row.iter_mut().zip(&pivot_row) {
                *entry = &*entry - &(p * &factor);
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    rank
}

/// Solves the square system `A y = b` exactly. Returns `None` when `A` is
/// singular.
pub fn solve_square(a: &[RatVec], b: &RatVec) -> Option<RatVec> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return None;
    }
    let mut work: Vec<Vec<Rat>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            let mut r: Vec<Rat> = row.iter().cloned().collect();
            r.push(rhs.clone());
            r
        })
        .collect();
    // forward elimination
    for col in 0..n {
        let pivot = (col..n).find(|&i| !work[i][col].is_zero())?;
        work.swap(col, pivot);
        let pivot_row = work[col].clone();
        let pivot_val = pivot_row[col].clone();
        for row in work.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].checked_div(&pivot_val).expect("nonzero pivot");
            for (entry, p) in row.iter_mut().zip(&pivot_row) {
                *entry = &*entry - &(p * &factor);
            }
        }
    }
    // back substitution
    let mut solution = vec![Rat::zero(); n];
    for row in (0..n).rev() {
        let mut acc = work[row][n].clone();
        for col in row + 1..n {
            acc -= &(&work[row][col] * &solution[col]);
        }
        solution[row] = acc.checked_div(&work[row][row]).expect("nonsingular");
    }
    Some(RatVec::new(solution))
}
