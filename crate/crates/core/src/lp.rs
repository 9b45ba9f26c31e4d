//! Exact rational linear programming: a dense two-phase simplex with
//! Bland's rule.
//!
//! Small and exact beats sparse and fast here: the feasibility systems this
//! crate solves (convex-hull membership over enumerated assignments) have at
//! most a few dozen rows and a few hundred columns, and every pivot must be
//! exact for the infeasibility verdicts to be trustworthy.

use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rat, solution: Vec<Rat> },
}

/// Minimize `c . x` subject to `a x = b`, `x >= 0`.
///
/// Rows with negative right-hand side are negated up front; redundant rows
/// are dropped after phase 1. Bland's rule (lowest eligible index) is used
/// for both the entering and leaving variable, so the method terminates.
pub fn solve(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), m);

    // Tableau: columns 0..n are structural, n..n+m artificial, last is rhs.
    let cols = n + m;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Rat> = Vec::with_capacity(cols + 1);
        for j in 0..n {
            row.push(if flip { -a[i][j].clone() } else { a[i][j].clone() });
        }
        for j in 0..m {
            row.push(if i == j { Rat::one() } else { Rat::zero() });
        }
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials.
    let phase1_cost = |j: usize| -> Rat {
        if j >= n {
            Rat::one()
        } else {
            Rat::zero()
        }
    };
    run_simplex(&mut t, &mut basis, cols, &phase1_cost);

    let infeasibility: Rat = basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= n)
        .map(|(i, _)| t[i][cols].clone())
        .sum();
    if !infeasibility.is_zero() {
        return LpOutcome::Infeasible;
    }

    // Drive artificials out of the basis; rows that cannot pivot are
    // redundant and get dropped.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            match (0..n).find(|&j| !t[i][j].is_zero()) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 over structural columns only.
    let phase2_cost = |j: usize| -> Rat {
        if j < n {
            c[j].clone()
        } else {
            // Artificials must never re-enter.
            Rat::one()
        }
    };
    if !run_simplex(&mut t, &mut basis, n, &phase2_cost) {
        return LpOutcome::Unbounded;
    }

    let mut solution = vec![Rat::zero(); n];
    let rhs = t[0].len() - 1;
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            solution[j] = t[i][rhs].clone();
        }
    }
    let value = (0..n).map(|j| &c[j] * &solution[j]).sum();
    LpOutcome::Optimal { value, solution }
}

/// Find any `x >= 0` with `a x = b`, or `None`.
pub fn feasible_point(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.first().map_or(0, |r| r.len());
    match solve(a, b, &vec![Rat::zero(); n]) {
        LpOutcome::Optimal { solution, .. } => Some(solution),
        _ => None,
    }
}

/// Returns false iff the objective is unbounded below. `active_cols` limits
/// which columns may enter the basis.
fn run_simplex(
    t: &mut Vec<Vec<Rat>>,
    basis: &mut [usize],
    active_cols: usize,
    cost: &dyn Fn(usize) -> Rat,
) -> bool {
    let rhs = t.first().map(|r| r.len() - 1).unwrap_or(0);
    loop {
        // Reduced costs: d_j = c_j - c_B . T[:, j].
        let mut entering = None;
        for j in 0..active_cols {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost(j);
            for (i, &bj) in basis.iter().enumerate() {
                let cb = cost(bj);
                if !cb.is_zero() {
                    d -= cb * &t[i][j];
                }
            }
            if d.is_negative() {
                entering = Some(j);
                break; // Bland: lowest index wins
            }
        }
        let Some(j) = entering else {
            return true;
        };

        // Ratio test; ties broken by lowest basis index (Bland).
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][rhs] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else {
            return false;
        };
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<Rat>], basis: &mut [usize], row: usize, col: usize) {
    let inv = t[row][col].recip();
    for e in t[row].iter_mut() {
        *e *= &inv;
    }
    for i in 0..t.len() {
        if i == row || t[i][col].is_zero() {
            continue;
        }
        let factor = t[i][col].clone();
        for j in 0..t[i].len() {
            let delta = &factor * &t[row][j];
            t[i][j] -= delta;
        }
        debug_assert!(t[i][col].is_zero());
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn r(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    #[test]
    fn solves_a_simple_program() {
        // min -x - y  s.t.  x + y + s = 1
        let a = vec![r(&[(1, 1), (1, 1), (1, 1)])];
        let b = r(&[(1, 1)]);
        let c = r(&[(-1, 1), (-1, 1), (0, 1)]);
        match solve(&a, &b, &c) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(-1, 1)),
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x + y = 1, x + y = 2
        let a = vec![r(&[(1, 1), (1, 1)]), r(&[(1, 1), (1, 1)])];
        let b = r(&[(1, 1), (2, 1)]);
        assert_eq!(solve(&a, &b, &r(&[(0, 1), (0, 1)])), LpOutcome::Infeasible);
        assert!(feasible_point(&a, &b).is_none());
    }

    #[test]
    fn detects_unboundedness() {
        // min -x  s.t.  x - y = 0
        let a = vec![r(&[(1, 1), (-1, 1)])];
        let b = r(&[(0, 1)]);
        assert_eq!(solve(&a, &b, &r(&[(-1, 1), (0, 1)])), LpOutcome::Unbounded);
    }

    #[test]
    fn handles_redundant_rows() {
        // Duplicated constraint plus a free minimum.
        let a = vec![
            r(&[(1, 1), (1, 1)]),
            r(&[(2, 1), (2, 1)]),
        ];
        let b = r(&[(1, 1), (2, 1)]);
        match solve(&a, &b, &r(&[(1, 1), (3, 1)])) {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, rat(1, 1));
                assert_eq!(solution, r(&[(1, 1), (0, 1)]));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -x = -3/4
        let a = vec![r(&[(-1, 1)])];
        let b = r(&[(-3, 4)]);
        match solve(&a, &b, &r(&[(1, 1)])) {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, rat(3, 4));
                assert_eq!(solution[0], rat(3, 4));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
