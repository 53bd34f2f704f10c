//! Rectangular linear assignment via shortest augmenting paths with
//! row/column potentials.

use super::CostMatrix;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

/// Minimum-cost one-to-one assignment over admissible entries.
///
/// Forbidden entries are never matched; among assignments of maximal
/// admissible cardinality the total cost is minimal. Matches whose cost
/// exceeds `gate` are then moved to the unmatched sets.
pub fn solve_assignment(c: &CostMatrix, gate: f64) -> Assignment {
    let (rows, cols) = c.shape();
    let mut matched_row = vec![false; rows];
    let mut matched_col = vec![false; cols];
    let mut matches = Vec::new();

    if rows > 0 && cols > 0 {
        let transpose = rows > cols;
        let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };

        let max_abs = c
            .values()
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        // Any extra forbidden pick costs more than every finite total can save.
        let big = 2.0 * (n as f64 + 1.0) * (max_abs + 1.0);

        let mut dense = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                let v = if transpose { c.get(j, i) } else { c.get(i, j) };
                dense[i * m + j] = if v.is_finite() { v } else { big };
            }
        }

        for (i, j) in solve_dense(&dense, n, m).into_iter().enumerate() {
            let (r, col) = if transpose { (j, i) } else { (i, j) };
            let v = c.get(r, col);
            if v.is_finite() && v <= gate {
                matched_row[r] = true;
                matched_col[col] = true;
                matches.push((r, col));
            }
        }
        matches.sort_unstable();
    }

    Assignment {
        matches,
        unmatched_rows: (0..rows).filter(|&r| !matched_row[r]).collect(),
        unmatched_cols: (0..cols).filter(|&j| !matched_col[j]).collect(),
    }
}

/// Returns, for each of the `n <= m` rows, its assigned column.
fn solve_dense(a: &[f64], n: usize, m: usize) -> Vec<usize> {
    debug_assert!(n <= m);
    // 1-based: index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::FORBIDDEN;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive minimum over injective maps from the shorter side.
    fn brute_force(c: &CostMatrix) -> f64 {
        fn go(c: &CostMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            let (rows, cols) = c.shape();
            if row == rows {
                *best = best.min(acc);
                return;
            }
            for j in 0..cols {
                if !used[j] {
                    used[j] = true;
                    go(c, row + 1, used, acc + c.get(row, j), best);
                    used[j] = false;
                }
            }
        }
        let c = if c.shape().0 > c.shape().1 { c.transpose() } else { c.clone() };
        let mut best = f64::INFINITY;
        go(&c, 0, &mut vec![false; c.shape().1], 0.0, &mut best);
        best
    }

    fn total(c: &CostMatrix, a: &Assignment) -> f64 {
        a.matches.iter().map(|&(r, j)| c.get(r, j)).sum()
    }

    #[test]
    fn two_by_two() {
        let c = CostMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        let a = solve_assignment(&c, f64::INFINITY);
        assert_eq!(a.matches, vec![(0, 0), (1, 1)]);
        assert_eq!(total(&c, &a), 2.0);
    }

    #[test]
    fn empty_matrix() {
        let a = solve_assignment(&CostMatrix::filled(0, 3, 0.0), 0.0);
        assert!(a.matches.is_empty());
        assert_eq!(a.unmatched_cols, vec![0, 1, 2]);
        let a = solve_assignment(&CostMatrix::filled(2, 0, 0.0), 0.0);
        assert_eq!(a.unmatched_rows, vec![0, 1]);
    }

    #[test]
    fn forbidden_entries_never_match() {
        let c = CostMatrix::from_rows(vec![
            vec![FORBIDDEN, 5.0],
            vec![FORBIDDEN, FORBIDDEN],
        ]);
        let a = solve_assignment(&c, f64::INFINITY);
        assert_eq!(a.matches, vec![(0, 1)]);
        assert_eq!(a.unmatched_rows, vec![1]);
        assert_eq!(a.unmatched_cols, vec![0]);
    }

    #[test]
    fn forbidden_prefers_cardinality() {
        // Row 0 is cheapest on column 0 but that would strand row 1.
        let c = CostMatrix::from_rows(vec![vec![-10.0, 0.0], vec![1.0, FORBIDDEN]]);
        let a = solve_assignment(&c, f64::INFINITY);
        assert_eq!(a.matches, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn gate_discards_expensive_matches() {
        let c = CostMatrix::from_rows(vec![vec![0.1, 9.0], vec![9.0, 0.9]]);
        let a = solve_assignment(&c, 0.5);
        assert_eq!(a.matches, vec![(0, 0)]);
        assert_eq!(a.unmatched_rows, vec![1]);
        assert_eq!(a.unmatched_cols, vec![1]);
    }

    #[test]
    fn rectangular_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let c = CostMatrix::from_fn(rows, cols, |_, _| rng.random_range(-5.0..5.0));
            let a = solve_assignment(&c, f64::INFINITY);
            assert_eq!(a.matches.len(), rows.min(cols));
            assert!((total(&c, &a) - brute_force(&c)).abs() < 1e-9);
        }
    }

    #[test]
    fn argmin_invariant_under_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let c = CostMatrix::from_fn(rows, cols, |_, _| rng.random_range(0..50) as f64);
            let shifted = CostMatrix::from_fn(rows, cols, |r, j| c.get(r, j) + 1000.0);
            let a = solve_assignment(&c, f64::INFINITY);
            let b = solve_assignment(&shifted, f64::INFINITY);
            assert_eq!(total(&c, &a), total(&c, &b));
        }
    }

    #[test]
    fn deterministic() {
        let c = CostMatrix::from_rows(vec![vec![1.0; 4]; 4]);
        let a = solve_assignment(&c, f64::INFINITY);
        assert_eq!(a, solve_assignment(&c, f64::INFINITY));
        assert_eq!(a.matches.len(), 4);
    }
}
