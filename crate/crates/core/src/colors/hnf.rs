//! Row-style Hermite normal form over the integers.

/// Hermite normal form of the row lattice spanned by `rows`.
///
/// Returns the non-zero rows of the HNF: upper echelon, positive pivots,
/// entries above each pivot reduced into `[0, pivot)`. The returned rows
/// generate the same integer lattice as the input.
pub fn hermite_normal_form(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> =
        rows.iter().filter(|r| r.iter().any(|&x| x != 0)).map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..dim {
        if pivot_row >= m.len() {
            break;
        }
        loop {
            // smallest non-zero entry in this column at or below pivot_row
            let best = (pivot_row..m.len()).filter(|&r| m[r][col] != 0).min_by_key(|&r| m[r][col].abs());
            let Some(best) = best else { break };
            m.swap(pivot_row, best);
            let p = m[pivot_row][col];
            let mut done = true;
            for r in pivot_row + 1..m.len() {
                let q = m[r][col].div_euclid(p);
                if q != 0 {
                    let (head, tail) = m.split_at_mut(r);
                    for (x, y) in tail[0].iter_mut().zip(&head[pivot_row]) {
                        *x -= q * y;
                    }
                }
                if m[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col] == 0 {
            continue;
        }
        if m[pivot_row][col] < 0 {
            for x in m[pivot_row].iter_mut() {
                *x = -*x;
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    for &(pr, col) in &pivots {
        let p = m[pr][col];
        for r in 0..pr {
            let q = m[r][col].div_euclid(p);
            if q != 0 {
                let (head, tail) = m.split_at_mut(pr);
                for (x, y) in head[r].iter_mut().zip(&tail[0]) {
                    *x -= q * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

/// Rank of the integer row lattice spanned by `rows`.
pub fn integer_rank(rows: &[Vec<i64>], dim: usize) -> usize {
    hermite_normal_form(rows, dim).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(rows: &[Vec<i64>]) -> i64 {
        // upper triangular
        (0..rows.len()).map(|i| rows[i][i]).product()
    }

    /// Solves `x · basis = v` for upper-triangular `basis`, if integral.
    fn in_lattice(basis: &[Vec<i64>], v: &[i64]) -> bool {
        let d = v.len();
        let mut rem: Vec<i64> = v.to_vec();
        for i in 0..d {
            let p = basis[i][i];
            if rem[i] % p != 0 {
                return false;
            }
            let k = rem[i] / p;
            for j in i..d {
                rem[j] -= k * basis[i][j];
            }
        }
        rem.iter().all(|&x| x == 0)
    }

    #[test]
    fn checkerboard_lattice() {
        let rows = vec![vec![2, 0], vec![1, -1], vec![1, 1], vec![0, 2], vec![0, -2]];
        let h = hermite_normal_form(&rows, 2);
        assert_eq!(h, vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(det(&h), 2);
        assert!(in_lattice(&h, &[1, -1]));
        assert!(!in_lattice(&h, &[1, 0]));
    }

    #[test]
    fn unit_vectors_give_identity() {
        let rows = vec![vec![1, 0], vec![0, 1], vec![-1, 0]];
        assert_eq!(hermite_normal_form(&rows, 2), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn rank_deficient_input() {
        let rows = vec![vec![2, 4], vec![-1, -2], vec![0, 0]];
        let h = hermite_normal_form(&rows, 2);
        assert_eq!(h, vec![vec![1, 2]]);
        assert_eq!(integer_rank(&rows, 2), 1);
    }

    proptest! {
        #[test]
        fn hnf_generates_same_lattice(
            rows in prop::collection::vec(prop::collection::vec(-6i64..=6, 2), 2..6)
        ) {
            let h = hermite_normal_form(&rows, 2);
            if h.len() == 2 {
                for r in &rows {
                    prop_assert!(in_lattice(&h, r));
                }
                prop_assert!(h[0][0] > 0 && h[1][1] > 0 && h[1][0] == 0);
                prop_assert!(h[0][1] >= 0 && h[0][1] < h[1][1]);
            }
        }
    }
}
