//! Dense linear assignment solver.
//!
//! Shortest augmenting path with row/column potentials, O(n^3). The returned
//! assignment is the lexicographically smallest row-to-column map among all
//! optimal ones: the potentials certify which edges can take part in an
//! optimal matching, and the rows are then fixed greedily in index order.

/// Reduced costs at or below this fraction of the cost scale count as tight.
const TIGHT_RTOL: f64 = 1e-12;

/// Solves `min sum_p cost[p][assign[p]]` over permutations of a square matrix
/// stored row-major. Returns the assignment (row to column).
pub fn solve(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }

    let (assign, u, v) = hungarian(cost, n);
    let scale = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let eps = TIGHT_RTOL * (1.0 + scale);

    let tight: Vec<Vec<usize>> = (0..n)
        .map(|p| {
            (0..n)
                .filter(|&q| cost[p * n + q] - u[p] - v[q] <= eps)
                .collect()
        })
        .collect();
    debug_assert!((0..n).all(|p| tight[p].contains(&assign[p])));

    lexicographic_matching(&tight, assign)
}

/// Row potentials `u`, column potentials `v`, and an optimal assignment.
fn hungarian(cost: &[f64], n: usize) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    // 1-based internally; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[col_owner[j] - 1] = j - 1;
    }
    (assign, u[1..].to_vec(), v[1..].to_vec())
}

/// Lexicographically smallest perfect matching inside the tight-edge graph.
/// `current` must already be a perfect matching using tight edges.
fn lexicographic_matching(tight: &[Vec<usize>], mut current: Vec<usize>) -> Vec<usize> {
    let n = tight.len();
    let mut taken = vec![false; n];
    for p in 0..n {
        for &q in &tight[p] {
            if taken[q] {
                continue;
            }
            if q == current[p] {
                break;
            }
            if let Some(matching) = complete_matching(tight, &current[..p], p, q) {
                current = matching;
                break;
            }
        }
        taken[current[p]] = true;
    }
    current
}

/// Tries to extend the fixed prefix plus `row -> col` to a perfect tight matching.
fn complete_matching(tight: &[Vec<usize>], prefix: &[usize], row: usize, col: usize) -> Option<Vec<usize>> {
    let n = tight.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (p, &q) in prefix.iter().enumerate() {
        owner[q] = Some(p);
    }
    owner[col] = Some(row);
    let frozen = row + 1;

    for p in frozen..n {
        let mut seen = vec![false; n];
        if !augment(tight, p, frozen, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut assign = vec![0usize; n];
    for (q, p) in owner.iter().enumerate() {
        assign[p.expect("perfect matching")] = q;
    }
    Some(assign)
}

fn augment(
    tight: &[Vec<usize>],
    p: usize,
    frozen: usize,
    owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &q in &tight[p] {
        if seen[q] {
            continue;
        }
        seen[q] = true;
        match owner[q] {
            None => {
                owner[q] = Some(p);
                return true;
            }
            Some(other) if other >= frozen => {
                if augment(tight, other, frozen, owner, seen) {
                    owner[q] = Some(p);
                    return true;
                }
            }
            Some(_) => {}
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn total(cost: &[f64], n: usize, assign: &[usize]) -> f64 {
        assign.iter().enumerate().map(|(p, &q)| cost[p * n + q]).sum()
    }

    #[test]
    fn trivial_sizes() {
        assert!(solve(&[], 0).is_empty());
        assert_eq!(solve(&[3.0], 1), vec![0]);
    }

    #[test]
    fn picks_anti_diagonal_when_cheaper() {
        let cost = [4.0, 1.0, 2.0, 5.0];
        assert_eq!(solve(&cost, 2), vec![1, 0]);
    }

    #[test]
    fn all_ties_give_identity() {
        let cost = vec![1.0; 16];
        assert_eq!(solve(&cost, 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ties_resolve_to_smallest_image() {
        // Rows 0 and 1 are interchangeable; row 2 must take column 0.
        let cost = [
            5.0, 1.0, 1.0, //
            5.0, 1.0, 1.0, //
            0.0, 9.0, 9.0,
        ];
        assert_eq!(solve(&cost, 3), vec![1, 2, 0]);
    }

    #[test]
    fn matches_enumeration_on_small_integer_matrices() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 4) as f64
        };
        for n in 1..=5 {
            for _ in 0..200 {
                let cost: Vec<f64> = (0..n * n).map(|_| next()).collect();
                let got = solve(&cost, n);
                let best = (0..n)
                    .permutations(n)
                    .min_by(|a, b| {
                        total(&cost, n, a)
                            .partial_cmp(&total(&cost, n, b))
                            .unwrap()
                            .then_with(|| a.cmp(b))
                    })
                    .unwrap();
                assert_eq!(got, best, "cost {cost:?}");
            }
        }
    }
}
