//! Optimal cluster-to-class assignment.

/// Maximum-weight perfect matching on a square matrix (Hungarian method with
/// potentials). Returns `assignment[row] = col` and the matched total.
pub fn hungarian_max(weights: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = weights.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based arrays; column 0 is the virtual start.
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[matched_row[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| weights[i][j])
        .sum();
    (assignment, total)
}

/// Best total over the rows/cols not yet fixed.
fn residual_optimum(weights: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    let sub: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| weights[r][c]).collect())
        .collect();
    hungarian_max(&sub).1
}

/// Cluster → class permutation maximizing `Σ_j H[perm[j]][j]`; among optimal
/// permutations the lexicographically smallest is returned.
pub fn align_clusters(h: &[Vec<f64>]) -> Vec<usize> {
    let k = h.len();
    // clusters as rows
    let w: Vec<Vec<f64>> = (0..k).map(|j| (0..k).map(|c| h[c][j]).collect()).collect();
    let best = hungarian_max(&w).1;
    let tie = 1e-12 * (k as f64).max(1.0);

    let mut perm = Vec::with_capacity(k);
    let mut fixed = 0.0;
    let mut free_cols: Vec<usize> = (0..k).collect();
    for row in 0..k {
        let rest: Vec<usize> = (row + 1..k).collect();
        let choice = free_cols
            .iter()
            .copied()
            .find(|&c| {
                let cols: Vec<usize> = free_cols.iter().copied().filter(|&x| x != c).collect();
                fixed + w[row][c] + residual_optimum(&w, &rest, &cols) >= best - tie
            })
            .unwrap_or(free_cols[0]);
        fixed += w[row][choice];
        free_cols.retain(|&x| x != choice);
        perm.push(choice);
    }
    perm
}
