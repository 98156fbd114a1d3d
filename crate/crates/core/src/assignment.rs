//! Minimum-cost rectangular assignment (Hungarian / Kuhn-Munkres with
//! potentials, O(n³)).
//!
//! Among equal-cost optima the solver returns the one whose row-by-row
//! column sequence is lexicographically smallest, which keeps results
//! independent of platform and input quirks.

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Row-to-column assignment of minimum total cost. Every row is assigned
/// when `rows <= cols`, every column when `cols <= rows`.
pub fn min_cost_assignment(c: &CostMatrix) -> Vec<Option<usize>> {
    let (r, m) = (c.rows(), c.cols());
    let n = r.max(m);
    if n == 0 {
        return vec![None; r];
    }
    // square padding with zero-cost dummies; dummies sort after real indices
    let cost = |i: usize, j: usize| if i < r && j < m { c.get(i, j) } else { 0.0 };

    // potentials (1-based, index 0 is the virtual start)
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0usize; n];
    let mut row_of = vec![0usize; n];
    for j in 1..=n {
        col_of[p[j] - 1] = j - 1;
        row_of[j - 1] = p[j] - 1;
    }

    // Every optimal assignment lives on the tight edges of the optimal dual.
    // Walk rows in order and move each to the smallest tight column that
    // still admits a perfect matching of the remaining rows.
    let scale = c.values().iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let tol = 1e-9 * scale;
    let tight = |i: usize, j: usize| cost(i, j) - u[i + 1] - v[j + 1] <= tol;
    let mut fixed = vec![false; n];
    for row in 0..n {
        let current = col_of[row];
        for cand in 0..current {
            if !tight(row, cand) || fixed[row_of[cand]] {
                continue;
            }
            if let Some(path) = reroute(
                row_of[cand],
                current,
                row,
                &fixed,
                &col_of,
                &row_of,
                n,
                &tight,
            ) {
                for (rr, cc) in path {
                    col_of[rr] = cc;
                    row_of[cc] = rr;
                }
                col_of[row] = cand;
                row_of[cand] = row;
                break;
            }
        }
        fixed[row] = true;
    }

    (0..r)
        .map(|i| if col_of[i] < m { Some(col_of[i]) } else { None })
        .collect()
}

/// Finds an alternating path over tight edges that frees column `cand` by
/// moving `start` (its current owner) and successors, ending in column
/// `freed`. Rows that are fixed, and `skip`, may not move. Returns the
/// `(row, new column)` moves.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn reroute(
    start: usize,
    freed: usize,
    skip: usize,
    fixed: &[bool],
    col_of: &[usize],
    row_of: &[usize],
    n: usize,
    tight: &impl Fn(usize, usize) -> bool,
) -> Option<Vec<(usize, usize)>> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n]; // row -> (prev row, col taken)
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(r) = queue.pop_front() {
        for c in 0..n {
            if c == col_of[r] || !tight(r, c) {
                continue;
            }
            if c == freed {
                // unwind: r takes `freed`, its old column goes to whoever came before
                let mut moves = vec![(r, c)];
                let mut cur = r;
                while let Some((prev, _)) = parent[cur] {
                    moves.push((prev, col_of[cur]));
                    cur = prev;
                }
                return Some(moves);
            }
            let next = row_of[c];
            if next == skip || fixed[next] || seen[next] {
                continue;
            }
            seen[next] = true;
            parent[next] = Some((r, c));
            queue.push_back(next);
        }
    }
    None
}

/// Total cost of an assignment, summed in row order.
pub fn assignment_cost(c: &CostMatrix, assignment: &[Option<usize>]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| c.get(i, j)))
        .sum()
}
