//! Exact word mover's distance between short token multisets.

/// Minimum-cost perfect matching on a square cost matrix (row-major).
///
/// Shortest augmenting path with dual potentials, O(n³). Returns the
/// column assigned to each row.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n × n");
    // 1-based internally; index 0 is the virtual root
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        row_of_col[0] = row;
        let mut col0 = 0usize;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut next = 0usize;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost[(r - 1) * n + (c - 1)] - u[r] - v[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    way[c] = col0;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    next = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[row_of_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            col0 = next;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of_col[col0] = row_of_col[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for c in 1..=n {
        if row_of_col[c] > 0 {
            assignment[row_of_col[c] - 1] = c - 1;
        }
    }
    assignment
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Optimal transport cost between uniform distributions on two point sets.
///
/// With `n` and `m` points, each point of the first set is split into
/// `lcm(n, m) / n` equal units and each point of the second into
/// `lcm(n, m) / m`. Uniform transport between equal-size unit sets has an
/// optimal vertex that is a permutation, so an exact assignment over the
/// units gives the exact transport cost.
pub fn uniform_transport_cost(a: &[&[f64]], b: &[&[f64]]) -> f64 {
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0, "transport needs nonempty point sets");
    if n == 1 && m == 1 {
        return euclidean(a[0], b[0]);
    }
    let units = n / gcd(n, m) * m;
    let (ra, rb) = (units / n, units / m);
    let mut cost = vec![0.0; units * units];
    for i in 0..units {
        for j in 0..units {
            cost[i * units + j] = euclidean(a[i / ra], b[j / rb]);
        }
    }
    let assignment = min_cost_assignment(&cost, units);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i * units + j]).sum();
    total / units as f64
}
