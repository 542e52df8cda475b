//! Linear sum assignment via shortest augmenting paths with dual updates,
//! O(n^3) overall.

use crate::{Error, Result};

/// Solves the linear sum assignment problem for a square cost matrix given
/// in row-major order.
///
/// Returns the assignment as a vector mapping each row to its column, along
/// with the total cost, which is minimal over all permutations.
pub fn solve_lsap(cost: &[f64], n: usize) -> Result<(Vec<usize>, f64)> {
    if cost.len() != n * n {
        return Err(Error::invalid_input(format!(
            "cost matrix must be square: got {} entries for n = {}",
            cost.len(),
            n
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid_input(
            "cost matrix entries must be finite".to_string(),
        ));
    }
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }

    let mut u = vec![0.0f64; n]; // row duals
    let mut v = vec![0.0f64; n]; // column duals
    let mut col4row = vec![usize::MAX; n];
    let mut row4col = vec![usize::MAX; n];
    let mut path = vec![usize::MAX; n];
    let mut shortest = vec![f64::INFINITY; n];
    let mut in_rows = vec![false; n];
    let mut in_cols = vec![false; n];
    let mut remaining = vec![0usize; n];

    for cur_row in 0..n {
        shortest.fill(f64::INFINITY);
        in_rows.fill(false);
        in_cols.fill(false);
        for (it, r) in remaining.iter_mut().enumerate() {
            *r = n - it - 1;
        }
        let mut num_remaining = n;
        let mut min_val = 0.0f64;
        let mut i = cur_row;
        let sink;
        loop {
            in_rows[i] = true;
            let mut lowest = f64::INFINITY;
            let mut index = usize::MAX;
            for (it, &j) in remaining[..num_remaining].iter().enumerate() {
                let r = min_val + cost[i * n + j] - u[i] - v[j];
                if r < shortest[j] {
                    path[j] = i;
                    shortest[j] = r;
                }
                if shortest[j] < lowest
                    || (shortest[j] == lowest && row4col[j] == usize::MAX)
                {
                    lowest = shortest[j];
                    index = it;
                }
            }
            min_val = lowest;
            debug_assert!(min_val.is_finite());
            let j = remaining[index];
            if row4col[j] == usize::MAX {
                sink = j;
                in_cols[j] = true;
                break;
            }
            i = row4col[j];
            in_cols[j] = true;
            num_remaining -= 1;
            remaining[index] = remaining[num_remaining];
        }

        u[cur_row] += min_val;
        for r in 0..n {
            if in_rows[r] && r != cur_row {
                u[r] += min_val - shortest[col4row[r]];
            }
        }
        for c in 0..n {
            if in_cols[c] {
                v[c] -= min_val - shortest[c];
            }
        }

        let mut j = sink;
        loop {
            let i = path[j];
            row4col[j] = i;
            std::mem::swap(&mut col4row[i], &mut j);
            if i == cur_row {
                break;
            }
        }
    }

    let total = col4row
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    Ok((col4row, total))
}
