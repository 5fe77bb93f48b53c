use super::PartitionerError;
use crate::signed::Partition;

/// Mean Szymkiewicz–Simpson coefficient `|A ∩ B| / min(|A|, |B|)` over groups
/// matched between two partitions of the same node set.
///
/// Groups are matched one-to-one to maximise the total number of shared nodes
/// (exhaustively up to 8 groups on the smaller side, greedily beyond).
pub fn overlap_coefficient(p1: &Partition, p2: &Partition) -> Result<f64, PartitionerError> {
    if p1.nodes() != p2.nodes() {
        return Err(PartitionerError::NodeSetMismatch);
    }
    let a: Vec<Vec<usize>> = p1.members().into_iter().filter(|g| !g.is_empty()).collect();
    let b: Vec<Vec<usize>> = p2.members().into_iter().filter(|g| !g.is_empty()).collect();
    let (small, large, large_p) = if a.len() <= b.len() {
        (&a, &b, p2)
    } else {
        (&b, &a, p1)
    };

    // shared[i][j] = |small_i ∩ large_j|
    let mut shared = vec![vec![0usize; large.len()]; small.len()];
    for (i, group) in small.iter().enumerate() {
        for &v in group {
            let j = large_p.group(v);
            // labels of non-empty groups are contiguous from 0 under canonical order
            shared[i][j] += 1;
        }
    }
    let coef = |i: usize, j: usize| shared[i][j] as f64 / small[i].len().min(large[j].len()) as f64;

    let matching = if small.len() <= 8 {
        best_matching(&shared)
    } else {
        greedy_matching(&shared)
    };
    let total: f64 = matching.iter().enumerate().map(|(i, &j)| coef(i, j)).sum();
    Ok(total / small.len() as f64)
}

/// Injective assignment rows -> columns maximising total shared count.
fn best_matching(shared: &[Vec<usize>]) -> Vec<usize> {
    fn go(
        row: usize,
        shared: &[Vec<usize>],
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        score: usize,
        best: &mut (usize, Vec<usize>),
    ) {
        if row == shared.len() {
            if score > best.0 || best.1.is_empty() {
                *best = (score, current.clone());
            }
            return;
        }
        for j in 0..used.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            current.push(j);
            go(row + 1, shared, used, current, score + shared[row][j], best);
            current.pop();
            used[j] = false;
        }
    }
    let cols = shared.first().map_or(0, Vec::len);
    let mut best = (0, Vec::new());
    go(0, shared, &mut vec![false; cols], &mut Vec::new(), 0, &mut best);
    best.1
}

fn greedy_matching(shared: &[Vec<usize>]) -> Vec<usize> {
    let mut cells: Vec<(usize, usize, usize)> = shared
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &s)| (s, i, j)))
        .collect();
    cells.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut row_of = vec![None; shared.len()];
    let mut col_used = vec![false; shared.first().map_or(0, Vec::len)];
    for (_, i, j) in cells {
        if row_of[i].is_none() && !col_used[j] {
            row_of[i] = Some(j);
            col_used[j] = true;
        }
    }
    row_of.into_iter().map(|j| j.expect("more columns than rows")).collect()
}
