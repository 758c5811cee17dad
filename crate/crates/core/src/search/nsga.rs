//! Nondominated sorting and crowding distance for two minimized objectives.

use alloc::vec;
use alloc::vec::Vec;

/// `a` is no worse than `b` in both coordinates and better in one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Fronts of indices into `points`, best first; each front is ascending.
pub fn nondominated_sort(points: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if dominates(points[i], points[j]) {
                dominated_by[i].push(j);
            } else if dominates(points[j], points[i]) {
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (same order). Extreme points
/// in either objective get infinity.
pub fn crowding_distance(points: &[(f64, f64)], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for key in [|p: (f64, f64)| p.0, |p: (f64, f64)| p.1] {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| key(points[front[a]]).total_cmp(&key(points[front[b]])).then(a.cmp(&b)));
        let lo = key(points[front[order[0]]]);
        let hi = key(points[front[order[n - 1]]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..n - 1 {
                let gap = key(points[front[order[k + 1]]]) - key(points[front[order[k - 1]]]);
                dist[order[k]] += gap / (hi - lo);
            }
        }
    }
    dist
}
