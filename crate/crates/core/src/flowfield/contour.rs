//! Level sets on a rectilinear grid by marching squares.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let mut len: f64 = self
            .points
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum();
        if self.closed && self.points.len() > 1 {
            let (a, b) = (self.points[0], self.points[self.points.len() - 1]);
            len += (a[0] - b[0]).hypot(a[1] - b[1]);
        }
        len
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// between `(i, j)` and `(i + 1, j)`
    H(usize, usize),
    /// between `(i, j)` and `(i, j + 1)`
    V(usize, usize),
}

/// Contours of `values` at `level`. The grid is `xs × ys` with
/// `values[i * ys.len() + j]` at `(xs[i], ys[j])`. Cells for which
/// `skip(i, j)` holds (lower-left corner `(i, j)`) contribute nothing.
/// Saddle cells are resolved by the average of the four corners.
pub fn marching_squares(
    xs: &[f64],
    ys: &[f64],
    values: &[f64],
    level: f64,
    skip: impl Fn(usize, usize) -> bool,
) -> Vec<Polyline> {
    let ny = ys.len();
    let at = |i: usize, j: usize| values[i * ny + j];
    let point_on = |e: Edge| -> [f64; 2] {
        let ((ia, ja), (ib, jb)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (fa, fb) = (at(ia, ja), at(ib, jb));
        let t = if fb == fa { 0.5 } else { (level - fa) / (fb - fa) };
        [xs[ia] + t * (xs[ib] - xs[ia]), ys[ja] + t * (ys[jb] - ys[ja])]
    };
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            if skip(i, j) {
                continue;
            }
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let above: Vec<bool> = corners.iter().map(|v| *v >= level).collect();
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let crossed: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            match crossed.len() {
                2 => segments.push((edges[crossed[0]], edges[crossed[1]])),
                4 => {
                    let center = corners.iter().sum::<f64>() / 4.0 >= level;
                    if center == above[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (idx, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(idx);
        by_edge.entry(*b).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, second) = segments[start];
        // walk forward from `second`, then backward from `first`
        let walk = |from: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
            let mut chain = Vec::new();
            let mut edge = from;
            loop {
                let next = by_edge
                    .get(&edge)
                    .and_then(|ids| ids.iter().copied().find(|&id| !used[id]));
                let Some(id) = next else { break };
                used[id] = true;
                let (a, b) = segments[id];
                edge = if a == edge { b } else { a };
                chain.push(edge);
            }
            chain
        };
        let forward = walk(second, &mut used);
        let closed = forward.last() == Some(&first);
        let mut chain: Vec<Edge> = Vec::new();
        if !closed {
            let mut backward = walk(first, &mut used);
            backward.reverse();
            chain.extend(backward);
        }
        chain.push(first);
        chain.push(second);
        chain.extend(forward.iter().copied());
        if closed {
            chain.pop();
        }
        lines.push(Polyline {
            points: chain.into_iter().map(point_on).collect(),
            closed,
        });
    }
    lines
}

/// Enclosed area of a simple polygon (shoelace formula).
pub fn polygon_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, f: impl Fn(f64, f64) -> f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..n).map(|i| -1.5 + 3.0 * i as f64 / (n - 1) as f64).collect();
        let ys = xs.clone();
        let mut v = Vec::new();
        for &x in &xs {
            for &y in &ys {
                v.push(f(x, y));
            }
        }
        (xs, ys, v)
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let (xs, ys, v) = grid(121, |x, y| x * x + y * y);
        let lines = marching_squares(&xs, &ys, &v, 1.0, |_, _| false);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
        for p in &lines[0].points {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-3);
        }
        assert!((polygon_area(&lines[0].points) - std::f64::consts::PI).abs() < 2e-3);
        assert!((lines[0].length() - 2.0 * std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn masked_cells_open_the_loop() {
        let (xs, ys, v) = grid(61, |x, y| x * x + y * y);
        let lines = marching_squares(&xs, &ys, &v, 1.0, |_, j| j >= 40);
        assert_eq!(lines.len(), 1);
        assert!(!lines[0].closed);
    }

    #[test]
    fn saddle_produces_two_branches() {
        let (xs, ys, v) = grid(40, |x, y| x * y);
        let lines = marching_squares(&xs, &ys, &v, 0.3, |_, _| false);
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| !l.closed));
    }

    #[test]
    fn unit_square_area() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(polygon_area(&sq), 1.0);
    }
}
