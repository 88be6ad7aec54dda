//! Marching squares on a regular grid, with segments joined into polylines.

use std::collections::HashMap;

/// Regular grid over `[x_min, x_max] × [y_min, y_max]` with `nx × ny` nodes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn square(half_width: f64, n: usize) -> Self {
        Grid { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width, nx: n, ny: n }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * j as f64 / (self.ny - 1) as f64
    }

    /// Samples `f` at every node, row-major in `j`.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                v.push(f(self.x(i), self.y(j)));
            }
        }
        v
    }
}

/// Edge of a cell: horizontal edges run from node `(i, j)` to `(i+1, j)`,
/// vertical ones from `(i, j)` to `(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Contour polylines of `values` (sampled on `grid`) at `level`. Cells with a
/// non-finite corner are skipped, so masking by NaN clips the contours.
pub fn marching_squares(grid: &Grid, values: &[f64], level: f64) -> Vec<Vec<(f64, f64)>> {
    let (nx, ny) = (grid.nx, grid.ny);
    assert_eq!(values.len(), nx * ny);
    let at = |i: usize, j: usize| values[j * nx + i] - level;
    let point = |e: Edge| -> (f64, f64) {
        let (a, b, pa, pb) = match e {
            Edge::H(i, j) => (at(i, j), at(i + 1, j), (grid.x(i), grid.y(j)), (grid.x(i + 1), grid.y(j))),
            Edge::V(i, j) => (at(i, j), at(i, j + 1), (grid.x(i), grid.y(j)), (grid.x(i), grid.y(j + 1))),
        };
        let t = if a == b { 0.5 } else { a / (a - b) };
        (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if c.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let case = c.iter().enumerate().fold(0u8, |acc, (k, &v)| acc | (((v > 0.0) as u8) << k));
            let (bottom, right, top, left) = (Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j));
            let centre_above = c.iter().sum::<f64>() > 0.0;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    if centre_above {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    if centre_above {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    join(&segments).into_iter().map(|chain| chain.into_iter().map(point).collect()).collect()
}

/// Chains segments sharing an edge into maximal polylines; closed loops
/// repeat their first point at the end.
fn join(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(k);
        by_edge.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();
    let next_from = |edge: Edge, used: &[bool]| by_edge[&edge].iter().copied().find(|&k| !used[k]);
    // Start open chains at edges touched once so they are not split.
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|&k| {
        let (a, b) = segments[k];
        (by_edge[&a].len().min(by_edge[&b].len()) != 1) as u8
    });
    for start in order {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let (first, mut tail) = if by_edge[&b].len() == 1 { (b, a) } else { (a, b) };
        let mut chain = vec![first, tail];
        while let Some(k) = next_from(tail, &used) {
            used[k] = true;
            let (a, b) = segments[k];
            tail = if a == tail { b } else { a };
            chain.push(tail);
        }
        chains.push(chain);
    }
    chains
}
