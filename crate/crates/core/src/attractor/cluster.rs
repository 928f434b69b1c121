//! Neighbour queries and single-linkage clustering of point clouds.
//!
//! Distances are Euclidean in barycentric coordinates. Points are bucketed in
//! the planar chart of the triangle, where the same distance is smaller by a
//! factor `√2`.

use serde::Serialize;

use crate::error::{QsoError, Result};
use crate::simplex::{diameter, SimplexPoint};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Smallest clustering radius produced by [`calibrated_epsilon`].
pub const MIN_EPSILON: f64 = 1e-12;
/// Multiple of the median nearest-neighbour distance used as clustering radius.
pub const EPSILON_FACTOR: f64 = 3.0;
/// Multiples of the median nearest-neighbour distance over which component
/// counts are expected to be stable.
pub const EPSILON_LADDER: [f64; 5] = [2.0, 2.5, 3.0, 4.0, 5.0];

/// Uniform bucket grid over planar positions.
pub(crate) struct Grid {
    pts: Vec<(f64, f64)>,
    origin: (f64, f64),
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Grid {
    /// `cell` is in planar units.
    pub(crate) fn new(pts: Vec<(f64, f64)>, cell: f64) -> Grid {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        if pts.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        // keep the number of cells proportional to the number of points
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let limit = (4 * pts.len()).max(1) as f64;
        let mut cell = cell.max(span / limit.sqrt());
        if !(cell > 0.0) {
            cell = 1.0;
        }
        let nx = ((x1 - x0) / cell) as usize + 1;
        let ny = ((y1 - y0) / cell) as usize + 1;
        let mut g = Grid { pts, origin: (x0, y0), cell, nx, ny, start: Vec::new(), items: Vec::new() };
        let mut counts = vec![0usize; nx * ny + 1];
        let keys: Vec<usize> = g.pts.iter().map(|&p| g.key(p)).collect();
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for i in 0..nx * ny {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0; g.pts.len()];
        for (i, &k) in keys.iter().enumerate() {
            items[fill[k]] = i;
            fill[k] += 1;
        }
        g.start = counts;
        g.items = items;
        g
    }

    fn cell_of(&self, p: (f64, f64)) -> (usize, usize) {
        let cx = (((p.0 - self.origin.0) / self.cell).max(0.0) as usize).min(self.nx - 1);
        let cy = (((p.1 - self.origin.1) / self.cell).max(0.0) as usize).min(self.ny - 1);
        (cx, cy)
    }

    fn key(&self, p: (f64, f64)) -> usize {
        let (cx, cy) = self.cell_of(p);
        cy * self.nx + cx
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[usize] {
        let k = cy * self.nx + cx;
        &self.items[self.start[k]..self.start[k + 1]]
    }

    /// Calls `f(j)` for every point whose cell is within `r` cells of `p`.
    fn for_each_within_cells(&self, p: (f64, f64), r: usize, mut f: impl FnMut(usize)) {
        let (cx, cy) = self.cell_of(p);
        for y in cy.saturating_sub(r)..=(cy + r).min(self.ny - 1) {
            for x in cx.saturating_sub(r)..=(cx + r).min(self.nx - 1) {
                for &j in self.bucket(x, y) {
                    f(j);
                }
            }
        }
    }

    /// Calls `f(j)` for every point in the ring of cells at Chebyshev distance `r`.
    fn for_each_in_ring(&self, p: (f64, f64), r: usize, mut f: impl FnMut(usize)) {
        let (cx, cy) = (self.cell_of(p).0 as isize, self.cell_of(p).1 as isize);
        let r = r as isize;
        for y in cy - r..=cy + r {
            if y < 0 || y >= self.ny as isize {
                continue;
            }
            let edge = y == cy - r || y == cy + r;
            let step = if edge || r == 0 { 1 } else { 2 * r };
            let mut x = cx - r;
            while x <= cx + r {
                if x >= 0 && x < self.nx as isize {
                    for &j in self.bucket(x as usize, y as usize) {
                        f(j);
                    }
                }
                x += step;
            }
        }
    }

    /// Planar distance to the nearest stored point other than `skip`.
    pub(crate) fn nearest(&self, p: (f64, f64), skip: Option<usize>) -> Option<f64> {
        let mut best = f64::INFINITY;
        let rmax = self.nx.max(self.ny);
        for r in 0..=rmax {
            self.for_each_in_ring(p, r, |j| {
                if Some(j) != skip {
                    let q = self.pts[j];
                    best = best.min((p.0 - q.0).hypot(p.1 - q.1));
                }
            });
            // anything outside the rings scanned so far is at least r cells away
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best.is_finite().then_some(best)
    }
}

fn planar_points(points: &[SimplexPoint]) -> Vec<(f64, f64)> {
    points.iter().map(SimplexPoint::planar).collect()
}

/// Nearest-neighbour distance of every point within the cloud (0 for
/// duplicates; empty for fewer than two points).
pub fn nearest_neighbour_distances(points: &[SimplexPoint]) -> Vec<f64> {
    if points.len() < 2 {
        return Vec::new();
    }
    let pts = planar_points(points);
    let grid = Grid::new(pts.clone(), 0.0);
    pts.iter().enumerate().map(|(i, &p)| grid.nearest(p, Some(i)).unwrap_or(0.0) * SQRT2).collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn median_nearest_neighbour(points: &[SimplexPoint]) -> f64 {
    median(&mut nearest_neighbour_distances(points))
}

/// `EPSILON_FACTOR` times the median nearest-neighbour distance, at least
/// [`MIN_EPSILON`].
pub fn calibrated_epsilon(points: &[SimplexPoint]) -> f64 {
    (EPSILON_FACTOR * median_nearest_neighbour(points)).max(MIN_EPSILON)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub epsilon: f64,
    pub component_count: usize,
    /// Sizes in decreasing order.
    pub component_sizes: Vec<usize>,
    pub diameter: f64,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Component label of each point in the graph linking points at distance at
/// most `epsilon`.
pub fn component_labels(points: &[SimplexPoint], epsilon: f64) -> Result<Vec<usize>> {
    if !(epsilon > 0.0) {
        return Err(QsoError::EpsilonNonpositive(epsilon));
    }
    let pts = planar_points(points);
    let reach = epsilon / SQRT2;
    let grid = Grid::new(pts.clone(), reach);
    let span = (reach / grid.cell).ceil() as usize;
    let mut uf = UnionFind::new(pts.len());
    for (i, &p) in pts.iter().enumerate() {
        grid.for_each_within_cells(p, span, |j| {
            if j > i {
                let q = pts[j];
                if (p.0 - q.0).hypot(p.1 - q.1) <= reach {
                    uf.union(i, j);
                }
            }
        });
    }
    Ok((0..pts.len()).map(|i| uf.find(i)).collect())
}

/// Connected components of the `epsilon`-neighbourhood graph.
pub fn count_components(points: &[SimplexPoint], epsilon: f64) -> Result<ComponentReport> {
    if points.is_empty() {
        return Err(QsoError::Invalid("cannot cluster an empty cloud".into()));
    }
    let labels = component_labels(points, epsilon)?;
    let mut sizes = std::collections::HashMap::new();
    for l in labels {
        *sizes.entry(l).or_insert(0usize) += 1;
    }
    let mut component_sizes: Vec<usize> = sizes.into_values().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(ComponentReport { epsilon, component_count: component_sizes.len(), component_sizes, diameter: diameter(points) })
}

/// Symmetric Hausdorff distance between two non-empty clouds.
pub fn hausdorff(a: &[SimplexPoint], b: &[SimplexPoint]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(QsoError::Invalid("Hausdorff distance needs non-empty clouds".into()));
    }
    let one_sided = |from: &[SimplexPoint], to: &[SimplexPoint]| {
        let grid = Grid::new(planar_points(to), 0.0);
        from.iter().map(|p| grid.nearest(p.planar(), None).unwrap_or(0.0)).fold(0.0, f64::max) * SQRT2
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Number of filaments left after removing the densest core of the cloud.
///
/// Each point's density is its number of neighbours within `epsilon`. The
/// core is the `epsilon`-connected set of points with at least half the
/// maximal density that contains the densest point, together with every
/// point within `epsilon` of it. The remaining points are clustered at the
/// same radius; components with fewer than `min_size` points are ignored.
pub fn hair_count(points: &[SimplexPoint], epsilon: f64, min_size: usize) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(QsoError::EpsilonNonpositive(epsilon));
    }
    if points.is_empty() {
        return Ok(0);
    }
    let pts = planar_points(points);
    let reach = epsilon / SQRT2;
    let grid = Grid::new(pts.clone(), reach);
    let span = (reach / grid.cell).ceil() as usize;
    let density: Vec<usize> = pts
        .iter()
        .map(|&p| {
            let mut n = 0;
            grid.for_each_within_cells(p, span, |j| {
                let q = pts[j];
                if (p.0 - q.0).hypot(p.1 - q.1) <= reach {
                    n += 1;
                }
            });
            n
        })
        .collect();
    let (densest, &max_density) = density.iter().enumerate().max_by_key(|&(_, d)| *d).unwrap();
    let dense: Vec<usize> = (0..pts.len()).filter(|&i| 2 * density[i] >= max_density).collect();
    let dense_points: Vec<SimplexPoint> = dense.iter().map(|&i| points[i]).collect();
    let labels = component_labels(&dense_points, epsilon)?;
    let core_label = labels[dense.iter().position(|&i| i == densest).unwrap()];
    let mut in_core = vec![false; pts.len()];
    for (k, &i) in dense.iter().enumerate() {
        in_core[i] = labels[k] == core_label;
    }
    let mut grown = in_core.clone();
    for (_, &p) in pts.iter().enumerate().filter(|&(i, _)| in_core[i]) {
        grid.for_each_within_cells(p, span, |j| {
            let q = pts[j];
            if (p.0 - q.0).hypot(p.1 - q.1) <= reach {
                grown[j] = true;
            }
        });
    }
    let in_core = grown;
    let rest: Vec<SimplexPoint> = (0..pts.len()).filter(|&i| !in_core[i]).map(|i| points[i]).collect();
    if rest.is_empty() {
        return Ok(0);
    }
    let report = count_components(&rest, epsilon)?;
    Ok(report.component_sizes.iter().filter(|&&s| s >= min_size).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::simplex::dist;
    use proptest::prelude::*;

    fn pt(v: [f64; 3]) -> SimplexPoint {
        SimplexPoint::new(&v).unwrap()
    }

    fn brute_components(points: &[SimplexPoint], eps: f64) -> usize {
        let n = points.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if dist(&points[i], &points[j]) <= eps {
                    uf.union(i, j);
                }
            }
        }
        (0..n).filter(|&i| uf.find(i) == i).count()
    }

    #[test]
    fn two_clusters_at_vertices() {
        let mut rng = SeededRng::new(1);
        let mut cloud = Vec::new();
        for base in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] {
            for _ in 0..200 {
                let jitter = [rng.uniform(), rng.uniform(), rng.uniform()].map(|u| 0.01 * u);
                let v: Vec<f64> = (0..3).map(|i| base[i] + jitter[i]).collect();
                cloud.push(SimplexPoint::new(&v).unwrap());
            }
        }
        let r = count_components(&cloud, 0.05).unwrap();
        assert_eq!(r.component_count, 2);
        assert_eq!(r.component_sizes, vec![200, 200]);
    }

    #[test]
    fn single_point_and_errors() {
        let one = [SimplexPoint::center(3)];
        assert_eq!(count_components(&one, 0.1).unwrap().component_count, 1);
        assert!(matches!(count_components(&one, 0.0), Err(QsoError::EpsilonNonpositive(_))));
        assert!(matches!(count_components(&one, -1.0), Err(QsoError::EpsilonNonpositive(_))));
        assert!(count_components(&[], 0.1).is_err());
    }

    #[test]
    fn nearest_neighbours_match_brute_force() {
        let mut rng = SeededRng::new(2);
        let cloud: Vec<_> = (0..500).map(|_| rng.simplex_point(3)).collect();
        let fast = nearest_neighbour_distances(&cloud);
        for (i, p) in cloud.iter().enumerate() {
            let slow = cloud
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| dist(p, q))
                .fold(f64::INFINITY, f64::min);
            assert!((fast[i] - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn hausdorff_of_shifted_copy() {
        let a = vec![pt([0.5, 0.25, 0.25]), pt([0.25, 0.5, 0.25])];
        let b = vec![pt([0.5, 0.25, 0.25])];
        let h = hausdorff(&a, &b).unwrap();
        assert!((h - dist(&a[0], &a[1])).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hairs_of_a_star() {
        // dense blob at C with twelve sparse rays
        let mut rng = SeededRng::new(3);
        let mut cloud = Vec::new();
        for _ in 0..3000 {
            let (r, t) = (0.02 * rng.uniform().sqrt(), std::f64::consts::TAU * rng.uniform());
            cloud.push(from_planar(0.5 + r * t.cos(), 0.288_675_134_594_812_9 + r * t.sin()));
        }
        for k in 0..12 {
            let t = std::f64::consts::TAU * k as f64 / 12.0;
            for s in 0..60 {
                let r = 0.03 + 0.002 * s as f64;
                cloud.push(from_planar(0.5 + r * t.cos(), 0.288_675_134_594_812_9 + r * t.sin()));
            }
        }
        assert_eq!(hair_count(&cloud, 0.006, 5).unwrap(), 12);
    }

    fn from_planar(u: f64, v: f64) -> SimplexPoint {
        let x3 = v / (3f64.sqrt() / 2.0);
        let x2 = u - x3 / 2.0;
        pt([1.0 - x2 - x3, x2, x3])
    }

    proptest! {
        #[test]
        fn grid_clustering_is_exact(seed in any::<u64>(), n in 1usize..150, eps in 0.001f64..0.3) {
            let mut rng = SeededRng::new(seed);
            let cloud: Vec<_> = (0..n).map(|_| rng.simplex_point(3)).collect();
            let r = count_components(&cloud, eps).unwrap();
            prop_assert_eq!(r.component_count, brute_components(&cloud, eps));
            prop_assert_eq!(r.component_sizes.iter().sum::<usize>(), n);
        }

        #[test]
        fn counts_shrink_as_epsilon_grows(seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let cloud: Vec<_> = (0..300).map(|_| rng.simplex_point(3)).collect();
            let mut last = usize::MAX;
            for k in 1..30 {
                let c = count_components(&cloud, 0.005 * k as f64).unwrap().component_count;
                prop_assert!(c <= last);
                last = c;
            }
        }
    }
}
