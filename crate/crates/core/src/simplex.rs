//! Points of the 1- and 2-simplex, the cyclic permutation of coordinates and
//! the line/sector partition of the triangle.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QsoError, Result};

/// Entries below `-NEGATIVE_TOLERANCE` are rejected by [`SimplexPoint::new`].
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;
/// Bound on the coordinate-sum error after renormalization.
pub const SIMPLEX_EPS: f64 = 1e-12;
/// Two coordinates closer than this are treated as equal by [`classify_region`].
pub const REGION_TOL: f64 = 1e-12;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// A frequency vector on S¹ (`m = 2`) or S² (`m = 3`).
///
/// Unused trailing coordinates of a two-dimensional point are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct SimplexPoint {
    coords: [f64; 3],
    m: usize,
}

impl SimplexPoint {
    /// Validates and renormalizes raw frequencies: tiny negatives are clamped to
    /// zero, then every entry is divided by the sum.
    pub fn new(raw: &[f64]) -> Result<Self> {
        let m = raw.len();
        if !(2..=3).contains(&m) {
            return Err(QsoError::Dimension(format!("simplex points need 2 or 3 coordinates, got {m}")));
        }
        let mut coords = [0.0; 3];
        for (i, &v) in raw.iter().enumerate() {
            if !v.is_finite() {
                return Err(QsoError::Invalid(format!("coordinate {i} is not finite")));
            }
            if v < -NEGATIVE_TOLERANCE {
                return Err(QsoError::NegativeMass { index: i, value: v });
            }
            coords[i] = v.max(0.0);
        }
        let sum: f64 = coords.iter().sum();
        if sum <= 0.0 {
            return Err(QsoError::ZeroSum);
        }
        Ok(Self::normalized(coords, m))
    }

    /// Renormalizes without validation. Callers guarantee a positive sum.
    #[inline]
    pub(crate) fn normalized(mut coords: [f64; 3], m: usize) -> Self {
        for c in coords.iter_mut() {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        let sum = coords[0] + coords[1] + coords[2];
        for c in coords.iter_mut() {
            *c /= sum;
        }
        SimplexPoint { coords, m }
    }

    /// Wraps coordinates that are already on the simplex.
    #[inline]
    pub(crate) fn from_array_unchecked(coords: [f64; 3], m: usize) -> Self {
        SimplexPoint { coords, m }
    }

    /// Vertex `e_{i+1}` of the simplex with `m` coordinates.
    pub fn vertex(m: usize, i: usize) -> Self {
        assert!((2..=3).contains(&m) && i < m);
        let mut coords = [0.0; 3];
        coords[i] = 1.0;
        SimplexPoint { coords, m }
    }

    /// The barycenter, `C = (1/3, 1/3, 1/3)` for `m = 3`.
    pub fn center(m: usize) -> Self {
        assert!((2..=3).contains(&m));
        let mut coords = [0.0; 3];
        for c in coords.iter_mut().take(m) {
            *c = 1.0 / m as f64;
        }
        SimplexPoint { coords, m }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.m]
    }

    /// Coordinates padded to length three.
    #[inline]
    pub fn array(&self) -> [f64; 3] {
        self.coords
    }

    pub fn min_coordinate(&self) -> f64 {
        self.coords().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Position in the equilateral triangle with `e_1` at the origin, `e_2` at
    /// `(1, 0)` and `e_3` at `(1/2, √3/2)`. For `m = 2` the point lies on the
    /// base edge.
    pub fn planar(&self) -> (f64, f64) {
        let [_, x2, x3] = self.coords;
        (x2 + 0.5 * x3, SQRT3_2 * x3)
    }

    fn ensure_same_dim(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(QsoError::Dimension(format!("points of dimension {} and {}", self.m, other.m)));
        }
        Ok(())
    }
}

impl fmt::Debug for SimplexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SimplexPoint").field(&self.coords()).finish()
    }
}

impl Serialize for SimplexPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimplexPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        SimplexPoint::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(x: &SimplexPoint, y: &SimplexPoint) -> Result<f64> {
    x.ensure_same_dim(y)?;
    Ok(dist(x, y))
}

#[inline]
pub(crate) fn dist(x: &SimplexPoint, y: &SimplexPoint) -> f64 {
    let a = x.coords;
    let b = y.coords;
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// A permutation of the three coordinates; `apply(x)[i] = x[map[i]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Permutation {
    map: [usize; 3],
}

impl Permutation {
    /// `(x_1, x_2, x_3) ↦ (x_2, x_3, x_1)`.
    pub const CYCLIC: Permutation = Permutation { map: [1, 2, 0] };
    pub const IDENTITY: Permutation = Permutation { map: [0, 1, 2] };

    pub fn new(map: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &i in &map {
            if i > 2 || seen[i] {
                return Err(QsoError::Invalid(format!("{map:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { map })
    }

    pub fn compose(&self, inner: &Permutation) -> Permutation {
        // (self ∘ inner)(x)[i] = inner(x)[map[i]] = x[inner.map[map[i]]]
        let mut map = [0; 3];
        for (i, slot) in map.iter_mut().enumerate() {
            *slot = inner.map[self.map[i]];
        }
        Permutation { map }
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = [0; 3];
        for (i, &j) in self.map.iter().enumerate() {
            map[j] = i;
        }
        Permutation { map }
    }

    #[inline]
    pub(crate) fn apply_array(&self, x: &[f64; 3]) -> [f64; 3] {
        [x[self.map[0]], x[self.map[1]], x[self.map[2]]]
    }
}

/// Reindexes the coordinates of a point of S².
pub fn permute(p: &Permutation, x: &SimplexPoint) -> Result<SimplexPoint> {
    if x.m != 3 {
        return Err(QsoError::Dimension("permutations act on S^2 only".into()));
    }
    Ok(SimplexPoint::from_array_unchecked(p.apply_array(&x.coords), 3))
}

/// Cell of the line/sector partition of S².
///
/// Lines: `l1 = {x2 = x3}`, `l2 = {x1 = x3}`, `l3 = {x1 = x2}`.
/// Sectors: `S1: x1≥x2≥x3`, `S2: x1≥x3≥x2`, `S3: x3≥x1≥x2`, `S4: x3≥x2≥x1`,
/// `S5: x2≥x3≥x1`, `S6: x2≥x1≥x3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Center,
    Line(u8),
    Sector(u8),
}

impl Region {
    /// Image cell under the symmetric mutation operator:
    /// `l1 → l2 → l3 → l1` and `S1 → S2 → … → S6 → S1`.
    pub fn cycle_successor(self) -> Region {
        match self {
            Region::Center => Region::Center,
            Region::Line(i) => Region::Line(i % 3 + 1),
            Region::Sector(i) => Region::Sector(i % 6 + 1),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Center => write!(f, "C"),
            Region::Line(i) => write!(f, "l{i}"),
            Region::Sector(i) => write!(f, "S{i}"),
        }
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A region together with the coordinate indices sorted by decreasing value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionLabel {
    pub region: Region,
    pub order: [usize; 3],
}

/// Locates `x` in the line/sector partition. Ties resolve to lines; a point on
/// two lines at once is the center.
pub fn classify_region(x: &SimplexPoint) -> Result<RegionLabel> {
    if x.m != 3 {
        return Err(QsoError::Dimension("regions are defined on S^2 only".into()));
    }
    let c = x.coords;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| c[b].total_cmp(&c[a]));

    let eq23 = (c[1] - c[2]).abs() <= REGION_TOL;
    let eq13 = (c[0] - c[2]).abs() <= REGION_TOL;
    let eq12 = (c[0] - c[1]).abs() <= REGION_TOL;
    let region = match (eq23 as u8 + eq13 as u8 + eq12 as u8, eq23, eq13) {
        (0, _, _) => Region::Sector(match order {
            [0, 1, 2] => 1,
            [0, 2, 1] => 2,
            [2, 0, 1] => 3,
            [2, 1, 0] => 4,
            [1, 2, 0] => 5,
            _ => 6,
        }),
        (1, true, _) => Region::Line(1),
        (1, _, true) => Region::Line(2),
        (1, _, _) => Region::Line(3),
        _ => Region::Center,
    };
    Ok(RegionLabel { region, order })
}

/// Largest pairwise distance in a set of points (0 for fewer than two points).
///
/// Uses the convex hull in the planar chart and rotating calipers, so the cost
/// is `O(n log n)`.
pub fn diameter(points: &[SimplexPoint]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    if points[0].m == 2 {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.coords[0]), hi.max(p.coords[0])));
        return (hi - lo) * std::f64::consts::SQRT_2;
    }
    let planar: Vec<(f64, f64)> = points.iter().map(SimplexPoint::planar).collect();
    planar_diameter(&planar) * std::f64::consts::SQRT_2
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn pdist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    // upper hull must not eat into the lower one
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

pub(crate) fn planar_diameter(points: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(points);
    let h = hull.len();
    match h {
        0 | 1 => 0.0,
        2 => pdist(hull[0], hull[1]),
        _ => {
            let mut best: f64 = 0.0;
            let mut j = 1;
            for i in 0..h {
                let ni = (i + 1) % h;
                while cross(hull[i], hull[ni], hull[(j + 1) % h]).abs() > cross(hull[i], hull[ni], hull[j]).abs() {
                    j = (j + 1) % h;
                }
                best = best.max(pdist(hull[i], hull[j])).max(pdist(hull[ni], hull[j]));
            }
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v).unwrap()
    }

    #[test]
    fn make_point_examples() {
        assert_eq!(pt(&[1.0, 0.0, 0.0]).coords(), &[1.0, 0.0, 0.0]);
        let c = pt(&[1.0, 1.0, 1.0]);
        for &v in c.coords() {
            assert!((v - 1.0 / 3.0).abs() < 1e-16);
        }
        let clamped = pt(&[0.2, -1e-12, 0.8]);
        assert_eq!(clamped.coords()[1], 0.0);
        assert!((clamped.coords()[0] - 0.2).abs() < 1e-16);
        assert!((clamped.coords()[2] - 0.8).abs() < 1e-16);
    }

    #[test]
    fn make_point_errors() {
        assert!(matches!(SimplexPoint::new(&[1.0]), Err(QsoError::Dimension(_))));
        assert!(matches!(SimplexPoint::new(&[0.25; 4]), Err(QsoError::Dimension(_))));
        assert!(matches!(SimplexPoint::new(&[0.5, -1e-6, 0.5]), Err(QsoError::NegativeMass { index: 1, .. })));
        assert!(matches!(SimplexPoint::new(&[0.0, 0.0, 0.0]), Err(QsoError::ZeroSum)));
    }

    #[test]
    fn permute_examples() {
        let x = pt(&[0.5, 0.3, 0.2]);
        let y = permute(&Permutation::CYCLIC, &x).unwrap();
        assert_eq!(y.coords(), &[0.3, 0.2, 0.5]);
        let c = SimplexPoint::center(3);
        assert_eq!(permute(&Permutation::CYCLIC, &c).unwrap(), c);
        let z = pt(&[0.7, 0.2, 0.1]);
        let mut w = z;
        for _ in 0..3 {
            w = permute(&Permutation::CYCLIC, &w).unwrap();
        }
        assert_eq!(w, z);
        assert!(permute(&Permutation::CYCLIC, &pt(&[0.4, 0.6])).is_err());
    }

    #[test]
    fn permutation_algebra() {
        let p = Permutation::CYCLIC;
        assert_eq!(p.compose(&p).compose(&p), Permutation::IDENTITY);
        assert_eq!(p.compose(&p.inverse()), Permutation::IDENTITY);
        assert!(Permutation::new([0, 0, 1]).is_err());
    }

    #[test]
    fn region_examples() {
        let r = |v: &[f64]| classify_region(&pt(v)).unwrap().region;
        assert_eq!(r(&[0.6, 0.3, 0.1]), Region::Sector(1));
        assert_eq!(r(&[0.5, 0.25, 0.25]), Region::Line(1));
        assert_eq!(r(&[0.585, 0.11, 0.305]), Region::Sector(2));
        assert_eq!(r(&[1.0, 1.0, 1.0]), Region::Center);
        assert_eq!(r(&[0.25, 0.5, 0.25]), Region::Line(2));
        assert_eq!(r(&[0.4, 0.4, 0.2]), Region::Line(3));
        let label = classify_region(&pt(&[0.1, 0.3, 0.6])).unwrap();
        assert_eq!(label.region, Region::Sector(4));
        assert_eq!(label.order, [2, 1, 0]);
    }

    #[test]
    fn region_labels_match_defining_inequalities() {
        // every strict ordering of three distinct values
        let vals = [0.5, 0.3, 0.2];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let x = [vals[p[0]], vals[p[1]], vals[p[2]]];
            let ge = |a: usize, b: usize, c: usize| x[a] >= x[b] && x[b] >= x[c];
            let expected = if ge(0, 1, 2) {
                1
            } else if ge(0, 2, 1) {
                2
            } else if ge(2, 0, 1) {
                3
            } else if ge(2, 1, 0) {
                4
            } else if ge(1, 2, 0) {
                5
            } else {
                6
            };
            assert_eq!(classify_region(&pt(&x)).unwrap().region, Region::Sector(expected));
        }
    }

    #[test]
    fn cyclic_permutation_relabels_regions() {
        // Enumerated on one point per cell; the induced map is
        // S_i → S_{i+2} and l1→l3→l2→l1.
        let cases: [(&[f64], Region, Region); 9] = [
            (&[0.5, 0.3, 0.2], Region::Sector(1), Region::Sector(3)),
            (&[0.5, 0.2, 0.3], Region::Sector(2), Region::Sector(4)),
            (&[0.3, 0.2, 0.5], Region::Sector(3), Region::Sector(5)),
            (&[0.2, 0.3, 0.5], Region::Sector(4), Region::Sector(6)),
            (&[0.2, 0.5, 0.3], Region::Sector(5), Region::Sector(1)),
            (&[0.3, 0.5, 0.2], Region::Sector(6), Region::Sector(2)),
            (&[0.5, 0.25, 0.25], Region::Line(1), Region::Line(3)),
            (&[0.25, 0.5, 0.25], Region::Line(2), Region::Line(1)),
            (&[0.4, 0.4, 0.2], Region::Line(3), Region::Line(2)),
        ];
        for (x, before, after) in cases {
            let x = pt(x);
            assert_eq!(classify_region(&x).unwrap().region, before);
            let px = permute(&Permutation::CYCLIC, &x).unwrap();
            assert_eq!(classify_region(&px).unwrap().region, after);
        }
    }

    #[test]
    fn distance_examples() {
        let e1 = SimplexPoint::vertex(3, 0);
        let e2 = SimplexPoint::vertex(3, 1);
        let c = SimplexPoint::center(3);
        assert_eq!(distance(&e1, &e1).unwrap(), 0.0);
        assert!((distance(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // direct formula sqrt((2/3)^2 + 2 (1/3)^2)
        let expected = ((2.0f64 / 3.0).powi(2) + 2.0 * (1.0f64 / 3.0).powi(2)).sqrt();
        assert!((distance(&c, &e1).unwrap() - expected).abs() < 1e-15);
        assert!((expected - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(distance(&e1, &SimplexPoint::vertex(2, 0)).is_err());
    }

    #[test]
    fn diameter_of_vertices() {
        let v: Vec<_> = (0..3).map(|i| SimplexPoint::vertex(3, i)).collect();
        assert!((diameter(&v) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(diameter(&v[..1]), 0.0);
        let two = [pt(&[0.2, 0.8]), pt(&[0.7, 0.3])];
        assert!((diameter(&two) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    fn arb_point() -> impl Strategy<Value = SimplexPoint> {
        (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
            .prop_filter("positive mass", |(a, b, c)| a + b + c > 1e-3)
            .prop_map(|(a, b, c)| pt(&[a, b, c]))
    }

    proptest! {
        #[test]
        fn make_point_is_normalized(a in 0.0f64..10.0, b in 0.0f64..10.0, c in 0.0f64..10.0) {
            prop_assume!(a + b + c > 1e-9);
            let x = pt(&[a, b, c]);
            let s: f64 = x.coords().iter().sum();
            prop_assert!((s - 1.0).abs() <= SIMPLEX_EPS);
            prop_assert!(x.coords().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn permute_is_an_isometry(x in arb_point(), y in arb_point()) {
            let p = Permutation::CYCLIC;
            let d0 = distance(&x, &y).unwrap();
            let d1 = distance(&permute(&p, &x).unwrap(), &permute(&p, &y).unwrap()).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-15);
        }

        #[test]
        fn distance_is_a_metric(x in arb_point(), y in arb_point(), z in arb_point()) {
            let dxy = distance(&x, &y).unwrap();
            prop_assert_eq!(dxy, distance(&y, &x).unwrap());
            prop_assert!(dxy <= distance(&x, &z).unwrap() + distance(&z, &y).unwrap() + 1e-15);
        }

        #[test]
        fn calipers_match_brute_force(pts in proptest::collection::vec(arb_point(), 1..60)) {
            let mut brute: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    brute = brute.max(dist(a, b));
                }
            }
            prop_assert!((diameter(&pts) - brute).abs() <= 1e-12);
        }
    }
}
