//! 2-D convex hulls and extrapolation masks.
//!
//! Bivariate partial dependence rasters are only trustworthy where data was
//! observed; cells outside the convex hull of the observed variable pair are
//! flagged so renderers can hide them. Boundary points count as inside, and
//! degenerate hulls (all points collinear or identical) admit exactly the
//! on-segment / on-point grid cells.

/// Cross product of (b - a) x (c - a).
fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Convex hull by monotone chain, counter-clockwise, without repeating the
/// first vertex. Degenerate inputs return one point or a two-point segment.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // All points collinear: keep the extreme pair.
        return vec![pts[0], pts[n - 1]];
    }
    lower
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    cross(a, b, p) == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Point-in-convex-polygon with the boundary counting as inside.
pub fn point_in_hull(hull: &[(f64, f64)], p: (f64, f64)) -> bool {
    match hull.len() {
        0 => false,
        1 => p == hull[0],
        2 => on_segment(hull[0], hull[1], p),
        _ => {
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                if cross(a, b, p) < 0.0 {
                    return false;
                }
            }
            true
        }
    }
}

/// Mask over the cross product of two numeric grids: `mask[a][b]` is true
/// when `(xs[a], ys[b])` lies inside (or on) the hull of `observed`.
pub fn grid_mask(observed: &[(f64, f64)], xs: &[f64], ys: &[f64]) -> Vec<Vec<bool>> {
    let hull = convex_hull(observed);
    xs.iter()
        .map(|&x| ys.iter().map(|&y| point_in_hull(&hull, (x, y))).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

    #[test]
    fn unit_square_contains_interior_boundary_and_corners() {
        let hull = convex_hull(&SQUARE);
        assert_eq!(hull.len(), 4);
        assert!(point_in_hull(&hull, (0.5, 0.5)));
        assert!(point_in_hull(&hull, (0.0, 0.5)));
        assert!(point_in_hull(&hull, (1.0, 1.0)));
        assert!(!point_in_hull(&hull, (2.0, 2.0)));
        assert!(!point_in_hull(&hull, (0.5, -0.001)));
    }

    #[test]
    fn collinear_points_admit_only_the_segment() {
        let pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 2);
        assert!(point_in_hull(&hull, (1.0, 1.0)));
        assert!(point_in_hull(&hull, (0.5, 0.5)));
        assert!(!point_in_hull(&hull, (1.0, 0.0)));
        assert!(!point_in_hull(&hull, (3.0, 3.0)));
    }

    #[test]
    fn single_point_hull_admits_only_itself() {
        let hull = convex_hull(&[(2.0, 3.0), (2.0, 3.0)]);
        assert_eq!(hull.len(), 1);
        assert!(point_in_hull(&hull, (2.0, 3.0)));
        assert!(!point_in_hull(&hull, (2.0, 3.0001)));
    }

    #[test]
    fn hull_is_invariant_under_point_permutation() {
        let mut pts = vec![(0.3, 0.7), (0.0, 0.0), (1.0, 0.2), (0.8, 0.9), (0.1, 0.5)];
        let h1 = convex_hull(&pts);
        pts.reverse();
        pts.swap(0, 2);
        let h2 = convex_hull(&pts);
        let grid: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
        for &x in &grid {
            for &y in &grid {
                assert_eq!(point_in_hull(&h1, (x, y)), point_in_hull(&h2, (x, y)));
            }
        }
    }

    #[test]
    fn swapping_axes_transposes_the_mask() {
        let pts = vec![(0.0, 0.0), (2.0, 0.5), (1.0, 2.0), (0.2, 1.5)];
        let swapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (y, x)).collect();
        let xs: Vec<f64> = (0..5).map(|i| f64::from(i) * 0.5).collect();
        let ys: Vec<f64> = (0..7).map(|i| f64::from(i) * 0.3).collect();
        let m1 = grid_mask(&pts, &xs, &ys);
        let m2 = grid_mask(&swapped, &ys, &xs);
        for (a, row) in m1.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                assert_eq!(v, m2[b][a]);
            }
        }
    }
}
