//! Deterministic 2-D convex hull (monotone chain) and containment tests
//! used by the region builders.

/// Cross product of `(b - a) x (c - a)`.
#[inline]
pub fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Convex hull of a point cloud via the monotone chain, counterclockwise,
/// starting at the lexicographically smallest vertex. Duplicate and collinear
/// points are dropped. Degenerate inputs yield a single point or a segment.
pub fn hull2d(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.is_empty() {
        // all points collinear: monotone chain degenerates; keep extremes
        return vec![pts[0], pts[n - 1]];
    }
    lower
}

fn dist_point(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn dist_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist_point(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    dist_point(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Signed violation of `p` against a counterclockwise hull: `<= 0` means
/// inside (or on the boundary); positive values are the distance outside.
pub fn hull_violation(hull: &[(f64, f64)], p: (f64, f64)) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => dist_point(p, hull[0]),
        2 => dist_segment(p, hull[0], hull[1]),
        n => {
            let mut worst = f64::NEG_INFINITY;
            for i in 0..n {
                let a = hull[i];
                let b = hull[(i + 1) % n];
                let len = dist_point(a, b);
                // CCW orientation: cross < 0 means p is right of edge a->b,
                // i.e. outside this halfplane
                let v = -cross(a, b, p) / len;
                worst = worst.max(v);
            }
            worst
        }
    }
}

/// True iff every vertex of `a` lies inside hull `b` within `tol`.
pub fn hull_subset(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    max_hull_violation(a, b) <= tol
}

/// Largest violation of any vertex of `a` against hull `b`.
pub fn max_hull_violation(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .map(|&p| hull_violation(b, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest `t` with `(t, t)` inside the hull, assuming the hull is nonempty
/// and contains the origin (true for every rate region here). Returns 0 for
/// hulls that only touch the diagonal at the origin.
pub fn diagonal_max(hull: &[(f64, f64)]) -> f64 {
    match hull.len() {
        0 => 0.0,
        1 => {
            if (hull[0].0 - hull[0].1).abs() < 1e-12 {
                hull[0].0
            } else {
                0.0
            }
        }
        2 => {
            // segment from the origin: on-diagonal only if it runs along it
            let far = if hull[0].0.abs() + hull[0].1.abs() > hull[1].0.abs() + hull[1].1.abs() {
                hull[0]
            } else {
                hull[1]
            };
            if (far.0 - far.1).abs() < 1e-12 {
                far.0
            } else {
                0.0
            }
        }
        n => {
            // clip the ray (t, t), t >= 0, against each CCW edge halfplane
            let mut lo = 0.0f64;
            let mut hi = f64::INFINITY;
            for i in 0..n {
                let a = hull[i];
                let b = hull[(i + 1) % n];
                // inside condition: cross(a, b, (t,t)) >= 0, linear in t
                let c1 = (b.0 - a.0) - (b.1 - a.1);
                let c0 = -(b.0 - a.0) * a.1 + (b.1 - a.1) * a.0;
                if c1.abs() < 1e-15 {
                    if c0 < -1e-12 {
                        return 0.0;
                    }
                } else if c1 > 0.0 {
                    lo = lo.max(-c0 / c1);
                } else {
                    hi = hi.min(-c0 / c1);
                }
            }
            if hi < lo {
                0.0
            } else {
                hi
            }
        }
    }
}
