//! Planar segment and polyline helpers.

pub type Point = (f64, f64);

fn sub(a: Point, b: Point) -> Point {
    (a.0 - b.0, a.1 - b.1)
}

fn dot(a: Point, b: Point) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

fn cross(a: Point, b: Point) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Distance from `p` to segment `a..b` (a point when `a == b`).
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return distance(p, a);
    }
    let s = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    distance(p, (a.0 + s * ab.0, a.1 + s * ab.1))
}

pub fn point_polyline_distance(p: Point, line: &[Point]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [only] => distance(p, *only),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Intersection of segments `p0..p1` and `q0..q1`, as parameters `(s, u)`
/// along each. Collinear overlaps report the overlap point earliest along
/// the first segment; degenerate (zero-length) segments behave as points.
pub fn segment_intersection(p0: Point, p1: Point, q0: Point, q1: Point) -> Option<(f64, f64)> {
    let r = sub(p1, p0);
    let d = sub(q1, q0);
    let scale = (dot(r, r) + dot(d, d)).max(1e-300);
    let eps = 1e-12;
    let denom = cross(r, d);
    let w = sub(q0, p0);

    if denom.abs() > eps * scale {
        let s = cross(w, d) / denom;
        let u = cross(w, r) / denom;
        let tol = 1e-12;
        if (-tol..=1.0 + tol).contains(&s) && (-tol..=1.0 + tol).contains(&u) {
            return Some((s.clamp(0.0, 1.0), u.clamp(0.0, 1.0)));
        }
        return None;
    }

    // Parallel, collinear or degenerate.
    let rr = dot(r, r);
    let dd = dot(d, d);
    let on_segment = |pt: Point, a: Point, b: Point| point_segment_distance(pt, a, b) <= 1e-9;
    match (rr == 0.0, dd == 0.0) {
        (true, true) => (distance(p0, q0) <= 1e-9).then_some((0.0, 0.0)),
        (true, false) => on_segment(p0, q0, q1).then(|| (0.0, (dot(sub(p0, q0), d) / dd).clamp(0.0, 1.0))),
        (false, true) => on_segment(q0, p0, p1).then(|| ((dot(sub(q0, p0), r) / rr).clamp(0.0, 1.0), 0.0)),
        (false, false) => {
            if cross(w, r).abs() > 1e-9 * rr.sqrt() {
                return None;
            }
            // Collinear: overlap of [0, 1] with the projection of q onto p.
            let a = dot(w, r) / rr;
            let b = dot(sub(q1, p0), r) / rr;
            let (lo, hi) = (a.min(b), a.max(b));
            let s = lo.max(0.0);
            if s > hi.min(1.0) {
                return None;
            }
            let pt = (p0.0 + s * r.0, p0.1 + s * r.1);
            let u = (dot(sub(pt, q0), d) / dd).clamp(0.0, 1.0);
            Some((s, u))
        }
    }
}

/// First intersection along `a` of two polylines. Returns
/// `(segment index in a, param in a, segment index in b, param in b)`.
pub fn first_polyline_intersection(a: &[Point], b: &[Point]) -> Option<(usize, f64, usize, f64)> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    for i in 0..a.len() - 1 {
        let mut best: Option<(f64, usize, f64)> = None;
        for j in 0..b.len() - 1 {
            if let Some((s, u)) = segment_intersection(a[i], a[i + 1], b[j], b[j + 1]) {
                if best.is_none_or(|(bs, _, _)| s < bs) {
                    best = Some((s, j, u));
                }
            }
        }
        if let Some((s, j, u)) = best {
            return Some((i, s, j, u));
        }
    }
    None
}
