//! Planar helpers on landmark points (x = column, y = row, pixel units).

use crate::media::Point;

const EPS: f64 = 1e-9;

#[inline]
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull by monotone chain, counter-clockwise in (x, y) with
/// collinear points dropped. Returns fewer than 3 points for degenerate input.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= EPS {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= EPS {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// True when no three of the points span a non-zero area.
pub fn all_collinear(points: &[Point]) -> bool {
    convex_hull(points).len() < 3
}

/// Signed shoelace area (positive for counter-clockwise in x/y).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

pub fn polygon_perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|k| distance(poly[k], poly[(k + 1) % n])).sum()
}

/// Area centroid; falls back to the vertex mean for zero-area input.
pub fn polygon_centroid(poly: &[Point]) -> Point {
    let a = polygon_area(poly);
    let n = poly.len();
    if a.abs() < EPS {
        let (sx, sy) = poly.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        return Point::new(sx / n as f64, sy / n as f64);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let f = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * f;
        cy += (p.y + q.y) * f;
    }
    Point::new(cx / (6.0 * a), cy / (6.0 * a))
}

pub fn mean_point(points: &[Point]) -> Point {
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
    Point::new(sx / points.len() as f64, sy / points.len() as f64)
}

#[inline]
pub fn distance(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

pub fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    distance(p, Point::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd containment with points on an edge counted as inside.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        if distance_to_segment(p, a, b) <= EPS {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Barycentric weights of `p` in triangle `t`, or `None` if degenerate.
pub fn barycentric(p: Point, t: &[Point; 3]) -> Option<[f64; 3]> {
    let det = cross(t[0], t[1], t[2]);
    if det.abs() < EPS {
        return None;
    }
    let l1 = cross(t[0], p, t[2]) / det;
    let l2 = cross(t[0], t[1], p) / det;
    Some([1.0 - l1 - l2, l1, l2])
}

/// Scales `poly` about `center` by `factor`.
pub fn scale_about(poly: &[Point], center: Point, factor: f64) -> Vec<Point> {
    poly.iter()
        .map(|p| {
            Point::new(
                center.x + (p.x - center.x) * factor,
                center.y + (p.y - center.y) * factor,
            )
        })
        .collect()
}
