//! Level sets of scalar fields and curve agreement metrics.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::wigner::ScalarField;

/// Ordered `(x, p)` vertices. A closed polyline does not repeat its first
/// vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    pub fn new(points: Vec<(f64, f64)>, closed: bool) -> Self {
        let mut points = points;
        points.dedup();
        if closed && points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        Self { points, closed }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segments, including the closing one for closed polylines.
    pub fn segments(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let n = self.points.len();
        let count = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Applies an affine map to every vertex.
    pub fn map(&self, f: impl Fn((f64, f64)) -> (f64, f64)) -> Self {
        Self::new(self.points.iter().map(|&q| f(q)).collect(), self.closed)
    }

    /// Vertices plus extra points so that no gap exceeds `step`.
    pub fn densify(&self, step: f64) -> Vec<(f64, f64)> {
        if self.points.len() < 2 || step <= 0.0 {
            return self.points.clone();
        }
        let mut out = Vec::new();
        for (a, b) in self.segments() {
            let len = (b.0 - a.0).hypot(b.1 - a.1);
            let pieces = (len / step).ceil().max(1.0) as usize;
            for k in 0..pieces {
                let t = k as f64 / pieces as f64;
                out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
            }
        }
        if !self.closed {
            out.push(*self.points.last().unwrap());
        }
        out
    }
}

/// Signed shoelace sum, positive for counter-clockwise vertex order.
fn signed_area(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x1, y1) = points[i];
        let (x2, y2) = points[(i + 1) % n];
        s += x1 * y2 - x2 * y1;
    }
    0.5 * s
}

/// Absolute shoelace area of a closed polyline.
pub fn enclosed_area(poly: &Polyline) -> Result<f64> {
    if !poly.closed {
        return Err(Error::OpenPolyline);
    }
    if poly.len() < 3 {
        return Err(Error::DegeneratePolyline(format!(
            "{} vertices cannot enclose an area",
            poly.len()
        )));
    }
    Ok(signed_area(&poly.points).abs())
}

fn directed_hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .map(|pa| {
            b.iter()
                .map(|pb| (pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// Symmetric Hausdorff distance between two curves, each densified to `step`.
pub fn hausdorff_distance(a: &Polyline, b: &Polyline, step: f64) -> f64 {
    hausdorff_sets(std::slice::from_ref(a), std::slice::from_ref(b), step)
}

/// Symmetric Hausdorff distance between the unions of two polyline sets.
/// Returns infinity if exactly one side is empty.
pub fn hausdorff_sets(a: &[Polyline], b: &[Polyline], step: f64) -> f64 {
    let pa: Vec<_> = a.iter().flat_map(|p| p.densify(step)).collect();
    let pb: Vec<_> = b.iter().flat_map(|p| p.densify(step)).collect();
    match (pa.is_empty(), pb.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed_hausdorff(&pa, &pb).max(directed_hausdorff(&pb, &pa)),
    }
}

/// Cell edge identifier: horizontal edges run along x, vertical edges along p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Edge {
    /// between (i, j) and (i + 1, j)
    AlongX(usize, usize),
    /// between (i, j) and (i, j + 1)
    AlongP(usize, usize),
}

/// Marching squares over `field` at `level`, with linear edge interpolation.
///
/// Corners `>= level` count as inside. Ambiguous saddle cells are resolved by
/// the average of the four corners. Cells touching a masked (NaN) node are
/// skipped, which leaves the affected curves open.
pub fn extract_level_set(field: &ScalarField, level: f64) -> Vec<Polyline> {
    let g = &field.grid;
    let (nx, np) = (g.nx, g.np);
    let (dx, dp) = (g.dx(), g.dp());

    let crossing = |e: Edge| -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::AlongX(i, j) => ((i, j), (i + 1, j)),
            Edge::AlongP(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (field.get(i0, j0), field.get(i1, j1));
        let t = ((level - a) / (b - a)).clamp(0.0, 1.0);
        let x = g.x_min + (i0 as f64 + t * (i1 - i0) as f64) * dx;
        let p = g.p_min + (j0 as f64 + t * (j1 - j0) as f64) * dp;
        (x, p)
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..np - 1 {
            let v = [
                field.get(i, j),
                field.get(i + 1, j),
                field.get(i + 1, j + 1),
                field.get(i, j + 1),
            ];
            if v.iter().any(|z| z.is_nan()) {
                continue;
            }
            let mut case = 0u8;
            for (bit, z) in v.iter().enumerate() {
                if *z >= level {
                    case |= 1 << bit;
                }
            }
            // edges: bottom (0-1), right (1-2), top (3-2), left (0-3)
            let bottom = Edge::AlongX(i, j);
            let right = Edge::AlongP(i + 1, j);
            let top = Edge::AlongX(i, j + 1);
            let left = Edge::AlongP(i, j);
            let center_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    // corners 0 and 2 inside
                    if center_in {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    // corners 1 and 3 inside
                    if center_in {
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

    chain(&segments)
        .into_iter()
        .map(|(edges, closed)| Polyline::new(edges.into_iter().map(crossing).collect(), closed))
        .filter(|p| p.len() >= 2)
        .collect()
}

/// Joins segments that share an edge into maximal chains, in a deterministic
/// order: open chains start from their lowest-indexed free end.
fn chain(segments: &[(Edge, Edge)]) -> Vec<(Vec<Edge>, bool)> {
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        incident.entry(*a).or_default().push(k);
        incident.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> (Vec<Edge>, bool) {
        let mut edges = vec![start_edge];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            if next == start_edge {
                return (edges, true);
            }
            edges.push(next);
            at = next;
            match incident[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (edges, false),
            }
        }
    };

    // open chains first, from ends that touch exactly one segment
    for (k, (a, b)) in segments.iter().enumerate() {
        if used[k] {
            continue;
        }
        for end in [*a, *b] {
            if !used[k] && incident[&end].len() == 1 {
                out.push(walk(k, end, &mut used));
            }
        }
    }
    for (k, (a, _)) in segments.iter().enumerate() {
        if !used[k] {
            out.push(walk(k, *a, &mut used));
        }
    }
    out
}

/// Plain-text polyline listing: a `#` header per polyline carrying the level
/// and closure flag, one `x<TAB>p` pair per line, blank line between polylines.
pub fn write_polylines(polys: &[Polyline], level: f64) -> String {
    let mut s = String::new();
    for (k, poly) in polys.iter().enumerate() {
        if k > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "# level={} closed={}", fmt_num(level), poly.closed);
        for (x, p) in &poly.points {
            let _ = writeln!(s, "{}\t{}", fmt_num(*x), fmt_num(*p));
        }
    }
    s
}

/// Parses [`write_polylines`] output back into `(level, polylines)`.
pub fn read_polylines(text: &str) -> Result<(Option<f64>, Vec<Polyline>)> {
    let mut level = None;
    let mut polys = Vec::new();
    let mut current: Option<Polyline> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = n + 1;
        if line.is_empty() {
            polys.extend(current.take());
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            polys.extend(current.take());
            let mut closed = false;
            for tok in header.split_whitespace() {
                match tok.split_once('=') {
                    Some(("level", v)) => {
                        level = Some(v.parse().map_err(|_| Error::Parse {
                            line: lineno,
                            msg: format!("bad level '{v}'"),
                        })?)
                    }
                    Some(("closed", v)) => closed = v == "true",
                    _ => {}
                }
            }
            current = Some(Polyline { points: Vec::new(), closed });
            continue;
        }
        let mut it = line.split('\t');
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.and_then(|t| t.trim().parse().ok()).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected 'x<TAB>p', got '{line}'"),
            })
        };
        let x = parse(it.next())?;
        let p = parse(it.next())?;
        current.get_or_insert_with(|| Polyline { points: Vec::new(), closed: false }).points.push((x, p));
    }
    polys.extend(current);
    Ok((level, polys))
}

/// Scientific notation with 16 significant digits; NaN prints as `nan`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.15e}")
    }
}
