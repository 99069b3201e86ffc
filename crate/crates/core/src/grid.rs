//! Quadrature grids on an interval that resolve concentrated bubbles.

use crate::quadrature::GaussRule;
use serde::{Deserialize, Serialize};

/// A point written as anchor + offset so that offsets far below the
/// spacing of floats near the anchor keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub anchor: f64,
    pub offset: f64,
}

impl Point {
    pub fn at(x: f64) -> Self {
        Point { anchor: x, offset: 0.0 }
    }

    pub fn value(&self) -> f64 {
        self.anchor + self.offset
    }

    /// Offset of this point from `center`, exact when the anchors coincide.
    pub fn offset_from(&self, center: f64) -> f64 {
        if self.anchor == center {
            self.offset
        } else {
            (self.anchor - center) + self.offset
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridNode {
    pub point: Point,
    pub weight: f64,
}

/// One Gauss panel [anchor + a, anchor + b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub anchor: f64,
    pub a: f64,
    pub b: f64,
}

/// Gauss panels graded geometrically toward each center and each endpoint.
/// Panel k owns nodes k·order .. (k+1)·order.
#[derive(Debug, Clone)]
pub struct FixedGrid {
    pub length: f64,
    pub order: usize,
    pub nodes: Vec<GridNode>,
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub order: usize,
    /// Geometric ratio between consecutive panels.
    pub ratio: f64,
    /// Smallest panel at an endpoint, relative to the length.
    pub edge_floor: f64,
    /// Panels between windows per unit length.
    pub bulk_panels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { order: 12, ratio: 3.0, edge_floor: 1e-10, bulk_panels: 8 }
    }
}

impl GridSpec {
    /// Same layout with doubled resolution.
    pub fn refined(&self) -> Self {
        GridSpec { order: self.order + 6, ratio: self.ratio.sqrt(), edge_floor: self.edge_floor * 1e-2, bulk_panels: 2 * self.bulk_panels }
    }
}

/// Breakpoints 0 < b₀ < … < reach with b₀ = first, growing by `ratio`.
pub fn geometric_breaks(first: f64, reach: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut b = first.min(reach);
    while b < reach {
        out.push(b);
        b *= ratio;
    }
    if reach - out[out.len() - 1] < 0.2 * reach / ratio && out.len() > 1 {
        out.pop();
    }
    out.push(reach);
    out
}

impl FixedGrid {
    /// `centers` holds (σ, scale) pairs; windows of radius `window` surround each σ.
    pub fn new(length: f64, centers: &[(f64, f64)], window: f64, spec: GridSpec) -> Self {
        let rule = GaussRule::legendre(spec.order);
        let mut nodes = Vec::new();
        let mut panels = Vec::new();
        let mut sorted: Vec<(f64, f64)> = centers.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut push_panel = |nodes: &mut Vec<GridNode>, anchor: f64, a: f64, b: f64| {
            panels.push(Panel { anchor, a, b });
            for (t, w) in rule.mapped(a, b) {
                nodes.push(GridNode { point: Point { anchor, offset: t }, weight: w });
            }
        };
        // windows
        let mut segments = Vec::new();
        let mut left = 0.0;
        for &(c, scale) in &sorted {
            let breaks = geometric_breaks(scale, window, spec.ratio);
            for w in breaks.windows(2) {
                push_panel(&mut nodes, c, w[0], w[1]);
                push_panel(&mut nodes, c, -w[1], -w[0]);
            }
            segments.push((left, c - window));
            left = c + window;
        }
        segments.push((left, length));
        let n_seg = segments.len();
        for (i, (a, b)) in segments.into_iter().enumerate() {
            if b <= a {
                continue;
            }
            let touches_left = i == 0;
            let touches_right = i == n_seg - 1;
            let panels = ((b - a) / length * spec.bulk_panels as f64).ceil().max(1.0) as usize;
            let mut lo = a;
            let mut hi = b;
            let h = (b - a) / panels as f64;
            if touches_left {
                // graded toward x = 0, covering [0, h]
                let br = geometric_breaks(spec.edge_floor * length, h, spec.ratio);
                for w in br.windows(2) {
                    push_panel(&mut nodes, 0.0, w[0], w[1]);
                }
                lo = a + h;
            }
            if touches_right {
                let br = geometric_breaks(spec.edge_floor * length, h, spec.ratio);
                for w in br.windows(2) {
                    push_panel(&mut nodes, length, -w[1], -w[0]);
                }
                hi = b - h;
            }
            if hi > lo {
                let m = ((hi - lo) / h).round().max(1.0) as usize;
                let step = (hi - lo) / m as f64;
                for j in 0..m {
                    let pa = lo + j as f64 * step;
                    push_panel(&mut nodes, 0.0, pa, pa + step);
                }
            }
        }
        FixedGrid { length, order: spec.order, nodes, panels }
    }

    pub fn integrate<F: FnMut(&Point) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(&n.point)).sum()
    }

    /// (∫ |f|^r)^{1/r}.
    pub fn lp_norm<F: FnMut(&Point) -> f64>(&self, r: f64, mut f: F) -> f64 {
        self.integrate(|p| f(p).abs().powf(r)).powf(1.0 / r)
    }
}

/// Panels graded geometrically toward both endpoints, for smooth-but-boundary-singular functions.
pub fn edge_graded_panels(length: f64, floor: f64, ratio: f64, bulk: usize) -> Vec<(f64, f64)> {
    let h = length / bulk as f64;
    let mut out = Vec::new();
    let br = geometric_breaks(floor * length, h, ratio);
    for w in br.windows(2) {
        out.push((w[0], w[1]));
    }
    for j in 1..bulk - 1 {
        out.push((j as f64 * h, (j + 1) as f64 * h));
    }
    for w in br.windows(2).rev() {
        out.push((length - w[1], length - w[0]));
    }
    out
}
