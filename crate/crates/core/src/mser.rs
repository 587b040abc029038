//! Maximally stable extremal regions on the 8-bit quantized frame.
//!
//! Bright polarity: extremal regions are the 4-connected components of
//! `{bin >= level}`, so hot objects on a cooler background appear as regions.
//! The component tree is built by flooding levels from 255 down to 0 with a
//! union-find; a tree node exists for every level at which a component gains
//! pixels or merges.
//!
//! The stability score of the region `R(g)` at threshold `g` is
//! `(|R(g - delta)| - |R(g + delta)|) / |R(g)|`, where `R(g - delta)` is the
//! enclosing region at the lower threshold and `R(g + delta)` counts the
//! region's pixels that survive the higher one. A tree node covers every level
//! between its parent's level and its own, and scores the minimum over that
//! span. A node is maximally stable when its score is no larger than its
//! parent's and its children's.
//!
//! Smooth intensity ramps give a stack of nested local minima. Two nested
//! candidates are only reported separately when some threshold between them
//! scores at least `max_variation` worse than the less stable candidate;
//! otherwise the more stable one represents both. Near-duplicate nested
//! regions (area diversity below `min_diversity`) are pruned as well.

use crate::components::neighbors4;
use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::quantize::{Quantized, BINS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MserParams {
    /// Threshold step, in bins, over which stability is measured.
    pub delta: u8,
    pub min_area_frac: f64,
    pub max_area_frac: f64,
    pub max_variation: f64,
    /// Minimum relative area difference between two nested output regions.
    pub min_diversity: f64,
}

impl Default for MserParams {
    fn default() -> Self {
        Self {
            delta: 2,
            min_area_frac: 0.001,
            max_area_frac: 0.5,
            max_variation: 0.25,
            min_diversity: 0.2,
        }
    }
}

impl MserParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta < 1 {
            return Err(Error::invalid("mser delta must be >= 1"));
        }
        if !(self.min_area_frac > 0.0
            && self.min_area_frac < self.max_area_frac
            && self.max_area_frac <= 1.0)
        {
            return Err(Error::invalid(format!(
                "mser area fractions must satisfy 0 < {} < {} <= 1",
                self.min_area_frac, self.max_area_frac
            )));
        }
        if self.max_variation.is_nan() || self.max_variation < 0.0 || !(0.0..1.0).contains(&self.min_diversity) {
            return Err(Error::invalid("mser max_variation must be >= 0 and min_diversity in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MserRegion {
    /// Lowest bin included in the region.
    pub level: u8,
    /// Sorted row-major pixel indices.
    pub pixels: Vec<usize>,
    pub variation: f64,
    pub centroid: (f64, f64),
}

impl MserRegion {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// `true` when every pixel of `self` is in `other`.
    pub fn is_subset_of(&self, other: &MserRegion) -> bool {
        self.pixels.len() <= other.pixels.len()
            && self.pixels.iter().all(|p| other.pixels.binary_search(p).is_ok())
    }
}

struct Node {
    level: u8,
    area: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    /// Pixels that joined at this node's level and are not in any child.
    own: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => {
                self.parent[ra] = rb;
                rb
            }
            std::cmp::Ordering::Greater => {
                self.parent[rb] = ra;
                ra
            }
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
                ra
            }
        }
    }
}

fn build_tree(bins: &[u8], rows: usize, cols: usize) -> Vec<Node> {
    let n = bins.len();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); BINS];
    for (p, &b) in bins.iter().enumerate() {
        by_level[usize::from(b)].push(p);
    }

    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    // tree node currently representing the component rooted at a union-find root
    let mut node_of_root = vec![usize::MAX; n];
    let mut nodes: Vec<Node> = Vec::new();
    let mut touching: Vec<(usize, usize)> = Vec::new();
    let mut groups: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();

    for level in (0..BINS).rev() {
        let fresh = &by_level[level];
        if fresh.is_empty() {
            continue;
        }
        // existing components adjacent to the new pixels, before any merge
        touching.clear();
        for &p in fresh {
            for q in neighbors4(p, rows, cols) {
                if active[q] {
                    let root = uf.find(q);
                    touching.push((p, node_of_root[root]));
                }
            }
        }
        for &p in fresh {
            active[p] = true;
        }
        for &p in fresh {
            for q in neighbors4(p, rows, cols) {
                if active[q] {
                    uf.union(p, q);
                }
            }
        }

        groups.clear();
        let mut group_of_root = std::collections::HashMap::new();
        for &p in fresh {
            let root = uf.find(p);
            let g = *group_of_root.entry(root).or_insert_with(|| {
                groups.push((root, Vec::new(), Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(p);
        }
        for &(p, child) in &touching {
            let g = group_of_root[&uf.find(p)];
            groups[g].2.push(child);
        }

        for (root, own, mut children) in groups.drain(..) {
            children.sort_unstable();
            children.dedup();
            let id = nodes.len();
            let area = own.len() + children.iter().map(|&c| nodes[c].area).sum::<usize>();
            for &c in &children {
                nodes[c].parent = Some(id);
            }
            nodes.push(Node {
                level: level as u8,
                area,
                parent: None,
                children,
                own,
            });
            node_of_root[root] = id;
        }
    }
    nodes
}

/// Number of pixels of `node`'s region with bin `>= threshold`.
fn area_at(nodes: &[Node], node: usize, threshold: i32) -> usize {
    let n = &nodes[node];
    if threshold <= i32::from(n.level) {
        return n.area;
    }
    n.children.iter().map(|&c| area_at(nodes, c, threshold)).sum()
}

/// Area of the region containing `node` at the lower threshold `threshold`.
fn ancestor_area_at(nodes: &[Node], node: usize, threshold: i32) -> usize {
    let mut anc = node;
    while let Some(p) = nodes[anc].parent {
        if i32::from(nodes[p].level) < threshold {
            break;
        }
        anc = p;
    }
    nodes[anc].area
}

/// Stability of the region containing `node` at threshold `g`.
fn level_variation(nodes: &[Node], node: usize, g: i32, delta: i32) -> f64 {
    let outer = ancestor_area_at(nodes, node, g - delta);
    let inner = area_at(nodes, node, g + delta);
    (outer - inner) as f64 / nodes[node].area as f64
}

/// Lowest level of the span covered by a node, `(parent.level, level]`.
fn span_bottom(nodes: &[Node], node: usize) -> i32 {
    nodes[node].parent.map_or(0, |p| i32::from(nodes[p].level) + 1)
}

/// Per-node stability: the minimum of [`level_variation`] over the node's
/// span, together with the level where it is attained (highest on ties).
fn variations(nodes: &[Node], delta: i32) -> Vec<(f64, i32)> {
    (0..nodes.len())
        .map(|i| {
            let mut best = (f64::INFINITY, i32::from(nodes[i].level));
            for g in (span_bottom(nodes, i)..=i32::from(nodes[i].level)).rev() {
                let v = level_variation(nodes, i, g, delta);
                if v < best.0 {
                    best = (v, g);
                }
            }
            best
        })
        .collect()
}

/// Largest stability score met when walking from the best level of `inner`
/// down to the best level of its ancestor `outer`, both ends excluded.
fn barrier(nodes: &[Node], best: &[(f64, i32)], inner: usize, outer: usize, delta: i32) -> f64 {
    let (from, to) = (best[inner].1, best[outer].1);
    let mut worst = f64::NEG_INFINITY;
    let mut node = inner;
    loop {
        let top = i32::from(nodes[node].level).min(from - 1);
        let bottom = span_bottom(nodes, node).max(to + 1);
        for g in bottom..=top {
            worst = worst.max(level_variation(nodes, node, g, delta));
        }
        if node == outer {
            return worst;
        }
        node = nodes[node].parent.expect("outer is an ancestor of inner");
    }
}

fn collect_pixels(nodes: &[Node], id: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(nodes[id].area);
    let mut stack = vec![id];
    while let Some(n) = stack.pop() {
        out.extend_from_slice(&nodes[n].own);
        stack.extend_from_slice(&nodes[n].children);
    }
    out.sort_unstable();
    out
}

/// Extracts maximally stable bright regions. A constant frame yields none.
pub fn mser_regions(frame: &ThermalFrame, params: &MserParams) -> Result<Vec<MserRegion>> {
    params.validate()?;
    let q = Quantized::from_frame(frame);
    Ok(mser_quantized(&q, frame.rows(), frame.cols(), params))
}

pub(crate) fn mser_quantized(q: &Quantized, rows: usize, cols: usize, params: &MserParams) -> Vec<MserRegion> {
    if q.is_constant() {
        return Vec::new();
    }
    let nodes = build_tree(&q.bins, rows, cols);
    let delta = i32::from(params.delta);
    let best = variations(&nodes, delta);
    let var = |i: usize| best[i].0;
    let total = q.bins.len() as f64;
    let min_area = params.min_area_frac * total;
    let max_area = params.max_area_frac * total;

    let mut stable: Vec<usize> = (0..nodes.len())
        .filter(|&i| {
            let node = &nodes[i];
            let area = node.area as f64;
            area >= min_area
                && area <= max_area
                && var(i) <= params.max_variation
                && node.parent.is_none_or(|p| var(i) <= var(p))
                && node.children.iter().all(|&c| var(i) <= var(c))
        })
        .collect();

    // Most stable first; ties prefer the larger region, then node order. A
    // candidate nested with an already kept region is dropped when the two
    // differ by less than `min_diversity` in area, or when no threshold
    // between them is at least `max_variation` less stable than the
    // candidate itself (one object, not two).
    stable.sort_by(|&a, &b| {
        var(a)
            .total_cmp(&var(b))
            .then(nodes[b].area.cmp(&nodes[a].area))
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for cand in stable {
        let redundant = kept.iter().any(|&k| {
            let (inner, outer) = if nodes[k].area <= nodes[cand].area { (k, cand) } else { (cand, k) };
            if !is_ancestor(&nodes, outer, inner) {
                return false;
            }
            let diversity = (nodes[outer].area - nodes[inner].area) as f64 / nodes[outer].area as f64;
            diversity < params.min_diversity
                || barrier(&nodes, &best, inner, outer, delta) < var(cand) + params.max_variation
        });
        if !redundant {
            kept.push(cand);
        }
    }
    kept.sort_unstable();

    kept.into_iter()
        .map(|id| {
            let pixels = collect_pixels(&nodes, id);
            let (sr, sc) = pixels.iter().fold((0.0, 0.0), |(sr, sc), &p| {
                (sr + (p / cols) as f64, sc + (p % cols) as f64)
            });
            let n = pixels.len() as f64;
            MserRegion {
                level: nodes[id].level,
                centroid: (sr / n, sc / n),
                variation: var(id),
                pixels,
            }
        })
        .collect()
}

fn is_ancestor(nodes: &[Node], ancestor: usize, mut node: usize) -> bool {
    loop {
        if node == ancestor {
            return true;
        }
        match nodes[node].parent {
            Some(p) => node = p,
            None => return false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> ThermalFrame {
        ThermalFrame::from_fn("cam", time::from_unix(0), rows, cols, f).unwrap()
    }

    fn assert_laminar(regions: &[MserRegion]) {
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                let disjoint = a.pixels.iter().all(|p| b.pixels.binary_search(p).is_err());
                assert!(disjoint || a.is_subset_of(b) || b.is_subset_of(a));
            }
        }
    }

    #[test]
    fn constant_frame_has_no_regions() {
        let regions = mser_regions(&frame(16, 16, |_, _| 25.0), &MserParams::default()).unwrap();
        assert!(regions.is_empty());
    }

    #[test]
    fn rejects_bad_params() {
        let f = frame(4, 4, |r, _| r as f64);
        for p in [
            MserParams { delta: 0, ..Default::default() },
            MserParams { min_area_frac: 0.0, ..Default::default() },
            MserParams { min_area_frac: 0.6, max_area_frac: 0.5, ..Default::default() },
            MserParams { max_area_frac: 1.5, ..Default::default() },
        ] {
            assert!(mser_regions(&f, &p).is_err(), "{p:?}");
        }
    }

    #[test]
    fn tree_areas_are_consistent() {
        let f = frame(12, 12, |r, c| ((r * 7 + c * 13) % 17) as f64);
        let q = Quantized::from_frame(&f);
        let nodes = build_tree(&q.bins, 12, 12);
        let roots: Vec<_> = nodes.iter().filter(|n| n.parent.is_none()).collect();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].area, 144);
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(collect_pixels(&nodes, i).len(), n.area);
            if let Some(p) = n.parent {
                assert!(nodes[p].level < n.level);
            }
        }
    }

    #[test]
    fn nested_plateaus_give_nested_regions() {
        // 80 °C core inside a 50 °C ring on a 20 °C background
        let f = frame(40, 40, |r, c| {
            if (16..24).contains(&r) && (16..24).contains(&c) {
                80.0
            } else if (10..30).contains(&r) && (10..30).contains(&c) {
                50.0
            } else {
                20.0
            }
        });
        let regions = mser_regions(&f, &MserParams::default()).unwrap();
        assert_laminar(&regions);
        let mut areas: Vec<usize> = regions.iter().map(MserRegion::area).collect();
        areas.sort_unstable();
        assert_eq!(areas, vec![64, 400]);
        let (inner, outer) = if regions[0].area() < regions[1].area() {
            (&regions[0], &regions[1])
        } else {
            (&regions[1], &regions[0])
        };
        assert!(inner.is_subset_of(outer));
        assert_eq!(inner.centroid, (19.5, 19.5));
    }

    #[test]
    fn gaussian_spot_yields_one_centered_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (cr, cc) = (rng.random_range(24.0..40.0), rng.random_range(24.0..40.0));
            let f = frame(64, 64, |r, c| {
                let d2 = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
                20.0 + 60.0 * (-d2 / (2.0 * 12.0f64.powi(2))).exp()
            });
            let regions = mser_regions(&f, &MserParams::default()).unwrap();
            assert_eq!(regions.len(), 1, "spot at ({cr}, {cc})");
            let (r, c) = regions[0].centroid;
            assert!(((r - cr).powi(2) + (c - cc).powi(2)).sqrt() <= 1.0);
        }
    }
}
