//! 4-connected component labeling of binary masks.

/// A connected set of pixels, as sorted row-major indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub pixels: Vec<usize>,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Labels the 4-connected components of the `true` pixels. Components are
/// returned in order of their first (row-major) pixel.
pub fn label_components(mask: &[bool], rows: usize, cols: usize) -> Vec<Component> {
    debug_assert_eq!(mask.len(), rows * cols);
    let mut visited = vec![false; mask.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(p) = stack.pop() {
            pixels.push(p);
            for q in neighbors4(p, rows, cols) {
                if mask[q] && !visited[q] {
                    visited[q] = true;
                    stack.push(q);
                }
            }
        }
        pixels.sort_unstable();
        out.push(Component { pixels });
    }
    out
}

/// Row-major indices of the in-bounds 4-neighbours of `p`.
pub(crate) fn neighbors4(p: usize, rows: usize, cols: usize) -> impl Iterator<Item = usize> {
    let (r, c) = (p / cols, p % cols);
    let up = (r > 0).then(|| p - cols);
    let down = (r + 1 < rows).then(|| p + cols);
    let left = (c > 0).then(|| p - 1);
    let right = (c + 1 < cols).then(|| p + 1);
    [up, down, left, right].into_iter().flatten()
}
