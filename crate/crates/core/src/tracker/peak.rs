use crate::corrfilter::ResponseMap;
use crate::RealGrid;
use alloc::vec::Vec;

/// Sub-cell peak of a response, in image coordinates.
pub fn locate_peak(response: &ResponseMap) -> (f64, f64) {
    let (x, y) = peak_cell(&response.grid);
    response.position(x, y)
}

/// Sub-cell peak in grid coordinates. Equal maxima resolve to the one nearest
/// the grid center; if several are equally near, their mean is returned.
pub fn peak_cell(grid: &RealGrid) -> (f64, f64) {
    assert!(!grid.is_empty(), "peak of an empty response");
    let top = grid.max();
    let (cx, cy) = (grid.cols / 2, grid.rows / 2);
    let dist = |x: usize, y: usize| {
        let dx = x as f64 - cx as f64;
        let dy = y as f64 - cy as f64;
        dx * dx + dy * dy
    };
    let mut ties: Vec<(usize, usize)> = Vec::new();
    for y in 0..grid.rows {
        for x in 0..grid.cols {
            if grid.get(x, y) == top {
                ties.push((x, y));
            }
        }
    }
    let nearest = ties.iter().map(|&(x, y)| dist(x, y)).fold(f64::INFINITY, f64::min);
    ties.retain(|&(x, y)| dist(x, y) == nearest);
    if ties.len() > 1 {
        let n = ties.len() as f64;
        let sx: f64 = ties.iter().map(|t| t.0 as f64).sum();
        let sy: f64 = ties.iter().map(|t| t.1 as f64).sum();
        return (sx / n, sy / n);
    }
    let (px, py) = ties[0];
    let (ox, oy) = quadratic_offset(grid, px, py);
    (px as f64 + ox, py as f64 + oy)
}

/// Vertex of the least-squares quadratic through the 3x3 neighborhood
/// (cyclic), or zero when the fit has no interior maximum.
fn quadratic_offset(grid: &RealGrid, px: usize, py: usize) -> (f64, f64) {
    if grid.cols < 3 || grid.rows < 3 {
        return (0.0, 0.0);
    }
    let (mut b, mut c, mut d, mut e, mut g) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in -1isize..=1 {
        for i in -1isize..=1 {
            let x = (px as isize + i).rem_euclid(grid.cols as isize) as usize;
            let y = (py as isize + j).rem_euclid(grid.rows as isize) as usize;
            let f = grid.get(x, y);
            let (fi, fj) = (i as f64, j as f64);
            b += fi * f;
            c += fj * f;
            e += fi * fj * f;
            d += (fi * fi - 2.0 / 3.0) * f;
            g += (fj * fj - 2.0 / 3.0) * f;
        }
    }
    let (b, c, e, d, g) = (b / 6.0, c / 6.0, e / 4.0, d / 2.0, g / 2.0);
    let det = 4.0 * d * g - e * e;
    if !(d < 0.0) || !(det > 0.0) {
        return (0.0, 0.0);
    }
    let ox = (-b * 2.0 * g + e * c) / det;
    let oy = (-2.0 * d * c + e * b) / det;
    if !ox.is_finite() || !oy.is_finite() {
        return (0.0, 0.0);
    }
    (ox.clamp(-1.0, 1.0), oy.clamp(-1.0, 1.0))
}
