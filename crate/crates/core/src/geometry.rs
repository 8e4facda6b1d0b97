use alloc::vec;
use alloc::vec::Vec;

/// Axis-aligned box stored by its center.
///
/// Coordinates are continuous: pixel `i` covers `[i, i + 1)`, so a box that
/// exactly covers a `W x H` image has center `(W/2, H/2)` and size `W x H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        BoundingBox { cx, cy, w, h }
    }

    /// Builds a box from its top-left corner (0-based continuous coordinates).
    pub fn from_corner(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoundingBox { cx: x + w / 2.0, cy: y + h / 2.0, w, h }
    }

    /// Top-left corner and size, `(x, y, w, h)`.
    pub fn to_corner(&self) -> (f64, f64, f64, f64) {
        (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h)
    }

    pub fn is_valid(&self) -> bool {
        self.w > 0.0 && self.h > 0.0 && self.cx.is_finite() && self.cy.is_finite()
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn center_distance(&self, other: &BoundingBox) -> f64 {
        use num_traits::Float;
        let dx = self.cx - other.cx;
        let dy = self.cy - other.cy;
        Float::sqrt(dx * dx + dy * dy)
    }

    /// Intersection over union; 0 when either box is empty.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let iw = self.right().min(other.right()) - self.left().max(other.left());
        let ih = self.bottom().min(other.bottom()) - self.top().max(other.top());
        if iw <= 0.0 || ih <= 0.0 {
            return 0.0;
        }
        let inter = iw * ih;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            (inter / union).clamp(0.0, 1.0)
        }
    }
}

/// Dense row-major grid of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub cols: usize,
    pub rows: usize,
    pub data: Vec<f64>,
}

impl RealGrid {
    pub fn zeros(cols: usize, rows: usize) -> Self {
        RealGrid { cols, rows, data: vec![0.0; cols * rows] }
    }

    pub fn from_fn(cols: usize, rows: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(cols * rows);
        for y in 0..rows {
            for x in 0..cols {
                data.push(f(x, y));
            }
        }
        RealGrid { cols, rows, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.cols + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.cols + x] = v;
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index `(x, y)` of the first maximum in row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best % self.cols, best / self.cols)
    }

    pub fn same_shape(&self, other: &RealGrid) -> bool {
        self.cols == other.cols && self.rows == other.rows
    }
}
