//! Aperture geometry: a rectangular grid of cells centered on the origin,
//! fed by a horn on the boresight (z) axis behind the surface.

use crate::error::{Error, Result};

/// Rectangular element grid with a point-source feed at `z = -feed_distance`.
///
/// Element `(row, col)` sits at
/// `x = (col - (cols-1)/2) * period`, `y = (row - (rows-1)/2) * period`,
/// and elements are indexed row-major (`i = row * cols + col`).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    rows: usize,
    cols: usize,
    period: f64,
    feed_distance: f64,
    feed_offset: (f64, f64),
}

impl Default for ArrayLayout {
    /// The 16×16 prototype: 18 mm period, feed phase center 260 mm from the aperture.
    fn default() -> Self {
        ArrayLayout {
            rows: 16,
            cols: 16,
            period: 0.018,
            feed_distance: 0.260,
            feed_offset: (0.0, 0.0),
        }
    }
}

impl ArrayLayout {
    pub fn new(rows: usize, cols: usize, period: f64, feed_distance: f64) -> Result<Self> {
        Self::with_feed_offset(rows, cols, period, feed_distance, (0.0, 0.0))
    }

    pub fn with_feed_offset(
        rows: usize,
        cols: usize,
        period: f64,
        feed_distance: f64,
        feed_offset: (f64, f64),
    ) -> Result<Self> {
        if rows == 0 {
            return Err(Error::invalid("rows", "must be at least 1"));
        }
        if cols == 0 {
            return Err(Error::invalid("cols", "must be at least 1"));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid("period", format!("must be positive, got {period}")));
        }
        if !(feed_distance.is_finite() && feed_distance > 0.0) {
            return Err(Error::invalid(
                "feed_distance",
                format!("must be positive, got {feed_distance}"),
            ));
        }
        if !(feed_offset.0.is_finite() && feed_offset.1.is_finite()) {
            return Err(Error::invalid("feed_offset", "must be finite"));
        }
        Ok(ArrayLayout {
            rows,
            cols,
            period,
            feed_distance,
            feed_offset,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn feed_distance(&self) -> f64 {
        self.feed_distance
    }

    pub fn feed_offset(&self) -> (f64, f64) {
        self.feed_offset
    }

    /// Physical aperture area `rows * cols * period²` (m²).
    pub fn aperture_area(&self) -> f64 {
        self.len() as f64 * self.period * self.period
    }

    /// Aperture diagonal (m).
    pub fn aperture_diagonal(&self) -> f64 {
        let w = self.cols as f64 * self.period;
        let h = self.rows as f64 * self.period;
        w.hypot(h)
    }

    pub fn x_of_col(&self, col: usize) -> f64 {
        (col as f64 - (self.cols as f64 - 1.0) / 2.0) * self.period
    }

    pub fn y_of_row(&self, row: usize) -> f64 {
        (row as f64 - (self.rows as f64 - 1.0) / 2.0) * self.period
    }

    /// `(x, y)` of element `i` (row-major). Panics if `i` is out of range.
    pub fn position(&self, i: usize) -> (f64, f64) {
        assert!(i < self.len(), "element index {i} out of range");
        (self.x_of_col(i % self.cols), self.y_of_row(i / self.cols))
    }

    /// All element positions in row-major order.
    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    /// Distance from the feed phase center to element `i`.
    pub fn feed_distance_to_element(&self, i: usize) -> Result<f64> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        let (x, y) = self.position(i);
        Ok(self.feed_distance_at(x, y))
    }

    pub(crate) fn feed_distance_at(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.feed_offset.0;
        let dy = y - self.feed_offset.1;
        let f = self.feed_distance;
        (dx * dx + dy * dy + f * f).sqrt()
    }

    /// Feed distances for every element, row-major.
    pub fn feed_distances(&self) -> Vec<f64> {
        self.element_positions()
            .into_iter()
            .map(|(x, y)| self.feed_distance_at(x, y))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_element_is_centered() {
        let l = ArrayLayout::new(1, 1, 0.018, 0.26).unwrap();
        assert_eq!(l.element_positions(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn two_by_two_positions() {
        let l = ArrayLayout::new(2, 2, 0.018, 0.26).unwrap();
        let p = l.element_positions();
        let want = [(-0.009, -0.009), (0.009, -0.009), (-0.009, 0.009), (0.009, 0.009)];
        for (got, want) in p.iter().zip(want) {
            assert!(close(got.0, want.0, 1e-15) && close(got.1, want.1, 1e-15));
        }
    }

    #[test]
    fn default_corner_and_centroid() {
        let l = ArrayLayout::default();
        let p = l.element_positions();
        assert_eq!(p.len(), 256);
        assert!(close(p[0].0, -0.135, 1e-15) && close(p[0].1, -0.135, 1e-15));
        assert!(close(p[255].0, 0.135, 1e-15) && close(p[255].1, 0.135, 1e-15));
        let (sx, sy) = p.iter().fold((0.0, 0.0), |a, q| (a.0 + q.0, a.1 + q.1));
        assert!(close(sx / 256.0, 0.0, 1e-12) && close(sy / 256.0, 0.0, 1e-12));
    }

    #[test]
    fn feed_distances() {
        let l = ArrayLayout::new(1, 1, 0.018, 0.26).unwrap();
        assert_eq!(l.feed_distance_to_element(0).unwrap(), 0.26);

        let l = ArrayLayout::default();
        let d = l.feed_distance_to_element(255).unwrap();
        // sqrt(0.135² + 0.135² + 0.26²)
        assert!(close(d, 0.322567, 1e-6), "{d}");

        let l = ArrayLayout::with_feed_offset(16, 16, 0.018, 0.26, (0.135, 0.135)).unwrap();
        assert!(close(l.feed_distance_to_element(255).unwrap(), 0.26, 1e-15));
    }

    #[test]
    fn index_out_of_range() {
        let l = ArrayLayout::default();
        assert!(matches!(
            l.feed_distance_to_element(256),
            Err(Error::IndexOutOfRange { index: 256, len: 256 })
        ));
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(ArrayLayout::new(0, 4, 0.01, 0.2).is_err());
        assert!(ArrayLayout::new(4, 0, 0.01, 0.2).is_err());
        assert!(ArrayLayout::new(4, 4, 0.0, 0.2).is_err());
        assert!(ArrayLayout::new(4, 4, 0.01, -1.0).is_err());
    }

    #[test]
    fn centered_feed_distance_has_dihedral_symmetry() {
        let l = ArrayLayout::default();
        let n = 16;
        let d = l.feed_distances();
        for r in 0..n {
            for c in 0..n {
                let v = d[r * n + c];
                assert_eq!(v, d[c * n + r]);
                assert_eq!(v, d[(n - 1 - r) * n + c]);
                assert_eq!(v, d[r * n + (n - 1 - c)]);
                assert!(v >= l.feed_distance());
            }
        }
    }
}
