//! Bounding boxes in (center-u, center-v, aspect ratio, height) form and
//! their overlap.

/// A bounding box observation: (u, v) is the box center in pixels,
/// `gamma` the width/height ratio, `h` the height in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bbox {
    pub u: f64,
    pub v: f64,
    pub gamma: f64,
    pub h: f64,
}

impl Bbox {
    pub fn new(u: f64, v: f64, gamma: f64, h: f64) -> Self {
        Bbox { u, v, gamma, h }
    }

    pub fn width(&self) -> f64 {
        self.gamma * self.h
    }

    /// (left, top, right, bottom) corners.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        let w = self.width();
        (
            self.u - 0.5 * w,
            self.v - 0.5 * self.h,
            self.u + 0.5 * w,
            self.v + 0.5 * self.h,
        )
    }

    pub fn area(&self) -> f64 {
        (self.width()).max(0.0) * self.h.max(0.0)
    }

    /// Intersection over union; 0 for disjoint or degenerate boxes.
    pub fn iou(&self, other: &Bbox) -> f64 {
        let (l1, t1, r1, b1) = self.corners();
        let (l2, t2, r2, b2) = other.corners();
        let iw = (r1.min(r2) - l1.max(l2)).max(0.0);
        let ih = (b1.min(b2) - t1.max(t2)).max(0.0);
        let inter = iw * ih;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_boxes_have_iou_one() {
        let b = Bbox::new(10.0, 20.0, 0.5, 40.0);
        assert!((b.iou(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_boxes_have_iou_zero() {
        let a = Bbox::new(0.0, 0.0, 1.0, 10.0);
        let b = Bbox::new(100.0, 100.0, 1.0, 10.0);
        assert_eq!(a.iou(&b), 0.0);
    }

    #[test]
    fn half_overlap() {
        // Two 10x10 boxes offset by 5 in u: intersection 50, union 150.
        let a = Bbox::new(0.0, 0.0, 1.0, 10.0);
        let b = Bbox::new(5.0, 0.0, 1.0, 10.0);
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-12);
    }
}
