//! Box representations, pseudo-depth and the overlap kernels.
//!
//! Pseudo-depth treats the image as if a second, equally tall view were
//! stacked below it: a box's pseudo-depth is the distance from its bottom
//! edge to the bottom of that virtual view. Objects higher in the frame
//! (further away on a common ground plane) get larger values, and the
//! value stays positive even for boxes touching the lower image border.

use crate::error::{Error, Result};

/// Axis-aligned box in corner form, pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = BBox { x1, y1, x2, y2 };
        if ![x1, y1, x2, y2].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite box {b:?}")));
        }
        if x2 < x1 || y2 < y1 {
            return Err(Error::InvalidGeometry(format!("inverted box {b:?}")));
        }
        Ok(b)
    }

    /// Builds a box from the top-left corner plus width and height.
    pub fn from_tlwh(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(x, y, x + w, y + h)
    }

    /// Builds a box from its center, area `s` and aspect ratio `r = w / h`.
    /// Returns `None` when `s` or `r` is not strictly positive.
    pub fn from_center_area_ratio(xc: f64, yc: f64, s: f64, r: f64) -> Option<Self> {
        if !(s > 0.0 && r > 0.0) || !xc.is_finite() || !yc.is_finite() {
            return None;
        }
        let w = (s * r).sqrt();
        let h = s / w;
        if !w.is_finite() || !h.is_finite() {
            return None;
        }
        Some(BBox {
            x1: xc - w / 2.0,
            y1: yc - h / 2.0,
            x2: xc + w / 2.0,
            y2: yc + h / 2.0,
        })
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// `(x, y, w, h)` with `(x, y)` the top-left corner.
    pub fn tlwh(&self) -> (f64, f64, f64, f64) {
        (self.x1, self.y1, self.width(), self.height())
    }

    /// Width and height of the overlap region, each clamped at zero.
    fn intersection_extent(&self, other: &BBox) -> (f64, f64) {
        let w = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(0.0);
        let h = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(0.0);
        (w, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewGeometry {
    img_height: f64,
    img_width: f64,
}

impl ViewGeometry {
    pub fn new(img_height: f64, img_width: f64) -> Result<Self> {
        if !(img_height > 0.0 && img_width > 0.0) || !img_height.is_finite() || !img_width.is_finite()
        {
            return Err(Error::InvalidGeometry(format!(
                "image size must be positive, got {img_width}x{img_height}"
            )));
        }
        Ok(ViewGeometry {
            img_height,
            img_width,
        })
    }

    pub fn img_height(&self) -> f64 {
        self.img_height
    }

    pub fn img_width(&self) -> f64 {
        self.img_width
    }
}

/// Distance from the box bottom to the bottom of the complementary view.
pub fn pseudo_depth(bbox: &BBox, view: &ViewGeometry) -> Result<f64> {
    let pd = 2.0 * view.img_height - bbox.y2;
    if !(pd > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "box bottom {} at or below complementary view bottom {}",
            bbox.y2,
            2.0 * view.img_height
        )));
    }
    Ok(pd)
}

/// A box paired with a strictly positive pseudo-depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthBox {
    bbox: BBox,
    pd: f64,
}

impl DepthBox {
    /// Measures the pseudo-depth of `bbox` in `view`.
    pub fn from_view(bbox: BBox, view: &ViewGeometry) -> Result<Self> {
        let pd = pseudo_depth(&bbox, view)?;
        Ok(DepthBox { bbox, pd })
    }

    /// Pairs a box with an externally estimated pseudo-depth, e.g. a
    /// filtered state, which need not match the box bottom exactly.
    pub fn with_pseudo_depth(bbox: BBox, pd: f64) -> Result<Self> {
        if !(pd > 0.0) || !pd.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "pseudo-depth must be positive, got {pd}"
            )));
        }
        Ok(DepthBox { bbox, pd })
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn pd(&self) -> f64 {
        self.pd
    }

    pub fn volume(&self) -> f64 {
        self.bbox.area() * self.pd
    }
}

/// Standard 2D intersection over union. Degenerate boxes give 0.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let (w, h) = a.intersection_extent(b);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if inter <= 0.0 || !(union > 0.0) {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Depth-volume IoU: box areas are lifted to volumes by their
/// pseudo-depths, and the overlap takes the smaller of the two depths.
pub fn dviou(a: &DepthBox, b: &DepthBox) -> f64 {
    let (w, h) = a.bbox.intersection_extent(&b.bbox);
    let inter = w * h * a.pd.min(b.pd);
    let union = a.volume() + b.volume() - inter;
    if inter <= 0.0 || !(union > 0.0) {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
