//! Per-frame cost construction and assignment.
//!
//! The regular stage scores every (tracklet, detection) pair as
//! `-overlap + lambda1 * qpdm + lambda2 * ocm`, with pairs whose overlap
//! falls below the gate marked [`FORBIDDEN`].

mod lap;
mod ocm;
mod qpdm;

pub use lap::{solve_assignment, Assignment};
pub use ocm::ocm_cost;
pub use qpdm::{interval_depths, qpdm_cost, QpdmParams};

use crate::error::{Error, Result};
use crate::geometry::{dviou, iou, DepthBox};

/// Cost of a pair that may never be matched.
pub const FORBIDDEN: f64 = f64::INFINITY;

/// Row-major tracklet x detection costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        CostMatrix {
            rows,
            cols,
            values: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        CostMatrix { rows, cols, values }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost rows");
        CostMatrix {
            rows: rows.len(),
            cols,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn is_forbidden(&self, r: usize, c: usize) -> bool {
        self.get(r, c) == FORBIDDEN
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        CostMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

/// Which overlap measure drives the location cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Overlap {
    #[default]
    DepthVolume,
    /// Plain 2D IoU, ignoring pseudo-depth.
    Planar,
}

impl Overlap {
    pub fn measure(self, a: &DepthBox, b: &DepthBox) -> f64 {
        match self {
            Overlap::DepthVolume => dviou(a, b),
            Overlap::Planar => iou(a.bbox(), b.bbox()),
        }
    }
}

/// Negated overlap between track boxes and detections. Tracks without a
/// valid box get zero overlap.
pub fn overlap_cost(tracks: &[Option<DepthBox>], dets: &[DepthBox], kind: Overlap) -> CostMatrix {
    CostMatrix::from_fn(tracks.len(), dets.len(), |i, j| match &tracks[i] {
        Some(t) => -kind.measure(t, &dets[j]),
        None => 0.0,
    })
}

/// Marks pairs whose overlap (the negated entry) is below `threshold`.
pub fn gate_overlap(c: &mut CostMatrix, threshold: f64) {
    for v in &mut c.values {
        if -*v < threshold {
            *v = FORBIDDEN;
        }
    }
}

/// `c_overlap + lambda1 * c_qpd + lambda2 * c_ocm`, with pairs whose overlap
/// is below `threshold` forbidden. `c_overlap` holds negated overlaps.
pub fn compose_cost(
    c_overlap: &CostMatrix,
    c_qpd: &CostMatrix,
    c_ocm: &CostMatrix,
    lambda1: f64,
    lambda2: f64,
    threshold: f64,
) -> Result<CostMatrix> {
    for other in [c_qpd, c_ocm] {
        if other.shape() != c_overlap.shape() {
            return Err(Error::ShapeMismatch {
                expected: c_overlap.shape(),
                got: other.shape(),
            });
        }
    }
    let mut out = c_overlap.clone();
    gate_overlap(&mut out, threshold);
    for (k, v) in out.values.iter_mut().enumerate() {
        if *v != FORBIDDEN {
            *v += lambda1 * c_qpd.values[k] + lambda2 * c_ocm.values[k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;
    use proptest::prelude::*;

    fn one(v: f64) -> CostMatrix {
        CostMatrix::from_rows(vec![vec![v]])
    }

    #[test]
    fn compose_example() {
        let c = compose_cost(&one(-0.5), &one(0.875), &one(0.5), 0.2, 0.2, 0.3).unwrap();
        assert!((c.get(0, 0) + 0.225).abs() < 1e-12);
    }

    #[test]
    fn compose_with_zero_weights_is_overlap() {
        let ov = CostMatrix::from_rows(vec![vec![-0.9, -0.4], vec![-0.1, 0.0]]);
        let q = CostMatrix::filled(2, 2, 0.7);
        let c = compose_cost(&ov, &q, &q, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(c, ov);
        let z = CostMatrix::filled(2, 2, 0.0);
        assert_eq!(compose_cost(&z, &z, &z, 0.2, 0.2, 0.0).unwrap(), z);
    }

    #[test]
    fn compose_gates_low_overlap() {
        let ov = CostMatrix::from_rows(vec![vec![-0.9, -0.2]]);
        let z = CostMatrix::filled(1, 2, 0.0);
        let c = compose_cost(&ov, &z, &z, 0.2, 0.2, 0.3).unwrap();
        assert_eq!(c.get(0, 0), -0.9);
        assert!(c.is_forbidden(0, 1));
    }

    #[test]
    fn compose_shape_mismatch() {
        let e = compose_cost(&one(0.0), &CostMatrix::filled(1, 2, 0.0), &one(0.0), 0.2, 0.2, 0.0);
        assert!(matches!(e, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn overlap_cost_kinds() {
        let b = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let near = DepthBox::with_pseudo_depth(b, 100.0).unwrap();
        let far = DepthBox::with_pseudo_depth(b, 200.0).unwrap();
        let dv = overlap_cost(&[Some(near), None], &[far], Overlap::DepthVolume);
        assert_eq!(dv.get(0, 0), -0.5);
        assert_eq!(dv.get(1, 0), 0.0);
        let pl = overlap_cost(&[Some(near)], &[far], Overlap::Planar);
        assert_eq!(pl.get(0, 0), -1.0);
    }

    proptest! {
        #[test]
        fn compose_is_monotone(
            ov in -1.0f64..0.0, q in 0.0f64..1.0, o in 0.0f64..1.0,
            bump in 0.0f64..1.0, l1 in 0.0f64..1.0, l2 in 0.0f64..1.0, which in 0usize..3,
        ) {
            let base = compose_cost(&one(ov), &one(q), &one(o), l1, l2, 0.0).unwrap().get(0, 0);
            let (mut a, mut b, mut c) = (ov, q, o);
            match which { 0 => a = (a + bump).min(0.0), 1 => b += bump, _ => c += bump }
            let bumped = compose_cost(&one(a), &one(b), &one(c), l1, l2, 0.0).unwrap().get(0, 0);
            prop_assert!(bumped >= base);
        }
    }
}
