//! Constant-velocity Kalman filter over `[x_c, y_c, pd, s, r, v_x, v_y, v_pd, v_s]`
//! and camera-motion correction of its state.

use nalgebra::{Matrix2, SMatrix, SVector, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{BBox, DepthBox};

pub const STATE_DIM: usize = 9;
pub const MEAS_DIM: usize = 5;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateCovariance = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type Measurement = SVector<f64, MEAS_DIM>;

/// Diagonals of the initial, process and measurement covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanNoise {
    pub p0: [f64; STATE_DIM],
    pub q: [f64; STATE_DIM],
    pub r: [f64; MEAS_DIM],
}

impl Default for KalmanNoise {
    fn default() -> Self {
        KalmanNoise {
            p0: [10.0, 10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4, 1e4],
            q: [1.0, 1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 0.01, 1e-4],
            r: [1.0, 1.0, 1.0, 10.0, 10.0],
        }
    }
}

/// A single measured box in filter coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// `[x_c, y_c, pd, s, r]`
    pub z: Measurement,
    pub frame: u32,
    pub score: f64,
}

impl Observation {
    pub fn from_depth_box(db: &DepthBox, frame: u32, score: f64) -> Result<Self> {
        let b = db.bbox();
        let (w, h) = (b.width(), b.height());
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "observation needs positive extent, got {w}x{h}"
            )));
        }
        let (xc, yc) = b.center();
        Ok(Observation {
            z: Measurement::new(xc, yc, db.pd(), w * h, w / h),
            frame,
            score,
        })
    }

    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(self.z[0], self.z[1])
    }

    pub fn bbox(&self) -> Option<BBox> {
        BBox::from_center_area_ratio(self.z[0], self.z[1], self.z[3], self.z[4])
    }

    pub fn depth_box(&self) -> Option<DepthBox> {
        DepthBox::with_pseudo_depth(self.bbox()?, self.z[2]).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: StateVector,
    pub p: StateCovariance,
}

impl KalmanState {
    /// The box implied by the position part of the state, if it is valid.
    pub fn depth_box(&self) -> Option<DepthBox> {
        let b = BBox::from_center_area_ratio(self.x[0], self.x[1], self.x[3], self.x[4])?;
        DepthBox::with_pseudo_depth(b, self.x[2]).ok()
    }
}

fn transition() -> StateCovariance {
    let mut f = StateCovariance::identity();
    // x_c, y_c, pd, s advance by their velocities; r is constant
    f[(0, 5)] = 1.0;
    f[(1, 6)] = 1.0;
    f[(2, 7)] = 1.0;
    f[(3, 8)] = 1.0;
    f
}

fn observation_model() -> SMatrix<f64, MEAS_DIM, STATE_DIM> {
    SMatrix::<f64, MEAS_DIM, STATE_DIM>::identity()
}

fn symmetrize(p: &StateCovariance) -> StateCovariance {
    (p + p.transpose()) * 0.5
}

pub fn kf_init(obs: &Observation, noise: &KalmanNoise) -> KalmanState {
    let mut x = StateVector::zeros();
    x.fixed_rows_mut::<MEAS_DIM>(0).copy_from(&obs.z);
    KalmanState {
        x,
        p: StateCovariance::from_diagonal(&StateVector::from(noise.p0)),
    }
}

pub fn kf_predict(state: &KalmanState, noise: &KalmanNoise) -> KalmanState {
    let mut x = state.x;
    if x[3] + x[8] <= 0.0 {
        x[8] = 0.0;
    }
    let f = transition();
    let q = StateCovariance::from_diagonal(&StateVector::from(noise.q));
    KalmanState {
        x: f * x,
        p: symmetrize(&(f * state.p * f.transpose() + q)),
    }
}

/// Measurement update in Joseph form.
pub fn kf_update(state: &KalmanState, obs: &Observation, noise: &KalmanNoise) -> Result<KalmanState> {
    let h = observation_model();
    let r = SMatrix::<f64, MEAS_DIM, MEAS_DIM>::from_diagonal(&Measurement::from(noise.r));
    let innovation = obs.z - h * state.x;
    let s = h * state.p * h.transpose() + r;
    let s_inv = s
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::FilterDivergence("innovation covariance not positive definite".into()))?;
    let k = state.p * h.transpose() * s_inv;
    let x = state.x + k * innovation;
    let i_kh = StateCovariance::identity() - k * h;
    let p = i_kh * state.p * i_kh.transpose() + k * r * k.transpose();
    if !x.iter().all(|v| v.is_finite()) || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::FilterDivergence("non-finite posterior".into()));
    }
    Ok(KalmanState {
        x,
        p: symmetrize(&p),
    })
}

/// Per-frame camera motion as `p' = M p + T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub m: Matrix2<f64>,
    pub t: Vector2<f64>,
}

impl AffineTransform {
    pub fn identity() -> Self {
        AffineTransform {
            m: Matrix2::identity(),
            t: Vector2::zeros(),
        }
    }

    pub fn new(m: Matrix2<f64>, t: Vector2<f64>) -> Result<Self> {
        if !m.iter().chain(t.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite affine transform".into()));
        }
        let det = m.determinant();
        if det == 0.0 {
            return Err(Error::InvalidGeometry("singular affine transform".into()));
        }
        if det.abs() < 1e-6 {
            log::warn!("near-singular camera warp, det(M) = {det:e}");
        }
        Ok(AffineTransform { m, t })
    }

    /// Parses the row-major 2x3 matrix `[a11 a12 a13; a21 a22 a23]`.
    pub fn from_rows(a: [f64; 6]) -> Result<Self> {
        Self::new(
            Matrix2::new(a[0], a[1], a[3], a[4]),
            Vector2::new(a[2], a[5]),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.m == Matrix2::identity() && self.t == Vector2::zeros()
    }

    pub fn apply(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.m * p + self.t
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AffineTransform) -> AffineTransform {
        AffineTransform {
            m: next.m * self.m,
            t: next.m * self.t + next.t,
        }
    }
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::identity()
    }
}

/// Moves the center and center velocity through the warp and rotates the
/// matching covariance blocks. Pseudo-depth, area and ratio are untouched.
///
/// With `translate_velocity` the translation is added to the velocity too,
/// as the correction is usually written; without it the velocity is only
/// rotated and scaled.
pub fn apply_cmc_state(
    state: &KalmanState,
    warp: &AffineTransform,
    translate_velocity: bool,
) -> KalmanState {
    if warp.is_identity() {
        return state.clone();
    }
    let mut out = state.clone();
    let pos = warp.apply(&Vector2::new(state.x[0], state.x[1]));
    let mut vel = warp.m * Vector2::new(state.x[5], state.x[6]);
    if translate_velocity {
        vel += warp.t;
    }
    out.x[0] = pos[0];
    out.x[1] = pos[1];
    out.x[5] = vel[0];
    out.x[6] = vel[1];

    for start in [0, 5] {
        let block: Matrix2<f64> = state.p.fixed_view::<2, 2>(start, start).into_owned();
        out.p
            .fixed_view_mut::<2, 2>(start, start)
            .copy_from(&(warp.m * block * warp.m.transpose()));
    }
    out
}
