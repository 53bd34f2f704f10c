//! Velocity-direction consistency between a tracklet's recent observed
//! motion and the direction towards each candidate detection.

use std::f64::consts::PI;

use nalgebra::Vector2;

use super::CostMatrix;
use crate::motion::Observation;

/// The observation `dt` frames before the last one, or the closest older
/// one; the oldest observation when the history does not reach that far.
fn reference_observation(history: &[Observation], dt: u32) -> Option<&Observation> {
    let last = history.last()?;
    let target = last.frame.saturating_sub(dt);
    history[..history.len() - 1]
        .iter()
        .rev()
        .find(|o| o.frame <= target)
        .or_else(|| history.first().filter(|_| history.len() >= 2))
}

fn direction(from: Vector2<f64>, to: Vector2<f64>) -> Option<Vector2<f64>> {
    let d = to - from;
    let norm = d.norm();
    (norm > 1e-12).then(|| d / norm)
}

/// Angle between the two directions, normalized to `[0, 1]`.
fn angle_cost(u: &Vector2<f64>, v: &Vector2<f64>) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos() / PI
}

pub fn ocm_cost(histories: &[&[Observation]], dets: &[Observation], dt: u32) -> CostMatrix {
    let mut c = CostMatrix::filled(histories.len(), dets.len(), 0.0);
    for (i, history) in histories.iter().enumerate() {
        let (Some(last), Some(reference)) = (history.last(), reference_observation(history, dt))
        else {
            continue;
        };
        let Some(motion) = direction(reference.center(), last.center()) else {
            continue;
        };
        for (j, det) in dets.iter().enumerate() {
            if let Some(towards) = direction(last.center(), det.center()) {
                c.set(i, j, angle_cost(&motion, &towards));
            }
        }
    }
    c
}
