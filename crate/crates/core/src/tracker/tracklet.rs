use crate::error::Result;
use crate::motion::{
    apply_cmc_state, kf_init, kf_predict, kf_update, AffineTransform, KalmanNoise, KalmanState,
    Observation,
};

/// Observations kept per tracklet. Only the last few are ever consulted.
pub const MAX_HISTORY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Removed,
}

#[derive(Debug, Clone)]
pub struct Tracklet {
    id: u64,
    kf: KalmanState,
    /// Posterior right after the last real observation, replayed by ORU.
    kf_at_last_obs: KalmanState,
    history: Vec<Observation>,
    pub(crate) untracked: u32,
    pub(crate) hits: u32,
    pub(crate) age: u32,
    status: TrackStatus,
}

impl Tracklet {
    pub fn new(id: u64, obs: Observation, noise: &KalmanNoise) -> Self {
        let kf = kf_init(&obs, noise);
        Tracklet {
            id,
            kf_at_last_obs: kf.clone(),
            kf,
            history: vec![obs],
            untracked: 0,
            hits: 1,
            age: 0,
            status: TrackStatus::Tentative,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn kf(&self) -> &KalmanState {
        &self.kf
    }

    pub fn history(&self) -> &[Observation] {
        &self.history
    }

    pub fn last_observation(&self) -> &Observation {
        self.history.last().expect("tracklet history is never empty")
    }

    pub fn untracked(&self) -> u32 {
        self.untracked
    }

    pub fn hits(&self) -> u32 {
        self.hits
    }

    pub fn age(&self) -> u32 {
        self.age
    }

    pub fn status(&self) -> TrackStatus {
        self.status
    }

    pub(crate) fn confirm(&mut self) {
        if self.status == TrackStatus::Tentative {
            self.status = TrackStatus::Confirmed;
        }
    }

    pub(crate) fn mark_removed(&mut self) {
        self.status = TrackStatus::Removed;
    }

    /// Advances the filter one frame without an observation.
    pub fn predict(&mut self, noise: &KalmanNoise) {
        self.kf = kf_predict(&self.kf, noise);
        self.age += 1;
    }

    pub(crate) fn apply_cmc(&mut self, warp: &AffineTransform, translate_velocity: bool) {
        self.kf = apply_cmc_state(&self.kf, warp, translate_velocity);
        self.kf_at_last_obs = apply_cmc_state(&self.kf_at_last_obs, warp, translate_velocity);
        *self = apply_cmc_history(self, warp);
    }
}

/// Moves every stored observation center through the warp.
pub fn apply_cmc_history(tracklet: &Tracklet, warp: &AffineTransform) -> Tracklet {
    let mut out = tracklet.clone();
    if warp.is_identity() {
        return out;
    }
    for obs in &mut out.history {
        let c = warp.apply(&obs.center());
        obs.z[0] = c[0];
        obs.z[1] = c[1];
    }
    out
}

/// Observation-centric re-update.
///
/// When the new observation follows a gap, the filter is rolled back to its
/// state at the last real observation and re-run through observations
/// linearly interpolated across the gap before taking the new one. Without
/// a gap this is a plain update of the already predicted state.
pub fn oru_reupdate(
    tracklet: &Tracklet,
    new_obs: &Observation,
    noise: &KalmanNoise,
) -> Result<Tracklet> {
    let last = *tracklet.last_observation();
    let gap = new_obs.frame.saturating_sub(last.frame);

    let kf = if gap > 1 {
        let mut state = tracklet.kf_at_last_obs.clone();
        for k in 1..gap {
            let alpha = k as f64 / gap as f64;
            let virtual_obs = Observation {
                z: last.z + (new_obs.z - last.z) * alpha,
                frame: last.frame + k,
                score: new_obs.score,
            };
            state = kf_update(&kf_predict(&state, noise), &virtual_obs, noise)?;
        }
        kf_update(&kf_predict(&state, noise), new_obs, noise)?
    } else {
        kf_update(&tracklet.kf, new_obs, noise)?
    };

    let mut out = tracklet.clone();
    out.kf_at_last_obs = kf.clone();
    out.kf = kf;
    out.history.push(*new_obs);
    if out.history.len() > MAX_HISTORY {
        out.history.remove(0);
    }
    Ok(out)
}
