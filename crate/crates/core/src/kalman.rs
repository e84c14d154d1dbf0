//! Constant-velocity Kalman filter over bounding-box observations.
//!
//! The state is the 8-vector (u, v, gamma, h, u̇, v̇, γ̇, ḣ); the four box
//! coordinates are observed directly. Process and measurement noise scale
//! with the box height, the convention of the tracking system this
//! harness stands in for; the weights are configurable.

use nalgebra::{SMatrix, SVector};

use crate::bbox::Bbox;

type Mat8 = SMatrix<f64, 8, 8>;
type Mat4 = SMatrix<f64, 4, 4>;
type Mat48 = SMatrix<f64, 4, 8>;
type Vec8 = SVector<f64, 8>;
type Vec4 = SVector<f64, 4>;

/// Noise weights; defaults follow the common height-scaled convention.
#[derive(Clone, Copy, Debug)]
pub struct KalmanConfig {
    pub std_weight_position: f64,
    pub std_weight_velocity: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        KalmanConfig {
            std_weight_position: 1.0 / 20.0,
            std_weight_velocity: 1.0 / 160.0,
        }
    }
}

/// Gaussian state estimate of one track.
#[derive(Clone, Copy, Debug)]
pub struct TrackState {
    pub mean: Vec8,
    pub covariance: Mat8,
}

impl TrackState {
    pub fn bbox(&self) -> Bbox {
        Bbox::new(self.mean[0], self.mean[1], self.mean[2], self.mean[3])
    }
}

/// The filter itself: stateless apart from its noise configuration.
#[derive(Clone, Copy, Debug, Default)]
pub struct KalmanFilter {
    cfg: KalmanConfig,
}

impl KalmanFilter {
    pub fn new(cfg: KalmanConfig) -> Self {
        KalmanFilter { cfg }
    }

    fn transition() -> Mat8 {
        let mut f = Mat8::identity();
        for i in 0..4 {
            f[(i, i + 4)] = 1.0;
        }
        f
    }

    fn observation() -> Mat48 {
        let mut h = Mat48::zeros();
        for i in 0..4 {
            h[(i, i)] = 1.0;
        }
        h
    }

    fn process_noise(&self, h: f64) -> Mat8 {
        let wp = self.cfg.std_weight_position * h;
        let wv = self.cfg.std_weight_velocity * h;
        let std = [wp, wp, 1e-2, wp, wv, wv, 1e-5, wv];
        Mat8::from_diagonal(&Vec8::from_iterator(std.iter().map(|s| s * s)))
    }

    fn measurement_noise(&self, h: f64) -> Mat4 {
        let wp = self.cfg.std_weight_position * h;
        let std = [wp, wp, 1e-1, wp];
        Mat4::from_diagonal(&Vec4::from_iterator(std.iter().map(|s| s * s)))
    }

    /// Starts a track from its first observation: zero velocities and a
    /// broad height-scaled covariance.
    pub fn initiate(&self, obs: &Bbox) -> TrackState {
        let mean = Vec8::from_column_slice(&[obs.u, obs.v, obs.gamma, obs.h, 0.0, 0.0, 0.0, 0.0]);
        let wp = 2.0 * self.cfg.std_weight_position * obs.h;
        let wv = 10.0 * self.cfg.std_weight_velocity * obs.h;
        let std = [wp, wp, 1e-2, wp, wv, wv, 1e-5, wv];
        let covariance = Mat8::from_diagonal(&Vec8::from_iterator(std.iter().map(|s| s * s)));
        TrackState { mean, covariance }
    }

    /// Advances the state one frame: positions gain their velocities, the
    /// covariance becomes F·P·Fᵀ + Q.
    pub fn predict(&self, state: &TrackState) -> TrackState {
        let f = Self::transition();
        let q = self.process_noise(state.mean[3]);
        let mean = f * state.mean;
        let covariance = f * state.covariance * f.transpose() + q;
        TrackState { mean, covariance }
    }

    /// Folds an observation into the state. Uses the Joseph-form
    /// covariance update for numerical symmetry/PSD stability; a singular
    /// innovation covariance is regularized by a small diagonal bump.
    pub fn update(&self, state: &TrackState, obs: &Bbox) -> TrackState {
        let h = Self::observation();
        let r = self.measurement_noise(state.mean[3]);
        let z = Vec4::from_column_slice(&[obs.u, obs.v, obs.gamma, obs.h]);

        let projected = h * state.covariance * h.transpose() + r;
        let cross = state.covariance * h.transpose();
        let inv = projected.try_inverse().unwrap_or_else(|| {
            (projected + Mat4::identity() * 1e-9)
                .try_inverse()
                .expect("regularized innovation covariance is invertible")
        });
        let gain = cross * inv;

        let innovation = z - h * state.mean;
        let mut mean = state.mean + gain * innovation;
        // Keep the box height positive after the correction.
        if mean[3] <= 0.0 {
            mean[3] = 1e-3;
        }

        let ikh = Mat8::identity() - gain * h;
        let covariance = ikh * state.covariance * ikh.transpose() + gain * r * gain.transpose();
        // Symmetrize against accumulated round-off.
        let covariance = (covariance + covariance.transpose()) * 0.5;
        TrackState { mean, covariance }
    }
}
