#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <numbers>

#include "radarnet/geometry.hpp"
#include "radarnet/load.hpp"

namespace radarnet {

struct RadarConfig {
  int id = 0;
  Vec2 position;
  Load budget = Load::from_double(1.0);
  double range_resolution = 150.0;                           // meters
  double azimuth_resolution = 2.0 * std::numbers::pi / 180;  // radians
  double snr = 13.0;                                         // linear ratio
  double max_range = 60'000.0;                               // meters

  /// Throws ContractError when a field is out of range.
  void check() const;
  bool sees(Vec2 p) const { return (p - position).norm() <= max_range; }
};

struct PolarMeasurement {
  int target_id = 0;
  double r = 0.0;
  double theta = 0.0;
  double sigma_r = 0.0;
  double sigma_theta = 0.0;
  long tick = 0;
};

struct NoiseStd {
  double sigma_r;
  double sigma_theta;
};

/// Kalman state (x, y, vx, vy) of one target as held by one radar.
struct TrackState {
  int target_id = 0;
  Eigen::Vector4d state = Eigen::Vector4d::Zero();
  Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
  long last_update_tick = 0;

  Vec2 position() const { return {state(0), state(1)}; }
  Cov2 position_cov() const;
};

struct FilterParams {
  double q = 1.0;       // white-acceleration intensity, m^2/s^3
  double dt = 1.0;      // seconds per tick
  double v_max = 300.0; // m/s, initial velocity spread
};

/// Per-measurement standard deviations; range independent.
/// Throws NotVisible when r is outside (0, max_range].
NoiseStd measurement_noise(double r, const RadarConfig& cfg);

/// Noisy polar observation of a target. A pure function of its arguments:
/// the noise stream is keyed on (seed, radar id, target id, tick).
PolarMeasurement synthesize_measurement(const RadarConfig& cfg, int target_id, Vec2 truth,
                                        long tick, std::uint64_t seed);

/// Ground-frame position and covariance implied by a polar measurement.
Vec2 measured_position(const PolarMeasurement& m, Vec2 radar_position);
Cov2 measurement_cov(const PolarMeasurement& m);

TrackState kf_predict(const TrackState& t, double dt, double q);

TrackState kf_update(const TrackState& t, const PolarMeasurement& m, Vec2 radar_position);

/// Linear update with a direct position observation z ~ N(position, R).
TrackState kf_update_position(const TrackState& t, const Eigen::Vector2d& z,
                              const Eigen::Matrix2d& R, long tick);

/// New track from a first measurement: zero velocity with v_max^2 variance per axis.
TrackState init_track(const PolarMeasurement& m, Vec2 radar_position, double v_max);

/// Uncertainty region one tick ahead, from the position block of the predicted P.
CovEllipse predicted_ellipse(const TrackState& t, const FilterParams& params = {});

/// Uncertainty a radar obtains by picking the target up afresh: the
/// measurement covariance at the target's current range and azimuth.
CovEllipse pickup_ellipse(const RadarConfig& cfg, Vec2 target);

/// Counter-based 64-bit mixing (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace radarnet
