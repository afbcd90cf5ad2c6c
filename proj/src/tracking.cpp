#include "radarnet/tracking.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>

#include "radarnet/errors.hpp"

namespace radarnet {

void RadarConfig::check() const {
  if (budget <= Load{}) throw ContractError("radar " + std::to_string(id) + ": budget must be positive");
  if (!(range_resolution > 0.0) || !(azimuth_resolution > 0.0) || !(snr > 0.0) || !(max_range > 0.0)) {
    throw ContractError("radar " + std::to_string(id) + ": resolutions, snr and max_range must be positive");
  }
}

Cov2 TrackState::position_cov() const { return Cov2::from_matrix(P(0, 0), P(0, 1), P(1, 0), P(1, 1)); }

NoiseStd measurement_noise(double r, const RadarConfig& cfg) {
  if (!(r > 0.0) || r > cfg.max_range) {
    throw NotVisible("range " + std::to_string(r) + " outside (0, " + std::to_string(cfg.max_range) + "]");
  }
  const double denom = std::sqrt(2.0 * cfg.snr);
  return {cfg.range_resolution / denom, cfg.azimuth_resolution / denom};
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PolarMeasurement synthesize_measurement(const RadarConfig& cfg, int target_id, Vec2 truth,
                                        long tick, std::uint64_t seed) {
  const Vec2 d = truth - cfg.position;
  const double r = d.norm();
  const NoiseStd noise = measurement_noise(r, cfg);

  std::uint64_t key = mix_seed(seed, static_cast<std::uint64_t>(cfg.id));
  key = mix_seed(key, static_cast<std::uint64_t>(target_id));
  key = mix_seed(key, static_cast<std::uint64_t>(tick));
  std::mt19937_64 rng(key);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double dr = unit(rng);
  const double dtheta = unit(rng);

  PolarMeasurement m;
  m.target_id = target_id;
  m.r = r + noise.sigma_r * dr;
  m.theta = std::atan2(d.y, d.x) + noise.sigma_theta * dtheta;
  m.sigma_r = noise.sigma_r;
  m.sigma_theta = noise.sigma_theta;
  m.tick = tick;
  return m;
}

Vec2 measured_position(const PolarMeasurement& m, Vec2 radar_position) {
  return radar_position + Vec2{m.r * std::cos(m.theta), m.r * std::sin(m.theta)};
}

Cov2 measurement_cov(const PolarMeasurement& m) {
  return polar_cov_to_cartesian(m.r, m.theta, m.sigma_r, m.sigma_theta);
}

TrackState kf_predict(const TrackState& t, double dt, double q) {
  if (!(dt > 0.0)) throw ContractError("kf_predict: dt must be positive");
  Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
  F(0, 2) = dt;
  F(1, 3) = dt;

  const double q11 = q * dt * dt * dt / 3.0;
  const double q12 = q * dt * dt / 2.0;
  const double q22 = q * dt;
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
  Q(0, 0) = Q(1, 1) = q11;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = q12;
  Q(2, 2) = Q(3, 3) = q22;

  TrackState out = t;
  out.state = F * t.state;
  out.P = F * t.P * F.transpose() + Q;
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

TrackState kf_update_position(const TrackState& t, const Eigen::Vector2d& z, const Eigen::Matrix2d& R,
                              long tick) {
  Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;

  const Eigen::Matrix2d S = H * t.P * H.transpose() + R;
  const Eigen::Matrix<double, 4, 2> K = t.P * H.transpose() * S.inverse();
  const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - K * H;

  TrackState out = t;
  out.state = t.state + K * (z - H * t.state);
  // Joseph form keeps P symmetric positive semi-definite.
  out.P = I_KH * t.P * I_KH.transpose() + K * R * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  out.last_update_tick = tick;
  return out;
}

TrackState kf_update(const TrackState& t, const PolarMeasurement& m, Vec2 radar_position) {
  if (m.target_id != t.target_id) {
    throw ContractError("kf_update: measurement of target " + std::to_string(m.target_id) +
                        " applied to track of target " + std::to_string(t.target_id));
  }
  const Vec2 p = measured_position(m, radar_position);
  const Cov2 c = measurement_cov(m);
  Eigen::Matrix2d R;
  R << c.xx(), c.xy(), c.xy(), c.yy();
  return kf_update_position(t, Eigen::Vector2d(p.x, p.y), R, m.tick);
}

TrackState init_track(const PolarMeasurement& m, Vec2 radar_position, double v_max) {
  const Vec2 p = measured_position(m, radar_position);
  const Cov2 c = measurement_cov(m);
  TrackState t;
  t.target_id = m.target_id;
  t.state << p.x, p.y, 0.0, 0.0;
  t.P.setZero();
  t.P(0, 0) = c.xx();
  t.P(0, 1) = t.P(1, 0) = c.xy();
  t.P(1, 1) = c.yy();
  t.P(2, 2) = t.P(3, 3) = v_max * v_max;
  t.last_update_tick = m.tick;
  return t;
}

CovEllipse predicted_ellipse(const TrackState& t, const FilterParams& params) {
  const TrackState next = kf_predict(t, params.dt, params.q);
  return CovEllipse(next.position(), next.position_cov());
}

CovEllipse pickup_ellipse(const RadarConfig& cfg, Vec2 target) {
  const Vec2 d = target - cfg.position;
  const NoiseStd noise = measurement_noise(d.norm(), cfg);
  return CovEllipse(target, polar_cov_to_cartesian(d.norm(), std::atan2(d.y, d.x), noise.sigma_r,
                                                   noise.sigma_theta));
}

}  // namespace radarnet
