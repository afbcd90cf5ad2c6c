#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code under test beyond plain data accessors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "radarnet/cop.hpp"
#include "radarnet/geometry.hpp"

namespace oracle {

/// Closed-form area of the lens between two circles.
inline double circle_lens(double r1, double r2, double d) {
  if (d >= r1 + r2) return 0.0;
  const double rs = std::min(r1, r2);
  if (d <= std::abs(r1 - r2)) return std::numbers::pi * rs * rs;
  const double a1 = std::acos((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1));
  const double a2 = std::acos((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2));
  const double kite = 0.5 * std::sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2));
  return r1 * r1 * a1 + r2 * r2 * a2 - kite;
}

inline bool inside(const radarnet::CovEllipse& e, double x, double y) {
  const double k2 = e.k * e.k;
  const double a = e.cov.xx() * k2, b = e.cov.xy() * k2, c = e.cov.yy() * k2;
  const double det = a * c - b * b;
  const double dx = x - e.center.x, dy = y - e.center.y;
  return (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det <= 1.0;
}

/// Rejection-sampling estimate of the overlap area over the common bounding box.
inline double mc_overlap(const radarnet::CovEllipse& a, const radarnet::CovEllipse& b, int samples,
                         std::uint64_t seed) {
  const auto box = [](const radarnet::CovEllipse& e) {
    const double hx = e.k * std::sqrt(e.cov.xx()), hy = e.k * std::sqrt(e.cov.yy());
    return std::array<double, 4>{e.center.x - hx, e.center.x + hx, e.center.y - hy, e.center.y + hy};
  };
  const auto ba = box(a), bb = box(b);
  const double x0 = std::max(ba[0], bb[0]), x1 = std::min(ba[1], bb[1]);
  const double y0 = std::max(ba[2], bb[2]), y1 = std::min(ba[3], bb[3]);
  if (x0 >= x1 || y0 >= y1) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    const double x = ux(rng), y = uy(rng);
    if (inside(a, x, y) && inside(b, x, y)) ++hits;
  }
  return (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / samples;
}

/// Best objective over every assignment of {untracked} ∪ I×I to each target.
inline double brute_force(const radarnet::cop::CopInstance& inst, bool singles_only = false) {
  const std::size_t nI = inst.n_radars(), nJ = inst.n_targets();
  std::vector<std::int64_t> res(nI);
  for (std::size_t i = 0; i < nI; ++i) res[i] = inst.budget(i).units();
  double best = 0.0;
  std::function<void(std::size_t, double)> rec = [&](std::size_t j, double acc) {
    if (j == nJ) {
      best = std::max(best, acc);
      return;
    }
    rec(j + 1, acc);
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t k = 0; k < nI; ++k) {
        if (singles_only && k != i) continue;
        const std::int64_t gi = inst.gamma(i, j).units();
        const std::int64_t gk = k == i ? 0 : inst.gamma(k, j).units();
        if (res[i] < gi || res[k] < gk + (k == i ? gi : 0)) continue;
        res[i] -= gi;
        res[k] -= gk;
        rec(j + 1, acc + inst.c(i, k, j));
        res[i] += gi;
        res[k] += gk;
      }
    }
  };
  rec(0, 0.0);
  return best;
}

/// Random instance with loads on a 0.05 grid; c symmetric in (i, k) and at
/// least the single utility of either radar, like the geometric ones.
inline radarnet::cop::CopInstance random_instance(std::uint64_t seed, std::size_t max_radars,
                                                  std::size_t max_targets) {
  using radarnet::Load;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> nr(1, max_radars), nt(1, max_targets);
  const std::size_t nI = nr(rng), nJ = nt(rng);
  std::vector<int> radars, targets;
  for (std::size_t i = 0; i < nI; ++i) radars.push_back(static_cast<int>(10 + 3 * i));
  for (std::size_t j = 0; j < nJ; ++j) targets.push_back(static_cast<int>(100 + 7 * j));
  radarnet::cop::CopInstance inst(radars, targets);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> grid(2, 12);
  for (std::size_t i = 0; i < nI; ++i) inst.set_budget(i, Load::from_units(grid(rng) * 50'000 + 100'000));
  for (std::size_t i = 0; i < nI; ++i) {
    for (std::size_t j = 0; j < nJ; ++j) inst.set_gamma(i, j, Load::from_units(grid(rng) * 50'000));
  }
  for (std::size_t j = 0; j < nJ; ++j) {
    std::vector<double> single(nI);
    for (std::size_t i = 0; i < nI; ++i) {
      single[i] = u(rng) < 0.15 ? 0.0 : u(rng);
      inst.set_c(i, i, j, single[i]);
    }
    for (std::size_t i = 0; i < nI; ++i) {
      for (std::size_t k = i + 1; k < nI; ++k) {
        double v = 0.0;
        if (single[i] > 0.0 && single[k] > 0.0) v = std::max(single[i], single[k]) + 0.3 * u(rng);
        inst.set_c(i, k, j, std::min(v, 1.0));
        inst.set_c(k, i, j, std::min(v, 1.0));
      }
    }
  }
  return inst;
}

}  // namespace oracle
