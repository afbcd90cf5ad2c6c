#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace radarnet {

/// Radar-time load in fixed point (1e-6 load units per tick).
///
/// Budgets and per-target costs are summed and compared exactly, so ledger
/// arithmetic never drifts across release/refund cycles.
class Load {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Load() = default;

  static constexpr Load from_units(std::int64_t units) {
    Load l;
    l.units_ = units;
    return l;
  }
  static Load from_double(double value) {
    return from_units(static_cast<std::int64_t>(std::llround(value * kScale)));
  }

  constexpr std::int64_t units() const { return units_; }
  constexpr double to_double() const { return static_cast<double>(units_) / kScale; }

  constexpr Load& operator+=(Load o) {
    units_ += o.units_;
    return *this;
  }
  constexpr Load& operator-=(Load o) {
    units_ -= o.units_;
    return *this;
  }
  friend constexpr Load operator+(Load a, Load b) { return a += b; }
  friend constexpr Load operator-(Load a, Load b) { return a -= b; }
  friend constexpr auto operator<=>(Load, Load) = default;

 private:
  std::int64_t units_ = 0;
};

}  // namespace radarnet
