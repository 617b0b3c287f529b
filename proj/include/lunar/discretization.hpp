#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lunar/physics_env.hpp"

namespace lunar {

/// Clamp-and-quantize rule for one state variable: code = clamp(round(v/step)).
/// `levels` is the odd symmetric count; `min_code`/`max_code` may tighten the
/// clamp on one side (the y axis is one-sided around the pad).
struct AxisScheme {
  int levels = 1;
  double step = 1.0;
  int min_code = 0;
  int max_code = 0;

  static AxisScheme symmetric(int levels, double step);
  static AxisScheme clamped(int levels, double step, int min_code, int max_code);

  int half() const { return levels / 2; }
  int count() const { return max_code - min_code + 1; }
  void validate() const;
};

int discretize_axis(double value, const AxisScheme& axis);

enum Axis : std::size_t { kX = 0, kY, kVx, kVy, kTheta, kOmega, kNumAxes };

using AxisCodes = std::array<int, kNumAxes>;

struct StateCodes {
  AxisCodes axes{};
  bool left = false;
  bool right = false;

  bool operator==(const StateCodes&) const = default;
};

struct StateScheme {
  std::string name;
  std::array<AxisScheme, kNumAxes> axes;
  bool include_contacts = true;

  std::size_t state_count() const;
  void validate() const;
};

StateCodes discretize(const LanderState& state, const StateScheme& scheme);

/// Mixed-radix packing, x most significant, contact bits least significant.
std::size_t encode(const StateCodes& codes, const StateScheme& scheme);
StateCodes decode(std::size_t index, const StateScheme& scheme);

inline std::size_t state_index(const LanderState& state, const StateScheme& scheme) {
  return encode(discretize(state, scheme), scheme);
}

/// "3X3Y", "5X3Y", "5X4Y", "7X5Y". Throws std::invalid_argument otherwise.
StateScheme named_scheme(std::string_view name);
const std::vector<std::string>& scheme_names();

/// Human-readable axis table.
void describe(std::ostream& os, const StateScheme& scheme);

}  // namespace lunar
