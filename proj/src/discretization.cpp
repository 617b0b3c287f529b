#include "lunar/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace lunar {

AxisScheme AxisScheme::symmetric(int levels, double step) {
  return clamped(levels, step, -(levels / 2), levels / 2);
}

AxisScheme AxisScheme::clamped(int levels, double step, int min_code, int max_code) {
  AxisScheme a;
  a.levels = levels;
  a.step = step;
  a.min_code = min_code;
  a.max_code = max_code;
  a.validate();
  return a;
}

void AxisScheme::validate() const {
  if (levels < 1 || levels % 2 == 0) {
    throw std::invalid_argument("axis levels must be odd and >= 1, got " + std::to_string(levels));
  }
  if (!(step > 0.0)) throw std::invalid_argument("axis step must be > 0");
  if (min_code < -half() || max_code > half() || min_code > max_code) {
    throw std::invalid_argument("axis clamp range must lie within [-levels/2, levels/2]");
  }
}

int discretize_axis(double value, const AxisScheme& axis) {
  // std::round rounds half away from zero, which keeps the rule odd-symmetric.
  const double q = std::round(value / axis.step);
  const double c = std::clamp(q, static_cast<double>(axis.min_code),
                              static_cast<double>(axis.max_code));
  return static_cast<int>(c);
}

std::size_t StateScheme::state_count() const {
  std::size_t n = include_contacts ? 4 : 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.count());
  return n;
}

void StateScheme::validate() const {
  for (const auto& a : axes) a.validate();
  // Q-table rows are addressed with 32-bit indices in persisted files.
  if (state_count() > (std::size_t{1} << 31)) {
    throw std::invalid_argument("scheme '" + name + "' has too many states");
  }
}

StateCodes discretize(const LanderState& s, const StateScheme& scheme) {
  StateCodes c;
  const std::array<double, kNumAxes> values = {s.x, s.y, s.vx, s.vy, s.theta, s.omega};
  for (std::size_t i = 0; i < kNumAxes; ++i) c.axes[i] = discretize_axis(values[i], scheme.axes[i]);
  c.left = s.left_contact;
  c.right = s.right_contact;
  return c;
}

std::size_t encode(const StateCodes& codes, const StateScheme& scheme) {
  std::size_t index = 0;
  for (std::size_t i = 0; i < kNumAxes; ++i) {
    const auto& a = scheme.axes[i];
    const int code = codes.axes[i];
    if (code < a.min_code || code > a.max_code) {
      throw std::out_of_range("axis code outside scheme range");
    }
    index = index * static_cast<std::size_t>(a.count()) + static_cast<std::size_t>(code - a.min_code);
  }
  if (scheme.include_contacts) {
    index = index * 4 + (codes.left ? 2 : 0) + (codes.right ? 1 : 0);
  }
  return index;
}

StateCodes decode(std::size_t index, const StateScheme& scheme) {
  if (index >= scheme.state_count()) throw std::out_of_range("state index outside scheme");
  StateCodes c;
  if (scheme.include_contacts) {
    c.right = (index & 1U) != 0;
    c.left = (index & 2U) != 0;
    index /= 4;
  }
  for (std::size_t i = kNumAxes; i-- > 0;) {
    const auto& a = scheme.axes[i];
    const auto n = static_cast<std::size_t>(a.count());
    c.axes[i] = static_cast<int>(index % n) + a.min_code;
    index /= n;
  }
  return c;
}

namespace {

// x: a levels at 0.05. y: b bands at 0.1, codes clamped to [-1, b-2].
// vy: 5 levels at 0.2. At 0.1 the learned policy hovers on a band edge.
// vx, theta, omega: 5 levels at 0.1.
StateScheme make_scheme(int x_levels, int y_bands) {
  StateScheme s;
  s.name = std::to_string(x_levels) + "X" + std::to_string(y_bands) + "Y";
  const int y_max = y_bands - 2;
  s.axes[kX] = AxisScheme::symmetric(x_levels, 0.05);
  s.axes[kY] = AxisScheme::clamped(2 * y_max + 1, 0.1, -1, y_max);
  s.axes[kVx] = AxisScheme::symmetric(5, 0.1);
  s.axes[kVy] = AxisScheme::symmetric(5, 0.2);
  s.axes[kTheta] = AxisScheme::symmetric(5, 0.1);
  s.axes[kOmega] = AxisScheme::symmetric(5, 0.1);
  s.include_contacts = true;
  s.validate();
  return s;
}

}  // namespace

const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names = {"3X3Y", "5X3Y", "5X4Y", "7X5Y"};
  return names;
}

StateScheme named_scheme(std::string_view name) {
  if (name == "3X3Y") return make_scheme(3, 3);
  if (name == "5X3Y") return make_scheme(5, 3);
  if (name == "5X4Y") return make_scheme(5, 4);
  if (name == "7X5Y") return make_scheme(7, 5);
  throw std::invalid_argument("unknown discretization scheme '" + std::string(name) + "'");
}

void describe(std::ostream& os, const StateScheme& scheme) {
  static constexpr std::array<const char*, kNumAxes> kNames = {"x", "y", "vx", "vy", "theta",
                                                               "omega"};
  os << "scheme " << scheme.name << "\n";
  os << std::left << std::setw(8) << "axis" << std::setw(8) << "levels" << std::setw(8) << "step"
     << std::setw(12) << "codes" << "saturates at |v| >=\n";
  for (std::size_t i = 0; i < kNumAxes; ++i) {
    const auto& a = scheme.axes[i];
    const std::string codes = "[" + std::to_string(a.min_code) + "," + std::to_string(a.max_code) + "]";
    os << std::setw(8) << kNames[i] << std::setw(8) << a.count() << std::setw(8) << a.step
       << std::setw(12) << codes << "low " << (a.min_code + 0.5) * a.step << ", high "
       << (a.max_code - 0.5) * a.step << "\n";
  }
  os << "contacts " << (scheme.include_contacts ? "yes (x4)" : "no") << "\n";
  os << "states " << scheme.state_count() << "\n";
  os << "centre index " << encode(StateCodes{}, scheme) << "\n";
}

}  // namespace lunar
