#pragma once

#include <cmath>

namespace momentswarm {

/// A point in the normalized [-1,1]^2 domain.
struct Position {
  double x = 0.0;
  double y = 0.0;

  double radius() const { return std::hypot(x, y); }
  double angle() const { return std::atan2(y, x); }

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace momentswarm
