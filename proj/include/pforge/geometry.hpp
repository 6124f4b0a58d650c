#pragma once

#include <array>
#include <cmath>

namespace pforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// (1-u)*a + u*b; exact at u == 0 and u == 1.
inline double lerp(double a, double b, double u) { return (1.0 - u) * a + u * b; }
inline Vec2 lerp(Vec2 a, Vec2 b, double u) { return {lerp(a.x, b.x, u), lerp(a.y, b.y, u)}; }

/// Per-corner pixel offsets in top-left, top-right, bottom-right, bottom-left order.
using CornerOffsets = std::array<Vec2, 4>;

/// Destination corners in the same order as CornerOffsets.
using Quad = std::array<Vec2, 4>;

inline constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

}  // namespace pforge
