#ifndef BARN_GEOMETRY_HPP_
#define BARN_GEOMETRY_HPP_

#include <algorithm>
#include <cmath>

namespace barn {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double norm_sq() const { return x * x + y * y; }

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

struct Pose {
    double x{0.0};
    double y{0.0};
    double theta{0.0};  // normalized to (-pi, pi]

    Vec2 position() const { return {x, y}; }

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Distance from point p to the segment a-b.
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    if (len_sq <= 0.0) return distance(p, a);
    const double t = clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
    return distance(p, a + ab * t);
}

}  // namespace barn

#endif  // BARN_GEOMETRY_HPP_
