#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpocc {

struct Point2 {
    double x{0.0};
    double y{0.0};
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point2 p) { return std::sqrt(squared_norm(p)); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double squared_distance(Point2 a, Point2 b) { return squared_norm(a - b); }

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

struct Box2 {
    Point2 min{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Point2 max{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

    bool empty() const { return min.x > max.x || min.y > max.y; }

    bool contains(Point2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }

    void extend(Point2 p) {
        min.x = std::min(min.x, p.x);
        min.y = std::min(min.y, p.y);
        max.x = std::max(max.x, p.x);
        max.y = std::max(max.y, p.y);
    }

    void pad(double m) {
        min.x -= m;
        min.y -= m;
        max.x += m;
        max.y += m;
    }
};

struct Segment2 {
    Point2 a;
    Point2 b;
};

inline double segment_length(const Segment2& s) { return distance(s.a, s.b); }

/// Minimum distance from a point to a segment.
inline double point_segment_distance(Point2 p, const Segment2& s) {
    const Point2 d = s.b - s.a;
    const double len2 = squared_norm(d);
    if (len2 == 0.0) return distance(p, s.a);
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(p, s.a + t * d);
}

}  // namespace gpocc
