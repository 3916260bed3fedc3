#pragma once

#include <cmath>

namespace socnav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr Vec2& operator-=(const Vec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    constexpr Vec2& operator*=(double s) {
        x *= s;
        y *= s;
        return *this;
    }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// 2D cross product (z component of a x b).
constexpr double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

constexpr double norm_sq(const Vec2& v) { return dot(v, v); }

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

/// Unit vector along v; the zero vector maps to zero.
inline Vec2 normalized(const Vec2& v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec2{};
}

/// Scales v down so that its norm does not exceed max_norm.
inline Vec2 clamp_norm(const Vec2& v, double max_norm) {
    const double n = norm(v);
    return n > max_norm && n > 0.0 ? v * (max_norm / n) : v;
}

}  // namespace socnav
