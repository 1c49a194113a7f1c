#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ma {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    bool operator==(const Vec2&) const = default;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// volume of the unit ball in R^n
double unit_ball_volume(int n);

// --- error types named by the failure they report ---

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateInput : Error {
    using Error::Error;
};
struct NonPositiveDensity : Error {
    using Error::Error;
};
struct NotSolvable : Error {
    using Error::Error;
};
struct MaxItersExceeded : Error {
    std::vector<double> residual_profile;  // per-node mass deficits at abort
    MaxItersExceeded(const std::string& what, std::vector<double> residuals)
        : Error(what), residual_profile(std::move(residuals)) {}
};
struct InvalidObstacle : Error {
    using Error::Error;
};
struct DimensionTooLow : Error {
    using Error::Error;
};
struct BoundaryMismatch : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};

}  // namespace ma
