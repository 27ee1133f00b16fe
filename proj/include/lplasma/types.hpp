#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lplasma {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

/// Point in the plasma-scaled plane.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2() = default;
    constexpr Point2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Point2& operator+=(Point2 o) { x += o.x; y += o.y; return *this; }
    constexpr Point2& operator-=(Point2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Point2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;

    [[nodiscard]] constexpr double norm2() const { return x * x + y * y; }
    [[nodiscard]] double norm() const { return std::hypot(x, y); }
    [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// Ordered list of particle positions Z = (z_1, ..., z_N).
using Configuration = std::vector<Point2>;

inline bool all_finite(const Configuration& cfg) {
    for (const auto& p : cfg)
        if (!p.finite()) return false;
    return true;
}

/// Thrown when input violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation hits a singular configuration (coincident
/// points, zero of the correlation factor) where a finite answer is required.
class SingularConfiguration : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace lplasma
