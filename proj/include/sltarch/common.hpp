// Copyright Contributors to the SLTarch Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace sltarch {

using NodeId    = std::uint32_t;
using SubtreeId = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Error hierarchy. Every module reports failures through one of these so the
// CLI can map them onto exit codes without string matching.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class InvariantError : public Error {
  public:
    using Error::Error;
};

class FormatError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

inline constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return (1.0 / norm(a)) * a; }

// Row-major 3x3.
struct Mat3 {
    std::array<double, 9> m{};

    constexpr double operator()(int r, int c) const { return m[r * 3 + c]; }
    constexpr double &operator()(int r, int c) { return m[r * 3 + c]; }

    static constexpr Mat3 identity() { return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

    constexpr Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
        return t;
    }

    friend constexpr Mat3 operator*(const Mat3 &a, const Mat3 &b) {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
                out(r, c) = s;
            }
        return out;
    }

    friend constexpr Vec3 operator*(const Mat3 &a, Vec3 v) {
        return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
                a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
                a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
    }
};

// Unit quaternion stored as (w, x, y, z).
struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    // Rotation matrix of the normalized quaternion.
    Mat3 to_matrix() const {
        const double n  = norm();
        const double qw = w / n, qx = x / n, qy = y / n, qz = z / n;
        return Mat3{{1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qw * qz), 2 * (qx * qz + qw * qy),
                     2 * (qx * qy + qw * qz), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qw * qx),
                     2 * (qx * qz - qw * qy), 2 * (qy * qz + qw * qx), 1 - 2 * (qx * qx + qy * qy)}};
    }

    // Quaternion of a proper rotation matrix (Shepperd's method).
    static Quat from_matrix(const Mat3 &r) {
        Quat q;
        const double trace = r(0, 0) + r(1, 1) + r(2, 2);
        if (trace > 0.0) {
            const double s = 0.5 / std::sqrt(trace + 1.0);
            q.w = 0.25 / s;
            q.x = (r(2, 1) - r(1, 2)) * s;
            q.y = (r(0, 2) - r(2, 0)) * s;
            q.z = (r(1, 0) - r(0, 1)) * s;
        } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
            const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
            q.w = (r(2, 1) - r(1, 2)) / s;
            q.x = 0.25 * s;
            q.y = (r(0, 1) + r(1, 0)) / s;
            q.z = (r(0, 2) + r(2, 0)) / s;
        } else if (r(1, 1) > r(2, 2)) {
            const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
            q.w = (r(0, 2) - r(2, 0)) / s;
            q.x = (r(0, 1) + r(1, 0)) / s;
            q.y = 0.25 * s;
            q.z = (r(1, 2) + r(2, 1)) / s;
        } else {
            const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
            q.w = (r(1, 0) - r(0, 1)) / s;
            q.x = (r(0, 2) + r(2, 0)) / s;
            q.y = (r(1, 2) + r(2, 1)) / s;
            q.z = 0.25 * s;
        }
        const double n = q.norm();
        return {q.w / n, q.x / n, q.y / n, q.z / n};
    }

    friend constexpr bool operator==(Quat, Quat) = default;
};

/// Deterministic random source. Distributions are derived from raw 64-bit
/// draws so that sequences are identical across standard library vendors.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    double normal() {
        // Box-Muller; one sample per call keeps the stream simple.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    Quat unit_quaternion() {
        Quat q{normal(), normal(), normal(), normal()};
        const double n = q.norm();
        return {q.w / n, q.x / n, q.y / n, q.z / n};
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace sltarch
