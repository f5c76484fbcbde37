#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace untrim {

using Eigen::Vector2d;
using Eigen::Vector2i;
using Eigen::Vector3d;
using Eigen::Matrix2i;

constexpr double kPi = 3.14159265358979323846;

/// Deterministic PRNG (splitmix64). Used instead of <random> so that seeded
/// runs are bit-identical across platforms and standard libraries.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed = 0) : state(seed) {}

    uint64_t next_u64() {
        state += 0x9E3779B97f4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() {
        return double(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }
};

inline double angle_between(const Vector3d& a, const Vector3d& b) {
    double c = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    c = std::min(1.0, std::max(-1.0, c));
    return std::acos(c);
}

/// Rotation of o by k*pi/2 counterclockwise about the unit normal n.
/// Exact for the four cases, no trigonometry involved.
inline Vector3d rotate90_about(const Vector3d& o, const Vector3d& n, int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return o;
        case 1: return n.cross(o);
        case 2: return -o;
        default: return -n.cross(o);
    }
}

/// Integer 2D rotation by (ka - kb)*pi/2 counterclockwise.
inline Matrix2i rot2i(int ka, int kb) {
    int r = (((ka - kb) % 4) + 4) % 4;
    Matrix2i m;
    switch (r) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, -1, 1, 0; break;
        case 2: m << -1, 0, 0, -1; break;
        default: m << 0, 1, -1, 0; break;
    }
    return m;
}

inline Vector3d project_to_tangent(const Vector3d& v, const Vector3d& n) {
    return v - n * n.dot(v);
}

/// Closest point on segment [a, b] to p.
inline Vector3d closest_on_segment(const Vector3d& p, const Vector3d& a, const Vector3d& b,
                                   double* t_out = nullptr) {
    Vector3d ab = b - a;
    double len2 = ab.squaredNorm();
    double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::min(1.0, std::max(0.0, t));
    if (t_out) *t_out = t;
    return a + t * ab;
}

}  // namespace untrim
