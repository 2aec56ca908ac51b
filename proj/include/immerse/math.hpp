#pragma once

#include <cmath>

namespace immerse {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double length_sq() const { return dot(*this); }
    double length() const { return std::sqrt(length_sq()); }
    Vec3 normalized() const {
        double len = length();
        return len > 0.0 ? *this / len : Vec3{};
    }
    bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline Vec3 lerp(const Vec3& a, const Vec3& b, double t) { return a + (b - a) * t; }

// Unit quaternion. Every mutating path renormalizes so the unit-length
// invariant holds to 1e-9.
struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quat() = default;
    constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    static Quat from_axis_angle(const Vec3& axis, double angle) {
        Vec3 n = axis.normalized();
        double h = angle * 0.5;
        double s = std::sin(h);
        return Quat{std::cos(h), n.x * s, n.y * s, n.z * s}.normalized();
    }

    bool operator==(const Quat& o) const {
        return w == o.w && x == o.x && y == o.y && z == o.z;
    }

    double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
    double length() const { return std::sqrt(dot(*this)); }

    Quat normalized() const {
        double len = length();
        if (len <= 0.0) return Quat{};
        return {w / len, x / len, y / len, z / len};
    }

    Quat conjugate() const { return {w, -x, -y, -z}; }

    Quat operator*(const Quat& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    Vec3 rotate(const Vec3& v) const {
        Vec3 u{x, y, z};
        Vec3 t = u.cross(v) * 2.0;
        return v + t * w + u.cross(t);
    }

    bool is_finite() const {
        return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline Quat slerp(const Quat& a, const Quat& b, double t) {
    Quat bb = b;
    double d = a.dot(b);
    if (d < 0.0) {
        d = -d;
        bb = {-b.w, -b.x, -b.y, -b.z};
    }
    if (d > 0.9995) {
        // near-parallel: nlerp
        Quat r{a.w + (bb.w - a.w) * t, a.x + (bb.x - a.x) * t,
               a.y + (bb.y - a.y) * t, a.z + (bb.z - a.z) * t};
        return r.normalized();
    }
    double theta = std::acos(d);
    double s = std::sin(theta);
    double wa = std::sin((1.0 - t) * theta) / s;
    double wb = std::sin(t * theta) / s;
    return Quat{wa * a.w + wb * bb.w, wa * a.x + wb * bb.x,
                wa * a.y + wb * bb.y, wa * a.z + wb * bb.z}
        .normalized();
}

// Rigid transform: translation + rotation, scale fixed at 1.
struct Transform {
    Vec3 pos;
    Quat rot;

    // this ∘ child: child expressed in this transform's space.
    Transform operator*(const Transform& child) const {
        return {pos + rot.rotate(child.pos), (rot * child.rot).normalized()};
    }

    Transform inverse() const {
        Quat inv = rot.conjugate();
        return {inv.rotate(-pos), inv};
    }

    Vec3 apply(const Vec3& p) const { return pos + rot.rotate(p); }

    bool operator==(const Transform& o) const { return pos == o.pos && rot == o.rot; }
};

}  // namespace immerse
