#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace dislsim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    constexpr Vec3 operator/(double a) const { return {x / a, y / a, z / a}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double a) { x *= a; y *= a; z *= a; return *this; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    constexpr double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const { return *this / norm(); }
};

inline constexpr Vec3 operator*(double a, const Vec3& v) { return v * a; }
inline constexpr double dot(const Vec3& a, const Vec3& b) { return a.dot(b); }
inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) { return a.cross(b); }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

/// Dense 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> m{};

    static constexpr Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 I;
        I(0, 0) = I(1, 1) = I(2, 2) = 1.0;
        return I;
    }
    /// a b^T
    static Mat3 outer(const Vec3& a, const Vec3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
        return r;
    }

    double operator()(int i, int j) const { return m[3 * i + j]; }
    double& operator()(int i, int j) { return m[3 * i + j]; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(double a) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = a * m[i];
        return r;
    }
    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    /// A^T v
    Vec3 tmul(const Vec3& v) const {
        return {m[0] * v.x + m[3] * v.y + m[6] * v.z,
                m[1] * v.x + m[4] * v.y + m[7] * v.z,
                m[2] * v.x + m[5] * v.y + m[8] * v.z};
    }
    double frobenius2() const {
        double s = 0;
        for (double e : m) s += e * e;
        return s;
    }
    double frobenius() const { return std::sqrt(frobenius2()); }
};

inline Mat3 operator*(double a, const Mat3& M) { return M * a; }

inline constexpr double sqr(double a) { return a * a; }

inline constexpr double pi() { return 3.14159265358979323846264338327950288; }
inline constexpr double two_pi() { return 2.0 * pi(); }

/// |log t|, read as -log t for t < 1 (natural logarithm).
inline double abs_log(double t) { return std::fabs(std::log(t)); }

}  // namespace dislsim
