#pragma once

// Adapted orthonormal frame and cylindrical tube coordinates around a closed
// curve. The frame comes from projecting a fixed reference direction N off
// the tangent,
//   n1(s) = (N - <N, tau> tau) / | ... |,   n2 = tau ^ n1,
// so it is global, periodic, and depends only on the first derivative of the
// curve (no Frenet breakdown where curvature vanishes).

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "curve.hpp"

namespace dislsim {

struct FrameVectors {
    Vec3 tau, n1, n2;
};

struct CurveCoords {
    double s = 0.0;      // curve parameter in [0, 2*pi)
    double r = 0.0;      // distance to the curve
    double theta = 0.0;  // angle in the (n1, n2) plane, in [0, 2*pi)
};

class ProjectionError : public std::runtime_error {
  public:
    ProjectionError(const std::string& msg, CurveCoords best)
        : std::runtime_error(msg), best_candidate(best) {}
    CurveCoords best_candidate;
};

class FrameError : public std::runtime_error {
  public:
    FrameError(const std::string& msg, double best)
        : std::runtime_error(msg), best_clearance(best) {}
    double best_clearance;
};

class TubeChart {
  public:
    TubeChart(ClosedCurve curve, Vec3 reference_direction, double clearance)
        : curve_(std::move(curve)), ref_(reference_direction.normalized()), clearance_(clearance) {
        n1_.resize(curve_.size());
        n2_.resize(curve_.size());
        for (int i = 0; i < curve_.size(); ++i) {
            const FrameVectors f = frame_at(curve_.param_of_node(i));
            n1_[i] = f.n1;
            n2_[i] = f.n2;
        }
    }

    const ClosedCurve& curve() const { return curve_; }
    const Vec3& reference_direction() const { return ref_; }
    double clearance() const { return clearance_; }
    double reach() const { return curve_.reach(); }
    const std::vector<Vec3>& n1() const { return n1_; }
    const std::vector<Vec3>& n2() const { return n2_; }

    FrameVectors frame_at(double s) const {
        FrameVectors f;
        f.tau = curve_.tangent_at(s);
        const Vec3 w = ref_ - f.tau * dot(ref_, f.tau);
        const double wn = w.norm();
        if (!(wn > 1e-14))
            throw FrameError("TubeChart: reference direction parallel to the tangent", 0.0);
        f.n1 = w / wn;
        f.n2 = cross(f.tau, f.n1);
        return f;
    }

    Vec3 normal_at(double s, double theta) const {
        const FrameVectors f = frame_at(s);
        return f.n1 * std::cos(theta) + f.n2 * std::sin(theta);
    }

  private:
    ClosedCurve curve_;
    Vec3 ref_;
    double clearance_;
    std::vector<Vec3> n1_, n2_;
};

namespace detail {

/// Fixed 12-direction icosahedral set in the polar orientation (poles +-e3,
/// two pentagonal rings), poles first so planar curves pick N = e3.
inline std::vector<Vec3> icosahedral_directions() {
    std::vector<Vec3> dirs;
    dirs.push_back({0, 0, 1});
    dirs.push_back({0, 0, -1});
    const double z = 1.0 / std::sqrt(5.0);
    const double rho = 2.0 / std::sqrt(5.0);
    for (int k = 0; k < 5; ++k) {
        const double a = two_pi() * k / 5.0;
        dirs.push_back({rho * std::cos(a), rho * std::sin(a), z});
    }
    for (int k = 0; k < 5; ++k) {
        const double a = two_pi() * k / 5.0 + pi() / 5.0;
        dirs.push_back({rho * std::cos(a), rho * std::sin(a), -z});
    }
    return dirs;
}

/// min over the sampled tangent image of min(|N - tau|, |N + tau|); the
/// projection formula degenerates at both poles of the tangent axis.
inline double frame_clearance(const ClosedCurve& curve, const Vec3& N) {
    const int dense = 4 * curve.size();
    double best = 1e300;
    for (int j = 0; j < dense; ++j) {
        const Vec3 t = curve.tangent_at(two_pi() * j / dense);
        best = std::min(best, std::min((N - t).norm(), (N + t).norm()));
    }
    return best;
}

}  // namespace detail

/// Build the adapted frame, choosing N over the fixed icosahedral candidates
/// (one local refinement pass) unless an explicit direction is supplied.
inline TubeChart adapted_frame(const ClosedCurve& curve, const Vec3* explicit_N = nullptr) {
    Vec3 best_N;
    double best_c = -1.0;
    if (explicit_N) {
        best_N = explicit_N->normalized();
        best_c = detail::frame_clearance(curve, best_N);
    } else {
        for (const Vec3& N : detail::icosahedral_directions()) {
            const double c = detail::frame_clearance(curve, N);
            if (c > best_c + 1e-14) {
                best_c = c;
                best_N = N;
            }
        }
        // one refinement pass around the winner
        Vec3 u = (std::fabs(best_N.z) < 0.9) ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        Vec3 e1 = (u - best_N * dot(u, best_N)).normalized();
        Vec3 e2 = cross(best_N, e1);
        const double step = 0.15;
        for (int k = 0; k < 8; ++k) {
            const double a = two_pi() * k / 8.0;
            const Vec3 cand =
                (best_N + (e1 * std::cos(a) + e2 * std::sin(a)) * step).normalized();
            const double c = detail::frame_clearance(curve, cand);
            if (c > best_c + 1e-14) {
                best_c = c;
                best_N = cand;
            }
        }
    }
    if (best_c < 0.05)
        throw FrameError("adapted_frame: no admissible reference direction (tangent image too "
                         "dense); best clearance " + std::to_string(best_c),
                         best_c);
    return TubeChart(curve, best_N, best_c);
}

/// Psi(s, r, theta) = gamma(s) + r (cos theta n1 + sin theta n2).
inline Vec3 tube_point(const TubeChart& chart, double s, double r, double theta) {
    return chart.curve().point(s) + chart.normal_at(s, theta) * r;
}

/// Surface density of the unit-speed tube chart, r (1 - r <H, nu>).
inline double area_element(const TubeChart& chart, double s, double r, double theta) {
    const Vec3 H = chart.curve().curvature_at(s);
    const Vec3 nu = chart.normal_at(s, theta);
    const double val = r * (1.0 - r * dot(H, nu));
    if (!(val > 0.0)) {
        std::ostringstream os;
        os << "area_element: nonpositive density at s=" << s << ", theta=" << theta
           << " (r=" << r << " too large for curvature " << H.norm() << ")";
        throw std::domain_error(os.str());
    }
    return val;
}

/// Closest-point parameter and distance (coarse scan + Newton on the squared
/// distance; ties resolved toward the smallest parameter).
inline void closest_point_param(const ClosedCurve& curve, const Vec3& x, double* s_out,
                                double* dist_out) {
    const int dense = 4 * curve.size();
    double best_s = 0.0, best_d2 = 1e300;
    for (int j = 0; j < dense; ++j) {
        const double s = two_pi() * j / dense;
        const double d2 = (x - curve.point(s)).norm2();
        if (d2 < best_d2) {  // strict: ties keep the smallest parameter
            best_d2 = d2;
            best_s = s;
        }
    }
    const double max_step = two_pi() / dense;
    double s = best_s;
    for (int it = 0; it < 60; ++it) {
        Vec3 p, d1, d2v;
        curve.eval012(s, &p, &d1, &d2v);
        const Vec3 e = x - p;
        const double g = -2.0 * dot(e, d1);
        const double h = 2.0 * (d1.norm2() - dot(e, d2v));
        if (!(h > 0.0)) break;
        double step = -g / h;
        step = std::clamp(step, -max_step, max_step);
        s += step;
        if (std::fabs(step) < 1e-15 * two_pi()) break;
    }
    s = std::fmod(s, two_pi());
    if (s < 0) s += two_pi();
    if (s_out) *s_out = s;
    if (dist_out) *dist_out = (x - curve.point(s)).norm();
}

inline CurveCoords closest_point_projection(const TubeChart& chart, const Vec3& x) {
    CurveCoords c;
    closest_point_param(chart.curve(), x, &c.s, &c.r);
    if (c.r < 1e-14 * chart.curve().length()) {
        c.theta = 0.0;  // chart is degenerate on the core; canonical angle
        return c;
    }
    const FrameVectors f = chart.frame_at(c.s);
    const Vec3 d = x - chart.curve().point(c.s);
    c.theta = std::atan2(dot(d, f.n2), dot(d, f.n1));
    if (c.theta < 0) c.theta += two_pi();
    if (c.r >= chart.reach()) {
        std::ostringstream os;
        os << "closest_point_projection: point at distance " << c.r
           << " lies outside the certified tube (reach " << chart.reach() << ")";
        throw ProjectionError(os.str(), c);
    }
    return c;
}

}  // namespace dislsim
