#pragma once

// Closed sampled curves in R^3. Nodes are uniform in the curve parameter
// s in [0, 2*pi); differential quantities come from trigonometric
// interpolation, so everything is spectrally accurate for smooth loops.
// After resample_arclength the parameter is proportional to arclength and
// the speed |gamma'| is the constant L/(2*pi).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fourier.hpp"
#include "vec.hpp"

namespace dislsim {

struct BurgersVector {
    Vec3 b;
    explicit BurgersVector(const Vec3& v) : b(v) {
        if (!(b.norm2() > 0.0))
            throw std::invalid_argument("BurgersVector: |b| must be positive");
    }
    double norm2() const { return b.norm2(); }
};

class ClosedCurve {
  public:
    explicit ClosedCurve(std::vector<Vec3> nodes) : nodes_(std::move(nodes)) {
        const int n = static_cast<int>(nodes_.size());
        if (n < 8) throw std::invalid_argument("ClosedCurve: need at least 8 nodes");
        for (int i = 0; i < n; ++i) {
            const double seg = (nodes_[(i + 1) % n] - nodes_[i]).norm();
            if (!(seg > 0.0))
                throw std::invalid_argument("ClosedCurve: degenerate (zero-length) segment at node " +
                                            std::to_string(i));
        }
        interp_ = TrigCurve3::fit(nodes_);
        bandwidth_ = std::max(2, interp_.bandwidth());
        rebuild_metadata();
    }

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    double length() const { return length_; }
    double param_of_node(int i) const { return two_pi() * i / size(); }

    Vec3 point(double s) const { return interp_.eval(s); }
    Vec3 derivative(double s) const { return interp_.deriv1(s); }
    void eval012(double s, Vec3* p, Vec3* d1, Vec3* d2) const { interp_.eval012(s, p, d1, d2); }

    double speed(double s) const { return interp_.deriv1(s).norm(); }

    Vec3 tangent_at(double s) const {
        const Vec3 d = interp_.deriv1(s);
        return d / d.norm();
    }

    /// Curvature vector H = (gamma'' - <gamma'', tau> tau) / |gamma'|^2
    /// (the unit-speed second derivative, valid for any regular parametrization).
    Vec3 curvature_at(double s) const {
        Vec3 p, d1, d2;
        interp_.eval012(s, &p, &d1, &d2);
        const double v2 = d1.norm2();
        const Vec3 tau = d1 / std::sqrt(v2);
        return (d2 - tau * dot(d2, tau)) / v2;
    }

    /// Arclength from parameter 0 to s.
    double arclength(double s) const { return speed_series_.antiderivative(s); }

    /// Inverse of the arclength function (Newton; ell may be any real, result
    /// is the unwrapped parameter).
    double param_of_arclength(double ell) const {
        double s = ell / length_ * two_pi();
        for (int it = 0; it < 60; ++it) {
            const double f = arclength(s) - ell;
            const double sp = speed_series_.eval(s);
            const double ds = f / sp;
            s -= ds;
            if (std::fabs(ds) < 1e-15 * two_pi()) break;
        }
        return s;
    }

    /// Certified lower bound on the embeddedness radius:
    /// min(1/max|H|, half the minimal non-adjacent node distance).
    double reach() const { return reach_; }
    double max_curvature() const { return max_curvature_; }
    double min_pair_gap() const { return min_pair_gap_; }

    bool is_unit_speed(double tol = 1e-8) const {
        return speed_deviation_ <= tol * (length_ / two_pi());
    }

    Vec3 centroid() const { return centroid_; }
    double diameter() const { return diameter_; }
    double max_centroid_radius() const { return max_centroid_radius_; }

    /// Effective Fourier bandwidth of the interpolant; quadrature panels are
    /// kept shorter than ~20/bandwidth so the integrand's analyticity strip
    /// (set by the curve's own wiggles) stays resolved at any target distance.
    int bandwidth() const { return bandwidth_; }
    double max_panel_length() const { return std::min(pi(), 20.0 / bandwidth_); }

  private:
    void rebuild_metadata() {
        const int n = size();
        const int dense = 4 * n;
        std::vector<double> sp(2 * n);
        for (int j = 0; j < 2 * n; ++j) sp[j] = interp_.deriv1(two_pi() * j / (2 * n)).norm();
        speed_series_ = TrigSeries::fit(sp);
        length_ = speed_series_.antiderivative(two_pi());
        if (!(length_ > 0.0)) throw std::invalid_argument("ClosedCurve: nonpositive length");

        max_curvature_ = 0.0;
        double min_speed = 1e300, max_speed = 0.0;
        for (int j = 0; j < dense; ++j) {
            const double s = two_pi() * j / dense;
            max_curvature_ = std::max(max_curvature_, curvature_at(s).norm());
            const double v = speed(s);
            min_speed = std::min(min_speed, v);
            max_speed = std::max(max_speed, v);
        }
        if (!(min_speed > 0.0))
            throw std::invalid_argument("ClosedCurve: interpolated speed vanishes (irregular curve)");
        speed_deviation_ = std::max(max_speed - length_ / two_pi(), length_ / two_pi() - min_speed);

        min_pair_gap_ = 1e300;
        diameter_ = 0.0;
        centroid_ = Vec3{};
        for (const Vec3& p : nodes_) centroid_ += p;
        centroid_ = centroid_ / n;
        max_centroid_radius_ = 0.0;
        // Proximity pairs: only points separated along the curve by more than
        // the curvature turnaround scale pi/max|H| can constrain the tube;
        // closer pairs are already controlled by the curvature bound.
        std::vector<double> ell(n);
        for (int i = 0; i < n; ++i) ell[i] = speed_series_.antiderivative(two_pi() * i / n);
        const double arc_floor =
            std::min(max_curvature_ > 0 ? pi() / max_curvature_ : 1e300, 0.5 * length_) *
            (1.0 - 1e-9);
        for (int i = 0; i < n; ++i) {
            max_centroid_radius_ = std::max(max_centroid_radius_, (nodes_[i] - centroid_).norm());
            for (int j = i + 1; j < n; ++j) {
                const double d = (nodes_[i] - nodes_[j]).norm();
                diameter_ = std::max(diameter_, d);
                const int gap = std::min(j - i, n - (j - i));
                const double arc = std::min(ell[j] - ell[i], length_ - (ell[j] - ell[i]));
                if (gap >= 2 && arc >= arc_floor) min_pair_gap_ = std::min(min_pair_gap_, d);
            }
        }
        reach_ = std::min(max_curvature_ > 0 ? 1.0 / max_curvature_ : 1e300, 0.5 * min_pair_gap_);
        if (!(reach_ > 0.0))
            throw std::invalid_argument("ClosedCurve: self-intersecting sample (embeddedness radius <= 0)");
    }

    std::vector<Vec3> nodes_;
    TrigCurve3 interp_;
    TrigSeries speed_series_;
    double length_ = 0.0;
    double reach_ = 0.0;
    double max_curvature_ = 0.0;
    double min_pair_gap_ = 0.0;
    double speed_deviation_ = 0.0;
    double diameter_ = 0.0;
    double max_centroid_radius_ = 0.0;
    Vec3 centroid_;
    int bandwidth_ = 2;
};

/// Nodes equispaced in arclength (iterated to a fixed point, so applying the
/// operation twice at the same n reproduces the nodes to roundoff).
inline ClosedCurve resample_arclength(const ClosedCurve& curve, int n) {
    if (n < 8) throw std::invalid_argument("resample_arclength: need n >= 8");
    ClosedCurve out = curve;
    std::vector<Vec3> nodes(n);
    for (int pass = 0; pass < 12; ++pass) {
        const double L = out.length();
        double move = 0.0;
        for (int i = 0; i < n; ++i) {
            const double s = out.param_of_arclength(L * i / n);
            const Vec3 p = out.point(s);
            if (pass > 0) move = std::max(move, (p - nodes[i]).norm());
            nodes[i] = p;
        }
        out = ClosedCurve(nodes);
        if (pass > 0 && move < 1e-13 * L) break;
    }
    return out;
}

/// Unit tangents at the curve nodes.
inline std::vector<Vec3> tangent(const ClosedCurve& curve) {
    std::vector<Vec3> t(curve.size());
    for (int i = 0; i < curve.size(); ++i) t[i] = curve.tangent_at(curve.param_of_node(i));
    return t;
}

/// Curvature vectors at the curve nodes.
inline std::vector<Vec3> curvature_vector(const ClosedCurve& curve) {
    std::vector<Vec3> h(curve.size());
    for (int i = 0; i < curve.size(); ++i) h[i] = curve.curvature_at(curve.param_of_node(i));
    return h;
}

inline double embeddedness_radius(const ClosedCurve& curve) { return curve.reach(); }

}  // namespace dislsim
