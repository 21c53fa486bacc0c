#pragma once

// Singular strain of a dislocation loop,
//   S(x) = b (x) integral_gamma k(x - y) ^ tau_y dH^1_y,
//   k(x) = grad G(x) = -x / (4 pi |x|^3),
// its near-curve decomposition
//   S = (1/2pi) b (x) [ tau^nu / dist + (|log dist|/2) tau^H + R ],
// and the curve-variation derivatives
//   w^phi(x)   = integral <k(x-y) ^ tau, phi>,
//   dS^phi(x)  = -b (x) grad w^phi.
//
// Line integrals use composite Gauss-Legendre panels graded dyadically toward
// the closest point; panel lengths halve until they fall below a fixed
// fraction of the distance to the curve, which is the scale of the integrand.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "curve.hpp"
#include "frame.hpp"
#include "quadrature.hpp"

namespace dislsim {

class OnCurveError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// k(x) = grad G = -x/(4 pi |x|^3), homogeneous of degree -2.
inline Vec3 newton_kernel(const Vec3& x) {
    const double r2 = x.norm2();
    if (!(r2 > 0.0)) throw OnCurveError("newton_kernel: singular at x = 0");
    const double r = std::sqrt(r2);
    return x * (-1.0 / (4.0 * pi() * r2 * r));
}

/// Dk(x) = -(1/(4 pi |x|^3)) (I - 3 xhat xhat^T); symmetric (Hessian of G).
inline Mat3 newton_kernel_jacobian(const Vec3& x) {
    const double r2 = x.norm2();
    if (!(r2 > 0.0)) throw OnCurveError("newton_kernel_jacobian: singular at x = 0");
    const double r = std::sqrt(r2);
    const double c = -1.0 / (4.0 * pi() * r2 * r);
    Mat3 J = Mat3::identity() * c;
    const Vec3 xh = x / r;
    J += Mat3::outer(xh, xh) * (-3.0 * c);
    return J;
}

/// Line-quadrature rule along a curve: parameter values, weights (in the
/// parameter measure), positions and parameter derivatives. gamma' carries
/// the arclength factor, so sums approximate integrals over dH^1.
struct LineRule {
    std::vector<double> sigma, w;
    std::vector<Vec3> p, dp;
    void reserve(size_t n) {
        sigma.reserve(n);
        w.reserve(n);
        p.reserve(n);
        dp.reserve(n);
    }
    size_t size() const { return sigma.size(); }
};

namespace detail {

inline void append_panel(const ClosedCurve& curve, double lo, double hi, int order,
                         LineRule& rule) {
    const GaussRule& g = gauss_legendre(order);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int q = 0; q < order; ++q) {
        const double s = mid + half * g.nodes[q];
        rule.sigma.push_back(s);
        rule.w.push_back(half * g.weights[q]);
        Vec3 p, d1;
        curve.eval012(s, &p, &d1, nullptr);
        rule.p.push_back(p);
        rule.dp.push_back(d1);
    }
}

}  // namespace detail

/// Panels graded toward s_star with the near scale set by dist (a Euclidean
/// distance; converted to parameter units with the local speed). Panels are
/// additionally capped at the curve's bandwidth-resolving length.
inline LineRule build_graded_rule(const ClosedCurve& curve, double s_star, double dist,
                                  const QuadratureSpec& spec) {
    const double d_param = dist / curve.speed(s_star);
    const std::vector<double> edges =
        graded_offsets(pi(), d_param, spec.grading_factor, spec.grading_ratio);
    const double cap = curve.max_panel_length();
    LineRule rule;
    const int per_side = static_cast<int>(edges.size());
    rule.reserve(2 * per_side * spec.panel_order);
    for (int side : {+1, -1}) {
        for (int m = 0; m < per_side; ++m) {
            const double outer = edges[m];
            const double inner = (m + 1 < per_side) ? edges[m + 1] : 0.0;
            const int pieces = std::max(1, static_cast<int>(std::ceil((outer - inner) / cap)));
            for (int q = 0; q < pieces; ++q) {
                const double lo = inner + (outer - inner) * q / pieces;
                const double hi = inner + (outer - inner) * (q + 1) / pieces;
                const double a = s_star + side * lo, b = s_star + side * hi;
                detail::append_panel(curve, std::min(a, b), std::max(a, b), spec.panel_order,
                                     rule);
            }
        }
    }
    return rule;
}

/// Uniform composite rule over the whole period.
inline LineRule build_uniform_rule(const ClosedCurve& curve, int panels, int order) {
    LineRule rule;
    rule.reserve(size_t(panels) * order);
    for (int m = 0; m < panels; ++m)
        detail::append_panel(curve, two_pi() * m / panels, two_pi() * (m + 1) / panels, order,
                             rule);
    return rule;
}

/// Precomputed ladder of uniform rules for one curve: each tier doubles the
/// panel count of the previous one, and carries the distance floor above
/// which it is accurate (panel length <= ~0.8 distance). Targets closer than
/// the finest tier need a graded rule.
struct CurveRules {
    std::vector<LineRule> tiers;     // coarse to fine
    std::vector<double> floors;      // matching distance floors
    double mid_floor = 0.0, far_floor = 0.0;

    /// extra_depth: how many doubling tiers to add below the mid rule.
    CurveRules(const ClosedCurve& curve, const QuadratureSpec& spec, int extra_depth = 0) {
        const int cap_panels = static_cast<int>(std::ceil(two_pi() / curve.max_panel_length()));
        const double mean_speed = curve.length() / two_pi();
        auto add_tier = [&](int panels, int order) {
            tiers.push_back(build_uniform_rule(curve, panels, order));
            floors.push_back(1.2 * (two_pi() / panels) * mean_speed);
        };
        add_tier(std::max(spec.far_panels, cap_panels), spec.far_order);
        far_floor = floors.back();
        int panels = std::max(spec.mid_panels, cap_panels);
        add_tier(panels, spec.mid_order);
        mid_floor = floors.back();
        for (int k = 0; k < extra_depth; ++k) {
            panels *= 2;
            add_tier(panels, spec.mid_order);
        }
    }
    /// Coarsest accurate tier; nullptr means: build a graded rule.
    const LineRule* pick(double dist) const {
        for (size_t k = 0; k < tiers.size(); ++k)
            if (dist >= floors[k]) return &tiers[k];
        return nullptr;
    }
};

/// Shat(x) = integral k(x - y) ^ tau dH^1 over the rule; S = b (x) Shat.
inline Vec3 strain_unit_vector(const LineRule& rule, const Vec3& x) {
    Vec3 acc{};
    const size_t n = rule.size();
    for (size_t i = 0; i < n; ++i)
        acc += cross(newton_kernel(x - rule.p[i]), rule.dp[i]) * rule.w[i];
    return acc;
}

/// Periodic variation field phi along a host curve.
class Variation {
  public:
    Variation(const ClosedCurve& host, std::vector<Vec3> values) : values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != host.size())
            throw std::invalid_argument("Variation: sample count must match the host curve");
        interp_ = TrigCurve3::fit(values_);
    }
    const std::vector<Vec3>& values() const { return values_; }
    Vec3 eval(double s) const { return interp_.eval(s); }
    Vec3 deriv(double s) const { return interp_.deriv1(s); }

  private:
    std::vector<Vec3> values_;
    TrigCurve3 interp_;
};

inline std::vector<Vec3> eval_on_rule(const Variation& phi, const LineRule& rule) {
    std::vector<Vec3> vals(rule.size());
    for (size_t i = 0; i < rule.size(); ++i) vals[i] = phi.eval(rule.sigma[i]);
    return vals;
}

/// w^phi(x) with phi pre-evaluated on the rule nodes.
inline double wphi_on_rule(const LineRule& rule, const std::vector<Vec3>& phi_vals,
                           const Vec3& x) {
    double acc = 0.0;
    for (size_t i = 0; i < rule.size(); ++i)
        acc += rule.w[i] * dot(cross(newton_kernel(x - rule.p[i]), rule.dp[i]), phi_vals[i]);
    return acc;
}

/// grad w^phi(x) = integral Dk(x - y) (gamma' ^ phi) d sigma.
inline Vec3 gradwphi_on_rule(const LineRule& rule, const std::vector<Vec3>& phi_vals,
                             const Vec3& x) {
    Vec3 acc{};
    for (size_t i = 0; i < rule.size(); ++i)
        acc += (newton_kernel_jacobian(x - rule.p[i]) * cross(rule.dp[i], phi_vals[i])) *
               rule.w[i];
    return acc;
}

struct StrainEval {
    Mat3 value;              // S(x)
    double dist = 0.0;       // distance to the curve
    double quad_error = 0.0; // refined-rule error estimate (0 unless requested)
    bool has_decomposition = false;
    Vec3 leading_inverse;    // tau ^ nu       (to be divided by dist)
    Vec3 leading_log;        // (1/2) tau ^ H  (multiplied by |log dist|)
    Vec3 remainder;          // R(x)
};

namespace detail {

inline Vec3 strain_unit_at(const ClosedCurve& curve, const Vec3& x, double s_star, double dist,
                           const QuadratureSpec& spec, const CurveRules* rules,
                           double* err_out = nullptr) {
    const LineRule* pre = rules ? rules->pick(dist) : nullptr;
    Vec3 shat;
    if (pre) {
        shat = strain_unit_vector(*pre, x);
    } else {
        const LineRule rule = build_graded_rule(curve, s_star, dist, spec);
        shat = strain_unit_vector(rule, x);
    }
    if (err_out && spec.estimate_error) {
        QuadratureSpec fine = spec;
        fine.grading_factor = 0.5 * spec.grading_factor;
        fine.panel_order = spec.panel_order + 4;
        const LineRule rule = build_graded_rule(curve, s_star, dist, fine);
        *err_out = (strain_unit_vector(rule, x) - shat).norm();
    }
    return shat;
}

inline void fill_decomposition(const ClosedCurve& curve, double s_star, const Vec3& nu,
                               double dist, const Vec3& shat, StrainEval& out) {
    const Vec3 tau = curve.tangent_at(s_star);
    const Vec3 H = curve.curvature_at(s_star);
    out.leading_inverse = cross(tau, nu);
    out.leading_log = cross(tau, H) * 0.5;
    out.remainder =
        shat * two_pi() - out.leading_inverse / dist - out.leading_log * abs_log(dist);
    out.has_decomposition = true;
}

}  // namespace detail

/// Full line-integral evaluation of S at x; the near-curve decomposition is
/// populated when x lies inside the certified tube.
inline StrainEval singular_strain(const ClosedCurve& curve, const BurgersVector& b, const Vec3& x,
                                  const QuadratureSpec& spec = {},
                                  const CurveRules* rules = nullptr) {
    double s_star, dist;
    closest_point_param(curve, x, &s_star, &dist);
    if (dist < spec.singularity_floor * curve.length())
        throw OnCurveError("singular_strain: evaluation point on the curve (dist below floor)");
    StrainEval out;
    out.dist = dist;
    double berr = 0.0;
    const Vec3 shat = detail::strain_unit_at(curve, x, s_star, dist, spec, rules,
                                             spec.estimate_error ? &berr : nullptr);
    out.quad_error = berr * std::sqrt(b.norm2());
    out.value = Mat3::outer(b.b, shat);
    if (dist < curve.reach()) {
        const Vec3 nu = (x - curve.point(s_star)) / dist;
        detail::fill_decomposition(curve, s_star, nu, dist, shat, out);
    }
    return out;
}

/// Decomposition on the tube surface x = psi_eps(s, theta); s and theta are
/// exact chart coordinates, so no projection is involved.
inline StrainEval strain_expansion(const TubeChart& chart, const BurgersVector& b, double eps,
                                   double s, double theta, const QuadratureSpec& spec = {}) {
    if (!(eps < chart.reach()))
        throw std::invalid_argument("strain_expansion: eps must stay below the embeddedness radius");
    const ClosedCurve& curve = chart.curve();
    const Vec3 nu = chart.normal_at(s, theta);
    const Vec3 x = curve.point(s) + nu * eps;
    StrainEval out;
    out.dist = eps;
    double berr = 0.0;
    const Vec3 shat = detail::strain_unit_at(curve, x, s, eps, spec, nullptr,
                                             spec.estimate_error ? &berr : nullptr);
    out.quad_error = berr * std::sqrt(b.norm2());
    out.value = Mat3::outer(b.b, shat);
    detail::fill_decomposition(curve, s, nu, eps, shat, out);
    return out;
}

/// w^phi(x) = integral <k(x-y) ^ tau, phi> dH^1.
inline double w_phi(const ClosedCurve& curve, const Variation& phi, const Vec3& x,
                    const QuadratureSpec& spec = {}, const CurveRules* rules = nullptr) {
    double s_star, dist;
    closest_point_param(curve, x, &s_star, &dist);
    if (dist < spec.singularity_floor * curve.length())
        throw OnCurveError("w_phi: evaluation point on the curve");
    const LineRule* pre = rules ? rules->pick(dist) : nullptr;
    if (pre) return wphi_on_rule(*pre, eval_on_rule(phi, *pre), x);
    const LineRule rule = build_graded_rule(curve, s_star, dist, spec);
    return wphi_on_rule(rule, eval_on_rule(phi, rule), x);
}

/// dS^phi(x) = -b (x) grad w^phi(x), the kernel differentiated inside the
/// integral (no finite differences).
inline Mat3 dot_S(const ClosedCurve& curve, const BurgersVector& b, const Variation& phi,
                  const Vec3& x, const QuadratureSpec& spec = {},
                  const CurveRules* rules = nullptr) {
    double s_star, dist;
    closest_point_param(curve, x, &s_star, &dist);
    if (dist < spec.singularity_floor * curve.length())
        throw OnCurveError("dot_S: evaluation point on the curve");
    const LineRule* pre = rules ? rules->pick(dist) : nullptr;
    Vec3 grad;
    if (pre) {
        grad = gradwphi_on_rule(*pre, eval_on_rule(phi, *pre), x);
    } else {
        const LineRule rule = build_graded_rule(curve, s_star, dist, spec);
        grad = gradwphi_on_rule(rule, eval_on_rule(phi, rule), x);
    }
    return Mat3::outer(b.b, grad) * (-1.0);
}

// ---------------------------------------------------------------------------
// Open straight-segment helpers. These exist for oracles (straight-line
// tests); they are not ClosedCurves and are rejected by the energy/force
// layers by construction.

struct StraightSegment {
    Vec3 center;
    Vec3 direction;  // unit
    double half_length;
    StraightSegment(const Vec3& c, const Vec3& d, double ell)
        : center(c), direction(d.normalized()), half_length(ell) {
        if (!(ell > 0)) throw std::invalid_argument("StraightSegment: need positive half-length");
    }
    Vec3 point(double t) const { return center + direction * t; }  // t in [-ell, ell]
};

/// Closed form of integral_{-ell}^{ell} k(x - y) ^ tau ds for the segment.
inline Vec3 segment_strain_unit_closed_form(const StraightSegment& seg, const Vec3& x) {
    const Vec3 e = x - seg.center;
    const double z = dot(e, seg.direction);
    const Vec3 q = e - seg.direction * z;
    const double rho2 = q.norm2();
    if (!(rho2 > 0)) throw OnCurveError("segment strain: point on the segment axis");
    const double lp = seg.half_length - z, lm = seg.half_length + z;
    const double I = (lp / std::sqrt(rho2 + lp * lp) + lm / std::sqrt(rho2 + lm * lm)) / rho2;
    return cross(q, seg.direction) * (-I / (4.0 * pi()));
}

/// Same quantity by the graded panel machinery (validates the quadrature path).
inline Vec3 segment_strain_unit_quadrature(const StraightSegment& seg, const Vec3& x,
                                           const QuadratureSpec& spec = {}) {
    const Vec3 e = x - seg.center;
    const double z = std::clamp(dot(e, seg.direction), -seg.half_length, seg.half_length);
    const double dist = (x - seg.point(z)).norm();
    Vec3 acc{};
    auto add_panel = [&](double lo, double hi) {
        const GaussRule& g = gauss_legendre(spec.panel_order);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int q = 0; q < spec.panel_order; ++q) {
            const double t = mid + half * g.nodes[q];
            acc += cross(newton_kernel(x - seg.point(t)), seg.direction) *
                   (half * g.weights[q]);
        }
    };
    for (int side : {+1, -1}) {
        const double reachable = (side > 0) ? seg.half_length - z : z + seg.half_length;
        if (reachable <= 0) continue;
        const std::vector<double> edges =
            graded_offsets(reachable, dist, spec.grading_factor, spec.grading_ratio);
        for (size_t m = 0; m < edges.size(); ++m) {
            const double outer = edges[m];
            const double inner = (m + 1 < edges.size()) ? edges[m + 1] : 0.0;
            const double a = z + side * inner, b = z + side * outer;
            add_panel(std::min(a, b), std::max(a, b));
        }
    }
    return acc;
}

}  // namespace dislsim
