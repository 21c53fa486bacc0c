#pragma once

// Pluggable domain-correction field. The bounded-domain Neumann solve is not
// part of this library; the interface carries u and grad u so the energy and
// force terms that involve the domain interaction keep their full algebra and
// a real solver can be plugged in later. The default field is identically
// zero (whole-space setting).

#include <cmath>
#include <memory>
#include <stdexcept>

#include "quadrature.hpp"
#include "vec.hpp"

namespace dislsim {

class CorrectionField {
  public:
    virtual ~CorrectionField() = default;
    virtual Vec3 u(const Vec3& x) const = 0;
    virtual Mat3 grad_u(const Vec3& x) const = 0;  // (i,j) = d u_i / d x_j
    virtual bool is_zero() const { return false; }
    /// Providers that opt out of the mean-value consistency check.
    virtual bool unchecked() const { return false; }
    /// Bounding box of the stand-in domain for the Dirichlet part of I(u);
    /// fields without a domain contribute no interaction energy.
    virtual bool has_domain(Vec3* lo, Vec3* hi) const {
        (void)lo;
        (void)hi;
        return false;
    }
};

class ZeroCorrection final : public CorrectionField {
  public:
    Vec3 u(const Vec3&) const override { return {}; }
    Mat3 grad_u(const Vec3&) const override { return {}; }
    bool is_zero() const override { return true; }
};

class ConstantCorrection final : public CorrectionField {
  public:
    explicit ConstantCorrection(const Vec3& c) : c_(c) {}
    Vec3 u(const Vec3&) const override { return c_; }
    Mat3 grad_u(const Vec3&) const override { return {}; }

  private:
    Vec3 c_;
};

/// u(x) = A x on a box (harmonic for any A; Dirichlet energy |A|^2 vol / 2).
class LinearCorrection final : public CorrectionField {
  public:
    LinearCorrection(const Mat3& A, const Vec3& lo, const Vec3& hi) : A_(A), lo_(lo), hi_(hi) {}
    Vec3 u(const Vec3& x) const override { return A_ * x; }
    Mat3 grad_u(const Vec3&) const override { return A_; }
    bool has_domain(Vec3* lo, Vec3* hi) const override {
        if (lo) *lo = lo_;
        if (hi) *hi = hi_;
        return true;
    }

  private:
    Mat3 A_;
    Vec3 lo_, hi_;
};

/// Largest mean-value defect |u(x) - avg_{|y-x|=rho} u(y)| over the probes.
inline double mean_value_defect(const CorrectionField& field, const std::vector<Vec3>& probes,
                                double rho) {
    const int nc = 12, np = 24;
    const GaussRule& g = gauss_legendre(nc);
    double worst = 0.0;
    for (const Vec3& x : probes) {
        Vec3 avg{};
        double wsum = 0.0;
        for (int i = 0; i < nc; ++i) {
            const double ct = g.nodes[i], st = std::sqrt(1.0 - ct * ct);
            for (int j = 0; j < np; ++j) {
                const double ph = two_pi() * j / np;
                const Vec3 y = x + Vec3{st * std::cos(ph), st * std::sin(ph), ct} * rho;
                avg += field.u(y) * g.weights[i];
                wsum += g.weights[i];
            }
        }
        worst = std::max(worst, (avg / wsum - field.u(x)).norm());
    }
    return worst;
}

/// Harmonic-consistency gate: providers must satisfy the mean-value property
/// at test resolution (1e-4) or declare themselves unchecked.
inline void require_harmonic_consistent(const CorrectionField& field,
                                        const std::vector<Vec3>& probes, double rho) {
    if (field.is_zero() || field.unchecked()) return;
    double scale = 1.0;
    for (const Vec3& x : probes) scale = std::max(scale, field.u(x).norm());
    if (mean_value_defect(field, probes, rho) > 1e-4 * scale)
        throw std::invalid_argument(
            "correction field fails the mean-value (harmonicity) check and is not declared "
            "unchecked");
}

/// Interaction energy I(u) of the stand-in domain. With no outer boundary the
/// boundary term is absent, leaving the Dirichlet part over the provider box.
inline double interaction_energy(const CorrectionField& field, int order = 12) {
    Vec3 lo, hi;
    if (field.is_zero() || !field.has_domain(&lo, &hi)) return 0.0;
    const GaussRule& g = gauss_legendre(order);
    const Vec3 mid = (lo + hi) * 0.5, half = (hi - lo) * 0.5;
    double acc = 0.0;
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j)
            for (int k = 0; k < order; ++k) {
                const Vec3 x = mid + Vec3{half.x * g.nodes[i], half.y * g.nodes[j],
                                          half.z * g.nodes[k]};
                acc += 0.5 * field.grad_u(x).frobenius2() * g.weights[i] * g.weights[j] *
                       g.weights[k];
            }
    return acc * half.x * half.y * half.z;
}

}  // namespace dislsim
