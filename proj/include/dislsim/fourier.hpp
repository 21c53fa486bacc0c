#pragma once

// Trigonometric interpolation of periodic samples on the uniform grid
// s_j = 2*pi*j/N. Real coefficient form:
//   f(s) = a0 + sum_{k=1}^{K-1} (a_k cos ks + b_k sin ks) + a_K cos(Ks)
// with K = N/2 for even N (K = (N-1)/2 otherwise, no pure-Nyquist term).
// The Nyquist mode is dropped from derivatives, which is the usual
// symmetric spectral-differentiation convention.

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "vec.hpp"

namespace dislsim {

namespace detail {

/// Cached cos/sin(2 pi k j / n) tables shared by the fit routines, laid out
/// [k * n + j] for k = 0..n/2.
struct TrigTable {
    std::vector<double> c, s;
};
inline const TrigTable& trig_table(int n) {
    static std::map<int, TrigTable> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    TrigTable t;
    const int K = n / 2;
    t.c.resize(size_t(K + 1) * n);
    t.s.resize(size_t(K + 1) * n);
    for (int k = 0; k <= K; ++k)
        for (int j = 0; j < n; ++j) {
            const double ang = two_pi() * k * j / n;
            t.c[size_t(k) * n + j] = std::cos(ang);
            t.s[size_t(k) * n + j] = std::sin(ang);
        }
    return cache.emplace(n, std::move(t)).first->second;
}

// cos(k s), sin(k s) walker; re-anchors periodically to keep roundoff flat.
class ModeWalker {
  public:
    explicit ModeWalker(double s) : s_(s), c1_(std::cos(s)), s1_(std::sin(s)) {}
    // advance from mode k to k+1
    void step() {
        ++k_;
        if (k_ % 32 == 0) {
            ck_ = std::cos(k_ * s_);
            sk_ = std::sin(k_ * s_);
        } else {
            const double c = ck_ * c1_ - sk_ * s1_;
            const double s = sk_ * c1_ + ck_ * s1_;
            ck_ = c;
            sk_ = s;
        }
    }
    double cosk() const { return ck_; }
    double sink() const { return sk_; }

  private:
    double s_;
    double c1_, s1_;
    double ck_ = 1.0, sk_ = 0.0;
    long k_ = 0;
};

}  // namespace detail

/// Scalar periodic interpolant.
class TrigSeries {
  public:
    TrigSeries() = default;

    static TrigSeries fit(const std::vector<double>& y) {
        const int n = static_cast<int>(y.size());
        if (n < 2) throw std::invalid_argument("TrigSeries::fit: need at least 2 samples");
        TrigSeries t;
        const int K = n / 2;
        t.a_.assign(K + 1, 0.0);
        t.b_.assign(K + 1, 0.0);
        t.nyquist_ = (n % 2 == 0);
        const detail::TrigTable& tab = detail::trig_table(n);
        for (int k = 0; k <= K; ++k) {
            double ca = 0.0, cb = 0.0;
            const double* ck = &tab.c[size_t(k) * n];
            const double* sk = &tab.s[size_t(k) * n];
            for (int j = 0; j < n; ++j) {
                ca += y[j] * ck[j];
                cb += y[j] * sk[j];
            }
            const bool half = (k == 0) || (t.nyquist_ && k == K);
            const double w = (half ? 1.0 : 2.0) / n;
            t.a_[k] = w * ca;
            t.b_[k] = half ? 0.0 : w * cb;
        }
        return t;
    }

    int max_mode() const { return static_cast<int>(a_.size()) - 1; }

    double eval(double s) const {
        double f = a_[0];
        detail::ModeWalker w(s);
        for (int k = 1; k <= max_mode(); ++k) {
            w.step();
            f += a_[k] * w.cosk() + b_[k] * w.sink();
        }
        return f;
    }

    double deriv(double s, int order = 1) const {
        const int K = max_mode();
        const int kmax = nyquist_ ? K - 1 : K;  // drop Nyquist in derivatives
        double f = (order == 0) ? a_[0] : 0.0;
        detail::ModeWalker w(s);
        for (int k = 1; k <= kmax; ++k) {
            w.step();
            double ak = a_[k], bk = b_[k];
            // each derivative maps (a,b) -> (k b, -k a)
            for (int d = 0; d < order; ++d) {
                const double na = k * bk, nb = -k * ak;
                ak = na;
                bk = nb;
            }
            f += ak * w.cosk() + bk * w.sink();
        }
        return f;
    }

    /// Antiderivative with F(0) = 0 (includes the secular a0*s part).
    double antiderivative(double s) const {
        double f = a_[0] * s;
        detail::ModeWalker w(s);
        for (int k = 1; k <= max_mode(); ++k) {
            w.step();
            f += (a_[k] * w.sink() - b_[k] * (w.cosk() - 1.0)) / k;
        }
        return f;
    }

    double mean() const { return a_[0]; }

  private:
    std::vector<double> a_, b_;
    bool nyquist_ = false;
};

/// Periodic interpolant of a 3-vector field (one mode walk serves all
/// components and derivative orders 0..2).
class TrigCurve3 {
  public:
    TrigCurve3() = default;

    static TrigCurve3 fit(const std::vector<Vec3>& y) {
        const int n = static_cast<int>(y.size());
        if (n < 2) throw std::invalid_argument("TrigCurve3::fit: need at least 2 samples");
        TrigCurve3 t;
        const int K = n / 2;
        t.A_.assign(K + 1, Vec3{});
        t.B_.assign(K + 1, Vec3{});
        t.nyquist_ = (n % 2 == 0);
        const detail::TrigTable& tab = detail::trig_table(n);
        for (int k = 0; k <= K; ++k) {
            Vec3 ca{}, cb{};
            const double* ck = &tab.c[size_t(k) * n];
            const double* sk = &tab.s[size_t(k) * n];
            for (int j = 0; j < n; ++j) {
                ca += y[j] * ck[j];
                cb += y[j] * sk[j];
            }
            const bool half = (k == 0) || (t.nyquist_ && k == K);
            const double w = (half ? 1.0 : 2.0) / n;
            t.A_[k] = ca * w;
            t.B_[k] = half ? Vec3{} : cb * w;
        }
        return t;
    }

    int max_mode() const { return static_cast<int>(A_.size()) - 1; }

    Vec3 eval(double s) const {
        Vec3 p = A_[0];
        detail::ModeWalker w(s);
        for (int k = 1; k <= max_mode(); ++k) {
            w.step();
            p += A_[k] * w.cosk() + B_[k] * w.sink();
        }
        return p;
    }

    /// Value plus first (and optionally second) derivative in one pass.
    void eval012(double s, Vec3* p, Vec3* d1, Vec3* d2) const {
        const int K = max_mode();
        const int kmax_d = nyquist_ ? K - 1 : K;
        if (p) *p = A_[0];
        if (d1) *d1 = Vec3{};
        if (d2) *d2 = Vec3{};
        detail::ModeWalker w(s);
        for (int k = 1; k <= K; ++k) {
            w.step();
            const double c = w.cosk(), sn = w.sink();
            if (p) *p += A_[k] * c + B_[k] * sn;
            if (k <= kmax_d) {
                if (d1) *d1 += (B_[k] * c - A_[k] * sn) * k;
                if (d2) *d2 += (A_[k] * c + B_[k] * sn) * (-double(k) * k);
            }
        }
    }

    Vec3 deriv1(double s) const {
        Vec3 d;
        eval012(s, nullptr, &d, nullptr);
        return d;
    }

    /// Smallest m such that all coefficients beyond m are below tol times the
    /// largest one (an effective bandwidth for quadrature panel sizing).
    int bandwidth(double tol = 1e-11) const {
        double peak = 0.0;
        const int K = max_mode();
        std::vector<double> mag(K + 1);
        for (int k = 0; k <= K; ++k) {
            mag[k] = A_[k].norm() + B_[k].norm();
            if (k >= 1) peak = std::max(peak, mag[k]);
        }
        int m = 1;
        for (int k = 1; k <= K; ++k)
            if (mag[k] > tol * peak) m = k;
        return m;
    }

  private:
    std::vector<Vec3> A_, B_;
    bool nyquist_ = false;
};

/// Bank of scalar periodic interpolants sharing one grid (used to sweep a
/// sampled field along the curve at off-grid parameters).
class TrigBank {
  public:
    TrigBank() = default;

    /// samples laid out row-major: samples[j*channels + m] = f_m(s_j).
    static TrigBank fit(const std::vector<double>& samples, int n, int channels) {
        if (n < 2 || channels < 1 || static_cast<int>(samples.size()) != n * channels)
            throw std::invalid_argument("TrigBank::fit: bad sample layout");
        TrigBank t;
        const int K = n / 2;
        t.channels_ = channels;
        t.nyquist_ = (n % 2 == 0);
        t.A_.assign((K + 1) * channels, 0.0);
        t.B_.assign((K + 1) * channels, 0.0);
        const detail::TrigTable& tab = detail::trig_table(n);
        for (int k = 0; k <= K; ++k) {
            const bool half = (k == 0) || (t.nyquist_ && k == K);
            const double w = (half ? 1.0 : 2.0) / n;
            for (int j = 0; j < n; ++j) {
                const double c = tab.c[size_t(k) * n + j] * w,
                             sn = half ? 0.0 : tab.s[size_t(k) * n + j] * w;
                const double* row = &samples[j * channels];
                double* ak = &t.A_[k * channels];
                double* bk = &t.B_[k * channels];
                for (int m = 0; m < channels; ++m) {
                    ak[m] += row[m] * c;
                    bk[m] += row[m] * sn;
                }
            }
        }
        return t;
    }

    int channels() const { return channels_; }

    void eval(double s, double* out) const {
        const int K = static_cast<int>(A_.size()) / channels_ - 1;
        for (int m = 0; m < channels_; ++m) out[m] = A_[m];
        detail::ModeWalker w(s);
        for (int k = 1; k <= K; ++k) {
            w.step();
            const double c = w.cosk(), sn = w.sink();
            const double* ak = &A_[k * channels_];
            const double* bk = &B_[k * channels_];
            for (int m = 0; m < channels_; ++m) out[m] += ak[m] * c + bk[m] * sn;
        }
    }

  private:
    int channels_ = 0;
    std::vector<double> A_, B_;
    bool nyquist_ = false;
};

}  // namespace dislsim
