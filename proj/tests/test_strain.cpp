#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "dislsim/curves.hpp"
#include "dislsim/strain.hpp"

using namespace dislsim;

namespace {

std::mt19937_64 rng(2024);
double uni(double a, double b) { return a + (b - a) * (double(rng() >> 11) * 0x1.0p-53); }
Vec3 rand_unit() {
    while (true) {
        const Vec3 v{uni(-1, 1), uni(-1, 1), uni(-1, 1)};
        const double n = v.norm();
        if (n > 0.1 && n < 1.0) return v / n;
    }
}

/// Brute-force strain oracle: composite Simpson directly on the analytic
/// circle parametrization (independent of the curve/quadrature machinery).
Vec3 circle_strain_brute(double radius, const Vec3& x, int n = 400000) {
    Vec3 acc{};
    auto f = [&](double t) {
        const Vec3 y{radius * std::cos(t), radius * std::sin(t), 0.0};
        const Vec3 dy{-radius * std::sin(t), radius * std::cos(t), 0.0};
        const Vec3 d = x - y;
        const double r = d.norm();
        return cross(d * (-1.0 / (4.0 * pi() * r * r * r)), dy);
    };
    const double h = two_pi() / n;
    for (int i = 0; i < n; ++i) {
        const double t = i * h;
        acc += (f(t) + f(t + 0.5 * h) * 4.0 + f(t + h)) * (h / 6.0);
    }
    return acc;
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
    const Vec3 u = axis.normalized();
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 R = Mat3::identity() * c + Mat3::outer(u, u) * (1 - c);
    // plus the cross-product part s * [u]_x
    R(0, 1) += -s * u.z; R(0, 2) += s * u.y;
    R(1, 0) += s * u.z;  R(1, 2) += -s * u.x;
    R(2, 0) += -s * u.y; R(2, 1) += s * u.x;
    return R;
}

}  // namespace

TEST_CASE("newton kernel values and homogeneity", "[strain]") {
    CHECK((newton_kernel({1, 0, 0}) - Vec3{-1.0 / (4 * pi()), 0, 0}).norm() < 1e-16);
    CHECK((newton_kernel({2, 0, 0}) - Vec3{-1.0 / (16 * pi()), 0, 0}).norm() < 1e-16);
    for (int k = 0; k < 20; ++k) {
        const Vec3 x = rand_unit() * uni(0.1, 5.0);
        CHECK(std::fabs(newton_kernel(x).norm() - 1.0 / (4 * pi() * x.norm2())) < 1e-14);
        // homogeneity of degree -2
        CHECK((newton_kernel(x * 2.0) - newton_kernel(x) * 0.25).norm() < 1e-14);
    }
    CHECK_THROWS_AS(newton_kernel({0, 0, 0}), OnCurveError);
}

TEST_CASE("kernel jacobian matches finite differences", "[strain]") {
    for (int k = 0; k < 10; ++k) {
        const Vec3 x = rand_unit() * uni(0.5, 2.0);
        const Mat3 J = newton_kernel_jacobian(x);
        const double h = 1e-6;
        for (int j = 0; j < 3; ++j) {
            Vec3 e{};
            e[j] = h;
            const Vec3 col = (newton_kernel(x + e) - newton_kernel(x - e)) / (2 * h);
            for (int i = 0; i < 3; ++i) CHECK(std::fabs(J(i, j) - col[i]) < 1e-6);
        }
    }
}

TEST_CASE("straight segment: quadrature matches closed form and 1/(2 pi eps) law", "[strain]") {
    const StraightSegment seg({0, 0, 0}, {0, 0, 1}, 1.0);
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const Vec3 x{eps, 0, 0};
        const Vec3 exact = segment_strain_unit_closed_form(seg, x);
        const Vec3 quad = segment_strain_unit_quadrature(seg, x);
        CHECK((quad - exact).norm() < 1e-10 * exact.norm());
        if (eps <= 1e-3) {
            const Vec3 infinite = Vec3{0, 1, 0} / (two_pi() * eps);
            CHECK((exact - infinite).norm() < 0.01 * infinite.norm());
        }
    }
}

TEST_CASE("singular strain: circle axis against brute-force oracle", "[strain]") {
    const ClosedCurve circle = make_circle(1.0, 128);
    const BurgersVector b({0, 0, 1});
    for (double h : {0.4, 1.0, 2.5}) {
        const Vec3 x{0, 0, h};
        const StrainEval se = singular_strain(circle, b, x);
        const Vec3 oracle = circle_strain_brute(1.0, x);
        // closed axial form: Shat = R^2 / (2 (R^2 + h^2)^{3/2}) e3
        const Vec3 closed{0, 0, 1.0 / (2.0 * std::pow(1.0 + h * h, 1.5))};
        CHECK((oracle - closed).norm() < 1e-10);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(std::fabs(se.value(i, j) - b.b[i] * oracle[j]) < 1e-8);
    }
}

TEST_CASE("singular strain: far-field bound and on-curve error", "[strain]") {
    const ClosedCurve e = make_ellipse(2.0, 1.0, 96);
    const BurgersVector b({1.0, -0.5, 0.25});
    const double bn = std::sqrt(b.norm2());
    for (int k = 0; k < 15; ++k) {
        const Vec3 x = rand_unit() * uni(2.5, 30.0);
        const StrainEval se = singular_strain(e, b, x);
        CHECK(se.value.frobenius() <= bn * e.length() / (4.0 * pi() * se.dist * se.dist) + 1e-14);
    }
    CHECK_THROWS_AS(singular_strain(e, b, e.point(1.234)), OnCurveError);
}

TEST_CASE("singular strain: decomposition reconstructs the value", "[strain]") {
    const ClosedCurve e = make_ellipse(2.0, 1.0, 96);
    const BurgersVector b({0, 0, 2.0});
    const TubeChart chart = adapted_frame(e);
    for (int k = 0; k < 8; ++k) {
        const Vec3 x = tube_point(chart, uni(0, two_pi()), uni(0.01, 0.2), uni(0, two_pi()));
        const StrainEval se = singular_strain(e, b, x);
        REQUIRE(se.has_decomposition);
        const Vec3 recon = se.leading_inverse / se.dist + se.leading_log * abs_log(se.dist) +
                           se.remainder;
        const Mat3 V = Mat3::outer(b.b, recon * (1.0 / two_pi()));
        CHECK((V - se.value).frobenius() < 1e-12 * se.value.frobenius());
    }
    // far point: no decomposition
    const StrainEval far = singular_strain(e, b, Vec3{8, 8, 8});
    CHECK_FALSE(far.has_decomposition);
}

TEST_CASE("quadrature error estimate is reported and small", "[strain]") {
    const ClosedCurve c = make_circle(1.0, 96);
    const BurgersVector b({0, 0, 1});
    QuadratureSpec spec;
    spec.estimate_error = true;
    const StrainEval se = singular_strain(c, b, Vec3{1.001, 0, 0}, spec);
    CHECK(se.quad_error > 0.0);
    CHECK(se.quad_error < 1e-8 * se.value.frobenius());
}

TEST_CASE("strain expansion: straight-curve limit has no log term", "[strain]") {
    // A huge circle looks locally straight: leading_log stays ~|H| = 1/R.
    const ClosedCurve big = make_circle(100.0, 96);
    const TubeChart chart = adapted_frame(big);
    const BurgersVector b({0, 0, 1});
    const StrainEval se = strain_expansion(chart, b, 1e-3, 0.3, 1.0);
    CHECK(se.leading_log.norm() < 0.01);
    CHECK(se.remainder.norm() < 1.0);
}

TEST_CASE("strain expansion: remainder over |log eps| decays on the circle", "[strain]") {
    const ClosedCurve circle = make_circle(1.0, 96);
    const TubeChart chart = adapted_frame(circle);
    const BurgersVector b({0, 0, 1});
    double prev = 1e300;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        double worst = 0.0;
        for (int q = 0; q < 12; ++q) {
            const StrainEval se = strain_expansion(chart, b, eps, 0.7, two_pi() * q / 12);
            worst = std::max(worst, se.remainder.norm());
        }
        const double ratio = worst / abs_log(eps);
        CHECK(ratio < prev);
        prev = ratio;
    }
}

TEST_CASE("strain expansion: log-fit recovers the curvature coefficient", "[strain]") {
    const ClosedCurve circle = make_circle(1.0, 96);
    const TubeChart chart = adapted_frame(circle);
    const BurgersVector b({0, 0, 1});
    const double s = 1.1, theta = 0.6;
    // Fit 2 pi Shat - tau^nu/eps against |log eps|: the slope along tau^H
    // must equal |tau^H|/2 = 1/2.
    const Vec3 tau = circle.tangent_at(s);
    const Vec3 H = circle.curvature_at(s);
    const Vec3 dir = cross(tau, H).normalized();
    std::vector<double> logs, comps;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const StrainEval se = strain_expansion(chart, b, eps, s, theta);
        // leading_log * |log eps| + remainder, projected on the tau^H direction
        const Vec3 rest = se.leading_log * abs_log(eps) + se.remainder;
        logs.push_back(abs_log(eps));
        comps.push_back(dot(rest, dir));
    }
    const double slope = least_squares_slope(logs, comps);
    CHECK(std::fabs(slope - 0.5 * cross(tau, H).norm()) < 0.05 * 0.5);
}

TEST_CASE("w_phi: zero, tangential, and oracle values", "[strain]") {
    const ClosedCurve circle = make_circle(1.0, 96);
    const Variation zero(circle, std::vector<Vec3>(96, Vec3{}));
    const Vec3 x{0, 0, 0.8};
    CHECK(w_phi(circle, zero, x) == 0.0);

    const Variation tangential(circle, tangent(circle));
    CHECK(std::fabs(w_phi(circle, tangential, x)) < 1e-15);

    // phi = inward normal on the circle; axis points; brute-force oracle
    std::vector<Vec3> inward(96);
    for (int i = 0; i < 96; ++i) inward[i] = -circle.nodes()[i];
    const Variation phin(circle, inward);
    auto oracle = [&](const Vec3& xx) {
        double acc = 0.0;
        const int n = 400000;
        const double h = two_pi() / n;
        auto f = [&](double t) {
            const Vec3 y{std::cos(t), std::sin(t), 0.0};
            const Vec3 dy{-std::sin(t), std::cos(t), 0.0};
            const Vec3 d = xx - y;
            const double r = d.norm();
            return dot(cross(d * (-1.0 / (4.0 * pi() * r * r * r)), dy), -y);
        };
        for (int i = 0; i < n; ++i) acc += (f(i * h) + 4.0 * f((i + 0.5) * h) + f((i + 1) * h)) * h / 6.0;
        return acc;
    };
    for (double h : {0.5, 1.5}) {
        const Vec3 xx{0, 0, h};
        CHECK(std::fabs(w_phi(circle, phin, xx) - oracle(xx)) < 1e-8);
    }
}

TEST_CASE("dot_S: zero variation, finite-difference oracle, translations", "[strain]") {
    const ClosedCurve e = make_ellipse(2.0, 1.0, 96);
    const BurgersVector b({0.3, 1.0, -0.2});
    const Vec3 x{0.5, 1.4, 0.7};

    CHECK(dot_S(e, b, Variation(e, std::vector<Vec3>(96, Vec3{})), x).frobenius() == 0.0);

    // smooth variation; compare with (d/dt) S_{gamma + t phi}(x) at t = 0
    std::vector<Vec3> pv(96);
    for (int i = 0; i < 96; ++i) {
        const double t = two_pi() * i / 96;
        pv[i] = {0.2 * std::cos(2 * t), -0.1 * std::sin(t), 0.15 * std::cos(3 * t)};
    }
    const Variation phi(e, pv);
    const Mat3 analytic = dot_S(e, b, phi, x);
    const double h = 1e-5;
    auto displaced = [&](double t) {
        std::vector<Vec3> nodes = e.nodes();
        for (int i = 0; i < 96; ++i) nodes[i] += pv[i] * t;
        return ClosedCurve(nodes);
    };
    const Mat3 fd = (singular_strain(displaced(h), b, x).value -
                     singular_strain(displaced(-h), b, x).value) *
                    (1.0 / (2 * h));
    CHECK((analytic - fd).frobenius() < 1e-6 * std::max(1.0, analytic.frobenius()));

    // rigid translation phi == c: dS = -DS(x) c, via spatial differences
    const Vec3 c{0.4, -0.7, 0.2};
    const Variation rigid(e, std::vector<Vec3>(96, c));
    const Mat3 trans = dot_S(e, b, rigid, x);
    const double hs = 1e-5;
    const Mat3 spatial = (singular_strain(e, b, x + c * hs).value -
                          singular_strain(e, b, x - c * hs).value) *
                         (-1.0 / (2 * hs));
    CHECK((trans - spatial).frobenius() < 1e-6 * std::max(1.0, trans.frobenius()));
}

TEST_CASE("divergence-free away from the curve", "[strain]") {
    const ClosedCurve knot = make_torus_knot(2.0, 0.5, 128);
    const BurgersVector b({1, 0, 0});
    for (int k = 0; k < 6; ++k) {
        const Vec3 x = rand_unit() * uni(4.0, 7.0);
        const double h = 1e-4;
        double div = 0.0, scale = 0.0;
        for (int j = 0; j < 3; ++j) {
            Vec3 e{};
            e[j] = h;
            const Mat3 dp = singular_strain(knot, b, x + e).value;
            const Mat3 dm = singular_strain(knot, b, x - e).value;
            div += (dp(0, j) - dm(0, j)) / (2 * h);  // first row suffices: S = b (x) Shat
            scale = std::max(scale, dp.frobenius());
        }
        CHECK(std::fabs(div) < 1e-6 * std::max(scale, 1e-3));
    }
}

TEST_CASE("weak curl identity recovers the line measure", "[strain]") {
    // integral <Shat, curl a> dx == integral_gamma <tau, a> dH^1 for smooth a
    // with compact support; coarse tensor-Gauss grid over a box around the loop.
    const ClosedCurve circle = make_circle(1.0, 64);
    const BurgersVector b({0, 0, 1});
    const double R = 2.2;            // bump support radius; box [-R, R]^3
    const Vec3 c0{0.8, 0.3, 0.15};   // off-center so the line term is nonzero
    auto bump = [&](const Vec3& x) -> double {
        const double q = (x - c0).norm2() / (R * R);
        return q >= 1.0 ? 0.0 : std::exp(-q / (1.0 - q));
    };
    auto grad_bump = [&](const Vec3& x) -> Vec3 {
        const double q = (x - c0).norm2() / (R * R);
        if (q >= 1.0) return {};
        const double d = -std::exp(-q / (1.0 - q)) / sqr(1.0 - q);
        return (x - c0) * (2.0 / (R * R)) * d;
    };
    // a = psi * w for a constant vector w; curl a = grad psi ^ w
    const Vec3 w{0.3, 1.0, 0.5};
    const int n = 40;
    const GaussRule& g = gauss_legendre(n);
    double lhs = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const Vec3 x = c0 + Vec3{R * g.nodes[i], R * g.nodes[j], R * g.nodes[k]};
                const Vec3 ca = cross(grad_bump(x), w);
                if (ca.norm2() == 0.0) continue;
                const Vec3 shat = singular_strain(circle, b, x).value.tmul(b.b);
                lhs += dot(shat, ca) * g.weights[i] * g.weights[j] * g.weights[k] * R * R * R;
            }
    double rhs = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double t = two_pi() * i / 64;
        rhs += dot(circle.tangent_at(t), w) * bump(circle.point(t)) * (circle.length() / 64);
    }
    CHECK(std::fabs(lhs - rhs) < 0.05 * std::fabs(rhs));
}

TEST_CASE("smoothness away from the curve: spectral decay on a far circle", "[strain]") {
    const ClosedCurve e = make_ellipse(2.0, 1.0, 64);
    const BurgersVector b({0, 0, 1});
    const int n = 256;
    std::vector<double> f(n);
    for (int j = 0; j < n; ++j) {
        const double t = two_pi() * j / n;
        const Vec3 x{3.5 * std::cos(t), 3.5 * std::sin(t), 0.8};
        f[j] = singular_strain(e, b, x).value(2, 0);
    }
    // Fourier tail of the sampled trace
    double tail = 0.0, head = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        std::complex<double> c{};
        for (int j = 0; j < n; ++j)
            c += f[j] * std::exp(std::complex<double>(0, -two_pi() * k * j / n));
        const double mag = std::abs(c) / n;
        if (k > 48) tail = std::max(tail, mag);
        else head = std::max(head, mag);
    }
    CHECK(tail < 1e-10 * std::max(head, 1e-30));
}

TEST_CASE("rotation equivariance of the strain", "[strain]") {
    const ClosedCurve e = make_ellipse(2.0, 1.0, 64);
    const BurgersVector b({0.2, 0.5, 1.0});
    const Mat3 O = rotation_matrix({0.3, 1.0, -0.4}, 1.1);
    std::vector<Vec3> rn(e.size());
    for (int i = 0; i < e.size(); ++i) rn[i] = O * e.nodes()[i];
    const ClosedCurve Oe(rn);
    const Vec3 x{0.9, 1.3, 0.5};
    const Vec3 shat = singular_strain(e, b, x).value.tmul(b.b) / b.norm2();
    const Vec3 shat_rot = singular_strain(Oe, b, O * x).value.tmul(b.b) / b.norm2();
    CHECK((shat_rot - O * shat).norm() < 1e-10 * shat.norm());
}

TEST_CASE("remainder is Lipschitz in the curve (log eps factor)", "[strain]") {
    const int n = 96;
    const ClosedCurve circle = make_circle(1.0, n);
    const double eps = 1e-3;
    const BurgersVector b({0, 0, 1});
    const TubeChart chart_c = adapted_frame(circle);

    auto perturbed = [&](double amp) {
        std::vector<Vec3> nodes(n);
        for (int i = 0; i < n; ++i) {
            const double t = two_pi() * i / n;
            const double rho = 1.0 + amp * std::cos(3.0 * t);
            nodes[i] = {rho * std::cos(t), rho * std::sin(t), amp * std::sin(2.0 * t)};
        }
        return ClosedCurve(nodes);
    };
    for (double amp : {1e-3, 1e-2}) {
        const ClosedCurve eta = perturbed(amp);
        const TubeChart chart_e = adapted_frame(eta);
        // discrete C^2 distance via dense spectral samples
        double c2 = 0.0;
        for (int j = 0; j < 4 * n; ++j) {
            const double t = two_pi() * j / (4 * n);
            Vec3 pc, dc, ddc, pe, de, dde;
            circle.eval012(t, &pc, &dc, &ddc);
            eta.eval012(t, &pe, &de, &dde);
            c2 = std::max(c2, (pc - pe).norm() + (dc - de).norm() + (ddc - dde).norm());
        }
        double worst = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double s = 0.9, theta = two_pi() * q / 8;
            const StrainEval a = strain_expansion(chart_c, b, eps, s, theta);
            const StrainEval c = strain_expansion(chart_e, b, eps, s, theta);
            worst = std::max(worst, (a.remainder - c.remainder).norm());
        }
        CHECK(worst <= 8.0 * (abs_log(eps) + 1.0) * c2);
    }
}
