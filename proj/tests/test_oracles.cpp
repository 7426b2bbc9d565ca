#include "doctest.h"

#include <cmath>
#include <numbers>

#include "mrflow/errors.hpp"
#include "mrflow/oracles.hpp"

using namespace mrflow;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

MRParams example(double R = 0.5, double St = 0.5) { return derive_params(R, St, 1.0, v2(0, 0)); }

}  // namespace

TEST_CASE("closed-form constants") {
    const auto q = quiescent_exact_params(example());
    CHECK(q.G == doctest::Approx(1.5));
    CHECK(q.alpha == doctest::Approx(-0.125));
    CHECK(q.beta == doctest::Approx(0.992157).epsilon(1e-6));
    CHECK(q.G * q.G == doctest::Approx(4.5 * 0.5 * 1.0));
    CHECK_THROWS_AS(quiescent_exact_params(example(0.9)), UnsupportedRegimeError);
    CHECK_THROWS_AS(quiescent_exact_params(example(8.0 / 9.0)), UnsupportedRegimeError);
}

TEST_CASE("closed form at the start and a pinned value") {
    const auto p = example();
    const Vec w0 = v2(1.0, -2.0);
    CHECK((exact_quiescent_w(p, w0, 0.0) - w0).norm() == 0.0);
    CHECK(quiescent_response(p, 1.0) == doctest::Approx(0.179964675570057).epsilon(1e-13));
}

TEST_CASE("closed form agrees with Talbot inversion") {
    for (auto [R, mu] : {std::pair{0.5, 1.0}, std::pair{0.2, 2.0}, std::pair{0.8, 0.5}}) {
        const auto p = derive_params(R, R / mu, 1.0, v2(0, 0));
        for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            CHECK(std::abs(quiescent_response(p, t) - laplace_response(p, t)) <= 1e-8);
            CHECK(std::abs(laplace_response(p, t, 48) - laplace_response(p, t, 96)) <= 1e-10);
        }
    }
}

TEST_CASE("long-time decay and linearity") {
    const auto p = example();
    const Vec w0 = v2(0.7, 0.3);
    CHECK(laplace_inverse_w(p, w0, 100.0).norm() <= 1e-2 * w0.norm());
    CHECK((laplace_inverse_w(p, 2.0 * w0, 3.0) - 2.0 * laplace_inverse_w(p, w0, 3.0)).norm() == 0.0);
    CHECK((exact_quiescent_w(p, 2.0 * w0, 3.0) - 2.0 * exact_quiescent_w(p, w0, 3.0)).norm() == 0.0);
}

TEST_CASE("derivative of the closed form") {
    const auto p = example();
    const double h = 1e-5;
    for (double t = 0.1; t <= 5.0; t += 0.35) {
        const double fd = (quiescent_response(p, t + h) - quiescent_response(p, t - h)) / (2 * h);
        CHECK(std::abs(fd - quiescent_response_rate(p, t)) <= 1e-6);
    }
    const double G = quiescent_exact_params(p).G;
    const double t = 1e-10;
    CHECK(std::abs(quiescent_response_rate(p, t) * std::sqrt(t) + G / std::sqrt(std::numbers::pi)) <= 1e-4);
    CHECK(exact_quiescent_wdot(p, v2(0, 0), 0.5).norm() == 0.0);
    CHECK_THROWS_AS(quiescent_response_rate(p, 0.0), SingularityError);
}

TEST_CASE("square-root onset of the closed form") {
    // |w - w0 (1 - 2G sqrt(t/pi))| = O(t)
    const auto p = example();
    const double G = quiescent_exact_params(p).G;
    std::vector<double> lx, ly;
    for (double t = 1e-6; t <= 1e-3; t *= 2.0) {
        lx.push_back(std::log(t));
        ly.push_back(std::log(std::abs(quiescent_response(p, t) - (1.0 - 2.0 * G * std::sqrt(t / std::numbers::pi)))));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(lx.size());
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sx += lx[k];
        sy += ly[k];
        sxx += lx[k] * lx[k];
        sxy += lx[k] * ly[k];
    }
    CHECK((n * sxy - sx * sy) / (n * sxx - sx * sx) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("memory-free reference in a quiescent fluid") {
    const auto spec = FieldSpec::quiescent(2);
    const auto p = example();
    const Vec w0 = v2(1.0, 0.5);
    const auto r = memoryless_reference(spec, p, v2(0, 0), w0, 0.0, 3.0, 30);
    REQUIRE(r.t.size() == 31);
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        CHECK((r.w[i] - w0 * std::exp(-p.mu * r.t[i])).norm() <= 1e-9);
    }
    const auto pg = derive_params(0.5, 0.25, 1.0, v2(0, -3));
    const auto s = memoryless_reference(spec, pg, v2(0, 0), v2(0, 0), 0.0, 2.0, 20);
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const Vec exact = (1.0 - 1.5 * pg.R) * (pg.g / pg.mu) * (1.0 - std::exp(-pg.mu * s.t[i]));
        CHECK((s.w[i] - exact).norm() <= 1e-9);
    }
}

TEST_CASE("memory-free reference in a linear field follows its Taylor expansion") {
    Mat S(2, 2);
    S << 0.4, 1.0, -0.7, -0.4;
    const auto spec = FieldSpec::linear(S);
    const auto p = derive_params(0.6, 0.8, 5.0, v2(0.0, -1.0));
    const Vec y0 = v2(0.3, -0.2);
    const Vec w0 = v2(0.1, 0.05);
    // z' = J z + c with z = (y, w); second-order Taylor polynomial of the exact solution.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, 4);
    J.topLeftCorner(2, 2) = S;
    J.topRightCorner(2, 2) = Eigen::Matrix2d::Identity();
    J.bottomLeftCorner(2, 2) = (1.5 * p.R - 1.0) * S * S;
    J.bottomRightCorner(2, 2) = -p.mu * Eigen::Matrix2d::Identity() - S;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
    c.tail(2) = -(1.5 * p.R - 1.0) * p.g;
    Eigen::VectorXd z0(4);
    z0 << y0, w0;
    const Eigen::VectorXd f0 = J * z0 + c;
    std::vector<double> errs;
    for (double t : {0.08, 0.04, 0.02}) {
        const auto r = memoryless_reference_w(spec, p, y0, w0, {0.0, t});
        Eigen::VectorXd z(4);
        z << r.y.back(), r.w.back();
        errs.push_back((z - (z0 + t * f0 + 0.5 * t * t * J * f0)).norm());
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(8.0).epsilon(0.1));
    CHECK(errs[1] / errs[2] == doctest::Approx(8.0).epsilon(0.1));
}

TEST_CASE("Talbot inversion of a known transform") {
    // 1 / (p + 1) -> exp(-t); 1 / sqrt(p) -> 1 / sqrt(pi t)
    for (double t : {0.01, 0.5, 4.0}) {
        CHECK(talbot_inverse([](std::complex<long double> s) { return 1.0L / (s + 1.0L); }, t) ==
              doctest::Approx(std::exp(-t)).epsilon(1e-12));
        CHECK(talbot_inverse([](std::complex<long double> s) { return 1.0L / std::sqrt(s); }, t) ==
              doctest::Approx(1.0 / std::sqrt(std::numbers::pi * t)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(laplace_response(example(), 0.0), ValidationError);
}
