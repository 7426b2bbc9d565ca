#include "doctest.h"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>

#include "mrflow/errors.hpp"
#include "mrflow/oracles.hpp"
#include "mrflow/variational_ftle.hpp"

using namespace mrflow;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// FTLE of the fluid flow map from an adaptive tracer integration and central differences.
double tracer_ftle(const FieldSpec& spec, const Vec& x0, double T) {
    namespace ode = boost::numeric::odeint;
    using S = std::array<double, 2>;
    auto flow = [&](double x, double y) {
        S s{x, y};
        auto rhs = [&](const S& z, S& dz, double t) {
            double u[2];
            spec.velocity(z.data(), t, u);
            dz = {u[0], u[1]};
        };
        ode::integrate_adaptive(ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<S>()), rhs, s, 0.0, T, 1e-3);
        return s;
    };
    const double h = 1e-6;
    const auto a = flow(x0[0] + h, x0[1]);
    const auto b = flow(x0[0] - h, x0[1]);
    const auto c = flow(x0[0], x0[1] + h);
    const auto d = flow(x0[0], x0[1] - h);
    Mat F(2, 2);
    F << (a[0] - b[0]) / (2 * h), (c[0] - d[0]) / (2 * h), (a[1] - b[1]) / (2 * h), (c[1] - d[1]) / (2 * h);
    return ftle_from_cauchy_green(F.transpose() * F, T);
}

}  // namespace

TEST_CASE("sensitivities start from the identity") {
    const auto spec = FieldSpec::double_gyre();
    const auto p = derive_params(0.5, 0.5, 100.0, v2(0, -1));
    SolveOptions o;
    o.nodes_per_window = 8;
    const auto tr = solve_mild_w(spec, p, v2(0.6, 0.3), v2(0.05, 0), 0.0, 0.05, o);
    const auto s = solve_variational(spec, p, tr);
    REQUIRE(s.t.size() == tr.size());
    SensMat Dy0 = SensMat::Zero(2, 4);
    SensMat Dw0 = SensMat::Zero(2, 4);
    Dy0.leftCols(2) = Mat::Identity(2, 2);
    Dw0.rightCols(2) = Mat::Identity(2, 2);
    CHECK((s.Dy.front() - Dy0).norm() == 0.0);
    CHECK((s.Dw.front() - Dw0).norm() == 0.0);
}

TEST_CASE("quiescent sensitivities reduce to the scalar closed form") {
    const auto spec = FieldSpec::quiescent(2);
    const auto p = derive_params(0.5, 0.5, 1.0, v2(0, 0));
    const Vec w0 = v2(1.0, 0.0);
    SolveOptions o;
    o.nodes_per_window = 33;
    const auto tr = solve_mild_w(spec, p, v2(0, 0), w0, 0.0, 1.0, o);
    const auto s = solve_variational(spec, p, tr);
    double lin = 0, exact = 0, pos = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const Mat block = s.Dw[i].rightCols(2);
        // linearity in w0: dw/dw0 = w / w0 from the same discrete solve
        lin = std::max(lin, (block - (tr.w[i][0] / w0[0]) * Mat::Identity(2, 2)).norm());
        exact = std::max(exact, (block - quiescent_response(p, tr.t[i]) * Mat::Identity(2, 2)).norm());
        pos = std::max(pos, (s.Dy[i].leftCols(2) - Mat::Identity(2, 2)).norm() + s.Dw[i].leftCols(2).norm());
    }
    CHECK(lin <= 1e-8);
    CHECK(exact <= 1e-3);
    CHECK(pos == 0.0);
}

TEST_CASE("variational derivative matches finite differences in the double gyre") {
    const auto spec = FieldSpec::double_gyre();
    const auto p = derive_params(0.5, 0.5, 100.0, v2(0, 0));
    SolveOptions o;
    o.nodes_per_window = 16;
    o.tol = 1e-13;
    const auto r = fd_gradient_check(spec, p, v2(0.6, 0.3), v2(0.05, -0.02), 0.0, 0.5, 1e-5, o);
    CHECK(r.rel_error_dy <= 1e-4);
    CHECK(r.rel_error_dw <= 1e-4);
    const auto q = fd_gradient_check(FieldSpec::quiescent(2), derive_params(0.5, 0.5, 1.0, v2(0, 0)), v2(0, 0),
                                     v2(0, 0), 0.0, 0.2, 1e-5, o);
    CHECK(q.max_rel_error <= 1e-6);
}

TEST_CASE("Cauchy-Green tensor") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        SensitivityMatrices s;
        s.n = 3;
        s.t = {0.0};
        SensMat F(3, 6);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 6; ++j) F(i, j) = n(rng);
        }
        s.Dy = {F};
        s.Dw = {F};
        const Mat C = cauchy_green(s, 0.0);
        CHECK((C - C.transpose()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<Mat> es(C);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }
    CHECK(ftle_from_cauchy_green(Mat::Identity(2, 2), 3.0) == 0.0);
    CHECK_THROWS_AS(ftle_from_cauchy_green(Mat::Identity(2, 2), 0.0), ValidationError);
}

TEST_CASE("FTLE of a quiescent fluid vanishes") {
    FtleOptions o;
    o.box = Box{v2(-1, -1), v2(1, 1)};
    o.resolution = {3, 3};
    o.T = 0.5;
    o.solve.nodes_per_window = 8;
    const auto g = ftle_field(FieldSpec::quiescent(2), derive_params(0.5, 0.5, 1.0, v2(0, 0)), o);
    REQUIRE(g.ftle.size() == 9);
    for (double v : g.ftle) CHECK(v == 0.0);
    o.resolution = {1, 3};
    CHECK_THROWS_AS(ftle_field(FieldSpec::quiescent(2), derive_params(0.5, 0.5, 1.0, v2(0, 0)), o), ValidationError);
}

TEST_CASE("near-tracer particle in a hyperbolic strain") {
    const double sigma = 1.0;
    const double T = 1.0;
    Mat S(2, 2);
    S << sigma, 0.0, 0.0, -sigma;
    const auto p = derive_params(1.0, 0.01, 10.0, v2(0, 0)).with_kappa(0.0);
    FtleOptions o;
    o.box = Box{v2(-0.1, -0.1), v2(0.1, 0.1)};
    o.resolution = {2, 2};
    o.T = T;
    o.solve.window = 0.004;
    o.solve.nodes_per_window = 4;
    const auto g = ftle_field(FieldSpec::linear(S), p, o);
    REQUIRE(g.missing() == 0);
    for (double v : g.ftle) CHECK(std::exp(2.0 * T * v) == doctest::Approx(std::exp(2.0 * sigma * T)).epsilon(0.1));
}

TEST_CASE("inertial FTLE at small Stokes number resembles the tracer FTLE") {
    const auto spec = FieldSpec::double_gyre();
    const auto p = derive_params(0.1, 0.01, 100.0, v2(0, 0));
    FtleOptions o;
    o.box = Box{v2(0, 0), v2(2, 1)};
    o.resolution = {16, 8};
    o.T = 5.0;
    o.solve.window = 0.1;
    o.solve.nodes_per_window = 8;
    const auto g = ftle_field(spec, p, o);
    REQUIRE(g.missing() == 0);
    std::vector<double> tr(g.points.size());
    for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = tracer_ftle(spec, g.points[i], o.T);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        ma += g.ftle[i];
        mb += tr[i];
    }
    ma /= static_cast<double>(tr.size());
    mb /= static_cast<double>(tr.size());
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        sab += (g.ftle[i] - ma) * (tr[i] - mb);
        saa += (g.ftle[i] - ma) * (g.ftle[i] - ma);
        sbb += (tr[i] - mb) * (tr[i] - mb);
    }
    CHECK(sab / std::sqrt(saa * sbb) >= 0.95);

    // Ridge positions along two rows survive a refinement of the x spacing.
    for (int row : {3, 5}) {
        const double y = 1.0 * row / 7.0;
        FtleOptions fine = o;
        fine.box = Box{v2(0, y), v2(2, y + 1.0 / 7.0)};
        fine.resolution = {31, 2};
        const auto f = ftle_field(spec, p, fine);
        REQUIRE(f.missing() == 0);
        std::size_t best_c = 0, best_f = 0;
        for (std::size_t i = 0; i < 16; ++i) {
            if (g.ftle[static_cast<std::size_t>(row) * 16 + i] > g.ftle[static_cast<std::size_t>(row) * 16 + best_c]) best_c = i;
        }
        for (std::size_t i = 0; i < 31; ++i) {
            if (f.ftle[i] > f.ftle[best_f]) best_f = i;
        }
        CHECK(std::abs(f.points[best_f][0] - g.points[best_c][0]) <= 2.0 / 15.0 + 1e-12);
    }
}

TEST_CASE("failed grid points are recorded as missing") {
    const auto spec = FieldSpec::double_gyre().with_domain(Box{v2(0, 0), v2(2, 1)});
    FtleOptions o;
    o.box = Box{v2(1.5, 0.2), v2(2.5, 0.8)};
    o.resolution = {3, 2};
    o.T = 0.2;
    o.solve.window = 0.05;
    o.solve.nodes_per_window = 4;
    o.threads = 2;
    const auto g = ftle_field(spec, derive_params(0.5, 0.5, 100.0, v2(0, 0)), o);
    CHECK(g.missing() >= 2);
    CHECK(g.failures.size() == g.missing());
    CHECK_FALSE(std::isnan(g.ftle[0]));
}
