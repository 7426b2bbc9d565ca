#include "mrflow/variational_ftle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>

#include "mrflow/abel_quadrature.hpp"
#include "mrflow/errors.hpp"
#include "mrflow/mr_model.hpp"

namespace mrflow {

namespace {

SensMat interpolate(const std::vector<double>& t, const std::vector<SensMat>& v, double time) {
    if (t.empty() || time < t.front() || time > t.back()) throw ValidationError("sensitivity time outside trajectory");
    if (t.size() == 1) return v[0];
    auto it = std::upper_bound(t.begin(), t.end(), time);
    auto k = static_cast<std::size_t>(std::distance(t.begin(), it));
    k = k == 0 ? 0 : std::min(k - 1, t.size() - 2);
    const double r = (time - t[k]) / (t[k + 1] - t[k]);
    return (1.0 - r) * v[k] + r * v[k + 1];
}

}  // namespace

SensMat SensitivityMatrices::Dy_at(double time) const { return interpolate(t, Dy, time); }
SensMat SensitivityMatrices::Dw_at(double time) const { return interpolate(t, Dw, time); }

SensitivityMatrices solve_variational(const FieldSpec& spec, const MRParams& params, const Trajectory& base) {
    if (base.segments.empty() || !base.converged()) throw ValidationError("variational solve needs a converged base trajectory");
    const int n = base.dimension();
    const double mu = params.mu;
    const double mem = params.memory_coefficient();
    const Mat I = Mat::Identity(n, n);

    SensitivityMatrices s;
    s.n = n;
    s.t = base.t;
    s.Dy.reserve(base.size());
    s.Dw.reserve(base.size());
    SensMat Dy0 = SensMat::Zero(n, 2 * n);
    SensMat Dw0 = SensMat::Zero(n, 2 * n);
    Dy0.leftCols(n) = I;
    Dw0.rightCols(n) = I;
    s.Dy.push_back(Dy0);
    s.Dw.push_back(Dw0);

    std::size_t offset = 0;  // flat index of the current window start
    std::vector<double> hw;
    for (const auto& seg : base.segments) {
        const std::size_t m = seg.t.size();
        const std::span<const double> hist_t(base.t.data(), offset + 1);
        const WindowKernel kernel(hist_t, seg.t);
        const std::size_t K = offset;

        // History part of the kernel (nodes before t_a) minus the kernel at t_a.
        SensMat start = SensMat::Zero(n, 2 * n);
        kernel.history_weights(0, hw);
        for (std::size_t j = 0; j <= K; ++j) start += hw[j] * s.Dw[j];

        std::vector<Mat> gA(m), gBL(m), Mm(m);
        std::vector<SensMat> P(m), Q(m);
        for (std::size_t l = 0; l < m; ++l) {
            const FieldJet jet = eval_jet(spec, base.y[offset + l], seg.t[l], JetOrder::four);
            const CompactFields f = compute_compact_fields(jet, params);
            const CompactGradients g = compute_compact_gradients(jet, params);
            gA[l] = g.grad_A;
            gBL[l] = g.grad_B - l_matrix(g, base.w[offset + l]);
            Mm[l] = f.M;
        }
        auto rates = [&](std::size_t l, const SensMat& dy, const SensMat& dw) {
            P[l] = dw + gA[l] * dy;
            Q[l] = -mu * dw - Mm[l] * dw + gBL[l] * dy;
        };
        rates(0, s.Dy[offset], s.Dw[offset]);
        const SensMat DYa = s.Dy[offset];
        const SensMat DWa = s.Dw[offset];
        SensMat accY = SensMat::Zero(n, 2 * n);
        SensMat accW = SensMat::Zero(n, 2 * n);
        for (std::size_t i = 1; i < m; ++i) {
            const double h = seg.t[i] - seg.t[i - 1];
            kernel.history_weights(i, hw);
            SensMat ker = -start;
            for (std::size_t j = 0; j <= K; ++j) ker += hw[j] * s.Dw[j];
            const auto row = kernel.window_weights(i);
            for (std::size_t l = 1; l < i; ++l) ker += row[l - 1] * s.Dw[offset + l];
            const double kii = row[i - 1];

            const SensMat RY = DYa + accY + 0.5 * h * P[i - 1];
            const SensMat RW = DWa + accW + 0.5 * h * Q[i - 1] - mem * ker;
            Eigen::MatrixXd A(2 * n, 2 * n);
            A.topLeftCorner(n, n) = I - 0.5 * h * gA[i];
            A.topRightCorner(n, n) = -0.5 * h * I;
            A.bottomLeftCorner(n, n) = -0.5 * h * gBL[i];
            A.bottomRightCorner(n, n) = (1.0 + 0.5 * h * mu + mem * kii) * I + 0.5 * h * Mm[i];
            Eigen::MatrixXd rhs(2 * n, 2 * n);
            rhs.topRows(n) = RY;
            rhs.bottomRows(n) = RW;
            const Eigen::MatrixXd sol = A.partialPivLu().solve(rhs);
            const SensMat dy = sol.topRows(n);
            const SensMat dw = sol.bottomRows(n);
            if (!dy.allFinite() || !dw.allFinite()) throw NumericalError("non-finite variational solution");
            s.Dy.push_back(dy);
            s.Dw.push_back(dw);
            rates(i, dy, dw);
            accY += 0.5 * h * (P[i - 1] + P[i]);
            accW += 0.5 * h * (Q[i - 1] + Q[i]);
        }
        offset += m - 1;
    }
    return s;
}

Mat cauchy_green(const SensitivityMatrices& sens, double time) {
    const Mat F = sens.Dy_at(time).leftCols(sens.n);
    return F.transpose() * F;
}

double ftle_from_cauchy_green(const Mat& C, double T) {
    if (!(T > 0.0)) throw ValidationError("FTLE horizon must be positive");
    const Mat Cs = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(Cs, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0)) throw NumericalError("Cauchy-Green tensor has no positive eigenvalue");
    return std::log(lmax) / (2.0 * T);
}

std::size_t FTLEGrid::missing() const {
    return static_cast<std::size_t>(std::count_if(ftle.begin(), ftle.end(), [](double v) { return std::isnan(v); }));
}

FTLEGrid ftle_field(const FieldSpec& spec, const MRParams& params, const FtleOptions& options) {
    const int n = spec.dimension();
    if (options.box.dimension() != n || options.box.empty()) throw ValidationError("ftle box does not match the field");
    if (static_cast<int>(options.resolution.size()) != n) throw ValidationError("ftle resolution needs one entry per axis");
    for (int r : options.resolution) {
        if (r < 2) throw ValidationError("ftle resolution must be >= 2 per axis");
    }
    if (!(options.T > 0.0)) throw ValidationError("ftle horizon must be positive");
    if (options.policy.kind == W0Policy::Kind::fixed && options.policy.w0.size() != n) {
        throw ValidationError("fixed w0 has the wrong dimension");
    }

    FTLEGrid grid;
    grid.box = options.box;
    grid.resolution = options.resolution;
    grid.t0 = options.t0;
    grid.T = options.T;
    grid.policy = options.policy;
    std::size_t total = 1;
    for (int r : options.resolution) total *= static_cast<std::size_t>(r);
    grid.points.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Vec x(n);
        std::size_t rem = idx;
        for (int a = 0; a < n; ++a) {
            const auto r = static_cast<std::size_t>(options.resolution[static_cast<std::size_t>(a)]);
            const std::size_t k = rem % r;
            rem /= r;
            x[a] = options.box.lo[a] + (options.box.hi[a] - options.box.lo[a]) * static_cast<double>(k) /
                                           static_cast<double>(r - 1);
        }
        grid.points[idx] = x;
    }
    grid.ftle.assign(total, std::numeric_limits<double>::quiet_NaN());

    // Shared bounds so every point uses the same certificate data.
    SolveOptions solve = options.solve;
    if (!solve.bounds) {
        double radius = kRadiusFloor;
        for (int a = 0; a < n; ++a) {
            radius = std::max({radius, std::abs(options.box.lo[a]), std::abs(options.box.hi[a])});
        }
        if (options.policy.kind == W0Policy::Kind::fixed) radius = std::max(radius, options.policy.w0.norm());
        solve.bounds = default_bounds(spec, params, 4.0 * radius, options.t0, options.t0 + options.T,
                                      solve.bound_samples, solve.seed);
    }

    std::vector<std::string> errors(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next++; idx < total; idx = next++) {
            try {
                const Vec& y0 = grid.points[idx];
                const Trajectory tr =
                    options.policy.kind == W0Policy::Kind::zero
                        ? solve_strong(spec, params, y0, options.t0, options.t0 + options.T, solve)
                        : solve_mild_w(spec, params, y0, options.policy.w0, options.t0, options.t0 + options.T, solve);
                const SensitivityMatrices sens = solve_variational(spec, params, tr);
                grid.ftle[idx] = ftle_from_cauchy_green(cauchy_green(sens, tr.t.back()), options.T);
            } catch (const std::exception& e) {
                errors[idx] = e.what();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(total)));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (!errors[idx].empty()) grid.failures.push_back(std::to_string(idx) + ": " + errors[idx]);
    }
    return grid;
}

namespace {

double block_rel_error(const SensMat& var, const SensMat& fd) {
    const double ref = fd.cwiseAbs().maxCoeff();
    const double diff = (var - fd).cwiseAbs().maxCoeff();
    return ref > 0.0 ? diff / ref : diff;
}

}  // namespace

FdCheckReport fd_gradient_check(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& w0,
                                double t0, double T, double h, SolveOptions options) {
    if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
    const int n = spec.dimension();
    const double t1 = t0 + T;
    if (!options.first_window_mesh) options.first_window_mesh = w0.norm() > 0.0 ? MeshKind::graded : MeshKind::uniform;
    if (!options.bounds) {
        const double radius = std::max(4.0 * std::max(y0.norm(), w0.norm()), kRadiusFloor);
        options.bounds = default_bounds(spec, params, radius, t0, t1, options.bound_samples, options.seed);
    }
    const Trajectory base = solve_mild_w(spec, params, y0, w0, t0, t1, options);
    const SensitivityMatrices sens = solve_variational(spec, params, base);

    SolveOptions repeat = options;
    repeat.schedule = base.schedule();
    repeat.window.reset();
    FdCheckReport rep;
    rep.fd_dy = SensMat::Zero(n, 2 * n);
    rep.fd_dw = SensMat::Zero(n, 2 * n);
    for (int c = 0; c < 2 * n; ++c) {
        Vec dy = Vec::Zero(n);
        Vec dw = Vec::Zero(n);
        (c < n ? dy[c] : dw[c - n]) = h;
        const Trajectory plus = solve_mild_w(spec, params, y0 + dy, w0 + dw, t0, t1, repeat);
        const Trajectory minus = solve_mild_w(spec, params, y0 - dy, w0 - dw, t0, t1, repeat);
        rep.fd_dy.col(c) = (plus.y.back() - minus.y.back()) / (2.0 * h);
        rep.fd_dw.col(c) = (plus.w.back() - minus.w.back()) / (2.0 * h);
    }
    rep.variational_dy = sens.Dy.back();
    rep.variational_dw = sens.Dw.back();
    rep.rel_error_dy = block_rel_error(rep.variational_dy, rep.fd_dy);
    rep.rel_error_dw = block_rel_error(rep.variational_dw, rep.fd_dw);
    rep.max_rel_error = std::max(rep.rel_error_dy, rep.rel_error_dw);
    return rep;
}

}  // namespace mrflow
