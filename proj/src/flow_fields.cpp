#include "mrflow/flow_fields.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>

#include "mrflow/errors.hpp"
#include "mrflow/mr_model.hpp"
#include "mrflow/taylor.hpp"

namespace mrflow {

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::quiescent: return "quiescent";
        case FieldKind::linear: return "linear";
        case FieldKind::double_gyre: return "double_gyre";
        case FieldKind::taylor_green: return "taylor_green";
    }
    return "unknown";
}

bool Box::empty() const {
    if (lo.size() == 0 || lo.size() != hi.size()) return true;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) return true;
    }
    return false;
}

bool Box::contains(const Vec& x) const {
    if (x.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
}

namespace {

void require_dimension(int n) {
    if (n != 2 && n != 3) throw ValidationError("field dimension must be 2 or 3");
}

}  // namespace

FieldSpec FieldSpec::quiescent(int dimension) {
    require_dimension(dimension);
    FieldSpec f;
    f.kind_ = FieldKind::quiescent;
    f.dim_ = dimension;
    return f;
}

FieldSpec FieldSpec::linear(const Mat& S) {
    if (S.rows() != S.cols()) throw ValidationError("linear field matrix must be square");
    require_dimension(static_cast<int>(S.rows()));
    if (!S.allFinite()) throw ValidationError("linear field matrix must be finite");
    FieldSpec f;
    f.kind_ = FieldKind::linear;
    f.dim_ = static_cast<int>(S.rows());
    f.S_ = S;
    return f;
}

FieldSpec FieldSpec::double_gyre(const DoubleGyreParams& p) {
    if (!std::isfinite(p.A) || !std::isfinite(p.epsilon) || !std::isfinite(p.omega)) {
        throw ValidationError("double gyre parameters must be finite");
    }
    FieldSpec f;
    f.kind_ = FieldKind::double_gyre;
    f.dim_ = 2;
    f.gyre_ = p;
    return f;
}

FieldSpec FieldSpec::taylor_green(int dimension, const TaylorGreenParams& p) {
    require_dimension(dimension);
    if (!std::isfinite(p.A) || !(p.k > 0.0) || !std::isfinite(p.k)) {
        throw ValidationError("Taylor-Green parameters: A finite, k > 0");
    }
    FieldSpec f;
    f.kind_ = FieldKind::taylor_green;
    f.dim_ = dimension;
    f.tg_ = p;
    return f;
}

FieldSpec FieldSpec::with_domain(const Box& box) const {
    if (box.dimension() != dim_ || box.empty()) throw ValidationError("domain box is empty or has wrong dimension");
    FieldSpec f = *this;
    f.domain_ = box;
    return f;
}

void FieldSpec::check_point(const Vec& x, double t) const {
    if (x.size() != dim_) throw DomainError("position has wrong dimension");
    if (!x.allFinite() || !std::isfinite(t)) throw DomainError("non-finite evaluation point");
    if (t < 0.0) throw DomainError("negative time");
    if (domain_ && !domain_->contains(x)) throw DomainError("position outside the field domain");
}

Box FieldSpec::sampling_box(double radius) const {
    radius = std::max(radius, 1.0);
    Box b{Vec::Constant(dim_, -radius), Vec::Constant(dim_, radius)};
    switch (kind_) {
        case FieldKind::double_gyre:
            // sin(pi y) makes y 2-periodic; x enters through a quadratic, so keep the radius.
            b.lo[0] = std::min(-radius, 0.0);
            b.hi[0] = std::max(radius, 2.0);
            b.lo[1] = -1.0;
            b.hi[1] = 1.0;
            break;
        case FieldKind::taylor_green:
            b.lo.setZero();
            b.hi.setConstant(2.0 * std::numbers::pi / tg_.k);
            break;
        default:
            break;
    }
    if (domain_) {
        b.lo = b.lo.cwiseMax(domain_->lo);
        b.hi = b.hi.cwiseMin(domain_->hi);
    }
    return b;
}

namespace {

template <int N, int D>
FieldJet jet_impl(const FieldSpec& spec, const Vec& x, double t) {
    using T = Taylor<N + 1, D>;
    using E = typename T::Exponent;
    std::array<T, N> X;
    std::array<T, N> U;
    for (int i = 0; i < N; ++i) X[static_cast<std::size_t>(i)] = T::variable(i, x[i]);
    const T tv = T::variable(N, t);
    spec.velocity(X.data(), tv, U.data());

    auto d = [&](int comp, std::initializer_list<int> vars) {
        E e{};
        for (int v : vars) ++e[static_cast<std::size_t>(v)];
        return U[static_cast<std::size_t>(comp)].derivative(e);
    };

    FieldJet j;
    j.n = N;
    j.has_order4 = (D >= 4);
    j.u.resize(N);
    j.du_dt.resize(N);
    j.lap_u.resize(N);
    j.dlap_dt.resize(N);
    j.grad_u.resize(N, N);
    j.dgrad_dt.resize(N, N);
    j.grad_lap_u.resize(N, N);
    for (auto& h : j.hess_u) h.setZero(N, N);

    for (int i = 0; i < N; ++i) {
        j.u[i] = d(i, {});
        j.du_dt[i] = d(i, {N});
        double lap = 0.0;
        double dlap = 0.0;
        for (int k = 0; k < N; ++k) {
            lap += d(i, {k, k});
            dlap += d(i, {k, k, N});
        }
        j.lap_u[i] = lap;
        j.dlap_dt[i] = dlap;
        for (int a = 0; a < N; ++a) {
            j.grad_u(i, a) = d(i, {a});
            j.dgrad_dt(i, a) = d(i, {a, N});
            double gl = 0.0;
            for (int k = 0; k < N; ++k) gl += d(i, {a, k, k});
            j.grad_lap_u(i, a) = gl;
            for (int b = 0; b < N; ++b) j.hess_u[static_cast<std::size_t>(a)](i, b) = d(i, {a, b});
        }
    }
    j.du_dt_material = j.du_dt + j.grad_u * j.u;
    j.dlap_dt_material = j.dlap_dt + j.grad_lap_u * j.u;

    if constexpr (D >= 4) {
        j.dgrad_lap_dt.resize(N, N);
        for (auto& h : j.hess_lap_u) h.setZero(N, N);
        for (int i = 0; i < N; ++i) {
            for (int a = 0; a < N; ++a) {
                double s = 0.0;
                for (int k = 0; k < N; ++k) s += d(i, {a, k, k, N});
                j.dgrad_lap_dt(i, a) = s;
                for (int b = 0; b < N; ++b) {
                    double h = 0.0;
                    for (int k = 0; k < N; ++k) h += d(i, {a, b, k, k});
                    j.hess_lap_u[static_cast<std::size_t>(a)](i, b) = h;
                }
            }
        }
        j.grad_du_dt_material = j.dgrad_dt + j.grad_u * j.grad_u;
        j.grad_dlap_dt_material = j.dgrad_lap_dt + j.grad_lap_u * j.grad_u;
        for (int a = 0; a < N; ++a) {
            j.grad_du_dt_material.col(a) += j.hess_u[static_cast<std::size_t>(a)] * j.u;
            j.grad_dlap_dt_material.col(a) += j.hess_lap_u[static_cast<std::size_t>(a)] * j.u;
        }
    }
    return j;
}

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(m.transpose() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

FieldJet eval_jet(const FieldSpec& spec, const Vec& x, double t, JetOrder order) {
    spec.check_point(x, t);
    const bool four = order == JetOrder::four;
    if (spec.dimension() == 2) return four ? jet_impl<2, 4>(spec, x, t) : jet_impl<2, 3>(spec, x, t);
    return four ? jet_impl<3, 4>(spec, x, t) : jet_impl<3, 3>(spec, x, t);
}

BoundEstimates estimate_bounds(const FieldSpec& spec, const MRParams& params, const Box& box,
                               const Interval& interval, std::size_t n_samples, std::uint64_t seed,
                               double safety_factor) {
    const int n = spec.dimension();
    if (n_samples < 2) throw ValidationError("estimate_bounds needs at least 2 samples");
    if (box.dimension() != n || box.empty()) throw ValidationError("estimate_bounds: empty or mismatched box");
    if (!(interval.hi >= interval.lo) || interval.lo < 0.0) throw ValidationError("estimate_bounds: bad time interval");
    if (params.dimension() != n) throw ValidationError("gravity dimension does not match the field");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double offset = 1e-3 * (box.hi - box.lo).norm();

    double Lb = 0.0;
    double Lc = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        Vec y(n);
        for (int i = 0; i < n; ++i) y[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
        const double t = interval.lo + (interval.hi - interval.lo) * unit(rng);
        const FieldJet jet = eval_jet(spec, y, t, JetOrder::four);
        const CompactFields cf = compute_compact_fields(jet, params);
        const CompactGradients gr = compute_compact_gradients(jet, params);
        Lb = std::max({Lb, cf.A.norm(), cf.B.norm(), op_norm(cf.M)});

        double dM = 0.0;
        for (int j = 0; j < n; ++j) dM += gr.dM[static_cast<std::size_t>(j)].squaredNorm();
        Lc = std::max({Lc, op_norm(gr.grad_A), op_norm(gr.grad_B), std::sqrt(dM)});

        // Short-range difference quotient towards a random direction.
        Vec dir(n);
        for (int i = 0; i < n; ++i) dir[i] = normal(rng);
        Vec y2 = y + offset * dir.normalized();
        y2 = y2.cwiseMax(box.lo).cwiseMin(box.hi);
        const double dy = (y2 - y).norm();
        if (dy > 0.0) {
            const CompactFields cf2 = eval_compact(spec, params, y2, t);
            Lc = std::max({Lc, (cf2.A - cf.A).norm() / dy, (cf2.B - cf.B).norm() / dy, op_norm(cf2.M - cf.M) / dy});
        }
    }
    if (!std::isfinite(Lb) || !std::isfinite(Lc)) throw NumericalError("non-finite field bound");

    BoundEstimates out;
    out.raw_L_b = Lb;
    out.raw_L_c = Lc;
    out.L_b = safety_factor * Lb;
    out.L_c = safety_factor * Lc;
    out.sample_count = n_samples;
    out.domain_box = box;
    out.time_interval = interval;
    out.safety_factor = safety_factor;
    return out;
}

double JetConsistencyReport::worst() const {
    return std::max({max_rel_error[1], max_rel_error[2], max_rel_error[3], max_rel_error[4], laplacian_trace_error,
                     material_fd_error});
}

namespace {

// Running max |analytic - fd| together with the largest magnitude seen.
struct ErrAccumulator {
    double diff = 0.0;
    double scale = 0.0;

    template <class A, class B>
    void add(const A& analytic, const B& fd) {
        diff = std::max(diff, (analytic - fd).cwiseAbs().maxCoeff());
        scale = std::max({scale, analytic.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff()});
    }
    [[nodiscard]] double relative() const { return scale > 0.0 ? diff / scale : 0.0; }
};

}  // namespace

JetConsistencyReport jet_consistency_check(const FieldSpec& spec, std::size_t n_points, double h,
                                           std::uint64_t seed) {
    if (!(h > 0.0)) throw ValidationError("jet_consistency_check: h must be positive");
    const int n = spec.dimension();
    const Box box = spec.sampling_box(1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::array<ErrAccumulator, 5> acc{};
    ErrAccumulator material;
    double trace_err = 0.0;

    for (std::size_t p = 0; p < n_points; ++p) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
        const double t = h + (10.0 - h) * unit(rng);
        const FieldJet j0 = eval_jet(spec, x, t);

        for (int a = 0; a < n; ++a) {
            Vec xp = x;
            Vec xm = x;
            xp[a] += h;
            xm[a] -= h;
            const FieldJet jp = eval_jet(spec, xp, t);
            const FieldJet jm = eval_jet(spec, xm, t);
            const double inv = 1.0 / (2.0 * h);
            acc[1].add(j0.grad_u.col(a), (jp.u - jm.u) * inv);
            acc[2].add(j0.hess_u[static_cast<std::size_t>(a)], (jp.grad_u - jm.grad_u) * inv);
            acc[3].add(j0.grad_lap_u.col(a), (jp.lap_u - jm.lap_u) * inv);
            acc[4].add(j0.hess_lap_u[static_cast<std::size_t>(a)], (jp.grad_lap_u - jm.grad_lap_u) * inv);
        }
        {
            const FieldJet jp = eval_jet(spec, x, t + h);
            const FieldJet jm = eval_jet(spec, x, t - h);
            const double inv = 1.0 / (2.0 * h);
            acc[1].add(j0.du_dt, (jp.u - jm.u) * inv);
            acc[2].add(j0.dgrad_dt, (jp.grad_u - jm.grad_u) * inv);
            acc[3].add(j0.dlap_dt, (jp.lap_u - jm.lap_u) * inv);
            acc[4].add(j0.dgrad_lap_dt, (jp.grad_lap_u - jm.grad_lap_u) * inv);

            const FieldJet fp = eval_jet(spec, x + h * j0.u, t + h);
            const FieldJet fm = eval_jet(spec, x - h * j0.u, t - h);
            material.add(j0.du_dt_material, (fp.u - fm.u) * inv);
        }
        Vec trace = Vec::Zero(n);
        for (int k = 0; k < n; ++k) trace += j0.hess_u[static_cast<std::size_t>(k)].col(k);
        trace_err = std::max(trace_err, (trace - j0.lap_u).cwiseAbs().maxCoeff());
    }

    JetConsistencyReport r;
    r.n_points = n_points;
    r.h = h;
    for (std::size_t k = 1; k < 5; ++k) r.max_rel_error[k] = acc[k].relative();
    r.laplacian_trace_error = trace_err;
    r.material_fd_error = material.relative();
    return r;
}

}  // namespace mrflow
