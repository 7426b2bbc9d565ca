#include "mrflow/mild_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mrflow/errors.hpp"

namespace mrflow {

std::string to_string(SolveMode mode) { return mode == SolveMode::mild ? "mild" : "strong"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Positive root of a x^2 + b x - c = 0 (a, b >= 0, c > 0), in cancellation-free form.
double positive_root(double a, double b, double c) {
    if (a == 0.0 && b == 0.0) return kInf;
    return 2.0 * c / (b + std::sqrt(b * b + 4.0 * a * c));
}

// Shrinks a boundary root so that a strict inequality holds.
double strictly_inside(double d) { return std::isfinite(d) ? d * (1.0 - 1e-12) : d; }

}  // namespace

bool WindowCertificate::admits(double d, double mu, double kappa) const {
    const double lin = (1.0 + mu + L_b) * d + 2.0 * kappa * std::sqrt(mu) * std::sqrt(d);
    if (mode == SolveMode::mild) {
        return lin < 0.25 && 2.0 * L_b * d < K / 4.0 && (2.0 + K) * L_c * d <= 0.25;
    }
    return lin <= 0.5 && lin <= 0.25 && 2.0 * L_c * d + L_c * K * d * d <= 0.25 && K >= 4.0 * L_b;
}

WindowCertificate window_delta(const BoundEstimates& bounds, const MRParams& params, const Vec& y0, const Vec& w0,
                               SolveMode mode) {
    if (!std::isfinite(bounds.L_b) || !std::isfinite(bounds.L_c) || bounds.L_b < 0.0 || bounds.L_c < 0.0) {
        throw ValidationError("window_delta: field bounds must be finite and non-negative");
    }
    WindowCertificate c;
    c.mode = mode;
    c.L_b = bounds.L_b;
    c.L_c = bounds.L_c;
    const double a = 1.0 + params.mu + c.L_b;
    const double b = 2.0 * params.memory_coefficient();

    if (mode == SolveMode::mild) {
        c.K = std::max(4.0 * std::max(y0.norm(), w0.norm()), kRadiusFloor);
        const double x = positive_root(a, b, 0.25);
        c.delta_self_map = strictly_inside(x * x);
        c.delta_radius = c.L_b > 0.0 ? strictly_inside(c.K / (8.0 * c.L_b)) : kInf;
        c.delta_contraction = c.L_c > 0.0 ? 0.25 / ((2.0 + c.K) * c.L_c) : kInf;
    } else {
        c.K = std::max(4.0 * c.L_b, kRadiusFloor);
        const double x_self = positive_root(a, b, 0.5);
        const double x_bracket = positive_root(a, b, 0.25);
        c.delta_self_map = x_self * x_self;
        c.delta_radius = kInf;
        const double d_lip = c.L_c > 0.0 ? positive_root(c.L_c * c.K, 2.0 * c.L_c, 0.25) : kInf;
        c.delta_contraction = std::min(x_bracket * x_bracket, d_lip);
    }
    c.delta = std::min({c.delta_self_map, c.delta_radius, c.delta_contraction});
    return c;
}

bool Trajectory::converged() const {
    return std::all_of(segments.begin(), segments.end(), [](const auto& s) { return s.converged; });
}

std::size_t Trajectory::total_iterations() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.iterations_used;
    return n;
}

std::pair<Vec, Vec> Trajectory::state_at(double time) const {
    if (t.empty() || time < t.front() || time > t.back()) throw ValidationError("state_at: time outside trajectory");
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t k = static_cast<std::size_t>(std::distance(t.begin(), it));
    k = k == 0 ? 0 : std::min(k - 1, t.size() - 2);
    if (t.size() == 1) return {y[0], w[0]};
    const double r = (time - t[k]) / (t[k + 1] - t[k]);
    return {(1.0 - r) * y[k] + r * y[k + 1], (1.0 - r) * w[k] + r * w[k + 1]};
}

std::vector<double> Trajectory::schedule() const {
    std::vector<double> out;
    out.reserve(segments.size());
    for (const auto& s : segments) out.push_back(s.t.back());
    return out;
}

// ---------------------------------------------------------------------------
// Window maps

namespace {

struct FrozenKernel {
    std::vector<Vec> frozen;          // history nodes before t_a (minus the t_a offset for mild)
    std::vector<double> node_weight;  // weight of the window's first node
};

template <class T>
FrozenKernel freeze_history(const WindowKernel& kernel, std::span<const T> hist, const T& zero, bool subtract_start) {
    FrozenKernel out;
    const std::size_t m = kernel.window_size();
    const std::size_t K = kernel.history_size() - 1;
    out.frozen.resize(m);
    out.node_weight.resize(m);
    std::vector<double> wts;
    T start = zero;
    if (subtract_start) {
        kernel.history_weights(0, wts);
        for (std::size_t j = 0; j <= K; ++j) start += wts[j] * hist[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
        kernel.history_weights(i, wts);
        T acc = zero;
        for (std::size_t j = 0; j < K; ++j) acc += wts[j] * hist[j];
        out.frozen[i] = acc - start;
        out.node_weight[i] = wts[K];
    }
    return out;
}

void require_history(const HistoryView& h, double t_a) {
    if (h.t.size() != h.values.size()) throw ValidationError("history times and values differ in length");
    if (!h.t.empty() && h.t.back() != t_a) throw ValidationError("history must end at the window start");
}

void require_finite(const CompactFields& f) {
    if (!f.A.allFinite() || !f.B.allFinite() || !f.M.allFinite()) {
        throw NumericalError("non-finite value in field evaluation");
    }
}

}  // namespace

MildWindowMap::MildWindowMap(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                             std::span<const double> nodes, const HistoryView& history)
    : spec_(spec), params_(params), y_a_(y_a), w_a_(w_a), nodes_(nodes.begin(), nodes.end()) {
    if (nodes_.size() < 2) throw ValidationError("window needs at least two nodes");
    require_history(history, nodes_.front());
    const std::vector<double> t0_only{nodes_.front()};
    const std::vector<Vec> w_only{w_a};
    const bool has_hist = !history.t.empty();
    const WindowKernel kernel(has_hist ? history.t : std::span<const double>(t0_only), nodes_);
    auto fk = freeze_history<Vec>(kernel, has_hist ? history.values : std::span<const Vec>(w_only),
                                  Vec::Zero(w_a.size()), true);
    frozen_ = std::move(fk.frozen);
    node_weight_ = std::move(fk.node_weight);
    kw_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto w = kernel.window_weights(i);
        kw_[i].assign(w.begin(), w.end());
    }
}

MildWindowMap::Iterate MildWindowMap::constant_guess() const {
    return {std::vector<Vec>(nodes_.size(), y_a_), std::vector<Vec>(nodes_.size(), w_a_)};
}

MildWindowMap::Iterate MildWindowMap::apply(const Iterate& phi) const {
    const std::size_t m = nodes_.size();
    const double mu = params_.mu;
    const double mem = params_.memory_coefficient();
    std::vector<Vec> F(m);
    std::vector<Vec> G(m);
    for (std::size_t l = 0; l < m; ++l) {
        const CompactFields f = eval_compact(spec_, params_, phi.xi[l], nodes_[l]);
        require_finite(f);
        F[l] = phi.eta[l] + f.A;
        G[l] = -mu * phi.eta[l] - f.M * phi.eta[l] + f.B;
    }
    Iterate out{std::vector<Vec>(m), std::vector<Vec>(m)};
    out.xi[0] = y_a_;
    out.eta[0] = w_a_;
    Vec accY = Vec::Zero(y_a_.size());
    Vec accW = Vec::Zero(w_a_.size());
    for (std::size_t i = 1; i < m; ++i) {
        const double h = nodes_[i] - nodes_[i - 1];
        accY += 0.5 * h * (F[i - 1] + F[i]);
        accW += 0.5 * h * (G[i - 1] + G[i]);
        Vec ker = frozen_[i] + node_weight_[i] * phi.eta[0];
        const auto& row = kw_[i];
        for (std::size_t l = 1; l <= i; ++l) ker += row[l - 1] * phi.eta[l];
        out.xi[i] = y_a_ + accY;
        out.eta[i] = w_a_ + accW - mem * ker;
    }
    return out;
}

StrongWindowMap::StrongWindowMap(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                                 std::span<const double> nodes, const HistoryView& history)
    : spec_(spec), params_(params), y_a_(y_a), w_a_(w_a), nodes_(nodes.begin(), nodes.end()) {
    if (nodes_.size() < 2) throw ValidationError("window needs at least two nodes");
    require_history(history, nodes_.front());
    const std::vector<double> t0_only{nodes_.front()};
    const std::vector<Vec> zero_only{Vec::Zero(y_a.size())};
    const bool has_hist = !history.t.empty();
    const WindowKernel kernel(has_hist ? history.t : std::span<const double>(t0_only), nodes_);
    auto fk = freeze_history<Vec>(kernel, has_hist ? history.values : std::span<const Vec>(zero_only),
                                  Vec::Zero(y_a.size()), false);
    frozen_ = std::move(fk.frozen);
    node_weight_ = std::move(fk.node_weight);
    kw_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto w = kernel.window_weights(i);
        kw_[i].assign(w.begin(), w.end());
    }
}

void StrongWindowMap::reconstruct(const Iterate& x, std::vector<Vec>& y, std::vector<Vec>& w) const {
    const std::size_t m = nodes_.size();
    y.assign(m, y_a_);
    w.assign(m, w_a_);
    for (std::size_t i = 1; i < m; ++i) {
        const double h = nodes_[i] - nodes_[i - 1];
        y[i] = y[i - 1] + 0.5 * h * (x.phi[i - 1] + x.phi[i]);
        w[i] = w[i - 1] + 0.5 * h * (x.psi[i - 1] + x.psi[i]);
    }
}

StrongWindowMap::Iterate StrongWindowMap::apply(const Iterate& x) const {
    const std::size_t m = nodes_.size();
    const double mu = params_.mu;
    const double mem = params_.memory_coefficient();
    std::vector<Vec> Y;
    std::vector<Vec> W;
    reconstruct(x, Y, W);
    Iterate out{std::vector<Vec>(m), std::vector<Vec>(m)};
    for (std::size_t i = 0; i < m; ++i) {
        const CompactFields f = eval_compact(spec_, params_, Y[i], nodes_[i]);
        require_finite(f);
        Vec ker = frozen_[i] + node_weight_[i] * x.psi[0];
        const auto& row = kw_[i];
        for (std::size_t l = 1; l <= i; ++l) ker += row[l - 1] * x.psi[l];
        out.phi[i] = W[i] + f.A;
        out.psi[i] = -mu * W[i] - f.M * W[i] - mem * ker + f.B;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Picard iteration

namespace {

template <class A, class B>
double sup_distance(const std::vector<A>& a1, const std::vector<B>& b1, const std::vector<A>& a2,
                    const std::vector<B>& b2) {
    double d = 0.0;
    for (std::size_t i = 0; i < a1.size(); ++i) {
        const double s = (a1[i] - a2[i]).squaredNorm() + (b1[i] - b2[i]).squaredNorm();
        d = std::max(d, std::sqrt(s));
    }
    return d;
}

// exp of the least-squares slope of log(d_k) against k.
double fitted_rate(const std::vector<double>& d) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k] > 0.0 && std::isfinite(d[k])) pts.emplace_back(static_cast<double>(k), std::log(d[k]));
    }
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const auto n = static_cast<double>(pts.size());
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return 0.0;
    return std::exp((n * sxy - sx * sy) / den);
}

std::string window_failure(std::size_t window, std::size_t iters, double residual) {
    std::ostringstream os;
    os << "Picard iteration did not converge on window " << window << " after " << iters
       << " iterations (last sup-norm change " << residual << ")";
    return os.str();
}

}  // namespace

TrajectorySegment picard_window(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                                std::span<const double> nodes, const PicardOptions& options,
                                const HistoryView& history, std::size_t window_index) {
    const MildWindowMap map(spec, params, y_a, w_a, nodes, history);
    auto it = map.constant_guess();
    TrajectorySegment seg;
    double d = kInf;
    for (std::size_t k = 1; k <= options.max_iter; ++k) {
        auto next = map.apply(it);
        d = sup_distance(next.xi, next.eta, it.xi, it.eta);
        if (!std::isfinite(d)) throw NumericalError("non-finite Picard iterate on window " + std::to_string(window_index));
        seg.iterate_distances.push_back(d);
        it = std::move(next);
        seg.iterations_used = k;
        if (d <= options.tol) {
            seg.converged = true;
            break;
        }
    }
    seg.sup_norm_residual = d;
    if (!seg.converged) throw ConvergenceError(window_failure(window_index, seg.iterations_used, d), d, window_index);
    seg.convergence_rate = fitted_rate(seg.iterate_distances);
    seg.t.assign(nodes.begin(), nodes.end());
    seg.y = std::move(it.xi);
    seg.w = std::move(it.eta);
    return seg;
}

TrajectorySegment picard_window(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                                double t_a, double delta, std::size_t n_intervals, const PicardOptions& options,
                                MeshKind mesh, const HistoryView& history) {
    if (!(delta > 0.0)) throw ValidationError("window length must be positive");
    const auto nodes = make_mesh(t_a, t_a + delta, n_intervals, mesh);
    return picard_window(spec, params, y_a, w_a, nodes, options, history);
}

namespace {

TrajectorySegment strong_window(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                                const Vec& phi_a, const Vec& psi_a, std::span<const double> nodes,
                                const PicardOptions& options, const HistoryView& history, std::size_t window_index) {
    const StrongWindowMap map(spec, params, y_a, w_a, nodes, history);
    StrongWindowMap::Iterate it{std::vector<Vec>(nodes.size(), phi_a), std::vector<Vec>(nodes.size(), psi_a)};
    TrajectorySegment seg;
    double d = kInf;
    for (std::size_t k = 1; k <= options.max_iter; ++k) {
        auto next = map.apply(it);
        d = sup_distance(next.phi, next.psi, it.phi, it.psi);
        if (!std::isfinite(d)) throw NumericalError("non-finite Picard iterate on window " + std::to_string(window_index));
        seg.iterate_distances.push_back(d);
        it = std::move(next);
        seg.iterations_used = k;
        if (d <= options.tol) {
            seg.converged = true;
            break;
        }
    }
    seg.sup_norm_residual = d;
    if (!seg.converged) throw ConvergenceError(window_failure(window_index, seg.iterations_used, d), d, window_index);
    seg.convergence_rate = fitted_rate(seg.iterate_distances);
    seg.t.assign(nodes.begin(), nodes.end());
    map.reconstruct(it, seg.y, seg.w);
    seg.ydot = std::move(it.phi);
    seg.wdot = std::move(it.psi);
    return seg;
}

struct WindowPlanner {
    const SolveOptions& options;
    double t_end;

    // Returns the next window end, or throws when the schedule is unusable.
    double next_end(double t_a, std::size_t index, double certified, bool& is_certified) const {
        double len = 0.0;
        if (!options.schedule.empty()) {
            if (index >= options.schedule.size()) throw ValidationError("window schedule ends before t_end");
            const double end = options.schedule[index];
            if (!(end > t_a)) throw ValidationError("window schedule must be strictly increasing");
            len = end - t_a;
            is_certified = len <= certified;
            return std::min(end, t_end);
        }
        if (options.window) {
            if (!(*options.window > 0.0)) throw ValidationError("solver.window must be positive");
            len = *options.window;
        } else {
            len = certified;
        }
        if (!(len > 0.0) || !std::isfinite(len)) throw ValidationError("certified window length is not usable");
        is_certified = len <= certified;
        const double end = t_a + len;
        // Avoid a sliver window at the end.
        if (end >= t_end || t_end - end < 1e-9 * std::max(1.0, std::abs(t_end))) return t_end;
        return end;
    }
};

void finish(Trajectory& traj, const FieldSpec& spec, const MRParams& params, std::size_t uncertified,
            double first_len, double first_cert) {
    traj.v.resize(traj.t.size());
    for (std::size_t i = 0; i < traj.t.size(); ++i) traj.v[i] = w_to_velocity(traj.y[i], traj.w[i], traj.t[i], spec, params);
    if (uncertified > 0) {
        std::ostringstream os;
        os << "uncertified window: " << uncertified << " of " << traj.segments.size()
           << " windows exceed the certified length (first: " << first_len << " > " << first_cert << ")";
        traj.warnings.push_back(os.str());
    }
}

void append_segment(Trajectory& traj, TrajectorySegment&& seg, bool strong) {
    for (std::size_t i = 1; i < seg.t.size(); ++i) {
        traj.t.push_back(seg.t[i]);
        traj.y.push_back(seg.y[i]);
        traj.w.push_back(seg.w[i]);
        if (strong) traj.wdot.push_back(seg.wdot[i]);
    }
    traj.segments.push_back(std::move(seg));
}

void require_solve_inputs(const FieldSpec& spec, const MRParams& params, const Vec& y0, double t0, double t_end) {
    if (!(t_end > t0)) throw ValidationError("t_end must exceed t0");
    if (y0.size() != spec.dimension() || params.dimension() != spec.dimension()) {
        throw ValidationError("state, gravity and field dimensions differ");
    }
}

}  // namespace

BoundEstimates default_bounds(const FieldSpec& spec, const MRParams& params, double radius, double t0, double t_end,
                              std::size_t samples, std::uint64_t seed) {
    return estimate_bounds(spec, params, spec.sampling_box(radius), Interval{t0, t_end}, samples, seed);
}

Trajectory solve_mild(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& v0, double t0,
                      double t_end, const SolveOptions& options) {
    require_solve_inputs(spec, params, y0, t0, t_end);
    const Vec w0 = velocity_to_w(y0, v0, t0, spec, params);
    return solve_mild_w(spec, params, y0, w0, t0, t_end, options);
}

Trajectory solve_mild_w(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& w0, double t0,
                        double t_end, const SolveOptions& options) {
    require_solve_inputs(spec, params, y0, t0, t_end);
    if (w0.size() != y0.size()) throw ValidationError("w0 has the wrong dimension");
    if (options.nodes_per_window < 1) throw ValidationError("solver.nodes_per_window must be >= 1");
    const double radius = std::max(4.0 * std::max(y0.norm(), w0.norm()), kRadiusFloor);
    const BoundEstimates bounds =
        options.bounds ? *options.bounds : default_bounds(spec, params, radius, t0, t_end, options.bound_samples, options.seed);
    const MeshKind first_mesh = options.first_window_mesh.value_or(w0.norm() > 0.0 ? MeshKind::graded : MeshKind::uniform);
    const PicardOptions picard{options.tol, options.max_iter};
    const WindowPlanner planner{options, t_end};

    Trajectory traj;
    traj.mode = SolveMode::mild;
    traj.t = {t0};
    traj.y = {y0};
    traj.w = {w0};
    std::size_t uncertified = 0;
    double first_len = 0.0;
    double first_cert = 0.0;
    while (traj.t.back() < t_end) {
        const std::size_t k = traj.segments.size();
        if (k >= options.max_windows) throw ValidationError("window count limit reached; raise solver.window");
        const double t_a = traj.t.back();
        const WindowCertificate cert = window_delta(bounds, params, traj.y.back(), traj.w.back(), SolveMode::mild);
        bool certified = true;
        const double t_b = planner.next_end(t_a, k, cert.delta, certified);
        const auto nodes = make_mesh(t_a, t_b, options.nodes_per_window, k == 0 ? first_mesh : MeshKind::uniform,
                                     options.grading);
        const HistoryView hist{traj.t, traj.w};
        TrajectorySegment seg = picard_window(spec, params, traj.y.back(), traj.w.back(), nodes, picard, hist, k);
        seg.certificate = cert;
        seg.certified = certified;
        if (!certified && uncertified++ == 0) {
            first_len = t_b - t_a;
            first_cert = cert.delta;
        }
        append_segment(traj, std::move(seg), false);
    }
    finish(traj, spec, params, uncertified, first_len, first_cert);
    return traj;
}

Trajectory solve_strong(const FieldSpec& spec, const MRParams& params, const Vec& y0, double t0, double t_end,
                        const SolveOptions& options) {
    require_solve_inputs(spec, params, y0, t0, t_end);
    if (options.nodes_per_window < 1) throw ValidationError("solver.nodes_per_window must be >= 1");
    const int n = spec.dimension();
    const Vec w0 = Vec::Zero(n);
    const double radius = std::max(4.0 * y0.norm(), kRadiusFloor);
    const BoundEstimates bounds =
        options.bounds ? *options.bounds : default_bounds(spec, params, radius, t0, t_end, options.bound_samples, options.seed);
    const MeshKind first_mesh = options.first_window_mesh.value_or(MeshKind::uniform);
    const PicardOptions picard{options.tol, options.max_iter};
    const WindowPlanner planner{options, t_end};

    const CompactFields f0 = eval_compact(spec, params, y0, t0);
    Trajectory traj;
    traj.mode = SolveMode::strong;
    traj.t = {t0};
    traj.y = {y0};
    traj.w = {w0};
    traj.wdot = {f0.B};
    Vec phi_a = f0.A;
    std::size_t uncertified = 0;
    double first_len = 0.0;
    double first_cert = 0.0;
    while (traj.t.back() < t_end) {
        const std::size_t k = traj.segments.size();
        if (k >= options.max_windows) throw ValidationError("window count limit reached; raise solver.window");
        const double t_a = traj.t.back();
        const WindowCertificate cert = window_delta(bounds, params, traj.y.back(), traj.w.back(), SolveMode::strong);
        bool certified = true;
        const double t_b = planner.next_end(t_a, k, cert.delta, certified);
        const auto nodes = make_mesh(t_a, t_b, options.nodes_per_window, k == 0 ? first_mesh : MeshKind::uniform,
                                     options.grading);
        const HistoryView hist{traj.t, traj.wdot};
        TrajectorySegment seg = strong_window(spec, params, traj.y.back(), traj.w.back(), phi_a, traj.wdot.back(),
                                              nodes, picard, hist, k);
        seg.certificate = cert;
        seg.certified = certified;
        if (!certified && uncertified++ == 0) {
            first_len = t_b - t_a;
            first_cert = cert.delta;
        }
        phi_a = seg.ydot.back();
        append_segment(traj, std::move(seg), true);
    }
    finish(traj, spec, params, uncertified, first_len, first_cert);
    return traj;
}

// ---------------------------------------------------------------------------
// Contraction probe

namespace {

// Random point of the closed ball of radius K in R^{2n}.
StateVec random_in_ball(std::mt19937_64& rng, int dim2, double K, bool on_sphere) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    StateVec v(dim2);
    for (int i = 0; i < dim2; ++i) v[i] = normal(rng);
    const double r = on_sphere ? K : K * std::pow(unit(rng), 1.0 / dim2);
    return v * (r / v.norm());
}

StateVec clamp_to_ball(StateVec v, double K) {
    const double nv = v.norm();
    return nv > K ? StateVec(v * (K / nv)) : v;
}

}  // namespace

ContractionProbeResult contraction_probe(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& w0,
                                         double t0, const WindowCertificate& certificate, std::size_t n_pairs,
                                         std::uint64_t seed, std::size_t n_intervals,
                                         std::optional<double> window_override) {
    const int n = spec.dimension();
    const double delta = window_override.value_or(certificate.delta);
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("contraction_probe: window length must be positive");
    const double K = certificate.K;
    const auto nodes = make_mesh(t0, t0 + delta, n_intervals, MeshKind::uniform);
    const std::size_t m = nodes.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Phi drawn nodewise in the ball; its piecewise-linear interpolant stays in the ball (convexity).
    auto draw = [&](bool near, const std::vector<StateVec>* base) {
        std::vector<StateVec> phi(m);
        for (std::size_t l = 0; l < m; ++l) {
            if (near && base) {
                phi[l] = clamp_to_ball((*base)[l] + random_in_ball(rng, 2 * n, 1e-3 * K, false), K);
            } else {
                phi[l] = random_in_ball(rng, 2 * n, K, unit(rng) < 0.25);
            }
        }
        return phi;
    };

    ContractionProbeResult res;
    res.K = K;
    const HistoryView no_history{};
    auto sup = [](const std::vector<StateVec>& a) {
        double s = 0.0;
        for (const auto& v : a) s = std::max(s, v.norm());
        return s;
    };
    auto split = [n](const std::vector<StateVec>& phi, std::vector<Vec>& first, std::vector<Vec>& second) {
        first.resize(phi.size());
        second.resize(phi.size());
        for (std::size_t l = 0; l < phi.size(); ++l) {
            first[l] = phi[l].head(n);
            second[l] = phi[l].tail(n);
        }
    };
    auto join = [n](const std::vector<Vec>& first, const std::vector<Vec>& second) {
        std::vector<StateVec> out(first.size());
        for (std::size_t l = 0; l < first.size(); ++l) {
            out[l].resize(2 * n);
            out[l] << first[l], second[l];
        }
        return out;
    };

    std::function<std::vector<StateVec>(const std::vector<StateVec>&)> apply;
    std::optional<MildWindowMap> mild;
    std::optional<StrongWindowMap> strong;
    const std::vector<double> t0_only{t0};
    if (certificate.mode == SolveMode::mild) {
        mild.emplace(spec, params, y0, w0, nodes, no_history);
        apply = [&](const std::vector<StateVec>& phi) {
            MildWindowMap::Iterate it;
            split(phi, it.xi, it.eta);
            const auto out = mild->apply(it);
            return join(out.xi, out.eta);
        };
    } else {
        strong.emplace(spec, params, y0, Vec::Zero(n), nodes, no_history);
        apply = [&](const std::vector<StateVec>& phi) {
            StrongWindowMap::Iterate it;
            split(phi, it.phi, it.psi);
            const auto out = strong->apply(it);
            return join(out.phi, out.psi);
        };
    }

    for (std::size_t p = 0; p < n_pairs; ++p) {
        const bool near = (p % 2) == 1;
        const auto phi1 = draw(false, nullptr);
        const auto phi2 = draw(near, &phi1);
        double den = 0.0;
        for (std::size_t l = 0; l < m; ++l) den = std::max(den, (phi1[l] - phi2[l]).norm());
        const auto img1 = apply(phi1);
        const auto img2 = apply(phi2);
        res.max_image_norm = std::max({res.max_image_norm, sup(img1), sup(img2)});
        if (den == 0.0) {
            ++res.skipped_identical;
            continue;
        }
        double num = 0.0;
        for (std::size_t l = 0; l < m; ++l) num = std::max(num, (img1[l] - img2[l]).norm());
        const double ratio = num / den;
        res.ratios.push_back(ratio);
        res.max_ratio = std::max(res.max_ratio, ratio);
        ++res.pairs;
    }
    return res;
}

}  // namespace mrflow
