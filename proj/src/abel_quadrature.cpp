#include "mrflow/abel_quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "mrflow/errors.hpp"

namespace mrflow {

std::vector<double> make_mesh(double t0, double t1, std::size_t intervals, MeshKind kind, double grading) {
    if (intervals < 1) throw ValidationError("mesh needs at least one interval");
    if (!(t1 > t0)) throw ValidationError("mesh end must exceed its start");
    if (kind == MeshKind::graded && !(grading >= 1.0)) throw ValidationError("mesh grading exponent must be >= 1");
    std::vector<double> s(intervals + 1);
    const double len = t1 - t0;
    const auto N = static_cast<double>(intervals);
    for (std::size_t j = 0; j <= intervals; ++j) {
        const double r = static_cast<double>(j) / N;
        s[j] = t0 + len * (kind == MeshKind::graded ? std::pow(r, grading) : r);
    }
    s.back() = t1;
    return s;
}

HistoryGrid::HistoryGrid(std::vector<double> nodes, Eigen::MatrixXd values, MeshKind kind, double grading)
    : nodes_(std::move(nodes)), values_(std::move(values)), kind_(kind), grading_(grading) {
    if (nodes_.size() < 2) throw ValidationError("history grid needs at least two nodes");
    if (static_cast<std::size_t>(values_.rows()) != nodes_.size()) {
        throw ValidationError("history grid: one value row per node required");
    }
    for (std::size_t j = 1; j < nodes_.size(); ++j) {
        if (!(nodes_[j] > nodes_[j - 1])) throw ValidationError("history grid nodes must be strictly increasing");
    }
}

namespace {

// Index k with s_k <= t < s_{k+1}, clamped to the last interval.
std::size_t locate(std::span<const double> s, double t) {
    auto it = std::upper_bound(s.begin(), s.end(), t);
    auto k = static_cast<std::size_t>(std::distance(s.begin(), it));
    if (k == 0) return 0;
    return std::min(k - 1, s.size() - 2);
}

}  // namespace

Eigen::VectorXd HistoryGrid::interpolate(double t) const {
    if (t < t0() || t > t_end()) throw ValidationError("interpolation time outside the grid");
    const std::size_t k = locate(nodes_, t);
    const double h = nodes_[k + 1] - nodes_[k];
    const double r = (t - nodes_[k]) / h;
    const auto kk = static_cast<Eigen::Index>(k);
    return ((1.0 - r) * values_.row(kk) + r * values_.row(kk + 1)).transpose();
}

double HistoryGrid::spacing_at(double t) const {
    const std::size_t k = locate(nodes_, std::clamp(t, t0(), t_end()));
    return nodes_[k + 1] - nodes_[k];
}

IntervalWeights abel_interval_weights(double t_minus_left, double t_minus_right, double h) {
    // With a = t - s_{j+1}, b = t - s_j:  integral of (r - a)/sqrt(r) = (2/3) D^2 (sqrt b + 2 sqrt a),
    // integral of (b - r)/sqrt(r) = (2/3) D^2 (2 sqrt b + sqrt a), D = sqrt b - sqrt a = h / (sqrt a + sqrt b).
    const double sa = std::sqrt(std::max(t_minus_right, 0.0));
    const double sb = std::sqrt(std::max(t_minus_left, 0.0));
    const double den = (sa + sb) * (sa + sb);
    const double f = (2.0 / 3.0) * h / den;
    return {f * (sb + 2.0 * sa), f * (2.0 * sb + sa)};
}

void abel_weights(std::span<const double> s, double t, std::vector<double>& weights) {
    if (s.size() < 2) throw ValidationError("abel_weights needs at least two nodes");
    if (t < s.front() || t > s.back()) throw ValidationError("Abel integral time outside the grid span");
    if (t == s.front()) {
        weights.assign(1, 0.0);
        return;
    }
    // Last full interval ends at s_k <= t.
    auto it = std::upper_bound(s.begin(), s.end(), t);
    const auto k = static_cast<std::size_t>(std::distance(s.begin(), it)) - 1;
    const bool partial = t > s[k];
    weights.assign(partial ? k + 2 : k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const auto w = abel_interval_weights(t - s[j], t - s[j + 1], s[j + 1] - s[j]);
        weights[j] += w.left;
        weights[j + 1] += w.right;
    }
    if (partial) {
        const double b = t - s[k];
        const double H = s[k + 1] - s[k];
        const double rb = std::sqrt(b);
        const double right = (4.0 / 3.0) * b * rb / H;
        weights[k] += 2.0 * rb - right;
        weights[k + 1] += right;
    }
}

WindowKernel::WindowKernel(std::span<const double> history_t, std::span<const double> window_nodes) {
    if (window_nodes.empty()) throw ValidationError("window kernel needs at least one node");
    if (!history_t.empty() && history_t.back() != window_nodes.front()) {
        throw ValidationError("window must start where the history ends");
    }
    grid_.assign(history_t.begin(), history_t.end());
    if (grid_.empty()) grid_.push_back(window_nodes.front());
    history_size_ = grid_.size();
    grid_.insert(grid_.end(), window_nodes.begin() + 1, window_nodes.end());

    const std::size_t K = history_size_ - 1;
    rows_.resize(window_nodes.size());
    for (std::size_t i = 1; i < window_nodes.size(); ++i) {
        const double t = grid_[K + i];
        auto& row = rows_[i];
        row.assign(i, 0.0);
        for (std::size_t l = 0; l < i; ++l) {
            // interval [grid_{K+l}, grid_{K+l+1}]; node K + l is history when l == 0
            const auto w = abel_interval_weights(t - grid_[K + l], t - grid_[K + l + 1], grid_[K + l + 1] - grid_[K + l]);
            if (l > 0) row[l - 1] += w.left;
            row[l] += w.right;
        }
    }
}

void WindowKernel::history_weights(std::size_t i, std::vector<double>& weights) const {
    const std::size_t K = history_size_ - 1;
    weights.assign(history_size_, 0.0);
    const double t = grid_[K + i];
    for (std::size_t j = 0; j < K; ++j) {
        const auto w = abel_interval_weights(t - grid_[j], t - grid_[j + 1], grid_[j + 1] - grid_[j]);
        weights[j] += w.left;
        weights[j + 1] += w.right;
    }
    if (i >= 1) {
        const auto w = abel_interval_weights(t - grid_[K], t - grid_[K + 1], grid_[K + 1] - grid_[K]);
        weights[K] += w.left;
    }
}

Eigen::VectorXd abel_integral(const HistoryGrid& grid, double t) {
    std::vector<double> w;
    abel_weights(grid.nodes(), t, w);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.components());
    for (std::size_t j = 0; j < w.size(); ++j) out += w[j] * grid.values().row(static_cast<Eigen::Index>(j)).transpose();
    return out;
}

Vec singular_forcing(const Vec& w0, double t0, double t) {
    if (!(t > t0)) throw SingularityError("singular forcing is not evaluable at t = t0; use the mild form");
    return w0 / std::sqrt(t - t0);
}

double rl_identity_residual(const HistoryGrid& w, const HistoryGrid& wdot, double t, double h_t) {
    if (w.nodes().size() != wdot.nodes().size() || !std::equal(w.nodes().begin(), w.nodes().end(), wdot.nodes().begin())) {
        throw ValidationError("RL identity: w and w' grids must share nodes");
    }
    if (h_t <= 0.0) h_t = w.spacing_at(t) / 10.0;
    if (t - h_t <= w.t0() || t + h_t > w.t_end()) {
        throw ValidationError("RL identity: t too close to the grid ends for central differencing");
    }
    const Eigen::VectorXd lhs = (abel_integral(w, t + h_t) - abel_integral(w, t - h_t)) / (2.0 * h_t);
    const Eigen::VectorXd w0 = w.values().row(0).transpose();
    const Eigen::VectorXd rhs = abel_integral(wdot, t) + w0 / std::sqrt(t - w.t0());
    return (lhs - rhs).norm();
}

}  // namespace mrflow
