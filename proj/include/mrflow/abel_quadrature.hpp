#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mrflow/linalg.hpp"

namespace mrflow {

enum class MeshKind { uniform, graded };

/// Nodes t0 = s_0 < ... < s_N = t1; graded meshes follow s_j = t0 + (j/N)^p (t1 - t0).
std::vector<double> make_mesh(double t0, double t1, std::size_t intervals, MeshKind kind, double grading = 2.0);

/// Samples of a vector-valued function on a strictly increasing time grid,
/// interpreted as its piecewise-linear interpolant.
class HistoryGrid {
public:
    /// values: one row per node, one column per component.
    HistoryGrid(std::vector<double> nodes, Eigen::MatrixXd values, MeshKind kind = MeshKind::uniform,
                double grading = 1.0);

    /// Samples f at a fresh mesh on [t0, t1].
    template <class F>
    static HistoryGrid sample(F&& f, double t0, double t1, std::size_t intervals, MeshKind kind = MeshKind::uniform,
                              double grading = 2.0) {
        auto nodes = make_mesh(t0, t1, intervals, kind, grading);
        const Eigen::VectorXd first = f(nodes.front());
        Eigen::MatrixXd vals(static_cast<Eigen::Index>(nodes.size()), first.size());
        for (std::size_t j = 0; j < nodes.size(); ++j) vals.row(static_cast<Eigen::Index>(j)) = f(nodes[j]).transpose();
        return HistoryGrid(std::move(nodes), std::move(vals), kind, kind == MeshKind::graded ? grading : 1.0);
    }

    [[nodiscard]] double t0() const { return nodes_.front(); }
    [[nodiscard]] double t_end() const { return nodes_.back(); }
    [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
    [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
    [[nodiscard]] Eigen::Index components() const { return values_.cols(); }
    [[nodiscard]] MeshKind mesh_kind() const { return kind_; }
    [[nodiscard]] double grading() const { return grading_; }

    /// Linear interpolant at t in [t0, t_end].
    [[nodiscard]] Eigen::VectorXd interpolate(double t) const;

    /// Length of the mesh interval containing t.
    [[nodiscard]] double spacing_at(double t) const;

private:
    std::vector<double> nodes_;
    Eigen::MatrixXd values_;
    MeshKind kind_;
    double grading_;
};

/// Product-integration weights: integral_{s_0}^{t} f(s) / sqrt(t - s) ds = sum_j weights[j] f(s_j)
/// for piecewise-linear f. `weights` is resized to the number of nodes that contribute.
/// Requires s_0 <= t <= s_N.
void abel_weights(std::span<const double> nodes, double t, std::vector<double>& weights);

/// Weights of one full mesh interval [s_j, s_j + h] seen from t >= s_j + h:
/// returns {weight of s_j, weight of s_j + h}. Exact for linear f, cancellation-free.
struct IntervalWeights {
    double left;
    double right;
};
IntervalWeights abel_interval_weights(double t_minus_left, double t_minus_right, double h);

/// Abel weights of every node of a window [t_a, t_b] appended to a frozen history grid
/// [t0, t_a]. Row i holds the weights of integral_{t0}^{s_i} f(s) / sqrt(s_i - s) ds, split into
/// the history nodes (including t_a) and the window nodes 1..i.
class WindowKernel {
public:
    /// history_t may be empty (window starts at t0); otherwise its last entry equals window_nodes[0].
    WindowKernel(std::span<const double> history_t, std::span<const double> window_nodes);

    [[nodiscard]] std::size_t window_size() const { return rows_.size(); }
    [[nodiscard]] std::size_t history_size() const { return history_size_; }

    /// Weights of window nodes 1..i for output node i (index 0 of the span is node 1).
    [[nodiscard]] std::span<const double> window_weights(std::size_t i) const { return rows_[i]; }

    /// Weights of the history nodes (t0 .. t_a) for output node i.
    void history_weights(std::size_t i, std::vector<double>& weights) const;

    /// sum_j history_weight_j(i) * values[j]; values indexed like the history grid.
    template <class T>
    [[nodiscard]] T history_sum(std::size_t i, std::span<const T> values, const T& zero) const {
        std::vector<double> w;
        history_weights(i, w);
        T acc = zero;
        for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * values[j];
        return acc;
    }

private:
    std::vector<double> grid_;  ///< history nodes followed by window nodes 1..m
    std::size_t history_size_ = 1;
    std::vector<std::vector<double>> rows_;
};

/// Integral of f(s) / sqrt(t - s) over [t0, t]; throws ValidationError outside the grid span.
Eigen::VectorXd abel_integral(const HistoryGrid& grid, double t);

/// w0 / sqrt(t - t0); throws SingularityError when t <= t0.
Vec singular_forcing(const Vec& w0, double t0, double t);

/// |d/dt A[w](t) - A[w'](t) - w(t0) / sqrt(t - t0)| with A the Abel integral and the time
/// derivative taken by central differences of step h_t (default: local spacing / 10).
double rl_identity_residual(const HistoryGrid& w, const HistoryGrid& wdot, double t, double h_t = 0.0);

}  // namespace mrflow
