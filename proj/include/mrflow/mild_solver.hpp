#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrflow/abel_quadrature.hpp"
#include "mrflow/flow_fields.hpp"
#include "mrflow/linalg.hpp"
#include "mrflow/mr_model.hpp"
#include "mrflow/params.hpp"

namespace mrflow {

enum class SolveMode { mild, strong };

std::string to_string(SolveMode mode);

/// Window length on which the fixed-point map is a self-map of X_{T,K} and a 1/2-contraction.
struct WindowCertificate {
    double K = 0.0;
    double delta = 0.0;
    double L_b = 0.0;
    double L_c = 0.0;
    SolveMode mode = SolveMode::mild;
    // Largest window admitted by each condition separately (infinity when non-binding).
    double delta_self_map = 0.0;  ///< mild: (1 + mu + L_b) d + 2 kappa mu^{1/2} sqrt(d) < 1/4; strong: <= 1/2
    double delta_radius = 0.0;    ///< mild: 2 L_b d < K/4
    double delta_contraction = 0.0;  ///< mild: (2 + K) L_c d <= 1/4; strong: bracket <= 1/4 and 2 L_c d + L_c K d^2 <= 1/4

    /// Re-checks every inequality at window length d.
    [[nodiscard]] bool admits(double d, double mu, double kappa) const;
};

/// K_floor used when the natural radius vanishes.
inline constexpr double kRadiusFloor = 1.0;

WindowCertificate window_delta(const BoundEstimates& bounds, const MRParams& params, const Vec& y0, const Vec& w0,
                               SolveMode mode);

/// Solution on one window, including its start node (shared with the previous window).
struct TrajectorySegment {
    std::vector<double> t;
    std::vector<Vec> y;
    std::vector<Vec> w;
    std::vector<Vec> ydot;  ///< strong mode only: phi = y'
    std::vector<Vec> wdot;  ///< strong mode only: psi = w'
    std::size_t iterations_used = 0;
    bool converged = false;
    double sup_norm_residual = 0.0;
    double convergence_rate = 0.0;  ///< geometric factor fitted to successive iterate distances
    std::vector<double> iterate_distances;
    bool certified = true;
    WindowCertificate certificate;
};

/// Chained windows on [t0, t_end], with a flat node view for history and dense output.
struct Trajectory {
    SolveMode mode = SolveMode::mild;
    std::vector<TrajectorySegment> segments;
    std::vector<double> t;  ///< all nodes, join nodes once
    std::vector<Vec> y;
    std::vector<Vec> w;
    std::vector<Vec> v;
    std::vector<Vec> wdot;  ///< strong mode only
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] int dimension() const { return y.empty() ? 0 : static_cast<int>(y.front().size()); }
    [[nodiscard]] bool converged() const;
    [[nodiscard]] std::size_t total_iterations() const;
    /// Linear interpolation of (y, w) at t in [t.front(), t.back()].
    [[nodiscard]] std::pair<Vec, Vec> state_at(double time) const;
    /// Window end times (the schedule that reproduces this solve).
    [[nodiscard]] std::vector<double> schedule() const;
};

/// Read-only history on [t0, t_a] fed into the Abel kernel of a later window.
struct HistoryView {
    std::span<const double> t;
    std::span<const Vec> values;  ///< w (mild) or w' (strong)
};

struct PicardOptions {
    double tol = 1e-10;
    std::size_t max_iter = 60;
};

/// One window of the discretised fixed-point map. Nodes start at t_a; node 0 carries the
/// handoff state and is never updated. Integrals use the trapezoid rule for the regular
/// part and product integration for the Abel kernel; the kernel always starts at t0
/// through the frozen history.
class MildWindowMap {
public:
    MildWindowMap(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                  std::span<const double> nodes, const HistoryView& history);

    struct Iterate {
        std::vector<Vec> xi;   ///< position argument
        std::vector<Vec> eta;  ///< relative-velocity argument
    };

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
    [[nodiscard]] Iterate constant_guess() const;

    /// (P Phi) at every window node.
    [[nodiscard]] Iterate apply(const Iterate& phi) const;

private:
    const FieldSpec& spec_;
    const MRParams& params_;
    Vec y_a_;
    Vec w_a_;
    std::vector<double> nodes_;
    std::vector<Vec> frozen_;            ///< history part of the Abel integral at each window node, minus its value at t_a
    std::vector<double> node_weight_;    ///< weight of window node 0 at each output node
    std::vector<std::vector<double>> kw_;  ///< in-window kernel weights, kw_[i][l] for l = 1..i
};

/// Fixed-point map for (phi, psi) = (y', w') with w(t0) = 0.
class StrongWindowMap {
public:
    StrongWindowMap(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                    std::span<const double> nodes, const HistoryView& history);

    struct Iterate {
        std::vector<Vec> phi;
        std::vector<Vec> psi;
    };

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] std::span<const double> nodes() const { return nodes_; }

    [[nodiscard]] Iterate apply(const Iterate& x) const;

    /// Positions and relative velocities obtained by integrating an iterate.
    void reconstruct(const Iterate& x, std::vector<Vec>& y, std::vector<Vec>& w) const;

private:
    const FieldSpec& spec_;
    const MRParams& params_;
    Vec y_a_;
    Vec w_a_;
    std::vector<double> nodes_;
    std::vector<Vec> frozen_;
    std::vector<double> node_weight_;
    std::vector<std::vector<double>> kw_;
};

/// Picard iteration Phi_{k+1} = P Phi_k from the constant guess on one window.
/// Throws ConvergenceError after max_iter, NumericalError on non-finite iterates.
TrajectorySegment picard_window(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                                std::span<const double> nodes, const PicardOptions& options,
                                const HistoryView& history = {}, std::size_t window_index = 0);

/// Convenience overload building `n_intervals` uniform or graded intervals on [t_a, t_a + delta].
TrajectorySegment picard_window(const FieldSpec& spec, const MRParams& params, const Vec& y_a, const Vec& w_a,
                                double t_a, double delta, std::size_t n_intervals, const PicardOptions& options,
                                MeshKind mesh = MeshKind::uniform, const HistoryView& history = {});

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 60;
    /// Requested window length. Lengths above the certificate are used as given and flagged.
    std::optional<double> window;
    /// Explicit window end times; overrides window and certificate (used to repeat a solve).
    std::vector<double> schedule;
    std::size_t nodes_per_window = 64;
    /// Mesh of the first window; default graded when w0 != 0 (mild) and uniform otherwise.
    std::optional<MeshKind> first_window_mesh;
    double grading = 2.0;
    std::optional<BoundEstimates> bounds;
    std::size_t bound_samples = 4096;
    std::uint64_t seed = 42;
    std::size_t max_windows = 1000000;
};

/// Mild solution from (y0, v0) at t0; every window sees the full history from t0.
Trajectory solve_mild(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& v0, double t0,
                      double t_end, const SolveOptions& options = {});

/// Same, starting from the relative velocity w0 directly.
Trajectory solve_mild_w(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& w0, double t0,
                        double t_end, const SolveOptions& options = {});

/// Strong solution with w(t0) = 0 through the (y', w') fixed-point map.
Trajectory solve_strong(const FieldSpec& spec, const MRParams& params, const Vec& y0, double t0, double t_end,
                        const SolveOptions& options = {});

/// Bounds a solve would use when none are supplied.
BoundEstimates default_bounds(const FieldSpec& spec, const MRParams& params, double radius, double t0, double t_end,
                              std::size_t samples, std::uint64_t seed);

struct ContractionProbeResult {
    double max_ratio = 0.0;
    double max_image_norm = 0.0;  ///< sup of ||P Phi|| over every sampled Phi
    double K = 0.0;
    std::size_t pairs = 0;
    std::size_t skipped_identical = 0;
    std::vector<double> ratios;
};

/// Ratios ||P Phi1 - P Phi2|| / ||Phi1 - Phi2|| over random continuous piecewise-linear
/// Phi_i with ||Phi_i|| <= K on [t0, t0 + delta]. Deterministic given the seed.
ContractionProbeResult contraction_probe(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& w0,
                                         double t0, const WindowCertificate& certificate, std::size_t n_pairs,
                                         std::uint64_t seed, std::size_t n_intervals = 32,
                                         std::optional<double> window_override = std::nullopt);

}  // namespace mrflow
