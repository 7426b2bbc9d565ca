#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mrflow/flow_fields.hpp"
#include "mrflow/linalg.hpp"
#include "mrflow/mild_solver.hpp"
#include "mrflow/params.hpp"

namespace mrflow {

/// Derivatives of (y, w) with respect to (y0, w0) at every node of a base trajectory.
/// Each matrix is n x 2n; the first n columns differentiate by y0, the last n by w0.
struct SensitivityMatrices {
    int n = 0;
    std::vector<double> t;
    std::vector<SensMat> Dy;
    std::vector<SensMat> Dw;

    /// Linear interpolation between nodes.
    [[nodiscard]] SensMat Dy_at(double time) const;
    [[nodiscard]] SensMat Dw_at(double time) const;
};

/// Linearised mild equations along `base`, discretised on the base windows and mesh with the
/// same trapezoid and product-integration rules, so the result is the derivative of the
/// discrete flow map. Each node is an exact 2n x 2n solve. Throws if the base did not converge.
SensitivityMatrices solve_variational(const FieldSpec& spec, const MRParams& params, const Trajectory& base);

/// C = F^T F with F the first n columns of Dy at `time`.
Mat cauchy_green(const SensitivityMatrices& sens, double time);

/// (1 / 2T) ln lambda_max(C).
double ftle_from_cauchy_green(const Mat& C, double T);

struct W0Policy {
    enum class Kind { zero, fixed };
    Kind kind = Kind::zero;
    Vec w0;  ///< used when kind == fixed

    static W0Policy zero() { return {}; }
    static W0Policy fixed(const Vec& w) { return {Kind::fixed, w}; }
};

struct FtleOptions {
    Box box;
    std::vector<int> resolution;  ///< points per axis, each >= 2
    double t0 = 0.0;
    double T = 1.0;
    W0Policy policy;
    SolveOptions solve;
    unsigned threads = 1;
};

struct FTLEGrid {
    Box box;
    std::vector<int> resolution;
    double t0 = 0.0;
    double T = 0.0;
    W0Policy policy;
    std::vector<Vec> points;       ///< row-major, first axis fastest
    std::vector<double> ftle;      ///< NaN where the point failed
    std::vector<std::string> failures;  ///< "index: message" per failed point

    [[nodiscard]] std::size_t missing() const;
};

/// Grid points are independent and run on `threads` workers.
/// Zero policy uses the strong solver; fixed w0 uses the mild solver.
FTLEGrid ftle_field(const FieldSpec& spec, const MRParams& params, const FtleOptions& options);

struct FdCheckReport {
    double rel_error_dy = 0.0;  ///< max |var - fd| / max |fd| over the Dy block
    double rel_error_dw = 0.0;
    double max_rel_error = 0.0;
    SensMat variational_dy;
    SensMat variational_dw;
    SensMat fd_dy;
    SensMat fd_dw;
};

/// Variational derivative at t0 + T against central differences of the mild solver with step h.
/// Perturbed solves repeat the base window schedule and mesh.
FdCheckReport fd_gradient_check(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& w0,
                                double t0, double T, double h, SolveOptions options = {});

}  // namespace mrflow
