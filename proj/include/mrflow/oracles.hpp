#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "mrflow/flow_fields.hpp"
#include "mrflow/linalg.hpp"
#include "mrflow/params.hpp"

namespace mrflow {

/// Constants of the closed-form quiescent solution. Valid only for R < 8/9.
struct QuiescentExactParams {
    double G = 0.0;      ///< sqrt(9 R mu / 2)
    double alpha = 0.0;  ///< mu (1 - 9R/4)
    double beta = 0.0;   ///< G sqrt(mu (1 - 9R/8))
    bool valid = false;
};

/// Throws UnsupportedRegimeError for R >= 8/9.
QuiescentExactParams quiescent_exact_params(const MRParams& params);

/// w(t) / w0 in a quiescent fluid with g = 0 and t0 = 0.
double quiescent_response(const MRParams& params, double t);
/// d/dt of quiescent_response; throws SingularityError at t <= 0.
double quiescent_response_rate(const MRParams& params, double t);

Vec exact_quiescent_w(const MRParams& params, const Vec& w0, double t);
Vec exact_quiescent_wdot(const MRParams& params, const Vec& w0, double t);

using LaplaceTransform = std::function<std::complex<long double>(std::complex<long double>)>;

/// Inverse Laplace transform at t > 0 on the Talbot contour
/// z(theta) = (N/t)(0.5017 theta cot(0.6407 theta) - 0.6122 + 0.2645 i theta), N midpoint nodes.
/// F must be analytic to the right of the contour (branch cut on the negative real axis).
double talbot_inverse(const LaplaceTransform& F, double t, int points = 48);

/// Scalar inverse Laplace transform of 1 / (p + G sqrt(p) + mu) on a Talbot contour
/// with `points` midpoint nodes.
double laplace_response(const MRParams& params, double t, int points = 48);
Vec laplace_inverse_w(const MRParams& params, const Vec& w0, double t, int points = 48);

struct ReferenceTrajectory {
    std::vector<double> t;
    std::vector<Vec> y;
    std::vector<Vec> w;
};

/// Memory-free Maxey-Riley motion (kappa = 0) by an adaptive Dormand-Prince pair,
/// reported at `output_times` (sorted, first entry t0).
ReferenceTrajectory memoryless_reference_w(const FieldSpec& spec, const MRParams& params, const Vec& y0,
                                           const Vec& w0, const std::vector<double>& output_times,
                                           double rtol = 1e-10, double atol = 1e-12);

/// Same from the particle velocity v0, on `n_out` equal steps of [t0, t_end].
ReferenceTrajectory memoryless_reference(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& v0,
                                         double t0, double t_end, std::size_t n_out = 100);

}  // namespace mrflow
