#pragma once

#include <array>

#include "mrflow/flow_fields.hpp"
#include "mrflow/linalg.hpp"
#include "mrflow/params.hpp"

namespace mrflow {

/// Known fields of the compact (y, w) form:
///   y' = w + A_u,  w' = -mu w - M_u w - kappa mu^{1/2} d/dt (Abel integral of w) + B_u.
struct CompactFields {
    Vec A;
    Vec B;
    Mat M;
};

/// y-derivatives of the compact fields (needs a fourth-order jet).
struct CompactGradients {
    Mat grad_A;               ///< equals M_u
    Mat grad_B;
    std::array<Mat, 3> dM;    ///< dM[j](i, k) = d M_ik / d y_j
};

struct ParticleState {
    Vec y;
    Vec v;  ///< particle velocity
    Vec w;  ///< relative velocity v - u - (gamma / 6 mu) lap u
    double t = 0.0;
};

CompactFields compute_compact_fields(const FieldJet& jet, const MRParams& params);

/// Throws ValidationError if the jet lacks the fourth-order block.
CompactGradients compute_compact_gradients(const FieldJet& jet, const MRParams& params);

/// Jet of order three followed by compute_compact_fields; the solver hot path.
CompactFields eval_compact(const FieldSpec& spec, const MRParams& params, const Vec& y, double t);

/// L_ij = sum_k (d M_ik / d y_j) w_k.
Mat l_matrix(const CompactGradients& grads, const Vec& w);

Vec velocity_to_w(const Vec& y, const Vec& v, double t, const FieldSpec& spec, const MRParams& params);
Vec w_to_velocity(const Vec& y, const Vec& w, double t, const FieldSpec& spec, const MRParams& params);

/// Fills the missing member of `state` (w from v, or v from w).
ParticleState complete_state(ParticleState state, const FieldSpec& spec, const MRParams& params);

struct CompactRhs {
    Vec ydot;
    Vec wdot;
};

/// Right-hand side of the compact form with a caller-supplied memory term
/// (the value of -kappa mu^{1/2} d/dt of the Abel integral, or its mild counterpart).
CompactRhs compact_rhs(const Vec& y, const Vec& w, double t, const Vec& history_term, const FieldSpec& spec,
                       const MRParams& params);

}  // namespace mrflow
