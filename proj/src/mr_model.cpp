#include "mrflow/mr_model.hpp"

#include <cmath>
#include <numbers>

#include "mrflow/errors.hpp"

namespace mrflow {

double MRParams::memory_coefficient() const { return kappa * std::sqrt(mu); }

MRParams MRParams::with_kappa(double kappa_override) const {
    if (!(kappa_override >= 0.0) || !std::isfinite(kappa_override)) {
        throw ValidationError("kappa override must be finite and non-negative");
    }
    MRParams p = *this;
    p.kappa = kappa_override;
    return p;
}

MRParams derive_params(double R, double St, double Re, const Vec& g) {
    if (!(R > 0.0) || !(R <= 2.0)) throw ValidationError("particle.R must lie in (0, 2]");
    if (!(St > 0.0) || !std::isfinite(St)) throw ValidationError("particle.St must be positive");
    if (!(Re > 0.0) || !std::isfinite(Re)) throw ValidationError("particle.Re must be positive");
    if (g.size() != 2 && g.size() != 3) throw ValidationError("particle.g must have 2 or 3 components");
    if (!g.allFinite()) throw ValidationError("particle.g must be finite");
    MRParams p;
    p.R = R;
    p.St = St;
    p.Re = Re;
    p.g = g;
    p.mu = R / St;
    p.kappa = std::sqrt(9.0 * R / (2.0 * std::numbers::pi));
    p.gamma = 9.0 * R / (2.0 * Re);
    return p;
}

CompactFields compute_compact_fields(const FieldJet& jet, const MRParams& params) {
    const double c = params.faxen();
    CompactFields f;
    f.A = jet.u + c * jet.lap_u;
    f.M = jet.grad_u + c * jet.grad_lap_u;
    f.B = (1.5 * params.R - 1.0) * (jet.du_dt_material - params.g) +
          (params.R / 20.0 - 1.0 / 6.0) * (params.gamma / params.mu) * jet.dlap_dt_material - c * (f.M * jet.lap_u);
    return f;
}

CompactGradients compute_compact_gradients(const FieldJet& jet, const MRParams& params) {
    if (!jet.has_order4) throw ValidationError("compact gradients need a fourth-order jet");
    const int n = jet.n;
    const double c = params.faxen();
    const Mat M = jet.grad_u + c * jet.grad_lap_u;

    CompactGradients g;
    g.grad_A = M;
    for (int j = 0; j < n; ++j) {
        const auto js = static_cast<std::size_t>(j);
        g.dM[js] = jet.hess_u[js] + c * jet.hess_lap_u[js];
    }
    g.grad_B = (1.5 * params.R - 1.0) * jet.grad_du_dt_material +
               (params.R / 20.0 - 1.0 / 6.0) * (params.gamma / params.mu) * jet.grad_dlap_dt_material -
               c * (M * jet.grad_lap_u);
    for (int j = 0; j < n; ++j) g.grad_B.col(j) -= c * (g.dM[static_cast<std::size_t>(j)] * jet.lap_u);
    return g;
}

CompactFields eval_compact(const FieldSpec& spec, const MRParams& params, const Vec& y, double t) {
    return compute_compact_fields(eval_jet(spec, y, t, JetOrder::three), params);
}

Mat l_matrix(const CompactGradients& grads, const Vec& w) {
    const auto n = w.size();
    Mat L(n, n);
    for (Eigen::Index j = 0; j < n; ++j) L.col(j) = grads.dM[static_cast<std::size_t>(j)] * w;
    return L;
}

Vec velocity_to_w(const Vec& y, const Vec& v, double t, const FieldSpec& spec, const MRParams& params) {
    const FieldJet jet = eval_jet(spec, y, t, JetOrder::three);
    return v - (jet.u + params.faxen() * jet.lap_u);
}

Vec w_to_velocity(const Vec& y, const Vec& w, double t, const FieldSpec& spec, const MRParams& params) {
    const FieldJet jet = eval_jet(spec, y, t, JetOrder::three);
    return w + (jet.u + params.faxen() * jet.lap_u);
}

ParticleState complete_state(ParticleState state, const FieldSpec& spec, const MRParams& params) {
    if (state.w.size() == 0 && state.v.size() != 0) {
        state.w = velocity_to_w(state.y, state.v, state.t, spec, params);
    } else if (state.v.size() == 0 && state.w.size() != 0) {
        state.v = w_to_velocity(state.y, state.w, state.t, spec, params);
    } else if (state.v.size() == 0) {
        throw ValidationError("particle state needs v or w");
    }
    return state;
}

CompactRhs compact_rhs(const Vec& y, const Vec& w, double t, const Vec& history_term, const FieldSpec& spec,
                       const MRParams& params) {
    const CompactFields f = eval_compact(spec, params, y, t);
    return {w + f.A, -params.mu * w - f.M * w + history_term + f.B};
}

}  // namespace mrflow
