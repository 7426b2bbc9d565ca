#pragma once

#include "mrflow/linalg.hpp"

namespace mrflow {

/// Dimensionless particle parameters and the derived drag, memory and Faxén coefficients.
///
/// Construct through derive_params(); the derived members are kept consistent with
/// (R, St, Re) except when with_kappa() is used to switch the memory force off
/// for reduction studies.
struct MRParams {
    double R = 0.0;   ///< density ratio 2 rho_f / (rho_f + 2 rho_p), in (0, 2]
    double St = 0.0;  ///< Stokes number
    double Re = 0.0;  ///< Reynolds number
    Vec g;            ///< dimensionless gravity

    double mu = 0.0;     ///< R / St, inverse particle response time
    double kappa = 0.0;  ///< sqrt(9R / 2pi), memory-force prefactor
    double gamma = 0.0;  ///< 9R / (2 Re), Faxén coefficient

    [[nodiscard]] int dimension() const { return static_cast<int>(g.size()); }

    /// gamma / (6 mu): weight of the Laplacian in A_u, M_u and in w.
    [[nodiscard]] double faxen() const { return gamma / (6.0 * mu); }

    /// kappa * sqrt(mu): coefficient of the Abel-kernel term.
    [[nodiscard]] double memory_coefficient() const;

    /// Copy with the memory prefactor replaced (kappa = 0 gives the memory-free equation).
    [[nodiscard]] MRParams with_kappa(double kappa_override) const;
};

/// Validates (R, St, Re) and fills the derived coefficients.
/// Throws ValidationError unless 0 < R <= 2, St > 0, Re > 0, g finite, dim(g) in {2, 3}.
MRParams derive_params(double R, double St, double Re, const Vec& g);

}  // namespace mrflow
