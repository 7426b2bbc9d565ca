#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "mrflow/linalg.hpp"
#include "mrflow/params.hpp"

namespace mrflow {

enum class FieldKind { quiescent, linear, double_gyre, taylor_green };

std::string to_string(FieldKind kind);

struct DoubleGyreParams {
    double A = 0.1;
    double epsilon = 0.1;
    double omega = std::numbers::pi / 5.0;
};

struct TaylorGreenParams {
    double A = 0.1;
    double k = std::numbers::pi;
};

/// Axis-aligned box in R^n.
struct Box {
    Vec lo;
    Vec hi;

    [[nodiscard]] int dimension() const { return static_cast<int>(lo.size()); }
    [[nodiscard]] bool empty() const;
    [[nodiscard]] bool contains(const Vec& x) const;
};

/// Time interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Analytic test velocity field with an optional bounded domain (default: all of R^n).
class FieldSpec {
public:
    static FieldSpec quiescent(int dimension);
    static FieldSpec linear(const Mat& S);
    static FieldSpec double_gyre(const DoubleGyreParams& p = {});
    static FieldSpec taylor_green(int dimension, const TaylorGreenParams& p = {});

    /// Restricts evaluation to `box`; eval_jet outside it throws DomainError.
    [[nodiscard]] FieldSpec with_domain(const Box& box) const;

    [[nodiscard]] FieldKind kind() const { return kind_; }
    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] const Mat& strain() const { return S_; }
    [[nodiscard]] const DoubleGyreParams& gyre() const { return gyre_; }
    [[nodiscard]] const TaylorGreenParams& taylor_green_params() const { return tg_; }
    [[nodiscard]] const std::optional<Box>& domain() const { return domain_; }

    /// Throws DomainError if (x, t) is not an admissible evaluation point.
    void check_point(const Vec& x, double t) const;

    /// Box over which sampled bounds represent the field for all |x| <= radius.
    /// Periodic fields return one period cell; others the cube [-radius, radius]^n
    /// intersected with the domain.
    [[nodiscard]] Box sampling_box(double radius) const;

    /// Velocity at (x, t). S is double or a Taylor type; x and u have dimension() entries.
    template <class S>
    void velocity(const S* x, const S& t, S* u) const;

private:
    FieldKind kind_ = FieldKind::quiescent;
    int dim_ = 2;
    Mat S_;
    DoubleGyreParams gyre_;
    TaylorGreenParams tg_;
    std::optional<Box> domain_;
};

/// Value and derivatives of u at one point. Matrices use grad(i, j) = d u_i / d x_j.
struct FieldJet {
    int n = 0;
    bool has_order4 = false;

    Vec u;
    Vec du_dt;          ///< partial_t u
    Mat grad_u;         ///< grad u
    Mat dgrad_dt;       ///< partial_t grad u
    std::array<Mat, 3> hess_u;  ///< hess_u[j](i, k) = d_j d_k u_i
    Vec lap_u;          ///< Laplacian of u
    Vec dlap_dt;        ///< partial_t lap u
    Mat grad_lap_u;     ///< grad lap u

    Vec du_dt_material;    ///< Du/Dt = partial_t u + (grad u) u
    Vec dlap_dt_material;  ///< D(lap u)/Dt

    // Fourth-order block, filled only when has_order4.
    Mat dgrad_lap_dt;                ///< partial_t grad lap u
    std::array<Mat, 3> hess_lap_u;   ///< hess_lap_u[j](i, k) = d_j d_k (lap u)_i
    Mat grad_du_dt_material;         ///< grad (Du/Dt)
    Mat grad_dlap_dt_material;       ///< grad (D lap u / Dt)
};

enum class JetOrder { three = 3, four = 4 };

/// Closed-form jet of the field at (x, t), t >= 0.
FieldJet eval_jet(const FieldSpec& spec, const Vec& x, double t, JetOrder order = JetOrder::four);

/// Sampled sup-norm and Lipschitz bounds of A_u, B_u, M_u.
struct BoundEstimates {
    double L_b = 0.0;
    double L_c = 0.0;
    std::size_t sample_count = 0;
    Box domain_box;
    Interval time_interval;
    double safety_factor = 1.5;
    double raw_L_b = 0.0;  ///< sampled maximum before inflation
    double raw_L_c = 0.0;
};

/// Uniform pseudo-random sampling of |A_u|, |B_u|, ||M_u|| and of their y-derivatives
/// and short-range difference quotients. Deterministic for a given seed.
BoundEstimates estimate_bounds(const FieldSpec& spec, const MRParams& params, const Box& box,
                               const Interval& interval, std::size_t n_samples,
                               std::uint64_t seed = 42, double safety_factor = 1.5);

/// Worst analytic-vs-central-difference discrepancy per derivative order.
struct JetConsistencyReport {
    std::size_t n_points = 0;
    double h = 0.0;
    // index k holds the error of the order-k derivatives (k = 1..4; index 0 unused)
    std::array<double, 5> max_rel_error{};
    double laplacian_trace_error = 0.0;  ///< |lap u - trace of the Hessian|
    double material_fd_error = 0.0;      ///< Du/Dt vs difference along a fluid path

    [[nodiscard]] double worst() const;
};

/// Random points in the field's sampling box (radius 1) and t in [h, 10].
JetConsistencyReport jet_consistency_check(const FieldSpec& spec, std::size_t n_points, double h,
                                           std::uint64_t seed = 7);

// ---------------------------------------------------------------------------

template <class S>
void FieldSpec::velocity(const S* x, const S& t, S* u) const {
    using std::cos;
    using std::sin;
    constexpr double pi = std::numbers::pi;
    switch (kind_) {
        case FieldKind::quiescent:
            for (int i = 0; i < dim_; ++i) u[i] = S(0.0);
            return;
        case FieldKind::linear:
            for (int i = 0; i < dim_; ++i) {
                u[i] = S(0.0);
                for (int j = 0; j < dim_; ++j) u[i] += x[j] * S_(i, j);
            }
            return;
        case FieldKind::double_gyre: {
            // psi = A sin(pi f(x, t)) sin(pi y), f = a x^2 + b x
            const auto& p = gyre_;
            const S st = sin(t * p.omega);
            const S a = st * p.epsilon;
            const S b = S(1.0) - st * (2.0 * p.epsilon);
            const S f = a * x[0] * x[0] + b * x[0];
            const S fx = a * x[0] * 2.0 + b;
            const S py = x[1] * pi;
            const S pf = f * pi;
            u[0] = sin(pf) * cos(py) * (-pi * p.A);
            u[1] = cos(pf) * sin(py) * fx * (pi * p.A);
            return;
        }
        case FieldKind::taylor_green: {
            const auto& p = tg_;
            const S kx = x[0] * p.k;
            const S ky = x[1] * p.k;
            if (dim_ == 2) {
                u[0] = sin(kx) * cos(ky) * p.A;
                u[1] = cos(kx) * sin(ky) * (-p.A);
            } else {
                const S cz = cos(x[2] * p.k);
                u[0] = sin(kx) * cos(ky) * cz * p.A;
                u[1] = cos(kx) * sin(ky) * cz * (-p.A);
                u[2] = S(0.0);
            }
            return;
        }
    }
}

}  // namespace mrflow
