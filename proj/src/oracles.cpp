#include "mrflow/oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "mrflow/errors.hpp"
#include "mrflow/mr_model.hpp"

namespace mrflow {

QuiescentExactParams quiescent_exact_params(const MRParams& params) {
    if (!(params.R < 8.0 / 9.0)) throw UnsupportedRegimeError("closed-form quiescent solution requires R < 8/9");
    if (!(params.mu > 0.0)) throw ValidationError("closed-form quiescent solution requires mu > 0");
    QuiescentExactParams q;
    q.G = std::sqrt(4.5 * params.R * params.mu);
    q.alpha = params.mu * (1.0 - 2.25 * params.R);
    q.beta = q.G * std::sqrt(params.mu * (1.0 - 9.0 * params.R / 8.0));
    q.valid = true;
    return q;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

// integral_0^t f(s) / sqrt(t - s) ds with s = t - tau^2.
template <class F>
double abel_smooth(F f, double t) {
    if (t <= 0.0) return 0.0;
    auto g = [&](double tau) { return 2.0 * f(t - tau * tau); };
    return gauss_kronrod<double, 61>::integrate(g, 0.0, std::sqrt(t), 15, 1e-14);
}

}  // namespace

double quiescent_response(const MRParams& params, double t) {
    const auto q = quiescent_exact_params(params);
    if (t < 0.0) throw ValidationError("quiescent solution needs t >= 0");
    const double a = q.alpha;
    const double b = q.beta;
    auto c = [&](double s) { return std::exp(-a * s) * (std::cos(b * s) - (a / b) * std::sin(b * s)); };
    const double e = std::exp(-a * t);
    return e * std::cos(b * t) + (q.G * q.G / (2.0 * b)) * e * std::sin(b * t) -
           (q.G / std::sqrt(std::numbers::pi)) * abel_smooth(c, t);
}

double quiescent_response_rate(const MRParams& params, double t) {
    const auto q = quiescent_exact_params(params);
    if (!(t > 0.0)) throw SingularityError("quiescent w' is singular at t = 0");
    const double a = q.alpha;
    const double b = q.beta;
    const double G2 = q.G * q.G;
    auto cdot = [&](double s) {
        return std::exp(-a * s) * (-2.0 * a * std::cos(b * s) + (a * a / b - b) * std::sin(b * s));
    };
    const double e = std::exp(-a * t);
    const double sp = std::sqrt(std::numbers::pi);
    return (G2 / 2.0 - a) * e * std::cos(b * t) - (a * G2 / (2.0 * b) + b) * e * std::sin(b * t) -
           (q.G / sp) * abel_smooth(cdot, t) - q.G / (sp * std::sqrt(t));
}

Vec exact_quiescent_w(const MRParams& params, const Vec& w0, double t) { return w0 * quiescent_response(params, t); }

Vec exact_quiescent_wdot(const MRParams& params, const Vec& w0, double t) {
    return w0 * quiescent_response_rate(params, t);
}

double talbot_inverse(const LaplaceTransform& F, double t, int points) {
    if (!(t > 0.0)) throw ValidationError("Laplace inversion needs t > 0");
    if (points < 8) throw ValidationError("Laplace inversion needs at least 8 contour points");
    using C = std::complex<long double>;
    const long double pi = std::numbers::pi_v<long double>;
    const long double N = points;
    const long double lt = t;
    C sum = 0;
    for (int k = 0; k < points; ++k) {
        const long double th = -pi + (k + 0.5L) * 2.0L * pi / N;
        const long double sn = std::sin(0.6407L * th);
        const long double ct = std::cos(0.6407L * th) / sn;
        const C z = (N / lt) * C(0.5017L * th * ct - 0.6122L, 0.2645L * th);
        const C dz = (N / lt) * C(0.5017L * ct - 0.5017L * 0.6407L * th / (sn * sn), 0.2645L);
        sum += std::exp(z * lt) * F(z) * dz;
    }
    // (1 / 2 pi i) * (2 pi / N) * sum
    return static_cast<double>((sum / C(0, N)).real());
}

double laplace_response(const MRParams& params, double t, int points) {
    const long double G = std::sqrt(4.5L * params.R * params.mu);
    const long double mu = params.mu;
    return talbot_inverse([&](std::complex<long double> p) { return 1.0L / (p + G * std::sqrt(p) + mu); }, t, points);
}

Vec laplace_inverse_w(const MRParams& params, const Vec& w0, double t, int points) {
    return w0 * laplace_response(params, t, points);
}

ReferenceTrajectory memoryless_reference_w(const FieldSpec& spec, const MRParams& params, const Vec& y0,
                                           const Vec& w0, const std::vector<double>& output_times, double rtol,
                                           double atol) {
    namespace ode = boost::numeric::odeint;
    using State = std::vector<double>;
    if (output_times.size() < 2) throw ValidationError("reference integration needs at least two output times");
    const int n = static_cast<int>(y0.size());
    if (spec.dimension() != n || w0.size() != n) throw ValidationError("state and field dimensions differ");

    auto rhs = [&](const State& x, State& dx, double t) {
        Vec y(n), w(n);
        for (int i = 0; i < n; ++i) {
            y[i] = x[static_cast<std::size_t>(i)];
            w[i] = x[static_cast<std::size_t>(n + i)];
        }
        const CompactFields f = eval_compact(spec, params, y, t);
        const Vec ydot = w + f.A;
        const Vec wdot = -params.mu * w - f.M * w + f.B;
        for (int i = 0; i < n; ++i) {
            dx[static_cast<std::size_t>(i)] = ydot[i];
            dx[static_cast<std::size_t>(n + i)] = wdot[i];
        }
    };

    State x(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = y0[i];
        x[static_cast<std::size_t>(n + i)] = w0[i];
    }
    ReferenceTrajectory out;
    auto observer = [&](const State& s, double t) {
        Vec y(n), w(n);
        for (int i = 0; i < n; ++i) {
            y[i] = s[static_cast<std::size_t>(i)];
            w[i] = s[static_cast<std::size_t>(n + i)];
        }
        out.t.push_back(t);
        out.y.push_back(y);
        out.w.push_back(w);
    };
    auto stepper = ode::make_dense_output(atol, rtol, ode::runge_kutta_dopri5<State>());
    const double dt0 = (output_times.back() - output_times.front()) * 1e-4;
    try {
        ode::integrate_times(stepper, rhs, x, output_times.begin(), output_times.end(), dt0, observer,
                             ode::max_step_checker(1000000));
    } catch (const ode::step_adjustment_error& e) {
        throw NumericalError(std::string("reference integrator step-size underflow: ") + e.what());
    } catch (const ode::no_progress_error& e) {
        throw NumericalError(std::string("reference integrator made no progress: ") + e.what());
    }
    return out;
}

ReferenceTrajectory memoryless_reference(const FieldSpec& spec, const MRParams& params, const Vec& y0, const Vec& v0,
                                         double t0, double t_end, std::size_t n_out) {
    if (!(t_end > t0)) throw ValidationError("t_end must exceed t0");
    if (n_out < 1) throw ValidationError("need at least one output step");
    std::vector<double> times(n_out + 1);
    for (std::size_t k = 0; k <= n_out; ++k) {
        times[k] = t0 + (t_end - t0) * static_cast<double>(k) / static_cast<double>(n_out);
    }
    times.back() = t_end;
    return memoryless_reference_w(spec, params, y0, velocity_to_w(y0, v0, t0, spec, params), times);
}

}  // namespace mrflow
