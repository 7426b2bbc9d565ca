#include "mrflow/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "mrflow/abel_quadrature.hpp"
#include "mrflow/errors.hpp"
#include "mrflow/mild_solver.hpp"
#include "mrflow/mr_model.hpp"
#include "mrflow/oracles.hpp"
#include "mrflow/variational_ftle.hpp"

namespace mrflow::cli {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

// NaN and infinity are not valid JSON numbers.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write output file '" + path.string() + "'");
    return out;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const json& j) {
    auto out = open_output(dir, name);
    out << j.dump(2) << "\n";
}

std::uint64_t seed_of(const RunConfig& c, const CommandContext& ctx) { return ctx.seed.value_or(c.seed); }

SolveOptions solve_options(const RunConfig& c, const CommandContext& ctx) {
    SolveOptions o = c.solver.options;
    o.seed = seed_of(c, ctx);
    return o;
}

json field_json(const FieldSpec& spec) {
    json j{{"kind", to_string(spec.kind())}, {"dimension", spec.dimension()}};
    switch (spec.kind()) {
        case FieldKind::double_gyre:
            j["params"] = {{"A", spec.gyre().A}, {"epsilon", spec.gyre().epsilon}, {"omega", spec.gyre().omega}};
            break;
        case FieldKind::taylor_green:
            j["params"] = {{"A", spec.taylor_green_params().A}, {"k", spec.taylor_green_params().k}};
            break;
        case FieldKind::linear: {
            json S = json::array();
            for (int i = 0; i < spec.dimension(); ++i) {
                for (int k = 0; k < spec.dimension(); ++k) S.push_back(spec.strain()(i, k));
            }
            j["S"] = S;
            break;
        }
        case FieldKind::quiescent:
            break;
    }
    return j;
}

json params_json(const MRParams& p) {
    return {{"R", p.R}, {"St", p.St}, {"Re", p.Re}, {"g", vec_json(p.g)},
            {"mu", p.mu}, {"kappa", p.kappa}, {"gamma", p.gamma}};
}

json certificate_json(const WindowCertificate& c) {
    return {{"mode", to_string(c.mode)},       {"K", c.K},
            {"delta", num(c.delta)},           {"L_b", c.L_b},
            {"L_c", c.L_c},                    {"delta_self_map", num(c.delta_self_map)},
            {"delta_radius", num(c.delta_radius)}, {"delta_contraction", num(c.delta_contraction)}};
}

Trajectory solve(const RunConfig& c, const SolveOptions& o) {
    const MRParams p = c.params();
    if (c.solver.mode == SolveMode::strong) {
        return solve_strong(c.field.spec, p, c.particle.y0, c.time.t0, c.time.t_end, o);
    }
    return solve_mild_w(c.field.spec, p, c.particle.y0, c.initial_w(), c.time.t0, c.time.t_end, o);
}

}  // namespace

json run_simulate(const RunConfig& c, const CommandContext& ctx) {
    const Trajectory tr = solve(c, solve_options(c, ctx));
    const int n = tr.dimension();
    {
        auto out = open_output(ctx.out_dir, c.output.csv);
        out << "t";
        for (const char* tag : {"y", "w", "v"}) {
            for (int i = 1; i <= n; ++i) out << "," << tag << i;
        }
        out << "\n";
        for (std::size_t k = 0; k < tr.size(); ++k) {
            out << fmt(tr.t[k]);
            for (const Vec* v : {&tr.y[k], &tr.w[k], &tr.v[k]}) {
                for (int i = 0; i < n; ++i) out << "," << fmt((*v)[i]);
            }
            out << "\n";
        }
    }
    json windows = json::array();
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.segments.size(); ++k) {
        const auto& s = tr.segments[k];
        worst = std::max(worst, s.sup_norm_residual);
        windows.push_back({{"index", k},
                           {"t_start", s.t.front()},
                           {"t_end", s.t.back()},
                           {"nodes", s.t.size()},
                           {"iterations", s.iterations_used},
                           {"residual", s.sup_norm_residual},
                           {"rate", s.convergence_rate},
                           {"certified", s.certified},
                           {"certified_delta", num(s.certificate.delta)}});
    }
    json summary{{"command", "simulate"},
                 {"mode", to_string(tr.mode)},
                 {"field", field_json(c.field.spec)},
                 {"params", params_json(c.params())},
                 {"t0", c.time.t0},
                 {"t_end", c.time.t_end},
                 {"nodes", tr.size()},
                 {"converged", tr.converged()},
                 {"total_iterations", tr.total_iterations()},
                 {"max_residual", worst},
                 {"windows", windows},
                 {"warnings", tr.warnings},
                 {"csv", c.output.csv}};
    write_json(ctx.out_dir, c.output.json, summary);
    return summary;
}

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.skipped || c.pass; });
}

json ValidationReport::to_json() const {
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name},
                       {"description", c.description},
                       {"measured", num(c.measured)},
                       {"threshold", c.threshold},
                       {"status", c.skipped ? "skipped" : c.pass ? "pass" : "fail"},
                       {"note", c.note}});
    }
    return {{"command", "validate"}, {"overall", passed() ? "pass" : "fail"}, {"checks", arr}};
}

namespace {

// Runs one check; numerical failures count as a failed check with the message as note.
template <class F>
Check run_check(std::string name, std::string description, double threshold, F&& body) {
    Check c{std::move(name), std::move(description), 0.0, threshold, false, false, {}};
    try {
        body(c);
        if (!c.skipped) c.pass = std::isfinite(c.measured) && c.measured <= threshold;
    } catch (const UnsupportedRegimeError& e) {
        c.skipped = true;
        c.note = e.what();
    } catch (const std::exception& e) {
        c.measured = std::numeric_limits<double>::quiet_NaN();
        c.pass = false;
        c.note = e.what();
    }
    return c;
}

}  // namespace

ValidationReport run_validate(const RunConfig& c, const CommandContext& ctx) {
    ValidationReport rep;
    const FieldSpec& spec = c.field.spec;
    const int n = spec.dimension();
    const MRParams params = c.params();
    const MRParams example = derive_params(c.particle.R, c.particle.St, c.particle.Re, Vec::Zero(n));
    const SolveOptions base_opts = solve_options(c, ctx);
    const Vec& y0 = c.particle.y0;
    const Vec w0 = c.initial_w();
    const double t0 = c.time.t0;
    const double t1 = t0 + c.validate.horizon;

    rep.checks.push_back(run_check(
        "example_vs_solver", "mild solver vs closed-form quiescent solution on [0, 1], sup-norm", 1e-3, [&](Check& k) {
            (void)quiescent_exact_params(example);
            const FieldSpec q = FieldSpec::quiescent(n);
            Vec e1 = Vec::Zero(n);
            e1[0] = 1.0;
            SolveOptions o = base_opts;
            o.window.reset();
            o.schedule.clear();
            o.first_window_mesh = MeshKind::graded;
            const BoundEstimates b = default_bounds(q, example, 4.0, 0.0, 1.0, o.bound_samples, o.seed);
            o.bounds = b;
            const double delta = window_delta(b, example, Vec::Zero(n), e1, SolveMode::mild).delta;
            const auto windows = static_cast<std::size_t>(std::ceil(1.0 / delta));
            o.nodes_per_window = std::max<std::size_t>(2, (c.validate.example_nodes + windows - 1) / windows);
            const Trajectory tr = solve_mild_w(q, example, Vec::Zero(n), e1, 0.0, 1.0, o);
            for (std::size_t i = 0; i < tr.size(); ++i) {
                k.measured = std::max(k.measured, (tr.w[i] - exact_quiescent_w(example, e1, tr.t[i])).norm());
            }
            k.note = std::to_string(tr.size()) + " nodes";
        }));

    rep.checks.push_back(run_check(
        "laplace_crosscheck", "closed form vs Talbot inversion on 20 log-spaced t in [1e-3, 10]", 1e-8, [&](Check& k) {
            for (int i = 0; i < 20; ++i) {
                const double t = std::pow(10.0, -3.0 + 4.0 * i / 19.0);
                k.measured = std::max(k.measured,
                                      std::abs(quiescent_response(example, t) - laplace_response(example, t)));
            }
        }));

    rep.checks.push_back(run_check(
        "rl_identity", "Abel-integral differentiation identity for cos s at t = 0.5", 1e-4, [&](Check& k) {
            const auto N = c.validate.rl_nodes;
            auto w = HistoryGrid::sample([](double s) { return Eigen::VectorXd::Constant(1, std::cos(s)); }, 0.0, 1.0, N);
            auto wd = HistoryGrid::sample([](double s) { return Eigen::VectorXd::Constant(1, -std::sin(s)); }, 0.0, 1.0, N);
            k.measured = rl_identity_residual(w, wd, 0.5);
            k.note = "N = " + std::to_string(N);
        }));

    const SolveMode mode = c.solver.mode;
    const BoundEstimates bounds = default_bounds(spec, params, std::max(4.0 * std::max(y0.norm(), w0.norm()), kRadiusFloor),
                                                 t0, t1, base_opts.bound_samples, base_opts.seed);
    const WindowCertificate cert = window_delta(bounds, params, y0, w0, mode);
    ContractionProbeResult probe;
    rep.checks.push_back(run_check("contraction", "max ||P f - P g|| / ||f - g|| on the certified window", 0.5,
                                   [&](Check& k) {
                                       probe = contraction_probe(spec, params, y0, w0, t0, cert,
                                                                 c.validate.probe_pairs, base_opts.seed);
                                       k.measured = probe.max_ratio;
                                       k.note = to_string(mode) + " mode, delta = " + fmt(cert.delta);
                                   }));
    rep.checks.push_back(run_check("self_map", "max ||P f|| / K on the certified window", 1.0, [&](Check& k) {
        if (probe.pairs == 0) throw NumericalError("contraction probe did not run");
        k.measured = probe.max_image_norm / probe.K;
    }));

    rep.checks.push_back(run_check(
        "gradient_check", "variational vs central-difference flow-map derivative, max relative error", 1e-4,
        [&](Check& k) {
            SolveOptions o = base_opts;
            o.tol = std::min(o.tol, 1e-13);
            const auto r = fd_gradient_check(spec, params, y0, w0, t0, c.validate.horizon, c.validate.fd_step, o);
            k.measured = r.max_rel_error;
        }));

    rep.checks.push_back(run_check(
        "mild_strong_agreement", "mild vs strong solution with w0 = 0 at matched resolution, sup-norm", 1e-6,
        [&](Check& k) {
            SolveOptions o = base_opts;
            o.tol = std::min(o.tol, 1e-12);
            o.first_window_mesh = MeshKind::uniform;
            const Trajectory a = solve_mild_w(spec, params, y0, Vec::Zero(n), t0, t1, o);
            o.schedule = a.schedule();
            o.window.reset();
            const Trajectory b = solve_strong(spec, params, y0, t0, t1, o);
            for (std::size_t i = 0; i < a.size(); ++i) {
                k.measured = std::max({k.measured, (a.y[i] - b.y[i]).norm(), (a.w[i] - b.w[i]).norm()});
            }
        }));

    rep.checks.push_back(run_check(
        "memoryless_reduction", "kappa = 0 mild solution vs adaptive Dormand-Prince reference, sup-norm", 1e-6,
        [&](Check& k) {
            const MRParams p0 = params.with_kappa(0.0);
            SolveOptions o = base_opts;
            o.tol = std::min(o.tol, 1e-12);
            o.first_window_mesh = MeshKind::uniform;
            const Trajectory a = solve_mild_w(spec, p0, y0, w0, t0, t0 + c.validate.reference_horizon, o);
            const auto ref = memoryless_reference_w(spec, p0, y0, w0, a.t);
            for (std::size_t i = 0; i < a.size(); ++i) {
                k.measured = std::max({k.measured, (a.y[i] - ref.y[i]).norm(), (a.w[i] - ref.w[i]).norm()});
            }
        }));

    write_json(ctx.out_dir, c.validate.json, rep.to_json());
    return rep;
}

json run_ftle(const RunConfig& c, const CommandContext& ctx) {
    const FieldSpec& spec = c.field.spec;
    const int n = spec.dimension();
    FtleOptions o;
    if (c.ftle.box) {
        o.box = *c.ftle.box;
    } else if (spec.kind() == FieldKind::double_gyre) {
        o.box = Box{Vec::Zero(2), (Vec(2) << 2.0, 1.0).finished()};
    } else if (spec.kind() == FieldKind::taylor_green) {
        o.box = spec.sampling_box(1.0);
    } else {
        throw ConfigError("'ftle.box_lo' and 'ftle.box_hi' are required for this field");
    }
    o.resolution = c.ftle.resolution;
    o.t0 = c.time.t0;
    o.T = c.ftle.T;
    o.policy = c.ftle.policy;
    o.solve = solve_options(c, ctx);
    o.threads = ctx.threads;
    const FTLEGrid g = ftle_field(spec, c.params(), o);
    {
        auto out = open_output(ctx.out_dir, c.ftle.csv);
        static const char* axes[] = {"x", "y", "z"};
        for (int a = 0; a < n; ++a) out << axes[a] << ",";
        out << "ftle\n";
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            for (int a = 0; a < n; ++a) out << fmt(g.points[i][a]) << ",";
            out << fmt(g.ftle[i]) << "\n";
        }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : g.ftle) {
        if (!std::isnan(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    json meta{{"command", "ftle"},
              {"field", field_json(spec)},
              {"params", params_json(c.params())},
              {"box_lo", vec_json(g.box.lo)},
              {"box_hi", vec_json(g.box.hi)},
              {"resolution", g.resolution},
              {"t0", g.t0},
              {"T", g.T},
              {"w0_policy", g.policy.kind == W0Policy::Kind::zero ? "zero" : "fixed"},
              {"points", g.points.size()},
              {"missing", g.missing()},
              {"ftle_min", num(lo)},
              {"ftle_max", num(hi)},
              {"failures", g.failures},
              {"csv", c.ftle.csv}};
    if (g.policy.kind == W0Policy::Kind::fixed) meta["w0"] = vec_json(g.policy.w0);
    write_json(ctx.out_dir, c.ftle.json, meta);
    return meta;
}

json run_probe(const RunConfig& c, const CommandContext& ctx) {
    const FieldSpec& spec = c.field.spec;
    const MRParams params = c.params();
    const Vec& y0 = c.particle.y0;
    const Vec w0 = c.initial_w();
    const SolveOptions o = solve_options(c, ctx);
    const double radius = std::max(4.0 * std::max(y0.norm(), w0.norm()), kRadiusFloor);
    const BoundEstimates b = c.solver.options.bounds ? *c.solver.options.bounds
                                                     : default_bounds(spec, params, radius, c.time.t0, c.time.t_end,
                                                                      o.bound_samples, o.seed);
    const WindowCertificate cert = window_delta(b, params, y0, w0, c.solver.mode);
    const auto r = contraction_probe(spec, params, y0, w0, c.time.t0, cert, c.probe.pairs, o.seed,
                                     c.probe.intervals, c.probe.window);
    const double used = c.probe.window.value_or(cert.delta);
    const bool certified = used <= cert.delta;
    json warnings = json::array();
    if (!certified) warnings.push_back("uncertified window: " + fmt(used) + " exceeds certified delta " + fmt(cert.delta));
    if (r.max_ratio > 0.5) warnings.push_back("observed ratio above 1/2");
    json rep{{"command", "probe"},
             {"field", field_json(spec)},
             {"params", params_json(params)},
             {"certificate", certificate_json(cert)},
             {"bounds", {{"L_b", b.L_b}, {"L_c", b.L_c}, {"samples", b.sample_count}, {"safety_factor", b.safety_factor}}},
             {"window", used},
             {"certified", certified},
             {"pairs", r.pairs},
             {"skipped_identical", r.skipped_identical},
             {"max_ratio", r.max_ratio},
             {"max_image_norm", r.max_image_norm},
             {"K", r.K},
             {"ratios", r.ratios},
             {"seed", o.seed},
             {"warnings", warnings}};
    write_json(ctx.out_dir, c.probe.json, rep);
    return rep;
}

}  // namespace mrflow::cli
