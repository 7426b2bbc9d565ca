#include "mrflow/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mrflow/errors.hpp"
#include "mrflow/mr_model.hpp"

namespace mrflow::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && s[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

bool valid_key(const std::string& k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    }
    return k.find("..") == std::string::npos;
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
    ConfigFile cf;
    cf.source_ = source;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) fail("invalid section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail("invalid key '" + key + "'");
        if (!section.empty()) key = section + "." + key;
        const std::string val = trim(line.substr(eq + 1));
        if (val.empty()) fail("missing value for '" + key + "'");
        if (cf.values_.count(key)) fail("duplicate key '" + key + "'");

        ConfigValue v;
        if (val.front() == '[') {
            if (val.back() != ']') fail("unterminated array for '" + key + "'");
            std::vector<double> arr;
            const std::string body = trim(val.substr(1, val.size() - 2));
            if (!body.empty()) {
                std::istringstream items(body);
                std::string item;
                while (std::getline(items, item, ',')) {
                    auto num = parse_number(trim(item));
                    if (!num) fail("array element '" + trim(item) + "' of '" + key + "' is not a number");
                    arr.push_back(*num);
                }
            }
            v = arr;
        } else if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"') fail("unterminated string for '" + key + "'");
            v = val.substr(1, val.size() - 2);
        } else if (val == "true" || val == "false") {
            v = (val == "true");
        } else if (auto num = parse_number(val)) {
            v = *num;
        } else {
            v = val;
        }
        cf.values_[key] = Entry{v, lineno, false};
    }
    return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

const ConfigFile::Entry* ConfigFile::take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

void ConfigFile::type_error(const std::string& key, const char* expected) const {
    const auto& e = values_.at(key);
    throw ConfigError(source_ + ":" + std::to_string(e.line) + ": '" + key + "' must be " + expected);
}

std::optional<double> ConfigFile::number(const std::string& key) {
    const Entry* e = take(key);
    if (!e) return std::nullopt;
    if (const auto* d = std::get_if<double>(&e->value)) return *d;
    type_error(key, "a number");
}

std::optional<bool> ConfigFile::boolean(const std::string& key) {
    const Entry* e = take(key);
    if (!e) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&e->value)) return *b;
    type_error(key, "true or false");
}

std::optional<std::string> ConfigFile::string(const std::string& key) {
    const Entry* e = take(key);
    if (!e) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&e->value)) return *s;
    type_error(key, "a string");
}

std::optional<std::vector<double>> ConfigFile::array(const std::string& key) {
    const Entry* e = take(key);
    if (!e) return std::nullopt;
    if (const auto* a = std::get_if<std::vector<double>>(&e->value)) return *a;
    type_error(key, "an array [a, b, ...]");
}

void ConfigFile::reject_unused() const {
    for (const auto& [key, e] : values_) {
        if (!e.used) throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + key + "'");
    }
}

MRParams RunConfig::params() const {
    MRParams p = derive_params(particle.R, particle.St, particle.Re, particle.g);
    if (particle.kappa) p = p.with_kappa(*particle.kappa);
    return p;
}

Vec RunConfig::initial_w() const {
    if (particle.w0) return *particle.w0;
    if (particle.v0) return velocity_to_w(particle.y0, *particle.v0, time.t0, field.spec, params());
    return Vec::Zero(particle.y0.size());
}

namespace {

Vec to_vec(const std::vector<double>& a) {
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
    return v;
}

Vec require_vec(ConfigFile& f, const std::string& key, int n, std::optional<Vec> fallback = std::nullopt) {
    auto a = f.array(key);
    if (!a) {
        if (fallback) return *fallback;
        throw ConfigError("missing required key '" + key + "'");
    }
    if (static_cast<int>(a->size()) != n) {
        throw ConfigError("'" + key + "' must have " + std::to_string(n) + " entries");
    }
    for (double x : *a) {
        if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite");
    }
    return to_vec(*a);
}

double require_number(ConfigFile& f, const std::string& key) {
    auto v = f.number(key);
    if (!v) throw ConfigError("missing required key '" + key + "'");
    return *v;
}

std::size_t count_value(ConfigFile& f, const std::string& key, std::size_t fallback, std::size_t min_value = 1) {
    auto v = f.number(key);
    if (!v) return fallback;
    if (!(*v >= static_cast<double>(min_value)) || std::floor(*v) != *v || *v > 1e9) {
        throw ConfigError("'" + key + "' must be an integer >= " + std::to_string(min_value));
    }
    return static_cast<std::size_t>(*v);
}

double positive(ConfigFile& f, const std::string& key, double fallback) {
    auto v = f.number(key);
    if (!v) return fallback;
    if (!(*v > 0.0) || !std::isfinite(*v)) throw ConfigError("'" + key + "' must be positive");
    return *v;
}

std::string file_name(ConfigFile& f, const std::string& key, std::string fallback) {
    auto v = f.string(key);
    if (!v) return fallback;
    if (v->empty()) throw ConfigError("'" + key + "' must not be empty");
    return *v;
}

MeshKind mesh_kind(const std::string& s, const std::string& key) {
    if (s == "uniform") return MeshKind::uniform;
    if (s == "graded") return MeshKind::graded;
    throw ConfigError("'" + key + "' must be uniform or graded");
}

FieldSpec build_field(ConfigFile& f) {
    const auto kind = f.string("field.kind");
    if (!kind) throw ConfigError("missing required key 'field.kind'");
    auto dimension = [&](int fallback) {
        const std::size_t d = count_value(f, "field.dimension", static_cast<std::size_t>(fallback), 2);
        if (d != 2 && d != 3) throw ConfigError("'field.dimension' must be 2 or 3");
        return static_cast<int>(d);
    };
    if (*kind == "quiescent") return FieldSpec::quiescent(dimension(2));
    if (*kind == "linear") {
        auto S = f.array("field.S");
        if (!S) throw ConfigError("missing required key 'field.S'");
        const int n = S->size() == 4 ? 2 : S->size() == 9 ? 3 : 0;
        if (n == 0) throw ConfigError("'field.S' must hold 4 or 9 entries (row-major)");
        Mat M(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) M(i, j) = (*S)[static_cast<std::size_t>(i * n + j)];
        }
        if (!M.allFinite()) throw ConfigError("'field.S' must be finite");
        return FieldSpec::linear(M);
    }
    if (*kind == "double_gyre") {
        DoubleGyreParams p;
        p.A = f.number("field.params.A").value_or(p.A);
        p.epsilon = f.number("field.params.epsilon").value_or(p.epsilon);
        p.omega = f.number("field.params.omega").value_or(p.omega);
        if (!std::isfinite(p.A) || !std::isfinite(p.epsilon) || !std::isfinite(p.omega)) {
            throw ConfigError("'field.params' entries must be finite");
        }
        return FieldSpec::double_gyre(p);
    }
    if (*kind == "taylor_green") {
        TaylorGreenParams p;
        p.A = f.number("field.params.A").value_or(p.A);
        p.k = f.number("field.params.k").value_or(p.k);
        if (!std::isfinite(p.A) || !(p.k > 0.0) || !std::isfinite(p.k)) {
            throw ConfigError("'field.params.k' must be positive and 'field.params.A' finite");
        }
        return FieldSpec::taylor_green(dimension(2), p);
    }
    throw ConfigError("'field.kind' must be quiescent, linear, double_gyre or taylor_green");
}

}  // namespace

RunConfig build_run_config(ConfigFile f) {
    if (f.empty()) throw ConfigError("configuration is empty");
    RunConfig rc;
    rc.field.spec = build_field(f);
    const int n = rc.field.spec.dimension();

    auto& p = rc.particle;
    p.R = require_number(f, "particle.R");
    p.St = require_number(f, "particle.St");
    p.Re = require_number(f, "particle.Re");
    p.g = require_vec(f, "particle.g", n, Vec::Zero(n));
    p.kappa = f.number("particle.kappa");
    p.y0 = require_vec(f, "particle.y0", n);
    if (f.has("particle.v0") && f.has("particle.w0")) throw ConfigError("give only one of 'particle.v0' and 'particle.w0'");
    if (f.has("particle.v0")) p.v0 = require_vec(f, "particle.v0", n);
    if (f.has("particle.w0")) p.w0 = require_vec(f, "particle.w0", n);

    rc.time.t0 = f.number("time.t0").value_or(0.0);
    rc.time.t_end = f.number("time.t_end").value_or(1.0);
    if (!std::isfinite(rc.time.t0) || !std::isfinite(rc.time.t_end) || !(rc.time.t_end > rc.time.t0)) {
        throw ConfigError("'time.t_end' must exceed 'time.t0'");
    }
    if (rc.field.spec.kind() == FieldKind::double_gyre && rc.time.t0 < 0.0) {
        throw ConfigError("'time.t0' must be >= 0 for the double gyre");
    }

    auto& s = rc.solver;
    if (auto mode = f.string("solver.mode")) {
        if (*mode == "mild") {
            s.mode = SolveMode::mild;
        } else if (*mode == "strong") {
            s.mode = SolveMode::strong;
        } else {
            throw ConfigError("'solver.mode' must be mild or strong");
        }
    }
    s.options.tol = positive(f, "solver.tol", s.options.tol);
    s.options.max_iter = count_value(f, "solver.max_iter", s.options.max_iter);
    if (f.has("solver.window")) s.options.window = positive(f, "solver.window", 1.0);
    s.options.nodes_per_window = count_value(f, "solver.nodes_per_window", s.options.nodes_per_window);
    if (auto mesh = f.string("solver.mesh")) s.options.first_window_mesh = mesh_kind(*mesh, "solver.mesh");
    s.options.grading = f.number("solver.grading").value_or(s.options.grading);
    if (!(s.options.grading >= 1.0)) throw ConfigError("'solver.grading' must be >= 1");
    s.options.bound_samples = count_value(f, "solver.bound_samples", s.options.bound_samples);

    auto& o = rc.output;
    o.csv = file_name(f, "output.csv", o.csv);
    o.json = file_name(f, "output.json", o.json);

    auto& ft = rc.ftle;
    const bool has_lo = f.has("ftle.box_lo");
    const bool has_hi = f.has("ftle.box_hi");
    if (has_lo != has_hi) throw ConfigError("'ftle.box_lo' and 'ftle.box_hi' must be given together");
    if (has_lo) {
        Box b{require_vec(f, "ftle.box_lo", n), require_vec(f, "ftle.box_hi", n)};
        if (b.empty()) throw ConfigError("'ftle.box_hi' must exceed 'ftle.box_lo' on every axis");
        ft.box = b;
    }
    if (auto res = f.array("ftle.resolution")) {
        if (static_cast<int>(res->size()) != n) throw ConfigError("'ftle.resolution' needs one entry per axis");
        for (double r : *res) {
            if (!(r >= 2.0) || std::floor(r) != r || r > 1e6) throw ConfigError("'ftle.resolution' entries must be integers >= 2");
            ft.resolution.push_back(static_cast<int>(r));
        }
    } else {
        ft.resolution.assign(static_cast<std::size_t>(n), 16);
    }
    ft.T = positive(f, "ftle.T", ft.T);
    if (auto pol = f.string("ftle.w0_policy")) {
        if (*pol == "zero") {
            ft.policy = W0Policy::zero();
        } else if (*pol == "fixed") {
            ft.policy = W0Policy::fixed(require_vec(f, "ftle.w0", n));
        } else {
            throw ConfigError("'ftle.w0_policy' must be zero or fixed");
        }
    }
    ft.csv = file_name(f, "ftle.csv", ft.csv);
    ft.json = file_name(f, "ftle.json", ft.json);

    auto& pr = rc.probe;
    pr.pairs = count_value(f, "probe.pairs", pr.pairs);
    pr.intervals = count_value(f, "probe.intervals", pr.intervals);
    if (f.has("probe.window")) pr.window = positive(f, "probe.window", 1.0);
    pr.json = file_name(f, "probe.json", pr.json);

    auto& v = rc.validate;
    v.example_nodes = count_value(f, "validate.example_nodes", v.example_nodes, 2);
    v.rl_nodes = count_value(f, "validate.rl_nodes", v.rl_nodes, 4);
    v.fd_step = positive(f, "validate.fd_step", v.fd_step);
    v.horizon = positive(f, "validate.horizon", v.horizon);
    v.reference_horizon = positive(f, "validate.reference_horizon", v.reference_horizon);
    v.probe_pairs = count_value(f, "validate.probe_pairs", v.probe_pairs);
    v.json = file_name(f, "validate.json", v.json);

    if (auto seed = f.number("seed")) {
        if (!(*seed >= 0.0) || std::floor(*seed) != *seed || *seed > 9.007199254740992e15) {
            throw ConfigError("'seed' must be a non-negative integer");
        }
        rc.seed = static_cast<std::uint64_t>(*seed);
    }

    f.reject_unused();

    // Physical parameters are checked here so that errors surface as config errors.
    try {
        (void)rc.params();
        if (s.mode == SolveMode::strong && rc.initial_w().norm() != 0.0) {
            throw ConfigError("solver.mode = strong requires w0 = 0 (v0 equal to u + Faxen correction)");
        }
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("particle.y0: ") + e.what());
    }
    return rc;
}

}  // namespace mrflow::cli
