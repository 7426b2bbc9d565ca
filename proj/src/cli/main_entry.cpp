#include <iostream>

#include "CLI11.hpp"
#include "mrflow/cli/commands.hpp"
#include "mrflow/errors.hpp"

namespace mrflow::cli {

int main_entry(int argc, char** argv) {
    CLI::App app{"Maxey-Riley particle solver with Basset history"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "random seed (bounds sampling, probes)");
        sub->add_option("--threads", threads, "worker threads for ftle")->check(CLI::PositiveNumber);
    };
    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
    auto* validate = app.add_subcommand("validate", "run the oracle and property checks");
    auto* ftle = app.add_subcommand("ftle", "finite-time Lyapunov exponent field");
    auto* probe = app.add_subcommand("probe", "window certificate and contraction ratios");
    for (auto* s : {simulate, validate, ftle, probe}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    CommandContext ctx{out_dir, seed, threads};
    try {
        const RunConfig config = build_run_config(ConfigFile::load(config_path));
        if (simulate->parsed()) {
            const auto s = run_simulate(config, ctx);
            for (const auto& w : s["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
            std::cout << "simulate: " << s["nodes"] << " nodes, " << s["windows"].size() << " windows\n";
        } else if (validate->parsed()) {
            const auto r = run_validate(config, ctx);
            for (const auto& c : r.checks) {
                std::cout << (c.skipped ? "SKIP " : c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
                          << " threshold=" << c.threshold << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
            }
            return r.passed() ? 0 : 2;
        } else if (ftle->parsed()) {
            const auto m = run_ftle(config, ctx);
            std::cout << "ftle: " << m["points"] << " points, " << m["missing"] << " missing\n";
        } else if (probe->parsed()) {
            const auto r = run_probe(config, ctx);
            for (const auto& w : r["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
            std::cout << "probe: max ratio " << r["max_ratio"] << " over " << r["pairs"] << " pairs\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const UnsupportedRegimeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace mrflow::cli
