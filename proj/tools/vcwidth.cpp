#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "vcwidth/vcwidth.hpp"

int main(int argc, char** argv) {
    using namespace vcwidth;
    RunConfig cfg;
    CLI::App app{"Shatter functions, VC indices and Gaussian mean widths of finite function families"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1, 1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "Input file (PointSet, FunctionFamily, FuzzyFamily, RandomFamily)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--format", cfg.format, "Input format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--output", cfg.output, "Write the JSON report here instead of stdout");
        sub->add_option("--seed", cfg.seed, "Seed for Gaussian directions and random choices");
        sub->add_option("--samples", cfg.samples, "Monte Carlo samples")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
        sub->add_option("--threads", cfg.threads, "Worker threads (0 = hardware concurrency)");
        sub->add_option("--eps", cfg.eps, "Gap eps")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--d", cfg.d, "Box dimension")->check(CLI::PositiveNumber);
        sub->add_option("--nmax", cfg.nmax, "Largest tuple length for analyze")->check(CLI::Range(2, 64));
        sub->add_option("--budget", cfg.budget, "Tuple evaluations allowed per n")->check(CLI::PositiveNumber);
        sub->add_flag("--strict", cfg.strict, "Require a gap strictly larger than eps");
        sub->add_option("--c", cfg.c, "Cube side c for inflated volumes")->check(CLI::PositiveNumber);
        sub->add_option("--r", cfg.r, "Lower slice threshold")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--s", cfg.s, "Upper slice threshold")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--n", cfg.n, "Subset or tuple size (0 = all / default)");
        sub->add_option("--cap", cfg.cap, "Cap for the VC index search (0 = columns + 1)");
        sub->add_option("--grid", cfg.grid, "Grid steps for vc-profile")->check(CLI::PositiveNumber);
        sub->add_option("--tuples", cfg.tuples, "Random tuples checked by expect")->check(CLI::PositiveNumber);
        sub->add_flag("--prune", cfg.prune, "Remove non-vertices from positive-part output");
        sub->add_option("--direction", cfg.direction, "Crush direction (normalized)")->delimiter(',');
        sub->add_option("--expr", cfg.expr, "Connective expression, e.g. monus(phi,half(psi))");
    };

    const std::vector<std::pair<std::string, std::string>> commands{
        {"width", "Gaussian mean width estimate of a point set"},
        {"vc-index", "VC index of a fuzzy family or of the slice Q_{r,s}"},
        {"vc-profile", "Slice VC indices of Q_{r,r+eps} over a grid of r"},
        {"shatter", "Shatter function values with the Sauer-Shelah bound"},
        {"box-find", "Exhaustive search for a d-dimensional eps-box"},
        {"inflate", "Volume of A + [0,c]^n and derived bounds"},
        {"bound-check", "Check the width bounds on a point set"},
        {"crush", "Crush a point set along a direction"},
        {"positive-part", "Iterated crush along the coordinate axes"},
        {"connective", "Apply a connective expression to named families"},
        {"expect", "Expectation of a random family with the width inequality check"},
        {"analyze", "Growth of g_Q(n)/n and the dependence diagnostic"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    set_worker_threads(cfg.threads);

    try {
        const auto start = std::chrono::steady_clock::now();
        const auto input = load_input(cfg.input, cfg.format);
        const auto outcome = run_command(cfg, input);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string text = make_report(cfg, outcome, wall).dump(2) + "\n";
        if (cfg.output.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(cfg.output, std::ios::binary);
            if (!(out << text)) {
                std::cerr << "error: cannot write '" << cfg.output << "'\n";
                return 1;
            }
        }
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
