#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "hypint/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hypint: numerical integral geometry in the hyperbolic half-space"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    long long samples = -1;
    long long seed = -1;

    const std::vector<std::string> names = {
        "gauss-bonnet", "multi-end", "compact-check", "defect", "nt",
        "chord",        "franklin",  "crofton",       "mobius-check"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (json)")
            ->required();
        sub->add_option("--seed", seed, "override master_seed");
        sub->add_option("--samples", samples, "override n_samples");
        sub->add_option("--out", out_path, "report output path");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        hypint::RunConfig cfg = hypint::load_config_file(config_path);
        cfg.command = app.get_subcommands().front()->get_name();
        if (seed >= 0) {
            cfg.master_seed = static_cast<std::uint64_t>(seed);
            cfg.seed_present = true;
        }
        if (samples > 0) cfg.n_samples = samples;
        if (!out_path.empty()) cfg.out_path = out_path;

        const hypint::IdentityReport report = hypint::run_command(cfg);
        const std::string json = hypint::report_to_json(report);

        if (!cfg.out_path.empty()) {
            std::ofstream out(cfg.out_path);
            out << json;
            std::ofstream csv(cfg.out_path + ".csv");
            csv << hypint::report_to_csv(report);
        }
        std::cout << json;
        std::cerr << "wall_time_s " << report.wall_time_s << "\n";
        if (report.status == "error") return 2;
        return report.pass || report.status == "skipped" ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
