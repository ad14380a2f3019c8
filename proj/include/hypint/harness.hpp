#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypint/curve.hpp"
#include "hypint/estimate.hpp"
#include "hypint/surface.hpp"

namespace hypint {

// Fully determines a run: command, inputs, tolerances, budgets, seed.
struct RunConfig {
    std::string command;
    std::string config_json;  // canonical source text (hashed)
    std::optional<IdealCurve> curve;
    std::string surface_kind; // "hemisphere" | "capped-cylinder" | ...
    std::map<std::string, double> surface_params;
    int resolution = 192;
    double quad_tol = 1e-6;
    long long n_samples = 1'000'000;
    std::uint64_t master_seed = 0;
    bool seed_present = false;
    double rho = 1.0;                  // crofton / sphere radius
    std::vector<double> heights;       // truncation sweeps
    int k_maps = 5;                    // mobius-check images
    std::string mobius_quantity = "defect";
    int n_ends = 1;
    std::string out_path;
};

struct QuantityRow {
    std::string quantity;
    Estimate estimate;
};

struct IdentityReport {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    QuantityRow lhs;
    std::vector<QuantityRow> rhs_terms;
    double residual = 0.0;
    double combined_tolerance = 0.0;
    bool pass = false;
    std::string status = "ok"; // ok | skipped | error
    std::string note;
    std::vector<QuantityRow> quantities; // extra rows (sweeps)
    double wall_time_s = 0.0;            // printed, never written to the file
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

std::string config_hash(const std::string& canonical_json);

// report serialization: wall time excluded so identical configs give
// byte-identical files
std::string report_to_json(const IdentityReport& r);
std::string report_to_csv(const IdentityReport& r);

std::shared_ptr<ParamSurface> build_surface(const RunConfig& cfg);

IdentityReport cmd_gauss_bonnet(const RunConfig& cfg);
IdentityReport cmd_multi_end(const RunConfig& cfg);
IdentityReport cmd_compact_check(const RunConfig& cfg);
IdentityReport cmd_defect(const RunConfig& cfg);
IdentityReport cmd_nt(const RunConfig& cfg);
IdentityReport cmd_chord(const RunConfig& cfg);
IdentityReport cmd_franklin(const RunConfig& cfg);
IdentityReport cmd_crofton(const RunConfig& cfg);
IdentityReport cmd_mobius_check(const RunConfig& cfg);

IdentityReport run_command(const RunConfig& cfg);

// deterministic bounded Mobius maps for invariance checks: the pole is kept
// well outside the curve so images stay bounded
MobiusMap random_bounded_mobius(const IdealCurve& c, std::uint64_t seed, int index);

} // namespace hypint
