#include "hypint/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "hypint/defect.hpp"
#include "hypint/geodesic_mc.hpp"
#include "hypint/rng.hpp"

namespace hypint {

namespace {

constexpr double kPi = std::numbers::pi;

nlohmann::json estimate_json(const std::string& quantity, const Estimate& e,
                             std::uint64_t seed, const std::string& hash) {
    nlohmann::json j;
    j["quantity"] = quantity;
    j["value"] = e.value;
    j["std_err"] = e.std_err;
    j["n_samples"] = e.n_samples;
    j["seed"] = seed;
    j["config_hash"] = hash;
    j["method"] = e.method;
    j["error_bound"] = e.error_bound;
    return j;
}

} // namespace

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

RunConfig parse_config(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    RunConfig cfg;
    cfg.command = j.value("command", "");
    cfg.config_json = j.dump(); // canonical: nlohmann objects are key-sorted
    if (j.contains("curve")) {
        cfg.curve = curve_from_json_text(j.at("curve").dump());
    } else if (j.contains("curve_file")) {
        std::ifstream in(j.at("curve_file").get<std::string>());
        if (!in) throw std::runtime_error("config: cannot open curve_file");
        std::stringstream ss;
        ss << in.rdbuf();
        cfg.curve = curve_from_json_text(ss.str());
    }
    if (j.contains("surface")) {
        const auto& s = j.at("surface");
        cfg.surface_kind = s.value("kind", "");
        if (s.contains("params"))
            for (const auto& [k, v] : s.at("params").items())
                cfg.surface_params[k] = v.get<double>();
        cfg.resolution = s.value("resolution", 192);
    }
    cfg.quad_tol = j.value("quad_tol", 1e-6);
    cfg.n_samples = j.value("n_samples", 1000000LL);
    if (j.contains("master_seed")) {
        cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        cfg.seed_present = true;
    }
    cfg.rho = j.value("rho", 1.0);
    if (j.contains("heights"))
        for (const auto& h : j.at("heights")) cfg.heights.push_back(h.get<double>());
    cfg.k_maps = j.value("k_maps", 5);
    cfg.mobius_quantity = j.value("mobius_quantity", std::string("defect"));
    cfg.n_ends = j.value("n_ends", 1);
    cfg.out_path = j.value("out", std::string());
    if (!cfg.seed_present)
        throw std::invalid_argument(
            "config: master_seed is required (runs must be reproducible)");
    if (!(cfg.quad_tol > 0)) throw std::invalid_argument("config: quad_tol must be > 0");
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::shared_ptr<ParamSurface> build_surface(const RunConfig& cfg) {
    auto param = [&](const std::string& k, double dflt) {
        auto it = cfg.surface_params.find(k);
        return it == cfg.surface_params.end() ? dflt : it->second;
    };
    if (cfg.surface_kind == "hemisphere") {
        return make_hemisphere({param("cx", 0.0), param("cy", 0.0)},
                               param("radius", 1.0));
    }
    if (cfg.surface_kind == "capped-cylinder") {
        if (!cfg.curve) throw std::invalid_argument("capped-cylinder needs a curve");
        return make_capped_cylinder(*cfg.curve, param("cap_height", 120.0),
                                    param("blend", 0.15));
    }
    if (cfg.surface_kind == "geodesic-sphere") {
        return make_geodesic_sphere(
            HPoint(param("cx", 0.0), param("cy", 0.0), param("cz", 1.0)),
            param("rho", 1.0));
    }
    if (cfg.surface_kind == "spherical-cap") {
        return make_spherical_cap(param("beta", 0.5 * kPi));
    }
    if (cfg.surface_kind == "vertical-plane-patch") {
        return make_vertical_plane_patch({param("bx", 0.0), param("by", 0.0)},
                                         {param("dx", 1.0), param("dy", 0.0)},
                                         param("half_width", 1.0),
                                         param("v_lo", 0.1), param("v_hi", 2.0));
    }
    throw std::invalid_argument("unknown surface kind: " + cfg.surface_kind);
}

// ------------------------------------------------------------------ reports

std::string report_to_json(const IdentityReport& r) {
    nlohmann::json j;
    j["command"] = r.command;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    j["status"] = r.status;
    if (!r.note.empty()) j["note"] = r.note;
    if (!r.lhs.quantity.empty())
        j["lhs"] = estimate_json(r.lhs.quantity, r.lhs.estimate, r.seed, r.config_hash);
    j["rhs_terms"] = nlohmann::json::object();
    for (const auto& q : r.rhs_terms)
        j["rhs_terms"][q.quantity] =
            estimate_json(q.quantity, q.estimate, r.seed, r.config_hash);
    j["residual"] = r.residual;
    j["combined_tolerance"] = r.combined_tolerance;
    j["pass"] = r.pass;
    j["quantities"] = nlohmann::json::array();
    for (const auto& q : r.quantities)
        j["quantities"].push_back(
            estimate_json(q.quantity, q.estimate, r.seed, r.config_hash));
    return j.dump(2) + "\n";
}

std::string report_to_csv(const IdentityReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "quantity,value,std_err,n_samples,seed\n";
    auto row = [&](const QuantityRow& q) {
        os << q.quantity << "," << q.estimate.value << "," << q.estimate.std_err << ","
           << q.estimate.n_samples << "," << r.seed << "\n";
    };
    if (!r.lhs.quantity.empty()) row(r.lhs);
    for (const auto& q : r.rhs_terms) row(q);
    for (const auto& q : r.quantities) row(q);
    return os.str();
}

// ------------------------------------------------------------------ helpers

MobiusMap random_bounded_mobius(const IdealCurve& c, std::uint64_t seed, int index) {
    Substream rng(seed, 0x6d6f62ULL + static_cast<std::uint64_t>(index));
    const auto disk = c.bounding_disk();
    for (int attempt = 0; attempt < 64; ++attempt) {
        // similarity part plus a mild inversion whose pole sits far outside
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        const double scale = std::exp(rng.uniform(-0.4, 0.4));
        const double tx = rng.uniform(-0.5, 0.5) * disk.radius;
        const double ty = rng.uniform(-0.5, 0.5) * disk.radius;
        const double pole_dist = rng.uniform(6.0, 12.0) * disk.radius;
        const double pole_ang = rng.uniform(0.0, 2.0 * kPi);
        const Vec2 pole = disk.center +
                          Vec2(pole_dist * std::cos(pole_ang),
                               pole_dist * std::sin(pole_ang));
        // m(z) = similarity(z) / (1 - z/pole) composed as fractional-linear
        const std::complex<double> a = std::polar(scale, ang);
        const std::complex<double> b(tx, ty);
        const std::complex<double> p = to_complex(pole);
        MobiusMap m(a, b, -1.0 / p, 1.0);
        try {
            const IdealCurve img = c.mobius_image(m);
            (void)img;
            return m;
        } catch (const std::exception&) {
            continue; // rejected map: try the next deterministic draw
        }
    }
    throw std::runtime_error("random_bounded_mobius: no admissible map found");
}

// ------------------------------------------------------------------ commands

IdentityReport cmd_gauss_bonnet(const RunConfig& cfg) {
    if (!cfg.curve) throw std::invalid_argument("gauss-bonnet: curve required");
    IdentityReport r;
    r.command = "gauss-bonnet";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;

    auto surface = build_surface(cfg);
    GeodesicEstimatorOptions opt;
    opt.n = cfg.n_samples;
    opt.seed = cfg.master_seed;

    Estimate lhs, geo, def;
    if (surface->kind() == SurfaceKind::Hemisphere) {
        lhs = total_curvature(*surface, cfg.quad_tol);
        const auto* hs = dynamic_cast<const ParamSurface*>(surface.get());
        (void)hs;
        const IdealCurve& c = *surface->end_curve();
        const auto disk = c.bounding_disk();
        ShadowRegion region{disk.center, disk.radius + 1e-6, disk.radius, 0.0};
        const auto scene = make_hemisphere_scene(disk.center, disk.radius, 0.0);
        geo = geodesic_term(*scene, c, LinkingMode::IdealSeparation, region, opt);
        def = ideal_defect(c, cfg.quad_tol);
    } else if (surface->kind() == SurfaceKind::CappedCylinder) {
        lhs = total_curvature(*surface, cfg.quad_tol);
        const IdealCurve& c = *surface->end_curve();
        geo = geodesic_term_capped_full(surface, c, opt, cfg.resolution);
        def = ideal_defect(c, cfg.quad_tol);
    } else {
        throw std::invalid_argument(
            "gauss-bonnet: surface must be a hemisphere or capped cylinder "
            "(embedded, one cone-like end)");
    }

    r.lhs = {"total_curvature", lhs};
    r.rhs_terms.push_back({"geodesic_term", geo});
    r.rhs_terms.push_back({"ideal_defect", def});
    const double rhs = geo.value - def.value / kPi;
    r.residual = lhs.value - rhs;
    r.combined_tolerance = 3.0 * geo.std_err + geo.error_bound + lhs.error_bound +
                           def.error_bound / kPi;
    r.pass = std::abs(r.residual) <= r.combined_tolerance;
    return r;
}

IdentityReport cmd_multi_end(const RunConfig& cfg) {
    if (cfg.n_ends == 1) return cmd_gauss_bonnet(cfg); // exact reduction at n=1
    IdentityReport r;
    r.command = "multi-end";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;
    if (cfg.surface_kind == "two-hemispheres") {
        r.status = "error";
        r.note = "two disjoint hemispheres form a disconnected surface; "
                 "the corollary requires a connected immersion";
        r.pass = false;
        return r;
    }
    r.status = "skipped";
    r.note = "no generator for n>=2 connected multi-end surfaces "
             "(catenoid-like tube not in the generator set)";
    r.pass = false;
    return r;
}

IdentityReport cmd_compact_check(const RunConfig& cfg) {
    IdentityReport r;
    r.command = "compact-check";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;

    auto surface = build_surface(cfg);
    const double tol = cfg.quad_tol;

    if (surface->kind() == SurfaceKind::GeodesicSphere) {
        const Estimate k = total_curvature(*surface, tol);
        const MeshedSurface mesh = mesh_surface(*surface, cfg.resolution);
        const int chi = mesh.euler_char;
        const Truncation whole = truncate(surface, 1e-9);
        const Estimate f = area(whole, tol);
        r.lhs = {"total_curvature", k};
        Estimate chi_term;
        chi_term.value = 2.0 * kPi * chi;
        chi_term.method = "quadrature";
        r.rhs_terms.push_back({"euler_term", chi_term});
        r.rhs_terms.push_back({"area", f});
        r.residual = k.value - (2.0 * kPi * chi + f.value);
        r.combined_tolerance = k.error_bound + f.error_bound +
                               1e-3 * std::abs(k.value);
        r.pass = std::abs(r.residual) <= r.combined_tolerance;
        return r;
    }

    // surfaces with boundary: truncate at the configured height
    const double h = cfg.heights.empty() ? 0.2 : cfg.heights.front();
    const Truncation tr = truncate(surface, h);
    const Estimate k = total_curvature_truncated(*surface, h, tol);
    const Estimate f = area(tr, tol);
    const Estimate kg = geodesic_curvature_integral(tr, tol);
    const MeshedSurface mesh = mesh_truncation(tr, cfg.resolution);
    const int chi = mesh.euler_char;
    r.lhs = {"total_curvature", k};
    Estimate chi_term;
    chi_term.value = 2.0 * kPi * chi;
    chi_term.method = "quadrature";
    r.rhs_terms.push_back({"euler_term", chi_term});
    r.rhs_terms.push_back({"area", f});
    r.rhs_terms.push_back({"geodesic_curvature", kg});
    r.residual = k.value - (2.0 * kPi * chi + f.value - kg.value);
    r.combined_tolerance = k.error_bound + f.error_bound + kg.error_bound +
                           1e-3 * std::max(1.0, std::abs(f.value));
    r.pass = std::abs(r.residual) <= r.combined_tolerance;
    return r;
}

IdentityReport cmd_defect(const RunConfig& cfg) {
    if (!cfg.curve) throw std::invalid_argument("defect: curve required");
    IdentityReport r;
    r.command = "defect";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;
    r.lhs = {"ideal_defect", ideal_defect(*cfg.curve, cfg.quad_tol)};
    r.residual = 0.0;
    r.combined_tolerance = cfg.quad_tol;
    r.pass = true;
    return r;
}

IdentityReport cmd_nt(const RunConfig& cfg) {
    if (!cfg.curve) throw std::invalid_argument("nt: curve required");
    IdentityReport r;
    r.command = "nt";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;
    const Estimate nt = nt_defect(*cfg.curve, cfg.n_samples, cfg.master_seed);
    const Estimate id = ideal_defect(*cfg.curve, cfg.quad_tol);
    r.lhs = {"nt_defect", nt};
    r.rhs_terms.push_back({"ideal_defect", id});
    r.residual = nt.value - id.value;
    r.combined_tolerance = 3.0 * nt.std_err + nt.error_bound + id.error_bound;
    r.pass = std::abs(r.residual) <= r.combined_tolerance;
    return r;
}

IdentityReport cmd_chord(const RunConfig& cfg) {
    if (!cfg.curve) throw std::invalid_argument("chord: curve required");
    IdentityReport r;
    r.command = "chord";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;
    const Estimate ch = chord_functional(*cfg.curve, cfg.n_samples, cfg.master_seed);
    const Estimate id = ideal_defect(*cfg.curve, cfg.quad_tol);
    r.lhs = {"chord_functional", ch};
    r.rhs_terms.push_back({"ideal_defect", id});
    // 2 chord - 2 pi^2 = defect
    r.residual = 2.0 * ch.value - 2.0 * kPi * kPi - id.value;
    r.combined_tolerance = 6.0 * ch.std_err + id.error_bound;
    r.pass = std::abs(r.residual) <= r.combined_tolerance;
    return r;
}

IdentityReport cmd_franklin(const RunConfig& cfg) {
    if (!cfg.curve) throw std::invalid_argument("franklin: curve required");
    IdentityReport r;
    r.command = "franklin";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;
    const Estimate f = franklin(*cfg.curve, cfg.quad_tol);
    r.lhs = {"franklin", f};
    Estimate bound;
    bound.value = 0.5 * kPi * kPi;
    bound.method = "quadrature";
    r.rhs_terms.push_back({"disk_minimum", bound});
    r.residual = f.value - bound.value; // >= 0 by the minimality corollary
    r.combined_tolerance = f.error_bound;
    r.pass = r.residual >= -r.combined_tolerance;
    return r;
}

IdentityReport cmd_crofton(const RunConfig& cfg) {
    IdentityReport r;
    r.command = "crofton";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;

    const double rho = cfg.rho;
    const double radius = 1.0;
    const Vec2 center{0.0, 0.0};
    const double disk_floor = radius / std::cosh(rho);
    ShadowRegion region{center, radius + 1e-6, radius, disk_floor};
    const auto scene = make_hemisphere_scene(center, radius, rho);
    GeodesicEstimatorOptions opt;
    opt.n = cfg.n_samples;
    opt.seed = cfg.master_seed;
    const Estimate est = crofton_area(*scene, region, opt);

    Estimate closed;
    closed.value = 2.0 * kPi * (std::cosh(rho) - 1.0);
    closed.method = "quadrature";
    r.lhs = {"crofton_area", est};
    r.rhs_terms.push_back({"geodesic_disk_area", closed});
    r.residual = est.value - closed.value;
    r.combined_tolerance = 3.0 * est.std_err + est.error_bound;
    r.pass = std::abs(r.residual) <= r.combined_tolerance;
    return r;
}

IdentityReport cmd_mobius_check(const RunConfig& cfg) {
    if (!cfg.curve) throw std::invalid_argument("mobius-check: curve required");
    IdentityReport r;
    r.command = "mobius-check";
    r.config_hash = config_hash(cfg.config_json);
    r.seed = cfg.master_seed;

    auto evaluate = [&](const IdealCurve& c) -> Estimate {
        if (cfg.mobius_quantity == "franklin") return franklin(c, cfg.quad_tol);
        return ideal_defect(c, cfg.quad_tol);
    };

    const Estimate base = evaluate(*cfg.curve);
    r.lhs = {cfg.mobius_quantity + "_base", base};
    double lo = base.value, hi = base.value;
    for (int k = 0; k < cfg.k_maps; ++k) {
        for (int attempt = 0; attempt < 16; ++attempt) {
            const MobiusMap m =
                random_bounded_mobius(*cfg.curve, cfg.master_seed,
                                      k * 16 + attempt);
            try {
                const IdealCurve img = cfg.curve->mobius_image(m);
                if (cfg.mobius_quantity == "franklin" && !img.is_convex())
                    continue; // franklin needs the image kept convex
                const Estimate e = evaluate(img);
                r.quantities.push_back(
                    {cfg.mobius_quantity + "_map" + std::to_string(k), e});
                lo = std::min(lo, e.value);
                hi = std::max(hi, e.value);
                break;
            } catch (const std::exception&) {
                continue;
            }
        }
    }
    const double scale = std::max(std::abs(base.value), 1e-12);
    r.residual = (hi - lo) / scale;
    r.combined_tolerance = 1e-3;
    r.pass = r.residual <= r.combined_tolerance;
    return r;
}

IdentityReport run_command(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    IdentityReport r;
    if (cfg.command == "gauss-bonnet") r = cmd_gauss_bonnet(cfg);
    else if (cfg.command == "multi-end") r = cmd_multi_end(cfg);
    else if (cfg.command == "compact-check") r = cmd_compact_check(cfg);
    else if (cfg.command == "defect") r = cmd_defect(cfg);
    else if (cfg.command == "nt") r = cmd_nt(cfg);
    else if (cfg.command == "chord") r = cmd_chord(cfg);
    else if (cfg.command == "franklin") r = cmd_franklin(cfg);
    else if (cfg.command == "crofton") r = cmd_crofton(cfg);
    else if (cfg.command == "mobius-check") r = cmd_mobius_check(cfg);
    else throw std::invalid_argument("unknown command: " + cfg.command);
    const auto t1 = std::chrono::steady_clock::now();
    r.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    return r;
}

} // namespace hypint
