#pragma once

#include <cstdint>
#include <memory>

#include "hypint/curve.hpp"
#include "hypint/estimate.hpp"
#include "hypint/geom.hpp"
#include "hypint/surface.hpp"

namespace hypint {

// Chords of contributing geodesics must meet the shadow disk; height_hint is
// the top of the tallest surface so over-arching geodesics stay covered;
// floor_height is the lowest reachable surface point (0 for cone-like ends),
// which bounds the half-chord of any contributing geodesic from below.
struct ShadowRegion {
    Vec2 center;
    double radius = 1.0;
    double height_hint = 0.0;
    double floor_height = 0.0;
};

struct GeodesicEstimatorOptions {
    long long n = 1'000'000;
    std::uint64_t seed = 1;
    int blocks = 128;
};

// -------------------------------------------------------- mesh intersection

class MeshAccel {
public:
    explicit MeshAccel(const MeshedSurface& m);
    ~MeshAccel();
    MeshAccel(MeshAccel&&) noexcept;

    struct Hit {
        int triangle = -1;
        Vec3 point;
        int sign = 0;       // sign of (segment dir . triangle normal)
        double along = 0.0; // arc position of the crossing (for ordering)
        bool degenerate = false;
    };

    // all transverse hits of segment [a,b]; appends to out
    void segment_hits(Vec3 a, Vec3 b, double s0, double s1,
                      std::vector<Hit>& out) const;

    double z_min() const;
    double z_max() const;
    double typical_edge() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct IntersectionRecord {
    int count = 0;
    int signed_sum = 0; // p - q
    bool jittered = false;
    std::vector<MeshAccel::Hit> hits;
};

// Adaptive sagitta-controlled discretization of the geodesic against the
// mesh; degenerate hits retried with deterministically jittered endpoints.
IntersectionRecord count_intersections(const Geodesic& g, const MeshAccel& mesh);

int linking_compact(const Geodesic& g, const MeshAccel& mesh);
// 0/1 separation of the ideal endpoints by the curve (jitters if on-curve)
int linking_sq_ideal(const Geodesic& g, const IdealCurve& c);

// ------------------------------------------------------------------ scenes

// counting surface for the estimators: exact closed forms where available,
// meshes elsewhere
class IntersectionScene {
public:
    struct Counts {
        int count = 0;
        int signed_sum = 0;
        bool degenerate = false;
    };
    virtual Counts count(Vec2 z, Vec2 w) const = 0;
    virtual ~IntersectionScene() = default;
};

// hemisphere (whole, or the geodesic disk of hyperbolic radius disk_rho > 0)
std::unique_ptr<IntersectionScene> make_hemisphere_scene(Vec2 center, double radius,
                                                         double disk_rho = 0.0);
// capped cylinder above floor_h (0 = complete surface); wall counted in
// closed form, morph band and dome against a mesh
std::unique_ptr<IntersectionScene> make_capped_cylinder_scene(
    std::shared_ptr<const ParamSurface> s, double floor_h, int mesh_resolution);
std::unique_ptr<IntersectionScene> make_mesh_scene(std::shared_ptr<MeshedSurface> m);

// -------------------------------------------------------------- estimators

// Crofton area (1/pi) int #(l ∩ S) dl
Estimate crofton_area(const IntersectionScene& scene, ShadowRegion region,
                      GeodesicEstimatorOptions opt);

// Banchoff-Pohl (1/pi) int lambda^2 dl with lambda the signed mesh crossing sum
Estimate banchoff_pohl_area(const IntersectionScene& scene, ShadowRegion region,
                            GeodesicEstimatorOptions opt);
Estimate banchoff_pohl_area(const MeshedSurface& m, GeodesicEstimatorOptions opt);

enum class LinkingMode {
    IdealSeparation, // complete surface: lambda^2 from the end curve
    CompactSigned,   // truncation: lambda = p - q from the same crossing record
};

// (1/pi) int (#(l ∩ S) - lambda^2) dl; every sample checked nonnegative
Estimate geodesic_term(const IntersectionScene& scene, const IdealCurve& c,
                       LinkingMode mode, ShadowRegion region,
                       GeodesicEstimatorOptions opt);

// Complete capped cylinder: geodesics below the wall top reduce exactly to a
// line-space functional (integrated by the arcsine line sampler with the
// closed-form pair kernel); only geodesics tall enough to reach the shape
// morph band and the dome go through 3D counting.
Estimate geodesic_term_capped_full(std::shared_ptr<const ParamSurface> s,
                                   const IdealCurve& c,
                                   GeodesicEstimatorOptions opt,
                                   int mesh_resolution = 192);

namespace detail {

// windowed pair kernel pieces of the line-space reduction (exposed for the
// brute-force quadrature oracle in tests)
// int_{s in (a,b)} int_{t in (c,d), 0 < t-s <= gap} (t-s)^{-3} dt ds, b <= c
double cell_integral(double a, double b, double c, double d, double gap);
// both-order pair sum of (#between - parity) over chords of length <= gap
double line_kernel(const std::vector<double>& hits, double gap);

} // namespace detail

// ------------------------------------------------------------------ sampler

// Direct access to the importance sampler (tests, calibration): emits ordered
// ideal endpoint pairs with weights for the oriented measure
// dl+ = rho^-3 dc drho dphi = 4 dz dw / |z-w|^4.
class GeodesicSampler {
public:
    GeodesicSampler(ShadowRegion region, std::uint64_t master_seed);

    struct Draw {
        Vec2 z, w;
        double weight = 0.0; // importance weight w.r.t. oriented measure
    };
    Draw next();

    static double rho_max_for(const ShadowRegion& r);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

} // namespace hypint
