#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "hypint/curve.hpp"
#include "hypint/estimate.hpp"
#include "hypint/geom.hpp"

namespace hypint {

// chart value with first and second derivatives
struct Jet2 {
    Vec3 p, ru, rv, ruu, ruv, rvv;
};

enum class SurfaceKind {
    Hemisphere,
    CappedCylinder,
    GeodesicSphere,
    VerticalPlanePatch,
    SphericalCap,
};

// Analytic surface chart in the half-space model. u runs in [0,1] (periodic
// unless stated), v over [v_min, v_max]; pole_* mark chart collapse rows.
class ParamSurface {
public:
    virtual ~ParamSurface() = default;

    virtual Jet2 jet(double u, double v) const = 0;
    virtual SurfaceKind kind() const = 0;

    virtual double v_min() const = 0;
    virtual double v_max() const = 0;
    virtual bool u_periodic() const { return true; }
    virtual bool pole_at_v_min() const { return false; }
    virtual bool pole_at_v_max() const { return false; }
    // v-interval covering {x3 >= h}; height must be monotone in v per chart
    virtual std::pair<double, double> v_range_above(double h) const = 0;
    // open cone-like end at this v boundary (height -> 0)
    virtual bool end_at_v_min() const { return false; }
    virtual bool end_at_v_max() const { return false; }

    virtual const IdealCurve* end_curve() const { return nullptr; }

    Vec3 position(double u, double v) const { return jet(u, v).p; }
};

// extrinsic (hyperbolic Gaussian) curvature from the conformal relation
// between Euclidean and hyperbolic shape operators
double extrinsic_curvature(const ParamSurface& s, double u, double v);

// both hyperbolic principal curvatures (eigenvalues of x3 S_e + n3 Id)
std::pair<double, double> principal_curvatures(const ParamSurface& s, double u,
                                               double v);

// hyperbolic area density sqrt(det I_e)/x3^2 at (u,v)
double area_density(const ParamSurface& s, double u, double v);

// int_S K dS over the whole surface (cone-like ends included)
Estimate total_curvature(const ParamSurface& s, double tol);
// same restricted to the truncation S_h
Estimate total_curvature_truncated(const ParamSurface& s, double h, double tol);

struct Truncation {
    std::shared_ptr<const ParamSurface> parent;
    double h = 0.0;
    double v_lo = 0.0, v_hi = 0.0; // chart interval of S_h
};

Truncation truncate(std::shared_ptr<const ParamSurface> s, double h);

Estimate area(const Truncation& t, double tol);
// integral of geodesic curvature over the truncation boundary C_h, with the
// conormal pointing into the surface (the convention of the compact formula)
Estimate geodesic_curvature_integral(const Truncation& t, double tol);

// ------------------------------------------------------------------- mesh

struct MeshedSurface {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::vector<int>> boundary_loops;
    int euler_char = 0;
};

int euler_characteristic(const MeshedSurface& m);

MeshedSurface mesh_surface(const ParamSurface& s, int resolution);
MeshedSurface mesh_truncation(const Truncation& t, int resolution);
// mesh of the chart restricted to [v_lo, v_hi]
MeshedSurface mesh_band(const ParamSurface& s, double v_lo, double v_hi,
                        int resolution);

std::string mesh_to_text(const MeshedSurface& m);

// ------------------------------------------------------------- generators

std::shared_ptr<ParamSurface> make_hemisphere(Vec2 center, double radius);
std::shared_ptr<ParamSurface> make_capped_cylinder(const IdealCurve& c,
                                                   double cap_height, double blend);
std::shared_ptr<ParamSurface> make_geodesic_sphere(const HPoint& center, double rho);
std::shared_ptr<ParamSurface> make_spherical_cap(double beta);
std::shared_ptr<ParamSurface> make_vertical_plane_patch(Vec2 base, Vec2 dir,
                                                        double half_width, double v_lo,
                                                        double v_hi);

// capped-cylinder internals needed by the geodesic-space estimators
struct CappedCylinderInfo {
    double wall_top = 0.0;   // wall is exactly vertical below this height
    double cap_top = 0.0;    // apex height
    Vec2 section_center;
    double section_radius = 0.0;
};
std::optional<CappedCylinderInfo> capped_cylinder_info(const ParamSurface& s);

} // namespace hypint
