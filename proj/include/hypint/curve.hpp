#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypint/geom.hpp"
#include "hypint/vec2.hpp"

namespace hypint {

struct OnCurveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Circle with orientation (+1 ccw, -1 cw), or an oriented line.
struct OrientedCircleOrLine {
    bool is_line = false;
    Vec2 center;
    double radius = 0.0;
    int orientation = +1;
    Vec2 line_point;
    Vec2 line_dir; // unit
};

// Analytic parametrized shape, 1-periodic in t.
struct CurveShape {
    virtual ~CurveShape() = default;
    virtual Vec2 eval(double t) const = 0;
    virtual Vec2 d1(double t) const = 0;
    virtual Vec2 d2(double t) const = 0;
};

struct CurveParams {
    int dense_samples = 4096;      // polyline resolution for scans and locator
    int theta_grid = 128;          // initial unwrap grid, doubles up to theta_grid_max
    int theta_grid_max = 1024;
    double eps_on = 1e-9;          // on-curve rejection distance
    double eps_imm = 1e-8;         // immersion floor for |C'|
    double eps_self = 1e-9;        // self-intersection tolerance
    double near_diagonal = 1e-5;   // |t_x - t_y| below which theta returns 0
};

// Closed smooth simple curve in the ideal boundary plane. Fourier-backed or a
// Mobius image of one; immutable after construction, all queries const.
class IdealCurve {
public:
    // harmonics[k] = {cos_k, sin_k} coefficient pair for frequency k (k=0 constant)
    static IdealCurve from_harmonics(const std::vector<std::pair<double, double>>& hx,
                                     const std::vector<std::pair<double, double>>& hy,
                                     bool ccw = true, CurveParams params = {});
    static IdealCurve circle(Vec2 center, double radius, CurveParams params = {});
    static IdealCurve ellipse(double a, double b, CurveParams params = {});

    IdealCurve mobius_image(const MobiusMap& m) const;

    Vec2 eval(double t) const { return shape_->eval(t); }
    Vec2 d1(double t) const { return shape_->d1(t); }
    Vec2 d2(double t) const { return shape_->d2(t); }
    Vec2 tangent(double t) const { return shape_->d1(t).normalized(); }
    double speed(double t) const { return shape_->d1(t).norm(); }
    double curvature(double t) const; // signed w.r.t. parametrization

    int winding_number(Vec2 p) const;        // exact ray cast
    bool inside(Vec2 p) const;               // odd winding, locator-accelerated
    int separation(Vec2 z, Vec2 w) const;    // lambda^2 for the geodesic (z,w)
    OrientedCircleOrLine tangent_circle(double t_y, Vec2 x) const;
    double theta(double t_x, double t_y) const;

    // all roots of C(t).n = c, polished to ~1e-12; returns increasing t in [0,1)
    std::vector<double> level_crossings(Vec2 n, double c) const;

    // closest parameter and distance to p
    std::pair<double, double> closest_point(Vec2 p) const;

    // max of C(t).n over t, with maximizing parameter
    std::pair<double, double> support(Vec2 n) const;

    double arc_length() const { return arc_length_; }
    double signed_area() const { return signed_area_; }
    bool is_ccw() const { return signed_area_ > 0.0; }
    bool is_convex() const; // curvature single-signed

    struct Disk {
        Vec2 center;
        double radius = 0.0;
    };
    Disk bounding_disk() const { return bounding_disk_; }
    double area() const { return std::abs(signed_area_); }
    Vec2 interior_point() const; // a point strictly inside the bounded domain

    const CurveParams& params() const { return params_; }
    const std::vector<Vec2>& samples() const { return samples_; }

    // Fourier coefficients (empty for Mobius-backed curves)
    const std::vector<std::pair<double, double>>& harmonics_x() const { return hx_; }
    const std::vector<std::pair<double, double>>& harmonics_y() const { return hy_; }

private:
    IdealCurve(std::shared_ptr<const CurveShape> shape, CurveParams params);
    void validate_and_cache();
    void build_theta_grid() const;
    double theta_principal(double t_x, double t_y) const;

    std::shared_ptr<const CurveShape> shape_;
    CurveParams params_;
    std::vector<std::pair<double, double>> hx_, hy_;

    // caches
    std::vector<Vec2> samples_;
    double arc_length_ = 0.0;
    double signed_area_ = 0.0;
    Disk bounding_disk_;

    struct Locator;
    std::shared_ptr<Locator> locator_;

    struct ThetaGrid {
        int n = 0;
        std::vector<double> val; // val[i*n + k], k = wrapped offset index
    };
    mutable std::shared_ptr<ThetaGrid> theta_grid_;
    mutable std::shared_ptr<std::once_flag> theta_once_;
};

// curve file schema: {"harmonics_x": [[a,b],...], "harmonics_y": [[c,d],...],
//                     "orientation": "ccw"|"cw"}
IdealCurve curve_from_json_text(const std::string& text, CurveParams params = {});
std::string curve_to_json_text(const IdealCurve& c);

} // namespace hypint
