#pragma once

#include <cstdint>
#include <vector>

#include "hypint/curve.hpp"
#include "hypint/estimate.hpp"

namespace hypint {

// Unoriented line {x . (cos phi, sin phi) = p}, phi in [0, pi).
struct PlanarLine {
    double p = 0.0;
    double phi = 0.0;

    Vec2 normal() const { return {std::cos(phi), std::sin(phi)}; }
    Vec2 direction() const { return {-std::sin(phi), std::cos(phi)}; }
};

struct LineHit {
    double t = 0.0;  // curve parameter
    Vec2 point;
    double s = 0.0;  // position along the line direction
};

// Deterministic quadrature of the ideal defect
//   int_{CxC} theta sin(theta) dx dy / |y-x|^2.
Estimate ideal_defect(const IdealCurve& c, double tol);

// Is (z,w) in NT(Omega): no circle through z and w is contained inside the
// bounded domain. Both points must lie inside the curve.
bool nt_membership(const IdealCurve& c, Vec2 z, Vec2 w);

// Monte Carlo estimate of 4 int_{NT} dz dw / |z-w|^4.
Estimate nt_defect(const IdealCurve& c, long long n, std::uint64_t seed);

// All transverse intersections of the line with the curve, sorted along the
// line. Tangential grazes are resolved by a deterministic jitter in p.
std::vector<LineHit> line_curve_intersections(const IdealCurve& c, PlanarLine L);

// Monte Carlo estimate of
//   int_{A(2,1)} sum_{x != y in L ∩ C} (-1)^{#(xy ∩ C)} / |y-x| dL.
Estimate chord_functional(const IdealCurve& c, long long n_lines, std::uint64_t seed);

// Deterministic quadrature of the Franklin invariant
//   int_{A(2,1)} dL / sigma(L ∩ Omega)   (convex curves only).
Estimate franklin(const IdealCurve& c, double tol);

namespace detail {

// Arcsine-in-p importance sampler over lines meeting the curve's support
// band: the sqrt weight cancels the tangency singularities of chord-type
// integrands, keeping their variance finite.
class ArcsineLineSampler {
public:
    explicit ArcsineLineSampler(const IdealCurve& c, int table = 2048);

    struct Draw {
        PlanarLine line;
        double weight = 0.0; // importance weight w.r.t. dL = dp dphi
    };
    template <class Rng>
    Draw draw(Rng& rng) const {
        const double phi = rng.uniform(0.0, 3.14159265358979323846);
        return draw_at(phi, rng.next_double());
    }
    Draw draw_at(double phi, double u01) const;

private:
    void band(double phi, double& lo, double& hi) const;
    std::vector<double> sup_hi_, sup_lo_;
    double pad_ = 0.0;
};

// Inversion-based NT test cached per z: inverting the plane at z carries the
// circle pencil through (z,w) to the line pencil through w*, so a circle
// through z,w inside Omega exists iff a line through w* misses the inverted
// curve, i.e. iff w* is outside its convex hull.
class NtTester {
public:
    NtTester(const IdealCurve& c, Vec2 z, int samples);

    // z and w assumed strictly inside the curve
    bool in_nt(Vec2 w) const;

private:
    bool refine(Vec2 w_star, double coarse_margin) const;

    const IdealCurve* curve_;
    Vec2 z_;
    std::vector<Vec2> hull_;     // ccw convex hull of inverted samples
    double eta_ = 0.0;           // polygon-vs-curve margin
    int samples_ = 0;
};

} // namespace detail

} // namespace hypint
