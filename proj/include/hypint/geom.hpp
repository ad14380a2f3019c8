#pragma once

#include <complex>
#include <stdexcept>

#include "hypint/vec2.hpp"

namespace hypint {

// Point of the ideal boundary plane R^2 plus the point at infinity.
struct BoundaryPoint {
    Vec2 p;
    bool at_infinity = false;

    BoundaryPoint() = default;
    BoundaryPoint(double x, double y) : p(x, y) {}
    explicit BoundaryPoint(Vec2 v) : p(v) {}

    static BoundaryPoint infinity() {
        BoundaryPoint b;
        b.at_infinity = true;
        return b;
    }

    bool finite() const { return !at_infinity; }
};

// Point of the Poincare half-space model, x3 > 0.
struct HPoint {
    double x1 = 0.0, x2 = 0.0, x3 = 1.0;

    HPoint() = default;
    HPoint(double a, double b, double h);

    Vec2 shadow() const { return {x1, x2}; }
    Vec3 vec() const { return {x1, x2, x3}; }
};

// Oriented geodesic given by ordered ideal endpoints. Vertical lines carry
// one endpoint at infinity; semicircles store center and Euclidean radius.
struct Geodesic {
    BoundaryPoint start;
    BoundaryPoint end;
    // derived representation
    bool vertical = false; // one endpoint at infinity
    Vec2 base;             // foot of the vertical line, or chord center
    Vec2 dir;              // unit vector start->end (finite case); unused when vertical
    double radius = 0.0;   // Euclidean radius of the semicircle (finite case)
    bool upward = true;    // vertical case: true when start is the finite endpoint

    Geodesic(BoundaryPoint a, BoundaryPoint b);

    // Unit-speed point at hyperbolic arc length s. Anchor (s=0) is the apex
    // for semicircles and height 1 for vertical lines.
    HPoint point(double s) const;
};

// hyperbolic distance between interior points
double hyp_distance(const HPoint& p, const HPoint& q);

// oriented geodesic through p then q
Geodesic geodesic_through(const HPoint& p, const HPoint& q);

// Fractional-linear map of the boundary plane identified with C + {inf}.
// Normalized to unit determinant on construction.
class MobiusMap {
public:
    using cplx = std::complex<double>;

    MobiusMap() : a_(1), b_(0), c_(0), d_(1) {}
    MobiusMap(cplx a, cplx b, cplx c, cplx d);

    BoundaryPoint apply(const BoundaryPoint& z) const;
    Vec2 apply(Vec2 z) const; // finite input, throws if it hits the pole exactly

    // derivative dm/dz at a finite point (for curve tangent/curvature transport)
    cplx derivative(cplx z) const;
    cplx second_derivative(cplx z) const;

    MobiusMap inverse() const;
    MobiusMap compose(const MobiusMap& inner) const; // this after inner

    static MobiusMap identity() { return {}; }
    static MobiusMap translation(Vec2 t) { return {1.0, cplx(t.x, t.y), 0.0, 1.0}; }
    static MobiusMap scaling(double s) { return {cplx(s), 0.0, 0.0, 1.0}; }
    static MobiusMap rotation(double angle) {
        return {std::polar(1.0, angle), 0.0, 0.0, 1.0};
    }

    cplx a() const { return a_; }
    cplx b() const { return b_; }
    cplx c() const { return c_; }
    cplx d() const { return d_; }

    // pole (preimage of infinity); infinity itself when c == 0
    BoundaryPoint pole() const;

private:
    cplx a_, b_, c_, d_;
};

inline std::complex<double> to_complex(Vec2 v) { return {v.x, v.y}; }
inline Vec2 to_vec(std::complex<double> z) { return {z.real(), z.imag()}; }

} // namespace hypint
