#include "hypint/geom.hpp"

#include <cmath>
#include <limits>

namespace hypint {

namespace {
bool finite3(double a, double b, double c) {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}
} // namespace

HPoint::HPoint(double a, double b, double h) : x1(a), x2(b), x3(h) {
    if (!finite3(a, b, h)) throw std::domain_error("HPoint: non-finite coordinate");
    if (!(h > 0.0)) throw std::domain_error("HPoint: x3 must be positive");
}

double hyp_distance(const HPoint& p, const HPoint& q) {
    const double dx = p.x1 - q.x1;
    const double dy = p.x2 - q.x2;
    const double dz = p.x3 - q.x3;
    // cosh r = 1 + |p-q|^2 / (2 p3 q3), clamped against rounding below 1
    double arg = 1.0 + (dx * dx + dy * dy + dz * dz) / (2.0 * p.x3 * q.x3);
    if (!std::isfinite(arg)) throw std::domain_error("hyp_distance: non-finite input");
    if (arg < 1.0) {
        if (arg < 1.0 - 1e-14) throw std::domain_error("hyp_distance: invalid arcosh argument");
        arg = 1.0;
    }
    return std::acosh(arg);
}

Geodesic::Geodesic(BoundaryPoint a, BoundaryPoint b) : start(a), end(b) {
    if (a.at_infinity && b.at_infinity)
        throw std::invalid_argument("Geodesic: both endpoints at infinity");
    if (a.at_infinity || b.at_infinity) {
        vertical = true;
        base = a.at_infinity ? b.p : a.p;
        upward = b.at_infinity; // oriented from the finite endpoint up
        return;
    }
    const Vec2 chord = b.p - a.p;
    const double len = chord.norm();
    if (len == 0.0) throw std::invalid_argument("Geodesic: coincident endpoints");
    base = (a.p + b.p) * 0.5;
    dir = chord / len;
    radius = 0.5 * len;
}

HPoint Geodesic::point(double s) const {
    if (vertical) {
        const double h = upward ? std::exp(s) : std::exp(-s);
        return {base.x, base.y, h};
    }
    // alpha(s) = 2*atan(e^{-s}) walks the semicircle from start (alpha=pi)
    // to end (alpha=0) at unit hyperbolic speed; apex at s=0.
    const double c = std::cosh(s);
    const double t = std::tanh(s);
    const Vec2 foot = base + dir * (radius * t);
    return {foot.x, foot.y, radius / c};
}

Geodesic geodesic_through(const HPoint& p, const HPoint& q) {
    const Vec2 dp = q.shadow() - p.shadow();
    const double horiz = dp.norm();
    if (horiz == 0.0) {
        if (p.x3 == q.x3) throw std::invalid_argument("geodesic_through: p == q");
        // vertical line; orientation visits p before q
        const BoundaryPoint foot(p.x1, p.x2);
        if (q.x3 > p.x3) return {foot, BoundaryPoint::infinity()};
        return {BoundaryPoint::infinity(), foot};
    }
    // center of the semicircle along the line through the shadows
    const Vec2 u = dp / horiz;
    const double up = 0.0;                                  // p at offset 0
    const double uq = horiz;                                // q at offset |dp|
    const double c = (uq * uq + q.x3 * q.x3 - up * up - p.x3 * p.x3) / (2.0 * (uq - up));
    const double R = std::hypot(up - c, p.x3);
    const Vec2 center = p.shadow() + u * c;
    // Ideal endpoints at center +- R u; orientation so that p comes first.
    // p sits at angle alpha_p with cos(alpha_p) = (up - c)/R; alpha decreases
    // along the orientation, and alpha = pi is the '-' ideal endpoint.
    const BoundaryPoint eneg(center.x - R * u.x, center.y - R * u.y);
    const BoundaryPoint epos(center.x + R * u.x, center.y + R * u.y);
    const double ap = std::atan2(p.x3, up - c);
    const double aq = std::atan2(q.x3, uq - c);
    if (ap > aq) return {eneg, epos};
    return {epos, eneg};
}

MobiusMap::MobiusMap(cplx a, cplx b, cplx c, cplx d) : a_(a), b_(b), c_(c), d_(d) {
    const cplx det = a_ * d_ - b_ * c_;
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("MobiusMap: determinant too small");
    const cplx s = std::sqrt(det);
    a_ /= s; b_ /= s; c_ /= s; d_ /= s;
}

BoundaryPoint MobiusMap::apply(const BoundaryPoint& z) const {
    if (z.at_infinity) {
        if (std::abs(c_) == 0.0) return BoundaryPoint::infinity();
        return BoundaryPoint(to_vec(a_ / c_));
    }
    const cplx w = to_complex(z.p);
    const cplx den = c_ * w + d_;
    if (std::abs(den) == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint(to_vec((a_ * w + b_) / den));
}

Vec2 MobiusMap::apply(Vec2 z) const {
    const BoundaryPoint r = apply(BoundaryPoint(z));
    if (r.at_infinity) throw std::domain_error("MobiusMap: point maps to infinity");
    return r.p;
}

MobiusMap::cplx MobiusMap::derivative(cplx z) const {
    const cplx den = c_ * z + d_;
    return 1.0 / (den * den); // det normalized to 1
}

MobiusMap::cplx MobiusMap::second_derivative(cplx z) const {
    const cplx den = c_ * z + d_;
    return -2.0 * c_ / (den * den * den);
}

MobiusMap MobiusMap::inverse() const { return {d_, -b_, -c_, a_}; }

MobiusMap MobiusMap::compose(const MobiusMap& m) const {
    return {a_ * m.a_ + b_ * m.c_, a_ * m.b_ + b_ * m.d_,
            c_ * m.a_ + d_ * m.c_, c_ * m.b_ + d_ * m.d_};
}

BoundaryPoint MobiusMap::pole() const {
    if (std::abs(c_) == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint(to_vec(-d_ / c_));
}

} // namespace hypint
