#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace ranplan {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec3{};
}

// Infinite plane n.p = d with unit normal.
struct Plane {
    Vec3 normal;
    double offset = 0.0;

    double signed_distance(const Vec3& p) const { return dot(normal, p) - offset; }
};

inline Vec3 mirror_across(const Plane& plane, const Vec3& p) {
    return p - 2.0 * plane.signed_distance(p) * plane.normal;
}

// Parameter t in [0,1] along a->b where the segment crosses the plane,
// or no value when the segment is (numerically) parallel.
inline bool segment_plane_param(const Plane& plane, const Vec3& a, const Vec3& b, double& t_out) {
    const double da = plane.signed_distance(a);
    const double db = plane.signed_distance(b);
    const double denom = da - db;
    if (std::abs(denom) < 1e-15) return false;
    t_out = da / denom;
    return true;
}

struct Aabb {
    Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
    Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};

    void expand(const Vec3& p) {
        min.x = std::min(min.x, p.x);
        min.y = std::min(min.y, p.y);
        min.z = std::min(min.z, p.z);
        max.x = std::max(max.x, p.x);
        max.y = std::max(max.y, p.y);
        max.z = std::max(max.z, p.z);
    }

    void expand(const Aabb& o) {
        expand(o.min);
        expand(o.max);
    }

    bool contains(const Vec3& p, double tol = 0.0) const {
        return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol &&
               p.y <= max.y + tol && p.z >= min.z - tol && p.z <= max.z + tol;
    }

    bool empty() const { return min.x > max.x; }
};

// Distance from p to the closest polygon boundary edge, measured in the
// projection plane that drops the dominant normal component.
inline double polygon_boundary_distance(const std::vector<Vec3>& poly, const Vec3& normal,
                                        const Vec3& p) {
    const double ax = std::abs(normal.x), ay = std::abs(normal.y), az = std::abs(normal.z);
    int drop = 2;
    if (ax >= ay && ax >= az)
        drop = 0;
    else if (ay >= ax && ay >= az)
        drop = 1;
    auto u = [&](const Vec3& v) { return drop == 0 ? v.y : v.x; };
    auto w = [&](const Vec3& v) { return drop == 2 ? v.y : v.z; };

    const double px = u(p), py = w(p);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double x1 = u(poly[j]), y1 = w(poly[j]);
        const double x2 = u(poly[i]), y2 = w(poly[i]);
        const double ex = x2 - x1, ey = y2 - y1;
        const double len2 = ex * ex + ey * ey;
        double t = len2 > 0.0 ? ((px - x1) * ex + (py - y1) * ey) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double dx = px - (x1 + t * ex), dy = py - (y1 + t * ey);
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
    return best;
}

// Point-in-polygon for a planar 3D polygon, tested in the projection plane
// that drops the dominant component of the polygon normal. Boundary points
// count as inside (within tol).
inline bool point_in_polygon(const std::vector<Vec3>& poly, const Vec3& normal, const Vec3& p,
                             double tol = 1e-9) {
    const double ax = std::abs(normal.x), ay = std::abs(normal.y), az = std::abs(normal.z);
    int drop = 2;
    if (ax >= ay && ax >= az)
        drop = 0;
    else if (ay >= ax && ay >= az)
        drop = 1;

    auto u = [&](const Vec3& v) { return drop == 0 ? v.y : v.x; };
    auto w = [&](const Vec3& v) { return drop == 2 ? v.y : v.z; };

    const double px = u(p), py = w(p);
    const std::size_t n = poly.size();

    // On-edge test first so boundary points are classified consistently.
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double x1 = u(poly[j]), y1 = w(poly[j]);
        const double x2 = u(poly[i]), y2 = w(poly[i]);
        const double ex = x2 - x1, ey = y2 - y1;
        const double len2 = ex * ex + ey * ey;
        if (len2 < tol * tol) continue;
        double t = ((px - x1) * ex + (py - y1) * ey) / len2;
        t = std::clamp(t, 0.0, 1.0);
        const double dx = px - (x1 + t * ex), dy = py - (y1 + t * ey);
        if (dx * dx + dy * dy <= tol * tol) return true;
    }

    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double x1 = u(poly[j]), y1 = w(poly[j]);
        const double x2 = u(poly[i]), y2 = w(poly[i]);
        if ((y1 > py) != (y2 > py)) {
            const double xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1);
            if (px < xint) inside = !inside;
        }
    }
    return inside;
}

}  // namespace ranplan
