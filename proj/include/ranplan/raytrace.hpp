#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "ranplan/errors.hpp"
#include "ranplan/scene.hpp"

namespace ranplan {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kVacuumPermittivity = 8.8541878128e-12;
constexpr double kPi = 3.14159265358979323846;

enum class PathKind { LineOfSight, Reflected, Diffracted };

enum class CombineMode { Coherent, PowerSum };

enum class Polarization { TE, TM };

struct RayPath {
    PathKind kind = PathKind::LineOfSight;
    int reflection_order = 0;           // k for Reflected, 0 otherwise
    std::vector<Vec3> interaction_points;
    double length_m = 0.0;
    std::complex<double> gain{0.0, 0.0};
};

struct TraceConfig {
    int max_reflections = 3;
    int max_diffraction_order = 1;
    double carrier_frequency_hz = 3.75e9;
    CombineMode combine_mode = CombineMode::Coherent;
    Polarization polarization = Polarization::TE;

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }

    void validate() const {
        if (max_reflections < 0 || max_reflections > 3)
            throw ConfigError("max_reflections must be in [0, 3]");
        if (max_diffraction_order < 0 || max_diffraction_order > 1)
            throw ConfigError("max_diffraction_order must be in [0, 1]");
        if (!(carrier_frequency_hz > 0.0)) throw ConfigError("carrier frequency must be > 0");
    }
};

// Free-space amplitude gain lambda/(4*pi*d).
inline double friis_gain(double distance_m, double frequency_hz) {
    return kSpeedOfLight / (4.0 * kPi * distance_m * frequency_hz);
}

// Fresnel reflection coefficient off a lossy dielectric half-space. The
// incidence angle is measured from the facet normal (0 = normal incidence).
inline std::complex<double> reflection_coefficient(const Material& material,
                                                   double incidence_angle_rad,
                                                   Polarization polarization, double frequency_hz) {
    if (incidence_angle_rad < 0.0 || incidence_angle_rad >= kPi / 2.0)
        throw ConfigError("incidence angle must be in [0, pi/2)");
    const double omega = 2.0 * kPi * frequency_hz;
    const std::complex<double> eps(material.relative_permittivity,
                                   -material.conductivity_s_m / (omega * kVacuumPermittivity));
    const double ct = std::cos(incidence_angle_rad);
    const double st = std::sin(incidence_angle_rad);
    const std::complex<double> root = std::sqrt(eps - st * st);
    if (polarization == Polarization::TE) return (ct - root) / (ct + root);
    return (eps * ct - root) / (eps * ct + root);
}

// ITU-R P.526 single knife-edge loss in dB for Fresnel parameter v, clamped
// to non-negative so a diffracted ray never beats free space.
inline double knife_edge_loss_db(double fresnel_v) {
    if (fresnel_v <= -0.78) return 0.0;
    const double a = std::sqrt((fresnel_v - 0.1) * (fresnel_v - 0.1) + 1.0) + fresnel_v - 0.1;
    return std::max(0.0, 6.9 + 20.0 * std::log10(a));
}

namespace detail {

// True when segment a->b crosses any facet strictly between its endpoints.
// Endpoints are excluded so reflection/diffraction contact points do not
// occlude their own path.
inline bool segment_blocked(const Scene& scene, const Vec3& a, const Vec3& b,
                            double t_eps = 1e-9) {
    for (const auto& facet : scene.facets) {
        double t;
        if (!segment_plane_param(facet.plane(), a, b, t)) continue;
        if (t <= t_eps || t >= 1.0 - t_eps) continue;
        const Vec3 hit = a + t * (b - a);
        if (facet.contains_projected(hit, 1e-9)) return true;
    }
    return false;
}

inline bool point_on_any_facet(const Scene& scene, const Vec3& p, double tol = 1e-9) {
    for (const auto& facet : scene.facets)
        if (std::abs(facet.plane().signed_distance(p)) < tol && facet.contains_projected(p, tol))
            return true;
    return false;
}

inline std::complex<double> phase_factor(double length_m, double wavelength_m) {
    const double phi = -2.0 * kPi * length_m / wavelength_m;
    return {std::cos(phi), std::sin(phi)};
}

inline double incidence_angle(const Vec3& dir_unit, const Vec3& normal_unit) {
    const double c = std::clamp(std::abs(dot(dir_unit, normal_unit)), 0.0, 1.0);
    return std::acos(c);
}

// Recursively extends the facet sequence of an image chain, emitting one
// candidate path per sequence whose specular points and visibility checks
// pass. `images[k]` is tx mirrored across the first k facets.
inline void emit_reflections(const Scene& scene, const Vec3& tx, const Vec3& rx,
                             const TraceConfig& cfg, std::vector<int>& seq,
                             std::vector<Vec3>& images, std::vector<RayPath>& out) {
    const int order = static_cast<int>(seq.size());
    if (order > 0) {
        // Walk backward from rx through the mirrored sources to recover the
        // actual specular points.
        std::vector<Vec3> points(static_cast<std::size_t>(order));
        Vec3 next = rx;
        bool valid = true;
        for (int k = order - 1; k >= 0 && valid; --k) {
            const Facet& facet = scene.facets[static_cast<std::size_t>(seq[static_cast<std::size_t>(k)])];
            double t;
            if (!segment_plane_param(facet.plane(), next, images[static_cast<std::size_t>(k + 1)], t) ||
                t <= 1e-12 || t >= 1.0 - 1e-12) {
                valid = false;
                break;
            }
            const Vec3 p = next + t * (images[static_cast<std::size_t>(k + 1)] - next);
            if (!facet.contains_projected(p, 1e-9)) {
                valid = false;
                break;
            }
            points[static_cast<std::size_t>(k)] = p;
            next = p;
        }
        if (valid) {
            std::vector<Vec3> chain;
            chain.push_back(tx);
            chain.insert(chain.end(), points.begin(), points.end());
            chain.push_back(rx);
            std::complex<double> refl_product{1.0, 0.0};
            for (int k = 0; k < order && valid; ++k) {
                const Vec3 seg = chain[static_cast<std::size_t>(k + 1)] - chain[static_cast<std::size_t>(k)];
                const double seg_len = norm(seg);
                if (seg_len < 1e-12) {
                    valid = false;
                    break;
                }
                if (segment_blocked(scene, chain[static_cast<std::size_t>(k)],
                                    chain[static_cast<std::size_t>(k + 1)])) {
                    valid = false;
                    break;
                }
                const Facet& facet = scene.facets[static_cast<std::size_t>(seq[static_cast<std::size_t>(k)])];
                const double angle = incidence_angle(seg / seg_len, facet.plane().normal);
                refl_product *= reflection_coefficient(facet.material(),
                                                       std::min(angle, kPi / 2.0 - 1e-12),
                                                       cfg.polarization, cfg.carrier_frequency_hz);
            }
            if (valid && segment_blocked(scene, chain[static_cast<std::size_t>(order)], rx)) valid = false;
            if (valid) {
                // Unfolded length equals the image-to-receiver distance.
                const double length = distance(images[static_cast<std::size_t>(order)], rx);
                RayPath path;
                path.kind = PathKind::Reflected;
                path.reflection_order = order;
                path.interaction_points = points;
                path.length_m = length;
                path.gain = friis_gain(length, cfg.carrier_frequency_hz) * refl_product *
                            phase_factor(length, cfg.wavelength_m());
                out.push_back(std::move(path));
            }
        }
    }
    if (order >= cfg.max_reflections) return;
    for (int f = 0; f < static_cast<int>(scene.facets.size()); ++f) {
        if (order > 0 && seq.back() == f) continue;
        seq.push_back(f);
        images.push_back(mirror_across(scene.facets[static_cast<std::size_t>(f)].plane(),
                                       images.back()));
        emit_reflections(scene, tx, rx, cfg, seq, images, out);
        images.pop_back();
        seq.pop_back();
    }
}

// Point on segment [a,b] minimizing |tx-p| + |p-rx| (golden-section on a
// convex objective).
inline Vec3 shortest_bend_point(const Vec3& a, const Vec3& b, const Vec3& tx, const Vec3& rx) {
    auto f = [&](double s) {
        const Vec3 p = a + s * (b - a);
        return distance(tx, p) + distance(p, rx);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) <= f(m2))
            hi = m2;
        else
            lo = m1;
    }
    return a + 0.5 * (lo + hi) * (b - a);
}

inline double point_line_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 d = b - a;
    const double len = norm(d);
    if (len < 1e-15) return distance(p, a);
    return norm(cross(p - a, d)) / len;
}

// A facet edge is an open (diffracting) knife edge unless it is embedded in
// the interior of another facet's surface: a partition standing on a floor
// must not leak rays under its bottom edge, and a wall joint flush against a
// larger panel is a closed wedge. Shared boundary edges (outside corners)
// stay diffracting.
inline bool edge_is_open(const Scene& scene, const Facet& owner, const Vec3& a, const Vec3& b,
                         double tol = 1e-9) {
    const Vec3 mid = 0.5 * (a + b);
    for (const auto& facet : scene.facets) {
        if (&facet == &owner) continue;
        if (std::abs(facet.plane().signed_distance(mid)) > tol) continue;
        if (!facet.contains_projected(mid, tol)) continue;
        if (polygon_boundary_distance(facet.vertices(), facet.plane().normal, mid) > tol)
            return false;  // strictly interior to another surface
    }
    return true;
}

inline void emit_diffractions(const Scene& scene, const Vec3& tx, const Vec3& rx,
                              const TraceConfig& cfg, std::vector<RayPath>& out) {
    // Unique edges; an edge shared by two facets diffracts once.
    using EdgeKey = std::tuple<double, double, double, double, double, double>;
    auto key_of = [](const Vec3& a, const Vec3& b) {
        const auto ta = std::tuple{a.x, a.y, a.z};
        const auto tb = std::tuple{b.x, b.y, b.z};
        const auto& lo = ta < tb ? ta : tb;
        const auto& hi = ta < tb ? tb : ta;
        return EdgeKey{std::get<0>(lo), std::get<1>(lo), std::get<2>(lo),
                       std::get<0>(hi), std::get<1>(hi), std::get<2>(hi)};
    };
    std::set<EdgeKey> seen;
    const double lambda = cfg.wavelength_m();

    for (const auto& facet : scene.facets) {
        const auto& verts = facet.vertices();
        for (std::size_t i = 0, j = verts.size() - 1; i < verts.size(); j = i++) {
            if (!seen.insert(key_of(verts[j], verts[i])).second) continue;
            if (!edge_is_open(scene, facet, verts[j], verts[i])) continue;
            const Vec3 edge_pt = shortest_bend_point(verts[j], verts[i], tx, rx);
            const double d1 = distance(tx, edge_pt);
            const double d2 = distance(edge_pt, rx);
            if (d1 < 1e-9 || d2 < 1e-9) continue;
            if (segment_blocked(scene, tx, edge_pt) || segment_blocked(scene, edge_pt, rx))
                continue;
            const double h = point_line_distance(edge_pt, tx, rx);
            const double v = h * std::sqrt(2.0 / lambda * (1.0 / d1 + 1.0 / d2));
            const double loss_db = knife_edge_loss_db(v);
            const double length = d1 + d2;
            RayPath path;
            path.kind = PathKind::Diffracted;
            path.interaction_points = {edge_pt};
            path.length_m = length;
            path.gain = friis_gain(length, cfg.carrier_frequency_hz) *
                        std::pow(10.0, -loss_db / 20.0) * phase_factor(length, lambda);
            out.push_back(std::move(path));
        }
    }
}

inline bool path_order_less(const RayPath& a, const RayPath& b) {
    auto rank = [](const RayPath& p) {
        return std::tuple{static_cast<int>(p.kind), p.reflection_order, p.length_m};
    };
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    auto pts = [](const RayPath& p) {
        std::vector<double> flat;
        for (const auto& q : p.interaction_points) {
            flat.push_back(q.x);
            flat.push_back(q.y);
            flat.push_back(q.z);
        }
        return flat;
    };
    return pts(a) < pts(b);
}

}  // namespace detail

// Enumerates LoS, image-method reflections and single knife-edge diffraction
// paths between tx and rx. Output order is deterministic: by kind, then
// reflection order, then length.
inline std::vector<RayPath> trace_paths(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                        const TraceConfig& cfg) {
    cfg.validate();
    if (distance(tx, rx) < 1e-12) throw ConfigError("tx and rx coincide");
    if (detail::point_on_any_facet(scene, tx))
        throw ConfigError("tx lies on a facet plane within 1e-9 m");
    if (detail::point_on_any_facet(scene, rx))
        throw ConfigError("rx lies on a facet plane within 1e-9 m");

    std::vector<RayPath> paths;

    const bool los_clear = !detail::segment_blocked(scene, tx, rx);
    if (los_clear) {
        RayPath los;
        los.kind = PathKind::LineOfSight;
        los.length_m = distance(tx, rx);
        los.gain = friis_gain(los.length_m, cfg.carrier_frequency_hz) *
                   detail::phase_factor(los.length_m, cfg.wavelength_m());
        paths.push_back(std::move(los));
    }

    if (cfg.max_reflections > 0 && !scene.facets.empty()) {
        std::vector<int> seq;
        std::vector<Vec3> images{tx};
        detail::emit_reflections(scene, tx, rx, cfg, seq, images, paths);
    }

    if (cfg.max_diffraction_order >= 1 && !los_clear)
        detail::emit_diffractions(scene, tx, rx, cfg, paths);

    std::sort(paths.begin(), paths.end(), detail::path_order_less);
    return paths;
}

// Combines per-path complex gains into a path loss in dB. An empty path list
// yields +infinity (total blockage).
inline double path_loss_db(const std::vector<RayPath>& paths, const TraceConfig& cfg) {
    if (paths.empty()) return std::numeric_limits<double>::infinity();
    if (cfg.combine_mode == CombineMode::Coherent) {
        std::complex<double> sum{0.0, 0.0};
        for (const auto& p : paths) sum += p.gain;
        const double mag = std::abs(sum);
        if (mag <= 0.0) return std::numeric_limits<double>::infinity();
        return -20.0 * std::log10(mag);
    }
    double power = 0.0;
    for (const auto& p : paths) power += std::norm(p.gain);
    if (power <= 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(power);
}

struct ChannelEntry {
    int tx_index = 0;
    int rx_index = 0;
    std::vector<RayPath> paths;
    double path_loss_db = std::numeric_limits<double>::infinity();
};

struct ChannelMatrix {
    int tx_count = 0;
    int rx_count = 0;
    TraceConfig config;
    std::vector<ChannelEntry> entries;  // row-major, tx-major

    const ChannelEntry& at(int tx, int rx) const {
        return entries[static_cast<std::size_t>(tx) * static_cast<std::size_t>(rx_count) +
                       static_cast<std::size_t>(rx)];
    }
};

inline ChannelMatrix build_channel_matrix(const Scene& scene, const std::vector<Vec3>& tx_points,
                                          const std::vector<Vec3>& rx_points,
                                          const TraceConfig& cfg, unsigned n_threads = 0) {
    cfg.validate();
    if (tx_points.empty() || rx_points.empty())
        throw ConfigError("channel matrix needs non-empty tx and rx point lists");

    ChannelMatrix matrix;
    matrix.tx_count = static_cast<int>(tx_points.size());
    matrix.rx_count = static_cast<int>(rx_points.size());
    matrix.config = cfg;
    matrix.entries.resize(tx_points.size() * rx_points.size());

    const std::size_t total = matrix.entries.size();
    std::vector<std::string> errors(total);

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const int i = static_cast<int>(idx / rx_points.size());
            const int j = static_cast<int>(idx % rx_points.size());
            ChannelEntry& entry = matrix.entries[idx];
            entry.tx_index = i;
            entry.rx_index = j;
            try {
                entry.paths = trace_paths(scene, tx_points[static_cast<std::size_t>(i)],
                                          rx_points[static_cast<std::size_t>(j)], cfg);
                entry.path_loss_db = path_loss_db(entry.paths, cfg);
            } catch (const std::exception& e) {
                errors[idx] = e.what();
            }
        }
    };

    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(total));
    if (n_threads <= 1) {
        work(0, total);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (total + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(total, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t idx = 0; idx < total; ++idx)
        if (!errors[idx].empty())
            throw ConfigError("pair (" + std::to_string(idx / rx_points.size()) + ", " +
                              std::to_string(idx % rx_points.size()) + "): " + errors[idx]);
    return matrix;
}

// CSV export: tx_index,rx_index,path_loss_db,n_paths with +infinity written
// as the literal `inf`.
inline void export_channel_csv(const ChannelMatrix& matrix, std::ostream& out) {
    out << "tx_index,rx_index,path_loss_db,n_paths\n";
    char buf[64];
    for (const auto& e : matrix.entries) {
        if (std::isinf(e.path_loss_db))
            std::snprintf(buf, sizeof(buf), "inf");
        else
            std::snprintf(buf, sizeof(buf), "%.9g", e.path_loss_db);
        out << e.tx_index << "," << e.rx_index << "," << buf << "," << e.paths.size() << "\n";
    }
}

}  // namespace ranplan
