#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ranplan/errors.hpp"
#include "ranplan/geometry.hpp"

namespace ranplan {

// Electromagnetic surface description of a facet. The default constants are
// the ITU-R P.2040 "wood" model around 3.75 GHz.
struct Material {
    std::string name = "wood";
    double relative_permittivity = 1.99;  // >= 1
    double conductivity_s_m = 0.012;      // >= 0

    void validate() const {
        if (relative_permittivity < 1.0)
            throw ConfigError("material '" + name + "': relative permittivity must be >= 1");
        if (conductivity_s_m < 0.0)
            throw ConfigError("material '" + name + "': conductivity must be >= 0");
    }
};

// A planar polygon with a single material, double-sided and infinitesimally
// thin. Plane data is cached at construction.
class Facet {
  public:
    static constexpr double kCoplanarTolM = 1e-6;

    Facet(std::vector<Vec3> vertices, Material material)
        : vertices_(std::move(vertices)), material_(std::move(material)) {
        if (vertices_.size() < 3) throw ConfigError("degenerate polygon: fewer than 3 vertices");
        // Newell's method gives an area-weighted normal that also works for
        // non-convex polygons.
        Vec3 n{};
        for (std::size_t i = 0, j = vertices_.size() - 1; i < vertices_.size(); j = i++) {
            const Vec3& a = vertices_[j];
            const Vec3& b = vertices_[i];
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
        }
        area_ = 0.5 * norm(n);
        if (area_ <= 0.0) throw ConfigError("degenerate polygon: zero area");
        plane_.normal = normalized(n);
        plane_.offset = dot(plane_.normal, vertices_[0]);
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (std::abs(plane_.signed_distance(vertices_[i])) > kCoplanarTolM)
                throw ConfigError("vertices not coplanar within 1e-6 m (vertex " +
                                  std::to_string(i) + ")");
            bounds_.expand(vertices_[i]);
        }
    }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const Material& material() const { return material_; }
    const Plane& plane() const { return plane_; }
    double area() const { return area_; }
    const Aabb& bounds() const { return bounds_; }

    bool contains_projected(const Vec3& p, double tol = 1e-9) const {
        return point_in_polygon(vertices_, plane_.normal, p, tol);
    }

  private:
    std::vector<Vec3> vertices_;
    Material material_;
    Plane plane_;
    double area_ = 0.0;
    Aabb bounds_;
};

// The digital twin the rays traverse. An empty facet list models free space.
struct Scene {
    std::vector<Facet> facets;
    Aabb bounds;

    void recompute_bounds() {
        bounds = Aabb{};
        for (const auto& f : facets) bounds.expand(f.bounds());
    }
};

struct Diagnostic {
    int facet_index = -1;  // -1 for scene-level findings
    std::string rule;
    std::string detail;
};

inline std::vector<Diagnostic> validate_scene(const Scene& scene) {
    std::vector<Diagnostic> out;
    for (std::size_t i = 0; i < scene.facets.size(); ++i) {
        const Facet& f = scene.facets[i];
        if (f.vertices().size() < 3 || f.area() <= 0.0)
            out.push_back({static_cast<int>(i), "degenerate polygon", "area is zero"});
        for (std::size_t v = 0; v < f.vertices().size(); ++v) {
            if (std::abs(f.plane().signed_distance(f.vertices()[v])) > Facet::kCoplanarTolM) {
                out.push_back({static_cast<int>(i), "non-coplanar vertices",
                               "vertex " + std::to_string(v) + " off plane"});
                break;
            }
        }
        if (!scene.bounds.empty()) {
            bool inside = true;
            for (const auto& v : f.vertices())
                if (!scene.bounds.contains(v, 1e-9)) inside = false;
            if (!inside) out.push_back({static_cast<int>(i), "out of bounds", ""});
        }
        if (f.material().relative_permittivity < 1.0)
            out.push_back({static_cast<int>(i), "invalid material", "permittivity < 1"});
        if (f.material().conductivity_s_m < 0.0)
            out.push_back({static_cast<int>(i), "invalid material", "conductivity < 0"});
    }
    return out;
}

// Rectangular candidate grid. Rows advance along +y, columns along +x, and
// every point sits at `height`.
struct GridSpec {
    Vec3 origin{};
    int rows = 1;
    int cols = 1;
    double row_step_m = 1.0;
    double col_step_m = 1.0;
    double height_m = 0.0;

    void validate() const {
        if (rows < 1 || cols < 1) throw ConfigError("grid must have rows*cols >= 1");
        if (row_step_m <= 0.0 || col_step_m <= 0.0) throw ConfigError("grid steps must be > 0");
    }
};

inline std::vector<Vec3> generate_grid(const GridSpec& spec) {
    spec.validate();
    std::vector<Vec3> points;
    points.reserve(static_cast<std::size_t>(spec.rows) * static_cast<std::size_t>(spec.cols));
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c)
            points.push_back({spec.origin.x + c * spec.col_step_m,
                              spec.origin.y + r * spec.row_step_m, spec.height_m});
    return points;
}

// ---------------------------------------------------------------------------
// Scene text format
//
//   scene v1
//   material <name> <eps_r> <sigma>
//   facet <material> x1 y1 z1 x2 y2 z2 ...
//
// '#' starts a comment; blank lines are ignored.
// ---------------------------------------------------------------------------

inline Scene parse_scene(std::istream& in, const std::string& source_name = "<stream>") {
    Scene scene;
    std::map<std::string, Material> materials;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    int facet_index = 0;

    auto fail = [&](const std::string& msg) {
        throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;

        if (!header_seen) {
            std::string ver;
            if (tok != "scene" || !(ls >> ver) || ver != "v1")
                fail("expected header 'scene v1'");
            header_seen = true;
            continue;
        }

        if (tok == "material") {
            Material m;
            if (!(ls >> m.name >> m.relative_permittivity >> m.conductivity_s_m))
                fail("malformed material line");
            m.validate();
            materials[m.name] = m;
        } else if (tok == "facet") {
            std::string mat_name;
            if (!(ls >> mat_name)) fail("facet line missing material name");
            const auto it = materials.find(mat_name);
            if (it == materials.end()) fail("unknown material '" + mat_name + "'");
            std::vector<Vec3> verts;
            double x, y, z;
            while (ls >> x >> y >> z) verts.push_back({x, y, z});
            if (!ls.eof()) fail("facet line has trailing non-numeric tokens");
            if (verts.size() < 3) fail("facet needs at least 3 vertices");
            try {
                scene.facets.emplace_back(std::move(verts), it->second);
            } catch (const ConfigError& e) {
                fail("facet " + std::to_string(facet_index) + ": " + e.what());
            }
            ++facet_index;
        } else {
            fail("unknown record '" + tok + "'");
        }
    }
    if (!header_seen) {
        line_no = 1;
        fail("missing header 'scene v1'");
    }
    scene.recompute_bounds();
    return scene;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scene file: " + path);
    return parse_scene(in, path);
}

inline std::string serialize_scene(const Scene& scene) {
    std::ostringstream out;
    out << "scene v1\n";
    std::map<std::string, Material> materials;
    for (const auto& f : scene.facets) materials[f.material().name] = f.material();
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& [name, m] : materials)
        out << "material " << name << " " << num(m.relative_permittivity) << " "
            << num(m.conductivity_s_m) << "\n";
    for (const auto& f : scene.facets) {
        out << "facet " << f.material().name;
        for (const auto& v : f.vertices())
            out << " " << num(v.x) << " " << num(v.y) << " " << num(v.z);
        out << "\n";
    }
    return out.str();
}

}  // namespace ranplan
