#include "ltswave/mesh.hpp"

#include "ltswave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace ltswave {

namespace {

double dist(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

using EdgeKey = std::pair<std::size_t, std::size_t>;

EdgeKey edge_key(std::size_t a, std::size_t b) {
    return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Map from every element edge to the (at most two) incident elements.
std::map<EdgeKey, std::vector<std::size_t>> edge_incidence(const Mesh& m) {
    std::map<EdgeKey, std::vector<std::size_t>> inc;
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        const Simplex& s = m.elements[e];
        if (m.dim == 1) {
            inc[edge_key(s.v[0], s.v[1])].push_back(e);
        } else {
            inc[edge_key(s.v[0], s.v[1])].push_back(e);
            inc[edge_key(s.v[1], s.v[2])].push_back(e);
            inc[edge_key(s.v[2], s.v[0])].push_back(e);
        }
    }
    return inc;
}

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

} // namespace

double Mesh::element_volume(std::size_t e) const {
    const Simplex& s = elements[e];
    if (dim == 1)
        return std::abs(points[s.v[1]].x - points[s.v[0]].x);
    return std::abs(signed_area(points[s.v[0]], points[s.v[1]], points[s.v[2]]));
}

double Mesh::element_diameter(std::size_t e) const {
    const Simplex& s = elements[e];
    if (dim == 1)
        return std::abs(points[s.v[1]].x - points[s.v[0]].x);
    const double d01 = dist(points[s.v[0]], points[s.v[1]]);
    const double d12 = dist(points[s.v[1]], points[s.v[2]]);
    const double d20 = dist(points[s.v[2]], points[s.v[0]]);
    return std::max({d01, d12, d20});
}

Point Mesh::element_centroid(std::size_t e) const {
    const Simplex& s = elements[e];
    Point c;
    const std::size_t nv = vertices_per_elem();
    for (std::size_t k = 0; k < nv; ++k) {
        c.x += points[s.v[k]].x;
        c.y += points[s.v[k]].y;
    }
    c.x /= double(nv);
    c.y /= double(nv);
    return c;
}

void Mesh::validate() const {
    if (dim != 1 && dim != 2)
        throw AssemblyFailure("mesh validate: dim must be 1 or 2");
    const std::size_t nv = vertices_per_elem();
    for (const Simplex& s : elements)
        for (std::size_t k = 0; k < nv; ++k)
            if (s.v[k] >= points.size())
                throw AssemblyFailure("mesh validate: element vertex out of range");
    for (const Facet& f : boundary_facets)
        for (std::size_t k = 0; k < static_cast<std::size_t>(dim); ++k)
            if (f.v[k] >= points.size())
                throw AssemblyFailure("mesh validate: facet vertex out of range");

    for (std::size_t e = 0; e < elements.size(); ++e) {
        if (dim == 2) {
            const Simplex& s = elements[e];
            if (signed_area(points[s.v[0]], points[s.v[1]], points[s.v[2]]) <= 0.0)
                throw AssemblyFailure("mesh validate: non-positive element orientation");
        } else if (element_volume(e) <= 0.0) {
            throw AssemblyFailure("mesh validate: degenerate segment");
        }
    }

    if (dim == 1) {
        // boundary vertices = vertices with exactly one incident element
        std::map<std::size_t, int> count;
        for (const Simplex& s : elements) {
            ++count[s.v[0]];
            ++count[s.v[1]];
        }
        std::set<std::size_t> boundary;
        for (auto& [v, c] : count) {
            if (c > 2)
                throw AssemblyFailure("mesh validate: 1D vertex with >2 elements");
            if (c == 1)
                boundary.insert(v);
        }
        std::set<std::size_t> listed;
        for (const Facet& f : boundary_facets)
            if (!listed.insert(f.v[0]).second)
                throw AssemblyFailure("mesh validate: duplicate boundary facet");
        if (listed != boundary)
            throw AssemblyFailure("mesh validate: boundary facets do not match boundary");
        return;
    }

    auto inc = edge_incidence(*this);
    std::set<EdgeKey> boundary;
    for (auto& [k, elems] : inc) {
        if (elems.size() > 2)
            throw AssemblyFailure("mesh validate: edge shared by >2 elements");
        if (elems.size() == 1)
            boundary.insert(k);
    }
    std::set<EdgeKey> listed;
    for (const Facet& f : boundary_facets)
        if (!listed.insert(edge_key(f.v[0], f.v[1])).second)
            throw AssemblyFailure("mesh validate: duplicate boundary facet");
    if (listed != boundary)
        throw AssemblyFailure("mesh validate: boundary facets do not match boundary");
}

Mesh build_uniform_interval(std::size_t n, double a, double b) {
    if (n == 0)
        throw InvalidArgument("build_uniform_interval: need at least one element");
    if (!(b > a))
        throw InvalidArgument("build_uniform_interval: requires b > a");
    Mesh m;
    m.dim = 1;
    m.points.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        m.points[i] = {a + (b - a) * double(i) / double(n), 0.0};
    m.elements.resize(n);
    for (std::size_t e = 0; e < n; ++e)
        m.elements[e].v = {e, e + 1, 0};
    m.boundary_facets = {{{0, 0}, 0}, {{n, 0}, 0}};
    return m;
}

namespace {

/// Structured triangulation of cells on an n x n grid over [0,1]^2, keeping
/// only cells accepted by `keep`.  Cell (i,j) is split along its
/// lower-left->upper-right diagonal when i+j is even, along the other
/// diagonal otherwise, so six triangles meet at every interior vertex whose
/// cell parities alternate around it.
Mesh build_structured(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& keep) {
    Mesh m;
    m.dim = 2;
    const double h = 1.0 / double(n);
    std::vector<std::size_t> pid((n + 1) * (n + 1), SIZE_MAX);
    auto point_id = [&](std::size_t i, std::size_t j) {
        std::size_t& id = pid[j * (n + 1) + i];
        if (id == SIZE_MAX) {
            id = m.points.size();
            m.points.push_back({double(i) * h, double(j) * h});
        }
        return id;
    };
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!keep(i, j))
                continue;
            const std::size_t v00 = point_id(i, j);
            const std::size_t v10 = point_id(i + 1, j);
            const std::size_t v01 = point_id(i, j + 1);
            const std::size_t v11 = point_id(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                m.elements.push_back({{v00, v10, v11}, 0});
                m.elements.push_back({{v00, v11, v01}, 0});
            } else {
                m.elements.push_back({{v00, v10, v01}, 0});
                m.elements.push_back({{v10, v11, v01}, 0});
            }
        }
    }
    // derive boundary facets (edges incident to exactly one element)
    auto inc = edge_incidence(m);
    for (auto& [k, elems] : inc)
        if (elems.size() == 1)
            m.boundary_facets.push_back({{k.first, k.second}, 0});
    return m;
}

} // namespace

Mesh build_unit_square(std::size_t n) {
    if (n == 0)
        throw InvalidArgument("build_unit_square: need at least one cell per side");
    return build_structured(n, [](std::size_t, std::size_t) { return true; });
}

Mesh build_lshape_mesh(double h_init) {
    if (!(h_init > 0.0))
        throw InvalidArgument("build_lshape_mesh: h_init must be positive");
    const double kd = 0.5 / h_init;
    const auto k = static_cast<std::size_t>(std::llround(kd));
    if (k == 0 || std::abs(kd - double(k)) > 1e-9 * kd)
        throw InvalidArgument("build_lshape_mesh: h_init must divide the arm length 0.5");
    const std::size_t n = 2 * k;
    return build_structured(n, [k](std::size_t i, std::size_t j) { return i < k || j < k; });
}

namespace {

/// Longest edge of element e as local vertex indices (li, li+1 cyclic);
/// ties broken by the smaller sorted global vertex pair so the choice is
/// deterministic.
std::size_t longest_edge_local(const Mesh& m, std::size_t e) {
    const Simplex& s = m.elements[e];
    std::size_t best = 0;
    double best_len = -1.0;
    EdgeKey best_key{0, 0};
    for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t a = s.v[l];
        const std::size_t b = s.v[(l + 1) % 3];
        const double len = dist(m.points[a], m.points[b]);
        const EdgeKey key = edge_key(a, b);
        if (len > best_len * (1.0 + 1e-12)) {
            best = l;
            best_len = len;
            best_key = key;
        } else if (len >= best_len * (1.0 - 1e-12) && key < best_key) {
            best = l;
            best_key = key;
        }
    }
    return best;
}

} // namespace

void bisect_elements(Mesh& mesh, std::vector<std::size_t> seeds) {
    for (std::size_t e : seeds)
        if (e >= mesh.elements.size())
            throw InvalidArgument("bisect_elements: element index out of range");

    if (mesh.dim == 1) {
        std::sort(seeds.begin(), seeds.end());
        seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
        std::vector<Simplex> out;
        out.reserve(mesh.elements.size() + seeds.size());
        std::size_t si = 0;
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            if (si < seeds.size() && seeds[si] == e) {
                ++si;
                const Simplex& s = mesh.elements[e];
                const std::size_t mid = mesh.points.size();
                mesh.points.push_back(
                    {0.5 * (mesh.points[s.v[0]].x + mesh.points[s.v[1]].x), 0.0});
                out.push_back({{s.v[0], mid, 0}, s.region});
                out.push_back({{mid, s.v[1], 0}, s.region});
            } else {
                out.push_back(mesh.elements[e]);
            }
        }
        mesh.elements = std::move(out);
        return;
    }

    std::map<EdgeKey, std::size_t> split_mid; // edge -> midpoint vertex
    std::vector<char> dead(mesh.elements.size(), 0);

    auto midpoint_of = [&](const EdgeKey& k) {
        auto it = split_mid.find(k);
        if (it != split_mid.end())
            return it->second;
        const std::size_t id = mesh.points.size();
        mesh.points.push_back({0.5 * (mesh.points[k.first].x + mesh.points[k.second].x),
                               0.5 * (mesh.points[k.first].y + mesh.points[k.second].y)});
        split_mid.emplace(k, id);
        return id;
    };

    auto bisect_one = [&](std::size_t e) {
        const Simplex s = mesh.elements[e];
        const std::size_t l = longest_edge_local(mesh, e);
        const std::size_t a = s.v[l];
        const std::size_t b = s.v[(l + 1) % 3];
        const std::size_t c = s.v[(l + 2) % 3];
        const std::size_t mid = midpoint_of(edge_key(a, b));
        dead[e] = 1;
        mesh.elements.push_back({{a, mid, c}, s.region});
        mesh.elements.push_back({{mid, b, c}, s.region});
        dead.push_back(0);
        dead.push_back(0);
    };

    for (std::size_t e : seeds)
        if (!dead[e])
            bisect_one(e);

    // Rivara closure: bisect (at its own longest edge) every element that
    // has a hanging node on one of its edges, until the mesh is conforming.
    for (int round = 0; round < 64; ++round) {
        std::vector<std::size_t> work;
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            if (dead[e])
                continue;
            const Simplex& s = mesh.elements[e];
            for (std::size_t l = 0; l < 3; ++l) {
                if (split_mid.count(edge_key(s.v[l], s.v[(l + 1) % 3]))) {
                    work.push_back(e);
                    break;
                }
            }
        }
        if (work.empty())
            break;
        if (round == 63)
            throw AssemblyFailure("bisect_elements: closure did not terminate");
        for (std::size_t e : work)
            if (!dead[e])
                bisect_one(e);
    }

    // compact element list
    std::vector<Simplex> alive;
    alive.reserve(mesh.elements.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        if (!dead[e])
            alive.push_back(mesh.elements[e]);
    mesh.elements = std::move(alive);

    // expand boundary facets across split edges (recursively: a child edge
    // may itself have been split in a later round)
    std::vector<Facet> facets;
    facets.reserve(mesh.boundary_facets.size());
    auto expand = [&](auto&& self, std::size_t a, std::size_t b, int tag) -> void {
        auto it = split_mid.find(edge_key(a, b));
        if (it == split_mid.end()) {
            facets.push_back({{a, b}, tag});
            return;
        }
        self(self, a, it->second, tag);
        self(self, it->second, b, tag);
    };
    for (const Facet& f : mesh.boundary_facets)
        expand(expand, f.v[0], f.v[1], f.tag);
    mesh.boundary_facets = std::move(facets);
}

void refine_corner(Mesh& mesh, double cx, double cy) {
    if (mesh.dim != 2)
        throw InvalidArgument("refine_corner: requires a 2D mesh");
    std::size_t corner = SIZE_MAX;
    for (std::size_t i = 0; i < mesh.points.size(); ++i) {
        if (std::abs(mesh.points[i].x - cx) < 1e-12 &&
            std::abs(mesh.points[i].y - cy) < 1e-12) {
            corner = i;
            break;
        }
    }
    if (corner == SIZE_MAX)
        throw InvalidArgument("refine_corner: corner is not a mesh vertex");

    auto incident = [&]() {
        std::vector<std::size_t> ids;
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            const Simplex& s = mesh.elements[e];
            if (s.v[0] == corner || s.v[1] == corner || s.v[2] == corner)
                ids.push_back(e);
        }
        return ids;
    };

    bisect_elements(mesh, incident()); // stage 1: elements nearest the corner
    bisect_elements(mesh, incident()); // stage 2: everything still touching it
}

Mesh refine_uniform(const Mesh& mesh) {
    Mesh r;
    r.dim = mesh.dim;
    r.points = mesh.points;
    if (mesh.dim == 1) {
        r.elements.reserve(2 * mesh.elements.size());
        for (const Simplex& s : mesh.elements) {
            const std::size_t mid = r.points.size();
            r.points.push_back({0.5 * (r.points[s.v[0]].x + r.points[s.v[1]].x), 0.0});
            r.elements.push_back({{s.v[0], mid, 0}, s.region});
            r.elements.push_back({{mid, s.v[1], 0}, s.region});
        }
        r.boundary_facets = mesh.boundary_facets;
        return r;
    }

    std::map<EdgeKey, std::size_t> mid;
    auto midpoint_of = [&](std::size_t a, std::size_t b) {
        const EdgeKey k = edge_key(a, b);
        auto it = mid.find(k);
        if (it != mid.end())
            return it->second;
        const std::size_t id = r.points.size();
        r.points.push_back({0.5 * (r.points[a].x + r.points[b].x),
                            0.5 * (r.points[a].y + r.points[b].y)});
        mid.emplace(k, id);
        return id;
    };

    r.elements.reserve(4 * mesh.elements.size());
    for (const Simplex& s : mesh.elements) {
        const std::size_t m01 = midpoint_of(s.v[0], s.v[1]);
        const std::size_t m12 = midpoint_of(s.v[1], s.v[2]);
        const std::size_t m20 = midpoint_of(s.v[2], s.v[0]);
        r.elements.push_back({{s.v[0], m01, m20}, s.region});
        r.elements.push_back({{m01, s.v[1], m12}, s.region});
        r.elements.push_back({{m20, m12, s.v[2]}, s.region});
        r.elements.push_back({{m01, m12, m20}, s.region});
    }
    r.boundary_facets.reserve(2 * mesh.boundary_facets.size());
    for (const Facet& f : mesh.boundary_facets) {
        const std::size_t m01 = midpoint_of(f.v[0], f.v[1]);
        r.boundary_facets.push_back({{f.v[0], m01}, f.tag});
        r.boundary_facets.push_back({{m01, f.v[1]}, f.tag});
    }
    return r;
}

double default_fine_threshold(const Mesh& mesh) {
    return quality(mesh).h_max / std::sqrt(2.0);
}

std::size_t partition_fine(Mesh& mesh, double size_threshold, int overlap_layers) {
    if (mesh.elements.empty())
        throw InvalidArgument("partition_fine: empty mesh");
    if (overlap_layers < 0)
        throw InvalidArgument("partition_fine: overlap_layers must be >= 0");
    const MeshQuality q = quality(mesh);
    if (!(size_threshold > 0.0) || size_threshold > q.h_max * (1.0 + 1e-9))
        throw InvalidArgument("partition_fine: threshold outside (0, h_max]");

    std::vector<char> fine(mesh.elements.size(), 0);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        fine[e] = mesh.element_diameter(e) <= size_threshold * (1.0 + 1e-9);

    // grow by facet-adjacent rings (shared edge in 2D, shared vertex in 1D)
    if (overlap_layers > 0) {
        std::map<EdgeKey, std::vector<std::size_t>> inc;
        if (mesh.dim == 2) {
            inc = edge_incidence(mesh);
        } else {
            for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
                inc[{mesh.elements[e].v[0], mesh.elements[e].v[0]}].push_back(e);
                inc[{mesh.elements[e].v[1], mesh.elements[e].v[1]}].push_back(e);
            }
        }
        for (int layer = 0; layer < overlap_layers; ++layer) {
            std::vector<char> next = fine;
            for (auto& [k, elems] : inc) {
                const bool touches_fine =
                    std::any_of(elems.begin(), elems.end(),
                                [&](std::size_t e) { return fine[e]; });
                if (touches_fine)
                    for (std::size_t e : elems)
                        next[e] = 1;
            }
            fine = std::move(next);
        }
    }

    std::size_t count = 0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        mesh.elements[e].region = fine[e] ? 1 : 0;
        count += fine[e];
    }
    return count;
}

std::size_t tag_fine_band(Mesh& mesh, double x0, double x1) {
    if (!(x0 < x1))
        throw InvalidArgument("tag_fine_band: requires x0 < x1");
    std::size_t count = 0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double cx = mesh.element_centroid(e).x;
        const bool fine = (cx >= x0 && cx <= x1);
        mesh.elements[e].region = fine ? 1 : 0;
        count += fine;
    }
    return count;
}

MeshQuality quality(const Mesh& mesh) {
    if (mesh.elements.empty())
        throw InvalidArgument("quality: empty mesh");
    MeshQuality q;
    q.h_max = 0.0;
    q.h_min = std::numeric_limits<double>::max();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double h = mesh.element_diameter(e);
        q.h_max = std::max(q.h_max, h);
        q.h_min = std::min(q.h_min, h);
    }
    q.c_qu = q.h_max / q.h_min;

    if (mesh.dim == 1) {
        std::map<std::size_t, std::vector<std::size_t>> vert_inc;
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            vert_inc[mesh.elements[e].v[0]].push_back(e);
            vert_inc[mesh.elements[e].v[1]].push_back(e);
        }
        double g = 1.0;
        for (auto& [v, elems] : vert_inc)
            for (std::size_t a : elems)
                for (std::size_t b : elems)
                    g = std::max(g, mesh.element_diameter(a) / mesh.element_diameter(b));
        q.gamma = g;
        return q;
    }

    double g = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const Simplex& s = mesh.elements[e];
        const double a = dist(mesh.points[s.v[0]], mesh.points[s.v[1]]);
        const double b = dist(mesh.points[s.v[1]], mesh.points[s.v[2]]);
        const double c = dist(mesh.points[s.v[2]], mesh.points[s.v[0]]);
        const double area = mesh.element_volume(e);
        const double rho = 4.0 * area / (a + b + c); // inscribed-ball diameter
        g = std::max(g, std::max({a, b, c}) / rho);
    }
    q.gamma = g;
    return q;
}

void write_mesh_text(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw InvalidArgument("write_mesh_text: cannot open " + path);
    out << mesh.dim << ' ' << mesh.points.size() << ' ' << mesh.elements.size()
        << ' ' << mesh.boundary_facets.size() << '\n';
    char buf[64];
    for (const Point& p : mesh.points) {
        std::snprintf(buf, sizeof buf, "%.17g", p.x);
        out << buf;
        if (mesh.dim == 2) {
            std::snprintf(buf, sizeof buf, " %.17g", p.y);
            out << buf;
        }
        out << '\n';
    }
    const std::size_t nv = mesh.vertices_per_elem();
    for (const Simplex& s : mesh.elements) {
        for (std::size_t k = 0; k < nv; ++k)
            out << s.v[k] << ' ';
        out << s.region << '\n';
    }
    for (const Facet& f : mesh.boundary_facets) {
        for (std::size_t k = 0; k < static_cast<std::size_t>(mesh.dim); ++k)
            out << f.v[k] << ' ';
        out << f.tag << '\n';
    }
    if (!out)
        throw InvalidArgument("write_mesh_text: write failed for " + path);
}

Mesh read_mesh_text(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("read_mesh_text: cannot open " + path);
    Mesh m;
    std::size_t np = 0, ne = 0, nf = 0;
    if (!(in >> m.dim >> np >> ne >> nf))
        throw InvalidArgument("read_mesh_text: malformed header in " + path);
    if (m.dim != 1 && m.dim != 2)
        throw InvalidArgument("read_mesh_text: unsupported dimension");
    m.points.resize(np);
    for (Point& p : m.points) {
        if (!(in >> p.x))
            throw InvalidArgument("read_mesh_text: malformed point record");
        if (m.dim == 2 && !(in >> p.y))
            throw InvalidArgument("read_mesh_text: malformed point record");
    }
    const std::size_t nv = m.vertices_per_elem();
    m.elements.resize(ne);
    for (Simplex& s : m.elements) {
        for (std::size_t k = 0; k < nv; ++k)
            if (!(in >> s.v[k]))
                throw InvalidArgument("read_mesh_text: malformed element record");
        if (!(in >> s.region))
            throw InvalidArgument("read_mesh_text: malformed element record");
    }
    m.boundary_facets.resize(nf);
    for (Facet& f : m.boundary_facets) {
        for (std::size_t k = 0; k < static_cast<std::size_t>(m.dim); ++k)
            if (!(in >> f.v[k]))
                throw InvalidArgument("read_mesh_text: malformed facet record");
        if (!(in >> f.tag))
            throw InvalidArgument("read_mesh_text: malformed facet record");
    }
    return m;
}

} // namespace ltswave
