#include "ltswave/dofmap.hpp"

#include "ltswave/errors.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace ltswave {

DofMap build_dofmap(const Mesh& mesh, int degree,
                    const std::vector<int>& dirichlet_tags) {
    if (degree != 1 && degree != 2)
        throw InvalidArgument("build_dofmap: degree must be 1 or 2");

    DofMap dm;
    dm.dim = mesh.dim;
    dm.degree = degree;
    dm.nodes = mesh.points;

    const std::size_t nv = mesh.vertices_per_elem();
    const std::size_t stride = dm.dofs_per_elem();
    dm.elem_dofs.resize(mesh.elements.size() * stride);

    using EdgeKey = std::pair<std::size_t, std::size_t>;
    std::map<EdgeKey, std::size_t> edge_node; // sorted vertex pair -> node id
    auto edge_dof = [&](std::size_t a, std::size_t b) {
        const EdgeKey k = a < b ? EdgeKey{a, b} : EdgeKey{b, a};
        auto it = edge_node.find(k);
        if (it != edge_node.end())
            return it->second;
        const std::size_t id = dm.nodes.size();
        dm.nodes.push_back({0.5 * (mesh.points[a].x + mesh.points[b].x),
                            0.5 * (mesh.points[a].y + mesh.points[b].y)});
        edge_node.emplace(k, id);
        return id;
    };

    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const Simplex& s = mesh.elements[e];
        std::size_t* d = dm.elem_dofs.data() + e * stride;
        for (std::size_t k = 0; k < nv; ++k)
            d[k] = s.v[k];
        if (degree == 2) {
            if (mesh.dim == 1) {
                d[2] = edge_dof(s.v[0], s.v[1]);
            } else {
                d[3] = edge_dof(s.v[0], s.v[1]);
                d[4] = edge_dof(s.v[1], s.v[2]);
                d[5] = edge_dof(s.v[2], s.v[0]);
            }
        }
    }

    dm.dirichlet_mask.assign(dm.n_dofs(), 0);
    for (const Facet& f : mesh.boundary_facets) {
        if (std::find(dirichlet_tags.begin(), dirichlet_tags.end(), f.tag) ==
            dirichlet_tags.end())
            continue;
        dm.dirichlet_mask[f.v[0]] = 1;
        if (mesh.dim == 2) {
            dm.dirichlet_mask[f.v[1]] = 1;
            if (degree == 2)
                dm.dirichlet_mask[edge_dof(f.v[0], f.v[1])] = 1;
        }
    }
    return dm;
}

std::vector<unsigned char> fine_node_set(const Mesh& mesh, const DofMap& dofmap) {
    std::vector<unsigned char> in_set(dofmap.n_dofs(), 0);
    const std::size_t stride = dofmap.dofs_per_elem();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        if (mesh.elements[e].region == 0)
            continue;
        const std::size_t* d = dofmap.dofs_of(e);
        for (std::size_t k = 0; k < stride; ++k)
            in_set[d[k]] = 1;
    }
    return in_set;
}

} // namespace ltswave
