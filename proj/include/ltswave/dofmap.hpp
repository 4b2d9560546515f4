#ifndef LTSWAVE_DOFMAP_HPP
#define LTSWAVE_DOFMAP_HPP

#include "ltswave/mesh.hpp"

#include <cstddef>
#include <vector>

namespace ltswave {

/// Global numbering of the Lagrange nodal points of S^m on a mesh.
///
/// Degree 1 nodes are the mesh vertices; degree 2 adds one node per edge
/// (1D: the element midpoint).  Element-local orderings:
///   1D m=1: [v0, v1]                     2D m=1: [v0, v1, v2]
///   1D m=2: [v0, v1, mid]                2D m=2: [v0, v1, v2, m01, m12, m20]
struct DofMap {
    int dim = 1;
    int degree = 1;
    std::vector<Point> nodes;                 // coordinates per global dof
    std::vector<std::size_t> elem_dofs;       // flattened, stride dofs_per_elem
    std::vector<unsigned char> dirichlet_mask; // 1 = constrained node

    std::size_t n_dofs() const { return nodes.size(); }
    std::size_t dofs_per_elem() const {
        const std::size_t nv = static_cast<std::size_t>(dim) + 1;
        return degree == 1 ? nv : nv + (dim == 1 ? 1 : 3);
    }
    const std::size_t* dofs_of(std::size_t e) const {
        return elem_dofs.data() + e * dofs_per_elem();
    }
};

/// Build the nodal numbering for degree m ∈ {1, 2}.  Nodes lying on a
/// boundary facet whose tag appears in `dirichlet_tags` are marked in
/// dirichlet_mask (for m = 2 this includes the facet's edge node).
DofMap build_dofmap(const Mesh& mesh, int degree,
                    const std::vector<int>& dirichlet_tags);

/// Mask of nodes belonging to at least one fine-tagged element.
std::vector<unsigned char> fine_node_set(const Mesh& mesh, const DofMap& dofmap);

} // namespace ltswave

#endif
