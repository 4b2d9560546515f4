#ifndef LTSWAVE_MESH_HPP
#define LTSWAVE_MESH_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace ltswave {

struct Point {
    double x = 0.0;
    double y = 0.0; // unused in 1D
};

/// A mesh element: segment (1D) or triangle (2D, counter-clockwise).
/// region is 0 for coarse elements and 1 for elements advanced with the
/// local (fine) time step.
struct Simplex {
    std::array<std::size_t, 3> v{0, 0, 0}; // v[2] unused in 1D
    int region = 0;
};

/// A boundary facet: a point (1D) or an edge (2D) with a boundary tag.
struct Facet {
    std::array<std::size_t, 2> v{0, 0}; // v[1] unused in 1D
    int tag = 0;
};

/// Shape-regularity and grading summary.
///   gamma: 1D - max diameter ratio of vertex-adjacent elements;
///          2D - max (element diameter / inscribed-ball diameter).
///   c_qu:  h_max / h_min (global grading constant).
struct MeshQuality {
    double gamma = 1.0;
    double c_qu = 1.0;
    double h_max = 0.0;
    double h_min = 0.0;
};

/// Conforming simplicial mesh (intervals in 1D, triangles in 2D).
struct Mesh {
    int dim = 1;
    std::vector<Point> points;
    std::vector<Simplex> elements;
    std::vector<Facet> boundary_facets;

    std::size_t vertices_per_elem() const { return static_cast<std::size_t>(dim) + 1; }
    double element_volume(std::size_t e) const;   // length / area
    double element_diameter(std::size_t e) const; // longest edge
    Point element_centroid(std::size_t e) const;

    /// Consistency check: index ranges, positive volumes, conformity
    /// (every interior facet shared by exactly two elements) and an exact
    /// match between the stored boundary facets and the topological
    /// boundary.  Throws AssemblyFailure on violation.
    void validate() const;
};

/// Uniform partition of [a, b] into n segments.
Mesh build_uniform_interval(std::size_t n, double a = 0.0, double b = 1.0);

/// Unit square triangulated by congruent right triangles; n cells per side,
/// cell diagonals alternating in a criss-cross pattern.
Mesh build_unit_square(std::size_t n);

/// L-shaped domain (unit square minus the upper-right quadrant) with
/// re-entrant corner at (0.5, 0.5), triangulated by congruent right
/// triangles on square cells of side h_init.  Diagonals alternate so that
/// exactly six triangles meet at the re-entrant corner.  h_init must divide
/// the arm length 0.5.
Mesh build_lshape_mesh(double h_init);

/// Longest-edge bisection of the given elements, with recursive closure so
/// the mesh stays conforming.  Boundary facets crossing split edges are
/// subdivided with inherited tags; children inherit the parent region.
void bisect_elements(Mesh& mesh, std::vector<std::size_t> seeds);

/// Two-stage corner refinement: bisect the elements incident to the corner
/// vertex, then bisect all elements that still have a vertex at the corner.
/// The corner must be an existing mesh vertex.
void refine_corner(Mesh& mesh, double cx, double cy);

/// Uniform red refinement: every segment is halved / every triangle is
/// split into four similar children.
Mesh refine_uniform(const Mesh& mesh);

/// Tag every element with diameter <= threshold (up to 1e-9 relative slack)
/// as fine, then grow the fine set by `overlap_layers` rings of
/// facet-adjacent neighbors.  Returns the number of fine elements.
/// threshold must lie in (0, h_max].
std::size_t partition_fine(Mesh& mesh, double size_threshold, int overlap_layers);

/// Default partition threshold: h_max / sqrt(2), i.e. one longest-edge
/// bisection level below the coarsest elements.  On a corner-refined mesh
/// this tags exactly the refined patch as fine; on a uniform mesh nothing
/// is tagged.
double default_fine_threshold(const Mesh& mesh);

/// Tag every element whose centroid x-coordinate lies in [x0, x1] as fine
/// (band/strip experiments on uniform meshes).  Returns the fine count.
std::size_t tag_fine_band(Mesh& mesh, double x0, double x1);

MeshQuality quality(const Mesh& mesh);

/// Plain-text mesh interchange: header "dim npoints nelems nfacets", then
/// point coordinates, element vertex lists with region tag, facet vertex
/// lists with boundary tag.  Round-trips doubles exactly.
void write_mesh_text(const Mesh& mesh, const std::string& path);
Mesh read_mesh_text(const std::string& path);

} // namespace ltswave

#endif
