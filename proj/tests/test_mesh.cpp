#include "ltswave/mesh.hpp"
#include "ltswave/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

using namespace ltswave;

namespace {

std::size_t count_elements_at(const Mesh& m, double x, double y, double tol = 1e-12) {
    std::size_t c = 0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        for (std::size_t k = 0; k <= static_cast<std::size_t>(m.dim); ++k) {
            const Point& pt = m.points[m.elements[e].v[k]];
            if (std::abs(pt.x - x) < tol && std::abs(pt.y - y) < tol) {
                ++c;
                break;
            }
        }
    }
    return c;
}

std::size_t count_fine(const Mesh& m) {
    std::size_t c = 0;
    for (const Simplex& s : m.elements)
        if (s.region == 1)
            ++c;
    return c;
}

} // namespace

TEST_SUITE_BEGIN("mesh");

TEST_CASE("uniform interval") {
    Mesh m = build_uniform_interval(8);
    CHECK(m.dim == 1);
    CHECK(m.points.size() == 9);
    CHECK(m.elements.size() == 8);
    CHECK(m.boundary_facets.size() == 2);
    m.validate();

    double total = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        total += m.element_volume(e);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    MeshQuality q = quality(m);
    CHECK(q.gamma == doctest::Approx(1.0));
    CHECK(q.c_qu == doctest::Approx(1.0));
    CHECK(q.h_max == doctest::Approx(0.125));

    CHECK_THROWS_AS(build_uniform_interval(0), InvalidArgument);
}

TEST_CASE("unit square criss-cross") {
    Mesh m = build_unit_square(4);
    CHECK(m.dim == 2);
    CHECK(m.points.size() == 25);
    CHECK(m.elements.size() == 32);
    CHECK(m.boundary_facets.size() == 16);
    m.validate();

    double total = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        total += m.element_volume(e);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    // right isosceles triangles: diameter/inscribed-ball-diameter = 1 + sqrt(2)
    MeshQuality q = quality(m);
    CHECK(q.gamma == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(q.c_qu == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quality of an equilateral triangle") {
    Mesh m;
    m.dim = 2;
    m.points = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
    m.elements = {{{0, 1, 2}, 0}};
    m.boundary_facets = {{{0, 1}, 0}, {{1, 2}, 0}, {{2, 0}, 0}};
    m.validate();
    CHECK(quality(m).gamma == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("L-shape initial mesh") {
    Mesh m = build_lshape_mesh(0.25);
    CHECK(m.points.size() == 21);
    CHECK(m.elements.size() == 24);
    CHECK(m.boundary_facets.size() == 16);
    m.validate();

    double total = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        total += m.element_volume(e);
    CHECK(total == doctest::Approx(0.75).epsilon(1e-14));

    // the re-entrant corner must be a vertex with exactly six incident elements
    CHECK(count_elements_at(m, 0.5, 0.5) == 6);

    CHECK_THROWS_AS(build_lshape_mesh(0.26), InvalidArgument);
    CHECK_THROWS_AS(build_lshape_mesh(0.0), InvalidArgument);
}

TEST_CASE("two-stage corner refinement reproduces published counts") {
    Mesh m = build_lshape_mesh(0.25);

    refine_corner(m, 0.5, 0.5);
    CHECK(m.elements.size() == 36);
    m.validate();
    CHECK(count_elements_at(m, 0.5, 0.5) == 6);

    refine_corner(m, 0.5, 0.5);
    CHECK(m.elements.size() == 48);
    m.validate();

    MeshQuality q = quality(m);
    // smallest-to-largest diameter ratio 1:4 after two refinements
    CHECK(q.c_qu == doctest::Approx(4.0).epsilon(1e-12));
    // bisection children of right isosceles triangles stay right isosceles
    CHECK(q.gamma == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));

    double total = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        total += m.element_volume(e);
    CHECK(total == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("fine partition selects innermost 30 elements") {
    Mesh m = build_lshape_mesh(0.25);
    refine_corner(m, 0.5, 0.5);
    refine_corner(m, 0.5, 0.5);

    // default threshold: one bisection level below the coarsest elements
    const double thr = default_fine_threshold(m);
    MeshQuality q = quality(m);
    CHECK(thr == doctest::Approx(q.h_max / std::sqrt(2.0)).epsilon(1e-13));

    std::size_t n_fine = partition_fine(m, thr, 0);
    CHECK(n_fine == 30);
    CHECK(count_fine(m) == 30);

    // idempotent
    CHECK(partition_fine(m, thr, 0) == 30);

    // one overlap ring adds exactly the six elements edge-adjacent to the
    // fine region
    CHECK(partition_fine(m, thr, 1) == 36);

    // same selection at a finer base resolution (scale invariance)
    Mesh m2 = build_lshape_mesh(0.125);
    refine_corner(m2, 0.5, 0.5);
    refine_corner(m2, 0.5, 0.5);
    CHECK(partition_fine(m2, default_fine_threshold(m2), 0) == 30);
    CHECK(partition_fine(m2, default_fine_threshold(m2), 1) == 36);

    CHECK_THROWS_AS(partition_fine(m, 0.0, 0), InvalidArgument);
    CHECK_THROWS_AS(partition_fine(m, 10.0, 0), InvalidArgument);
}

TEST_CASE("partition edge cases on a uniform mesh") {
    Mesh m = build_unit_square(4);
    // threshold equal to h tags everything fine
    MeshQuality q = quality(m);
    CHECK(partition_fine(m, q.h_max, 0) == m.elements.size());
    // threshold below every element size tags nothing
    CHECK(partition_fine(m, 0.5 * q.h_min, 0) == 0);
}

TEST_CASE("band tagging for strip experiments") {
    Mesh m = build_uniform_interval(10);
    std::size_t n = tag_fine_band(m, 0.4, 0.6);
    CHECK(n == 2);
    Mesh s = build_unit_square(4);
    CHECK(tag_fine_band(s, 0.25, 0.75) == 16);
}

TEST_CASE("1D local refinement and quality ratio") {
    Mesh m = build_uniform_interval(8);
    bisect_elements(m, {3});
    CHECK(m.elements.size() == 9);
    m.validate();
    MeshQuality q = quality(m);
    CHECK(q.gamma == doctest::Approx(2.0));
    CHECK(q.c_qu == doctest::Approx(2.0));
}

TEST_CASE("bisection closure keeps 2D meshes conforming") {
    Mesh m = build_unit_square(4);
    bisect_elements(m, {0, 7, 12});
    m.validate();
    double total = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        total += m.element_volume(e);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("uniform refinement preserves shape quality") {
    Mesh m = build_lshape_mesh(0.25);
    refine_corner(m, 0.5, 0.5);
    refine_corner(m, 0.5, 0.5);
    const double g0 = quality(m).gamma;

    Mesh r = refine_uniform(m);
    r.validate();
    CHECK(r.elements.size() == 4 * m.elements.size());
    const double g1 = quality(r).gamma;
    CHECK(g1 <= 2.0 * g0);
    CHECK(g1 >= 0.5 * g0);
    // red refinement produces similar children: quality is exactly preserved
    CHECK(g1 == doctest::Approx(g0).epsilon(1e-12));
    CHECK(quality(r).h_max == doctest::Approx(0.5 * quality(m).h_max).epsilon(1e-12));
}

TEST_CASE("text format round trip") {
    Mesh m = build_lshape_mesh(0.25);
    refine_corner(m, 0.5, 0.5);
    partition_fine(m, default_fine_threshold(m), 1);

    const std::string path = "mesh_roundtrip_test.txt";
    write_mesh_text(m, path);
    Mesh r = read_mesh_text(path);
    std::remove(path.c_str());

    REQUIRE(r.dim == m.dim);
    REQUIRE(r.points.size() == m.points.size());
    REQUIRE(r.elements.size() == m.elements.size());
    REQUIRE(r.boundary_facets.size() == m.boundary_facets.size());
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        CHECK(r.points[i].x == m.points[i].x);
        CHECK(r.points[i].y == m.points[i].y);
    }
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        CHECK(r.elements[e].v == m.elements[e].v);
        CHECK(r.elements[e].region == m.elements[e].region);
    }
    for (std::size_t f = 0; f < m.boundary_facets.size(); ++f) {
        CHECK(r.boundary_facets[f].v == m.boundary_facets[f].v);
        CHECK(r.boundary_facets[f].tag == m.boundary_facets[f].tag);
    }
    r.validate();

    CHECK_THROWS_AS(read_mesh_text("does_not_exist.txt"), InvalidArgument);
}

TEST_SUITE_END();
