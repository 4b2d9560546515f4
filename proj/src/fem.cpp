#include "ltswave/fem.hpp"

#include "ltswave/errors.hpp"
#include "ltswave/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace ltswave {

namespace {

/// Quadrature point in reference coordinates: 1D uses (a) on [0,1]; 2D uses
/// barycentric (λ1, λ2) = (a, b) on the reference triangle.  Weights are
/// normalized to sum to 1, so ∫_τ f = |τ| Σ_q w_q f(x_q).
struct QPoint {
    double a;
    double b;
    double w;
};

// 3-point Gauss on [0,1], exact through degree 5 (assembly rule).
const QPoint kGauss3[] = {
    {0.5 - 0.5 * 0.774596669241483377, 0.0, 5.0 / 18.0},
    {0.5, 0.0, 8.0 / 18.0},
    {0.5 + 0.5 * 0.774596669241483377, 0.0, 5.0 / 18.0},
};

// 5-point Gauss on [0,1], exact through degree 9 (loads and errors).
const QPoint kGauss5[] = {
    {0.5 - 0.5 * 0.906179845938663993, 0.0, 0.5 * 0.236926885056189088},
    {0.5 - 0.5 * 0.538469310105683091, 0.0, 0.5 * 0.478628670499366468},
    {0.5, 0.0, 0.5 * 0.568888888888888889},
    {0.5 + 0.5 * 0.538469310105683091, 0.0, 0.5 * 0.478628670499366468},
    {0.5 + 0.5 * 0.906179845938663993, 0.0, 0.5 * 0.236926885056189088},
};

// 6-point triangle rule, exact through degree 4 (assembly rule).
const QPoint kTri6[] = {
    {0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.109951743655322},
};

// 12-point triangle rule, exact through degree 6 (loads and errors).
const QPoint kTri12[] = {
    {0.063089014491502, 0.063089014491502, 0.050844906370207},
    {0.873821971016996, 0.063089014491502, 0.050844906370207},
    {0.063089014491502, 0.873821971016996, 0.050844906370207},
    {0.249286745170910, 0.249286745170910, 0.116786275726379},
    {0.501426509658179, 0.249286745170910, 0.116786275726379},
    {0.249286745170910, 0.501426509658179, 0.116786275726379},
    {0.310352451033785, 0.053145049844816, 0.082851075618374},
    {0.053145049844816, 0.310352451033785, 0.082851075618374},
    {0.310352451033785, 0.636502499121399, 0.082851075618374},
    {0.636502499121399, 0.310352451033785, 0.082851075618374},
    {0.053145049844816, 0.636502499121399, 0.082851075618374},
    {0.636502499121399, 0.053145049844816, 0.082851075618374},
};

struct QuadRule {
    const QPoint* pts;
    std::size_t n;
};

QuadRule assembly_rule(int dim) {
    return dim == 1 ? QuadRule{kGauss3, 3} : QuadRule{kTri6, 6};
}

QuadRule high_order_rule(int dim) {
    return dim == 1 ? QuadRule{kGauss5, 5} : QuadRule{kTri12, 12};
}

constexpr std::size_t kMaxDofs = 6;

/// Shape function values and reference gradients at one quadrature point.
void eval_shapes(int dim, int degree, const QPoint& q, double* n,
                 double grad[][2]) {
    if (dim == 1) {
        const double x = q.a;
        if (degree == 1) {
            n[0] = 1.0 - x;
            n[1] = x;
            grad[0][0] = -1.0;
            grad[1][0] = 1.0;
        } else {
            n[0] = (1.0 - x) * (1.0 - 2.0 * x);
            n[1] = x * (2.0 * x - 1.0);
            n[2] = 4.0 * x * (1.0 - x);
            grad[0][0] = 4.0 * x - 3.0;
            grad[1][0] = 4.0 * x - 1.0;
            grad[2][0] = 4.0 - 8.0 * x;
        }
        for (std::size_t k = 0; k < kMaxDofs; ++k)
            grad[k][1] = 0.0;
        return;
    }

    const double l1 = q.a;
    const double l2 = q.b;
    const double l0 = 1.0 - l1 - l2;
    // reference gradients of the barycentric coordinates
    const double dl[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
    const double l[3] = {l0, l1, l2};
    if (degree == 1) {
        for (int i = 0; i < 3; ++i) {
            n[i] = l[i];
            grad[i][0] = dl[i][0];
            grad[i][1] = dl[i][1];
        }
        return;
    }
    for (int i = 0; i < 3; ++i) {
        n[i] = l[i] * (2.0 * l[i] - 1.0);
        grad[i][0] = (4.0 * l[i] - 1.0) * dl[i][0];
        grad[i][1] = (4.0 * l[i] - 1.0) * dl[i][1];
    }
    const int pair[3][2] = {{0, 1}, {1, 2}, {2, 0}}; // edge node order m01, m12, m20
    for (int k = 0; k < 3; ++k) {
        const int i = pair[k][0];
        const int j = pair[k][1];
        n[3 + k] = 4.0 * l[i] * l[j];
        grad[3 + k][0] = 4.0 * (l[i] * dl[j][0] + l[j] * dl[i][0]);
        grad[3 + k][1] = 4.0 * (l[i] * dl[j][1] + l[j] * dl[i][1]);
    }
}

/// Affine element geometry: volume, quadrature-point position, and the
/// push-forward of reference gradients to physical ones.
struct ElementGeometry {
    const Mesh& mesh;
    std::size_t e;
    double vol;
    // 2D inverse-transpose Jacobian entries (1D stores 1/h in it00)
    double it00, it01, it10, it11;

    ElementGeometry(const Mesh& m, std::size_t elem) : mesh(m), e(elem) {
        const Simplex& s = m.elements[e];
        if (m.dim == 1) {
            const double len = m.points[s.v[1]].x - m.points[s.v[0]].x;
            vol = std::abs(len);
            it00 = 1.0 / len;
            it01 = it10 = it11 = 0.0;
            return;
        }
        const Point& p0 = m.points[s.v[0]];
        const Point& p1 = m.points[s.v[1]];
        const Point& p2 = m.points[s.v[2]];
        const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
        const double j10 = p1.y - p0.y, j11 = p2.y - p0.y;
        const double det = j00 * j11 - j01 * j10;
        if (det <= 0.0)
            throw AssemblyFailure("assembly: degenerate or inverted element");
        vol = 0.5 * det;
        it00 = j11 / det;
        it01 = -j10 / det;
        it10 = -j01 / det;
        it11 = j00 / det;
    }

    Point position(const QPoint& q) const {
        const Simplex& s = mesh.elements[e];
        if (mesh.dim == 1) {
            const Point& p0 = mesh.points[s.v[0]];
            const Point& p1 = mesh.points[s.v[1]];
            return {p0.x + q.a * (p1.x - p0.x), 0.0};
        }
        const Point& p0 = mesh.points[s.v[0]];
        const Point& p1 = mesh.points[s.v[1]];
        const Point& p2 = mesh.points[s.v[2]];
        const double l0 = 1.0 - q.a - q.b;
        return {l0 * p0.x + q.a * p1.x + q.b * p2.x,
                l0 * p0.y + q.a * p1.y + q.b * p2.y};
    }

    void physical_grad(const double ref[2], double out[2]) const {
        if (mesh.dim == 1) {
            out[0] = ref[0] * it00;
            out[1] = 0.0;
            return;
        }
        out[0] = it00 * ref[0] + it01 * ref[1];
        out[1] = it10 * ref[0] + it11 * ref[1];
    }
};

} // namespace

SparseOperator assemble_mass(const Mesh& mesh, const DofMap& dofmap) {
    const QuadRule rule = assembly_rule(mesh.dim);
    const std::size_t nd = dofmap.dofs_per_elem();
    std::vector<Triplet> triplets;
    triplets.reserve(mesh.elements.size() * nd * nd);

    double n[kMaxDofs];
    double grad[kMaxDofs][2];
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const ElementGeometry geo(mesh, e);
        double local[kMaxDofs][kMaxDofs] = {};
        for (std::size_t q = 0; q < rule.n; ++q) {
            eval_shapes(mesh.dim, dofmap.degree, rule.pts[q], n, grad);
            const double scale = rule.pts[q].w * geo.vol;
            for (std::size_t i = 0; i < nd; ++i)
                for (std::size_t j = 0; j < nd; ++j)
                    local[i][j] += scale * n[i] * n[j];
        }
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t i = 0; i < nd; ++i)
            for (std::size_t j = 0; j < nd; ++j)
                triplets.push_back({dofs[i], dofs[j], local[i][j]});
    }
    return SparseOperator::from_triplets(dofmap.n_dofs(), std::move(triplets));
}

DiagonalOperator assemble_lumped_mass(const Mesh& mesh, const DofMap& dofmap) {
    if (dofmap.degree != 1)
        throw InvalidArgument(
            "assemble_lumped_mass: row-sum lumping is only valid for degree 1 "
            "(degree-2 vertex rows sum to zero)");
    std::vector<double> d(dofmap.n_dofs(), 0.0);
    const double share = 1.0 / double(mesh.dim + 1);
    const std::size_t nd = dofmap.dofs_per_elem();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double vol = mesh.element_volume(e);
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t k = 0; k < nd; ++k)
            d[dofs[k]] += vol * share;
    }
    return DiagonalOperator(std::move(d));
}

SparseOperator assemble_stiffness(const Mesh& mesh, const DofMap& dofmap,
                                  const SpatialFn& wave_speed) {
    const QuadRule rule = assembly_rule(mesh.dim);
    const std::size_t nd = dofmap.dofs_per_elem();
    std::vector<Triplet> triplets;
    triplets.reserve(mesh.elements.size() * nd * nd);

    double n[kMaxDofs];
    double grad[kMaxDofs][2];
    double pg[kMaxDofs][2];
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const ElementGeometry geo(mesh, e);
        double local[kMaxDofs][kMaxDofs] = {};
        for (std::size_t q = 0; q < rule.n; ++q) {
            eval_shapes(mesh.dim, dofmap.degree, rule.pts[q], n, grad);
            const double c = wave_speed(geo.position(rule.pts[q]));
            if (!(c > 0.0))
                throw InvalidArgument(
                    "assemble_stiffness: wave speed must be positive");
            const double scale = rule.pts[q].w * geo.vol * c * c;
            for (std::size_t i = 0; i < nd; ++i)
                geo.physical_grad(grad[i], pg[i]);
            for (std::size_t i = 0; i < nd; ++i)
                for (std::size_t j = 0; j < nd; ++j)
                    local[i][j] +=
                        scale * (pg[i][0] * pg[j][0] + pg[i][1] * pg[j][1]);
        }
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t i = 0; i < nd; ++i)
            for (std::size_t j = 0; j < nd; ++j)
                triplets.push_back({dofs[i], dofs[j], local[i][j]});
    }
    return SparseOperator::from_triplets(dofmap.n_dofs(), std::move(triplets));
}

NodalField assemble_load(const Mesh& mesh, const DofMap& dofmap,
                         const SpatialFn& g) {
    const QuadRule rule = high_order_rule(mesh.dim);
    const std::size_t nd = dofmap.dofs_per_elem();
    NodalField b(dofmap.n_dofs(), 0.0);

    double n[kMaxDofs];
    double grad[kMaxDofs][2];
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const ElementGeometry geo(mesh, e);
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t q = 0; q < rule.n; ++q) {
            eval_shapes(mesh.dim, dofmap.degree, rule.pts[q], n, grad);
            const double gv = g(geo.position(rule.pts[q]));
            const double scale = rule.pts[q].w * geo.vol * gv;
            for (std::size_t i = 0; i < nd; ++i)
                b[dofs[i]] += scale * n[i];
        }
    }
    return b;
}

DiagonalOperator assemble_diag_weights(const Mesh& mesh, const DofMap& dofmap,
                                       const std::vector<unsigned char>& node_set) {
    if (node_set.size() != dofmap.n_dofs())
        throw InvalidArgument("assemble_diag_weights: node set size mismatch");
    std::vector<double> d(dofmap.n_dofs(), 0.0);
    const std::size_t nd = dofmap.dofs_per_elem();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double vol = mesh.element_volume(e);
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t k = 0; k < nd; ++k)
            d[dofs[k]] += vol;
    }
    for (std::size_t z = 0; z < d.size(); ++z)
        if (!node_set[z])
            d[z] = 0.0;
    return DiagonalOperator(std::move(d));
}

DiagonalOperator assemble_restriction_weights(const Mesh& mesh, const DofMap& dofmap,
                                              const std::vector<unsigned char>& node_set) {
    if (node_set.size() != dofmap.n_dofs())
        throw InvalidArgument("assemble_restriction_weights: node set size mismatch");
    std::vector<double> d(dofmap.n_dofs(), 0.0);
    const std::size_t nd = dofmap.dofs_per_elem();
    const double share = 1.0 / static_cast<double>(nd);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double vol = mesh.element_volume(e) * share;
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t k = 0; k < nd; ++k)
            d[dofs[k]] += vol;
    }
    for (std::size_t z = 0; z < d.size(); ++z)
        if (!node_set[z])
            d[z] = 0.0;
    return DiagonalOperator(std::move(d));
}

MassSolver::MassSolver(SparseOperator mass, double rel_tol, int max_iter)
    : mass_(std::move(mass)), rel_tol_(rel_tol), max_iter_(max_iter),
      lumped_(false) {
    inv_diag_ = mass_.diagonal();
    for (double& v : inv_diag_) {
        if (!(v > 0.0))
            throw NumericFailure("mass solver: non-positive diagonal entry");
        v = 1.0 / v;
    }
}

MassSolver::MassSolver(DiagonalOperator lumped_mass)
    : diag_(std::move(lumped_mass)), lumped_(true) {}

void MassSolver::solve(const NodalField& b, NodalField& x) const {
    if (lumped_) {
        diag_.solve(b, x);
        return;
    }
    const std::size_t nn = mass_.rows();
    if (b.size() != nn)
        throw InvalidArgument("mass solve: dimension mismatch");

    x.assign(nn, 0.0);
    const double bnorm = std::sqrt(kernels::norm2_sq(b));
    if (bnorm == 0.0)
        return;

    NodalField r = b;
    NodalField z(nn), p(nn), q(nn);
    for (std::size_t i = 0; i < nn; ++i)
        z[i] = inv_diag_[i] * r[i];
    p = z;
    double rz = kernels::dot(r, z);

    for (int it = 0; it < max_iter_; ++it) {
        mass_.apply(p, q);
        const double alpha = rz / kernels::dot(p, q);
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, q, r);
        if (std::sqrt(kernels::norm2_sq(r)) <= rel_tol_ * bnorm)
            return;
        for (std::size_t i = 0; i < nn; ++i)
            z[i] = inv_diag_[i] * r[i];
        const double rz_next = kernels::dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        kernels::xpay(z, beta, p, p);
    }
    throw NumericFailure("mass solver: PCG did not reach the requested tolerance");
}

NodalField MassSolver::solve(const NodalField& b) const {
    NodalField x;
    solve(b, x);
    return x;
}

void zero_dirichlet(NodalField& u, const std::vector<unsigned char>& mask) {
    if (mask.size() != u.size())
        throw InvalidArgument("zero_dirichlet: mask size mismatch");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (mask[i])
            u[i] = 0.0;
}

NodalField project_l2(const Mesh& mesh, const DofMap& dofmap,
                      const MassSolver& solver, const SpatialFn& g) {
    NodalField load = assemble_load(mesh, dofmap, g);
    zero_dirichlet(load, dofmap.dirichlet_mask);
    return solver.solve(load);
}

Norms compute_norms(const NodalField& u, const SparseOperator& mass,
                    const SparseOperator& stiffness_unit,
                    const DiagonalOperator& weights) {
    NodalField tmp(u.size());
    Norms out;
    mass.apply(u, tmp);
    const double umu = kernels::dot(u, tmp);
    out.l2 = std::sqrt(std::max(0.0, umu));
    stiffness_unit.apply(u, tmp);
    out.h1 = std::sqrt(std::max(0.0, umu + kernels::dot(u, tmp)));
    weights.apply(u, tmp);
    out.mesh_dep = std::sqrt(std::max(0.0, kernels::dot(u, tmp)));
    return out;
}

double l2_error_vs_exact(const Mesh& mesh, const DofMap& dofmap,
                         const NodalField& u, const SpatialFn& exact) {
    if (u.size() != dofmap.n_dofs())
        throw InvalidArgument("l2_error_vs_exact: field size mismatch");
    const QuadRule rule = high_order_rule(mesh.dim);
    const std::size_t nd = dofmap.dofs_per_elem();

    double n[kMaxDofs];
    double grad[kMaxDofs][2];
    double err2 = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const ElementGeometry geo(mesh, e);
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t q = 0; q < rule.n; ++q) {
            eval_shapes(mesh.dim, dofmap.degree, rule.pts[q], n, grad);
            double uh = 0.0;
            for (std::size_t i = 0; i < nd; ++i)
                uh += u[dofs[i]] * n[i];
            const double diff = uh - exact(geo.position(rule.pts[q]));
            err2 += rule.pts[q].w * geo.vol * diff * diff;
        }
    }
    return std::sqrt(err2);
}

double h1_error_vs_exact(const Mesh& mesh, const DofMap& dofmap,
                         const NodalField& u, const SpatialFn& exact,
                         const SpatialGradFn& exact_grad) {
    if (u.size() != dofmap.n_dofs())
        throw InvalidArgument("h1_error_vs_exact: field size mismatch");
    const QuadRule rule = high_order_rule(mesh.dim);
    const std::size_t nd = dofmap.dofs_per_elem();

    double n[kMaxDofs];
    double grad[kMaxDofs][2];
    double pg[2];
    double err2 = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const ElementGeometry geo(mesh, e);
        const std::size_t* dofs = dofmap.dofs_of(e);
        for (std::size_t q = 0; q < rule.n; ++q) {
            eval_shapes(mesh.dim, dofmap.degree, rule.pts[q], n, grad);
            const Point x = geo.position(rule.pts[q]);
            double uh = 0.0, gx = 0.0, gy = 0.0;
            for (std::size_t i = 0; i < nd; ++i) {
                uh += u[dofs[i]] * n[i];
                geo.physical_grad(grad[i], pg);
                gx += u[dofs[i]] * pg[0];
                gy += u[dofs[i]] * pg[1];
            }
            const double d0 = uh - exact(x);
            const Point g = exact_grad(x);
            const double dx = gx - g.x;
            const double dy = mesh.dim == 1 ? 0.0 : gy - g.y;
            err2 += rule.pts[q].w * geo.vol * (d0 * d0 + dx * dx + dy * dy);
        }
    }
    return std::sqrt(err2);
}

} // namespace ltswave
