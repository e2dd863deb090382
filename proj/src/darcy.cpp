#include "rdfm/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rdfm {

double DarcySetup::pd(Side side, const Vec2& x) const
{
    if (dirichlet) return dirichlet(x);
    return boundary[static_cast<int>(side)].value;
}

bool DarcySetup::has_flagged_face(int cell) const
{
    for (const auto& f : mesh.faces(cell))
        if (!f.boundary && flags.flagged(f.edge)) return true;
    return false;
}

DarcySetup prepare(const Scenario& scenario, const MeshSettings& ms, const DarcyOptions& options)
{
    if (ms.order < 0) throw std::invalid_argument("prepare: negative polynomial order");
    DarcySetup setup;
    setup.mesh = build_mesh(scenario, ms.nx, ms.ny);
    setup.clipping = clip_segments(setup.mesh, scenario.segments, ms.align_tol, ms.perturb, options.seed);
    resolve_intersections(setup.clipping);
    setup.flags = classify_barrier_edges(setup.mesh, setup.clipping, options.classify);
    setup.order = ms.order;
    const PenaltySchedule sched = options.penalties ? *options.penalties : scenario.effective_penalties();
    setup.alpha = sched.alpha(setup.mesh.h());
    setup.beta = sched.beta(setup.mesh.h());
    setup.perm = scenario.matrix_perm;
    setup.boundary = scenario.boundary;
    setup.dirichlet = options.dirichlet;
    setup.source = options.source;
    setup.source_value = scenario.source;
    setup.aligned_average = options.aligned_average;
    if (!std::isfinite(setup.alpha) || !std::isfinite(setup.beta) || !setup.perm.allFinite())
        throw std::invalid_argument("prepare: non-finite coefficient");
    for (const auto& s : scenario.segments)
        if (!std::isfinite(s.strength())) throw std::invalid_argument("prepare: non-finite segment strength");
    return setup;
}

namespace {

/// Reference-cell integrals shared by every cell of a uniform grid.
struct ReferenceMatrices {
    int n = 0;
    Eigen::MatrixXd grad[2];          // grad[d](a,b) = int_T phi_b d_d phi_a
    Eigen::MatrixXd self[4], nb[4];   // per side: int_F phi_a^T phi_b^T, int_F phi_a^T phi_b^N
};

// Reference coordinates of a face point seen from the cell and from its neighbor.
void face_reference(Side side, double t, Vec2& own, Vec2& other)
{
    switch (side) {
    case Side::Left: own = {-1.0, t}; other = {1.0, t}; break;
    case Side::Right: own = {1.0, t}; other = {-1.0, t}; break;
    case Side::Bottom: own = {t, -1.0}; other = {t, 1.0}; break;
    case Side::Top: own = {t, 1.0}; other = {t, -1.0}; break;
    }
}

ReferenceMatrices reference_matrices(const Grid& g, int order)
{
    const TensorBasis basis(order);
    ReferenceMatrices m;
    const int n = m.n = basis.size();
    const GaussRule q = gauss_legendre(order + 2);
    std::vector<double> v(n), dr(n), ds(n), w(n);

    m.grad[0] = m.grad[1] = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < q.size(); ++i)
        for (int j = 0; j < q.size(); ++j) {
            const Vec2 r(q.nodes[i], q.nodes[j]);
            const double wt = q.weights[i] * q.weights[j];
            basis.values(r, v.data());
            basis.gradients(r, dr.data(), ds.data());
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    m.grad[0](a, b) += wt * v[b] * dr[a] * 2.0 / g.hx;
                    m.grad[1](a, b) += wt * v[b] * ds[a] * 2.0 / g.hy;
                }
        }

    const double scale2 = 4.0 / (g.hx * g.hy);
    for (int s = 0; s < 4; ++s) {
        const Side side = static_cast<Side>(s);
        const double len = (side == Side::Left || side == Side::Right) ? g.hy : g.hx;
        m.self[s] = m.nb[s] = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < q.size(); ++i) {
            Vec2 own, other;
            face_reference(side, q.nodes[i], own, other);
            basis.values(own, v.data());
            basis.values(other, w.data());
            const double wt = scale2 * 0.5 * len * q.weights[i];
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    m.self[s](a, b) += wt * v[a] * v[b];
                    m.nb[s](a, b) += wt * v[a] * w[b];
                }
        }
    }
    return m;
}

// Gauss points on a boundary or interior face in physical coordinates.
LineQuadrature face_quadrature(const Vec2& a, const Vec2& b, int points) { return segment_quadrature(a, b, points); }

struct LineTerm {
    int segment = -1;
    Vec2 a, b;
    double weight = 1.0;
};

// Line integrals per cell. A piece of an aligned segment is moved back onto
// its grid line and shared equally by the two cells on either side.
std::vector<std::vector<LineTerm>> collect_line_terms(const DarcySetup& setup)
{
    const Mesh& mesh = setup.mesh;
    std::vector<std::vector<LineTerm>> out(mesh.cell_count());
    for (const auto& p : setup.clipping.pieces) {
        if (!p.active || !(p.length() > 0.0)) continue;
        const auto& seg = setup.clipping.segments[p.segment];
        if (!(setup.aligned_average && seg.aligned)) {
            out[p.cell].push_back({p.segment, p.a, p.b, 1.0});
            continue;
        }
        const int axis = static_cast<int>(seg.line_axis);
        Vec2 a = p.a, b = p.b;
        a[axis] = b[axis] = seg.grid_line;
        Side face;
        if (seg.line_axis == Axis::X)
            face = seg.shift >= 0.0 ? Side::Left : Side::Right;
        else
            face = seg.shift >= 0.0 ? Side::Bottom : Side::Top;
        const CellFace& f = mesh.faces(p.cell)[static_cast<int>(face)];
        if (f.boundary) {
            out[p.cell].push_back({p.segment, a, b, 1.0});
        } else {
            out[p.cell].push_back({p.segment, a, b, 0.5});
            out[f.neighbor].push_back({p.segment, a, b, 0.5});
        }
    }
    return out;
}

}  // namespace

bool admits_symmetric_form(const DarcySetup& setup)
{
    const auto terms = collect_line_terms(setup);
    for (const auto& cell : terms) {
        bool barrier = false, fracture = false;
        for (const LineTerm& t : cell)
            (setup.clipping.segments[t.segment].placed.kind == SegmentKind::Barrier ? barrier : fracture) = true;
        if (barrier && fracture) return false;
    }
    return true;
}

LinearSystem assemble(const DarcySetup& setup, bool symmetric_form)
{
    if (symmetric_form && !admits_symmetric_form(setup))
        throw std::invalid_argument("assemble: symmetric form needs cells without both barrier and fracture terms");
    const Mesh& mesh = setup.mesh;
    const Grid& g = mesh.grid();
    const int k = setup.order;
    const ReferenceMatrices ref = reference_matrices(g, k);
    const int n = ref.n, bs = 5 * n;
    const int ncell = mesh.cell_count();
    const TensorBasis basis(k);
    const Mat2& K = setup.perm;
    const double alpha = setup.alpha, beta = setup.beta;

    const auto line_terms = collect_line_terms(setup);
    const int line_points = 2 * k + 2;
    const int data_points = 2 * k + 4;
    const GaussRule vq = gauss_legendre(k + 4);

    std::vector<int> outer(static_cast<std::size_t>(ncell) * bs + 1, 0);
    std::vector<int> inner;
    std::vector<double> values;
    inner.reserve(static_cast<std::size_t>(ncell) * bs * (6 * n + 4));
    values.reserve(inner.capacity());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncell) * bs);

    Eigen::MatrixXd L;
    BasisPoint bp;
    std::vector<double> psi(n);

    for (int c = 0; c < ncell; ++c) {
        const auto& faces = mesh.faces(c);
        std::vector<int> cells{c};
        for (const auto& f : faces)
            if (!f.boundary) cells.push_back(f.neighbor);
        std::sort(cells.begin(), cells.end());
        const int nb = static_cast<int>(cells.size());
        auto block = [&](int cell) {
            return static_cast<int>(std::lower_bound(cells.begin(), cells.end(), cell) - cells.begin());
        };
        L.setZero(bs, nb * bs);
        const int me = block(c) * bs;
        const int row0 = c * bs;
        // column offset of (cell block, field)
        auto col = [&](int blk, int field) { return blk + field * n; };
        const int S[2] = {0, 1}, U[2] = {2, 3}, P = 4;

        // s rows: (s, xi) - (p, div xi) + face terms
        for (int d = 0; d < 2; ++d) {
            for (int a = 0; a < n; ++a) {
                L(S[d] * n + a, col(me, S[d]) + a) += 1.0;
                for (int b = 0; b < n; ++b) L(S[d] * n + a, col(me, P) + b) -= ref.grad[d](a, b);
            }
        }
        // u rows: (u, eta) - (K s, eta) and line terms
        for (int d = 0; d < 2; ++d)
            for (int a = 0; a < n; ++a) {
                L(U[d] * n + a, col(me, U[d]) + a) += 1.0;
                for (int e = 0; e < 2; ++e)
                    if (K(d, e) != 0.0) L(U[d] * n + a, col(me, S[e]) + a) -= K(d, e);
            }
        for (const LineTerm& t : line_terms[c]) {
            const auto& seg = setup.clipping.segments[t.segment];
            Mat2 T;
            if (seg.placed.kind == SegmentKind::Barrier)
                T = seg.placed.strength() * K * seg.frame.sigma * seg.frame.sigma.transpose();
            else
                T = -seg.placed.strength() * seg.frame.nu * seg.frame.nu.transpose();
            T *= t.weight;
            const int target = seg.placed.kind == SegmentKind::Barrier ? U[0] : S[0];
            const LineQuadrature lq = segment_quadrature(t.a, t.b, line_points);
            for (std::size_t q = 0; q < lq.points.size(); ++q) {
                eval_basis(basis, g, c, lq.points[q], bp);
                for (int d = 0; d < 2; ++d)
                    for (int e = 0; e < 2; ++e) {
                        const double coef = lq.weights[q] * T(d, e);
                        if (coef == 0.0) continue;
                        for (int a = 0; a < n; ++a)
                            for (int b = 0; b < n; ++b)
                                L(U[d] * n + a, col(me, target + e) + b) += coef * bp.value[a] * bp.value[b];
                    }
            }
        }
        // p rows: -(u, grad zeta)
        for (int d = 0; d < 2; ++d)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) L(P * n + a, col(me, U[d]) + b) -= ref.grad[d](a, b);
        // source
        for (int i = 0; i < vq.size(); ++i)
            for (int j = 0; j < vq.size(); ++j) {
                const Vec2 r(vq.nodes[i], vq.nodes[j]);
                const double fv = setup.f(g.from_reference(c, r));
                if (fv == 0.0) continue;
                basis.values(r, psi.data());
                const double w = vq.weights[i] * vq.weights[j] * 0.25 * g.hx * g.hy * 2.0 / std::sqrt(g.hx * g.hy);
                for (int a = 0; a < n; ++a) rhs[row0 + P * n + a] += w * fv * psi[a];
            }

        // faces
        for (int s = 0; s < 4; ++s) {
            const CellFace& f = faces[s];
            const int ax = (s < 2) ? 0 : 1;
            const double sg = f.normal[ax];
            const auto& self = ref.self[s];
            if (!f.boundary) {
                const auto& nbm = ref.nb[s];
                const int other = block(f.neighbor) * bs;
                const bool flagged = setup.flags.flagged(f.edge);
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        const double es = self(a, b), en = nbm(a, b);
                        // s row (component ax): {p} n and beta [u]
                        L(S[ax] * n + a, col(me, P) + b) += 0.5 * sg * es;
                        L(S[ax] * n + a, col(other, P) + b) += 0.5 * sg * en;
                        if (flagged) {
                            L(S[ax] * n + a, col(me, U[ax]) + b) += beta * es;
                            L(S[ax] * n + a, col(other, U[ax]) + b) -= beta * en;
                        }
                        // p row: {u}.n and alpha [p].n
                        L(P * n + a, col(me, U[ax]) + b) += 0.5 * sg * es;
                        L(P * n + a, col(other, U[ax]) + b) += 0.5 * sg * en;
                        if (!flagged) {
                            L(P * n + a, col(me, P) + b) += alpha * es;
                            L(P * n + a, col(other, P) + b) -= alpha * en;
                        }
                    }
                continue;
            }
            const BoundaryEdge& be = mesh.boundary_edges()[f.edge];
            const BoundaryCondition& bc = mesh.boundary_condition(be.side);
            if (bc.type == BoundaryType::Neumann) {
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) L(S[ax] * n + a, col(me, P) + b) += sg * self(a, b);
                const LineQuadrature fq = face_quadrature(be.a, be.b, data_points);
                for (std::size_t q = 0; q < fq.points.size(); ++q) {
                    eval_basis(basis, g, c, fq.points[q], bp);
                    for (int a = 0; a < n; ++a) rhs[row0 + P * n + a] -= fq.weights[q] * bc.value * bp.value[a];
                }
            } else {
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        L(P * n + a, col(me, U[ax]) + b) += sg * self(a, b);
                        L(P * n + a, col(me, P) + b) += alpha * self(a, b);
                    }
                const LineQuadrature fq = face_quadrature(be.a, be.b, data_points);
                for (std::size_t q = 0; q < fq.points.size(); ++q) {
                    const double pdv = setup.pd(be.side, fq.points[q]);
                    if (!std::isfinite(pdv)) throw std::invalid_argument("assemble: non-finite Dirichlet data");
                    eval_basis(basis, g, c, fq.points[q], bp);
                    for (int a = 0; a < n; ++a) {
                        rhs[row0 + S[ax] * n + a] -= fq.weights[q] * pdv * sg * bp.value[a];
                        rhs[row0 + P * n + a] += fq.weights[q] * alpha * pdv * bp.value[a];
                    }
                }
            }
        }

        if (symmetric_form) {
            // u rows times W^-1 with W = -(u rows, own s columns); p rows negated.
            const Eigen::MatrixXd W = -L.block(2 * n, me, 2 * n, 2 * n);
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
            L.middleRows(2 * n, 2 * n) = lu.solve(L.middleRows(2 * n, 2 * n));
            rhs.segment(row0 + 2 * n, 2 * n) = lu.solve(rhs.segment(row0 + 2 * n, 2 * n));
            L.middleRows(4 * n, n) *= -1.0;
            rhs.segment(row0 + 4 * n, n) *= -1.0;
            // round-off where the product should vanish
            for (int r = 2 * n; r < 4 * n; ++r) {
                const double cut = 1e-14 * L.row(r).cwiseAbs().maxCoeff();
                for (int j = 0; j < L.cols(); ++j)
                    if (std::abs(L(r, j)) < cut) L(r, j) = 0.0;
            }
        }
        if (!L.allFinite()) throw std::invalid_argument("assemble: non-finite coefficient in cell " + std::to_string(c));
        for (int r = 0; r < bs; ++r) {
            for (int blk = 0; blk < nb; ++blk)
                for (int j = 0; j < bs; ++j) {
                    const double v = L(r, blk * bs + j);
                    if (v == 0.0) continue;
                    inner.push_back(cells[blk] * bs + j);
                    values.push_back(v);
                }
            outer[row0 + r + 1] = static_cast<int>(inner.size());
        }
    }
    if (!rhs.allFinite()) throw std::invalid_argument("assemble: non-finite right-hand side");

    LinearSystem sys;
    const int N = ncell * bs;
    sys.matrix = Eigen::Map<const SparseMatrix>(N, N, static_cast<int>(inner.size()), outer.data(), inner.data(),
                                                values.data());
    sys.rhs = std::move(rhs);
    sys.block_offsets.resize(ncell + 1);
    for (int c = 0; c <= ncell; ++c) sys.block_offsets[c] = c * bs;
    return sys;
}

double DarcySolution::interior_flux(int edge, const Vec2& x) const
{
    const InteriorEdge& e = setup.mesh.interior_edges()[edge];
    const Vec2 nrm = e.normal();
    double flux = 0.5 * (u.vector_value(e.minus, x) + u.vector_value(e.plus, x)).dot(nrm);
    if (!setup.flags.flagged(edge)) flux += setup.alpha * (p.value(e.minus, x) - p.value(e.plus, x));
    return flux;
}

double DarcySolution::boundary_flux(int edge, const Vec2& x) const
{
    const BoundaryEdge& e = setup.mesh.boundary_edges()[edge];
    const BoundaryCondition& bc = setup.mesh.boundary_condition(e.side);
    if (bc.type == BoundaryType::Neumann) return bc.value;
    return u.vector_value(e.cell, x).dot(e.normal()) + setup.alpha * (p.value(e.cell, x) - setup.pd(e.side, x));
}

std::vector<int> limiter_cells(const DarcySetup& setup)
{
    const auto barrier = cells_with(setup.mesh, setup.clipping, SegmentKind::Barrier);
    std::vector<int> out;
    for (int c = 0; c < setup.mesh.cell_count(); ++c) {
        if (!barrier[c]) continue;
        bool all_free = true;
        for (const auto& f : setup.mesh.faces(c)) {
            if (f.boundary) {
                const auto side = setup.mesh.boundary_edges()[f.edge].side;
                if (setup.mesh.boundary_condition(side).type == BoundaryType::Dirichlet) all_free = false;
            } else if (!setup.flags.flagged(f.edge)) {
                all_free = false;
            }
        }
        if (all_free) out.push_back(c);
    }
    return out;
}

DGField apply_limiter(const DGField& p, const Mesh& mesh, const std::vector<int>& cells, std::vector<double>* theta)
{
    DGField out = p;
    const Grid& g = mesh.grid();
    if (theta) theta->clear();
    for (int c : cells) {
        const double mean = cell_average(p, c);
        const int i = g.col(c), j = g.row(c);
        const std::array<std::pair<int, int>, 4> verts{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
        const auto corners = mesh.corners(c);
        double th = 1.0;
        for (int v = 0; v < 4; ++v) {
            double lo = mean, hi = mean;
            for (int nbr : mesh.cells_at_vertex(verts[v].first, verts[v].second)) {
                const double m = cell_average(p, nbr);
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            }
            const double pv = p.value(c, corners[v]);
            double ti = 1.0;
            if (pv < mean)
                ti = std::min((lo - mean) / (pv - mean), 1.0);
            else if (pv > mean)
                ti = std::min((hi - mean) / (pv - mean), 1.0);
            th = std::min(th, ti);
        }
        th = std::clamp(th, 0.0, 1.0);
        auto coef = out.coefficients(c);
        for (std::size_t a = 1; a < coef.size(); ++a) coef[a] *= th;
        if (theta) theta->push_back(th);
    }
    return out;
}

FluxDiagnostics flux_diagnostics(const DarcySolution& sol)
{
    const DarcySetup& setup = sol.setup;
    const Mesh& mesh = setup.mesh;
    const Grid& g = mesh.grid();
    const int k = setup.order;
    FluxDiagnostics d;
    d.cell_residual.assign(mesh.cell_count(), 0.0);
    d.edge_jump.assign(mesh.interior_edges().size(), 0.0);

    const GaussRule vq = gauss_legendre(k + 4);
    const int fpts = 2 * k + 4;
    std::vector<double> net(mesh.cell_count(), 0.0);
    for (int c = 0; c < mesh.cell_count(); ++c)
        for (int i = 0; i < vq.size(); ++i)
            for (int j = 0; j < vq.size(); ++j) {
                const Vec2 x = g.from_reference(c, Vec2(vq.nodes[i], vq.nodes[j]));
                net[c] += vq.weights[i] * vq.weights[j] * 0.25 * g.cell_area() * setup.f(x);
            }
    const auto& edges = mesh.interior_edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const LineQuadrature q = segment_quadrature(edges[e].a, edges[e].b, fpts);
        double flux = 0.0, jump = 0.0;
        for (std::size_t i = 0; i < q.points.size(); ++i) {
            flux += q.weights[i] * sol.interior_flux(static_cast<int>(e), q.points[i]);
            const Vec2 um = sol.u.vector_value(edges[e].minus, q.points[i]);
            const Vec2 up = sol.u.vector_value(edges[e].plus, q.points[i]);
            jump += q.weights[i] * std::abs((um - up).dot(edges[e].normal()));
        }
        net[edges[e].minus] -= flux;
        net[edges[e].plus] += flux;
        d.edge_jump[e] = jump;
    }
    const auto& bedges = mesh.boundary_edges();
    for (std::size_t e = 0; e < bedges.size(); ++e) {
        const LineQuadrature q = segment_quadrature(bedges[e].a, bedges[e].b, fpts);
        double flux = 0.0;
        for (std::size_t i = 0; i < q.points.size(); ++i)
            flux += q.weights[i] * sol.boundary_flux(static_cast<int>(e), q.points[i]);
        net[bedges[e].cell] -= flux;
    }
    for (int c = 0; c < mesh.cell_count(); ++c) {
        d.cell_residual[c] = std::abs(net[c]);
        d.max_cell_residual = std::max(d.max_cell_residual, d.cell_residual[c]);
    }
    return d;
}

DarcySolution solve_darcy(DarcySetup setup, const DarcyOptions& options)
{
    DarcySolution sol;
    const Grid g = setup.mesh.grid();
    const int k = setup.order;
    const int n = (k + 1) * (k + 1);
    const int ncell = g.cell_count();

    Eigen::VectorXd x;
    {
        const bool symmetric = options.condense && options.symmetric_form && admits_symmetric_form(setup);
        LinearSystem sys = assemble(setup, symmetric);
        sol.stats.unknowns = sys.size();
        std::vector<std::vector<int>> groups;
        if (options.condense) {
            // Symmetric form: s goes everywhere, u where no face carries [u];
            // what is left is quasi-definite with p in the negative block.
            // Otherwise u goes everywhere and s where no face is flagged.
            groups.resize(ncell);
            for (int c = 0; c < ncell; ++c) {
                const bool flagged = setup.has_flagged_face(c);
                const int elim_s = symmetric || !flagged, elim_u = !symmetric || !flagged;
                for (int field = 0; field < 4; ++field) {
                    if (field < 2 ? !elim_s : !elim_u) continue;
                    for (int a = 0; a < n; ++a) groups[c].push_back(dof_index(n, c, field, a));
                }
            }
            if (symmetric) {
                sys.negative_block.assign(sys.size(), 0);
                for (int c = 0; c < ncell; ++c)
                    for (int a = 0; a < n; ++a) sys.negative_block[dof_index(n, c, 4, a)] = 1;
            }
        }
        auto run = [&](const LinearSystem& s) {
            if (!options.condense) {
                sol.stats.reduced_unknowns = s.size();
                const SolveResult r = solve(s, options.solver);
                return std::make_pair(r, r.x);
            }
            const Condensation cond(s, groups);
            sol.stats.reduced_unknowns = cond.reduced().size();
            const SolveResult r = solve(cond.reduced(), options.solver);
            return std::make_pair(r, cond.expand(r.x));
        };
        auto [r, full] = run(sys);
        sol.stats.residual = r.residual;
        sol.stats.iterations = r.iterations;
        sol.stats.converged = r.converged;
        sol.stats.method = r.method;
        x = std::move(full);
        // Refinement against the uncondensed system: the condensed residual hides
        // round-off that the mass rows pick up from large penalties.
        for (int it = 0; it < options.refine_steps && sol.stats.converged; ++it) {
            LinearSystem corr{sys.matrix, sys.rhs - sys.matrix * x, sys.block_offsets, sys.negative_block};
            x += run(corr).second;
        }
    }
    if (!sol.stats.converged)
        throw SolverError("Darcy solve did not converge (relative residual " + std::to_string(sol.stats.residual) +
                          ")");

    sol.s = DGField(g, k, 2);
    sol.u = DGField(g, k, 2);
    sol.p = DGField(g, k, 1);
    for (int c = 0; c < ncell; ++c)
        for (int a = 0; a < n; ++a) {
            sol.s.coefficients(c, 0)[a] = x[dof_index(n, c, 0, a)];
            sol.s.coefficients(c, 1)[a] = x[dof_index(n, c, 1, a)];
            sol.u.coefficients(c, 0)[a] = x[dof_index(n, c, 2, a)];
            sol.u.coefficients(c, 1)[a] = x[dof_index(n, c, 3, a)];
            sol.p.coefficients(c, 0)[a] = x[dof_index(n, c, 4, a)];
        }
    sol.setup = std::move(setup);
    if (options.limit) {
        sol.limiter.cells = limiter_cells(sol.setup);
        sol.limited_p = apply_limiter(sol.p, sol.setup.mesh, sol.limiter.cells, &sol.limiter.theta);
    } else {
        sol.limited_p = sol.p;
    }
    sol.diagnostics = flux_diagnostics(sol);
    return sol;
}

DarcySolution solve_darcy(const Scenario& scenario, const MeshSettings& mesh, const DarcyOptions& options)
{
    return solve_darcy(prepare(scenario, mesh, options), options);
}

}  // namespace rdfm
