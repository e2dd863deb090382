#include "rdfm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "rdfm/output.hpp"

namespace rdfm {

IoBoundaries classify_io_boundaries(const DarcySolution& flow)
{
    const Mesh& mesh = flow.mesh();
    const int pts = 2 * flow.setup.order + 2;
    IoBoundaries io;
    const auto& edges = mesh.boundary_edges();
    io.inflow.assign(edges.size(), 0);
    io.flux.assign(edges.size(), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const LineQuadrature q = segment_quadrature(edges[e].a, edges[e].b, pts);
        double f = 0.0;
        for (std::size_t i = 0; i < q.points.size(); ++i)
            f += q.weights[i] * flow.boundary_flux(static_cast<int>(e), q.points[i]);
        io.flux[e] = f;
        if (f < 0.0) {
            io.inflow[e] = 1;
            io.total_inflow -= f;
        }
    }
    return io;
}

TransportOperator::TransportOperator(const DarcySolution& flow, const TransportParams& params,
                                     const TransportOptions& options)
    : grid_(flow.mesh().grid()), order_(flow.setup.order), phi_(params.phi), io_(classify_io_boundaries(flow))
{
    if (!(params.phi > 0.0 && params.phi <= 1.0)) throw std::invalid_argument("transport: phi must lie in (0, 1]");
    if (params.d0 < 0.0) throw std::invalid_argument("transport: d0 must be >= 0");
    const Mesh& mesh = flow.mesh();
    const Grid& g = grid_;
    const int k = order_;
    const TensorBasis basis(k);
    const int n = basis.size();
    const int ncell = g.cell_count();
    const int N = n * ncell;
    const double pen = options.penalty_coeff > 0.0 ? options.penalty_coeff : 4.0 * (k + 1) * (k + 1);
    const int nq = 2 * k + 2;
    const GaussRule vq = gauss_legendre(nq);
    const double jac = 0.25 * g.cell_area();

    std::vector<Eigen::Triplet<double>> trip;
    constant_ = Eigen::VectorXd::Zero(N);
    outflow_weights_ = Eigen::VectorXd::Zero(N);
    source_weights_ = Eigen::VectorXd::Zero(N);
    double max_speed = 0.0, max_diff = 0.0;

    BasisPoint bp, bm;
    Eigen::MatrixXd local(n, n);
    for (int c = 0; c < ncell; ++c) {
        local.setZero();
        for (int i = 0; i < vq.size(); ++i)
            for (int j = 0; j < vq.size(); ++j) {
                const Vec2 x = g.from_reference(c, Vec2(vq.nodes[i], vq.nodes[j]));
                const double w = vq.weights[i] * vq.weights[j] * jac;
                eval_basis(basis, g, c, x, bp);
                const Vec2 u = flow.u.vector_value(c, x);
                const double D = params.d0 * u.norm();
                max_speed = std::max(max_speed, u.norm());
                max_diff = std::max(max_diff, D);
                const double f = flow.setup.f(x);
                for (int a = 0; a < n; ++a) {
                    const double adv = w * (u.x() * bp.dx[a] + u.y() * bp.dy[a]);
                    for (int b = 0; b < n; ++b) {
                        local(a, b) += adv * bp.value[b] - w * D * (bp.dx[a] * bp.dx[b] + bp.dy[a] * bp.dy[b]);
                        if (f < 0.0) local(a, b) += w * f * bp.value[a] * bp.value[b];
                    }
                    if (f > 0.0) constant_[c * n + a] += w * f * params.c_inject * bp.value[a];
                    if (f < 0.0) source_weights_[c * n + a] += w * f * bp.value[a];
                }
                if (f > 0.0) source_constant_ += w * f * params.c_inject;
            }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (local(a, b) != 0.0) trip.emplace_back(c * n + a, c * n + b, local(a, b));
    }

    const auto& edges = mesh.interior_edges();
    Eigen::MatrixXd blk[2][2];
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const InteriorEdge& ed = edges[e];
        const Vec2 nrm = ed.normal();
        const LineQuadrature q = segment_quadrature(ed.a, ed.b, nq);
        const int nqp = static_cast<int>(q.points.size());
        std::vector<double> un(nqp), Dm(nqp), Dp(nqp);
        double beta = 0.0, dbar = 0.0;
        for (int i = 0; i < nqp; ++i) {
            un[i] = flow.interior_flux(static_cast<int>(e), q.points[i]);
            beta = std::max(beta, std::abs(un[i]));
            Dm[i] = params.d0 * flow.u.vector_value(ed.minus, q.points[i]).norm();
            Dp[i] = params.d0 * flow.u.vector_value(ed.plus, q.points[i]).norm();
            dbar += 0.5 * (Dm[i] + Dp[i]) / nqp;
        }
        const double alpha = pen * dbar / ed.length();
        for (auto& row : blk)
            for (auto& m : row) m.setZero(n, n);
        for (int i = 0; i < nqp; ++i) {
            eval_basis(basis, g, ed.minus, q.points[i], bm);
            eval_basis(basis, g, ed.plus, q.points[i], bp);
            const BasisPoint* side[2] = {&bm, &bp};
            const double D[2] = {Dm[i], Dp[i]};
            const double sgn[2] = {1.0, -1.0};
            const double w = q.weights[i];
            for (int st = 0; st < 2; ++st)
                for (int sc = 0; sc < 2; ++sc) {
                    const BasisPoint& T = *side[st];
                    const BasisPoint& C = *side[sc];
                    for (int a = 0; a < n; ++a) {
                        const double va = T.value[a];
                        const double gva = T.dx[a] * nrm.x() + T.dy[a] * nrm.y();
                        for (int b = 0; b < n; ++b) {
                            const double cb = C.value[b];
                            const double gcb = C.dx[b] * nrm.x() + C.dy[b] * nrm.y();
                            // Lax-Friedrichs flux u_hat.n {c} + beta [c], tested with -[v]
                            const double flux = 0.5 * un[i] * cb + beta * sgn[sc] * cb;
                            double v = -sgn[st] * flux * va;
                            // {D grad c}.[v] + {D grad v}.[c] - alpha [c].[v]
                            v += sgn[st] * 0.5 * D[sc] * gcb * va;
                            v += 0.5 * D[st] * gva * sgn[sc] * cb;
                            v -= alpha * sgn[st] * sgn[sc] * va * cb;
                            blk[st][sc](a, b) += w * v;
                        }
                    }
                }
        }
        const int cells[2] = {ed.minus, ed.plus};
        for (int st = 0; st < 2; ++st)
            for (int sc = 0; sc < 2; ++sc)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        if (blk[st][sc](a, b) != 0.0)
                            trip.emplace_back(cells[st] * n + a, cells[sc] * n + b, blk[st][sc](a, b));
    }

    const auto& bedges = mesh.boundary_edges();
    for (std::size_t e = 0; e < bedges.size(); ++e) {
        const BoundaryEdge& ed = bedges[e];
        const LineQuadrature q = segment_quadrature(ed.a, ed.b, nq);
        local.setZero();
        for (std::size_t i = 0; i < q.points.size(); ++i) {
            const double un = flow.boundary_flux(static_cast<int>(e), q.points[i]);
            eval_basis(basis, g, ed.cell, q.points[i], bp);
            const double w = q.weights[i];
            for (int a = 0; a < n; ++a) {
                if (io_.inflow[e]) {
                    constant_[ed.cell * n + a] -= w * un * params.c_in * bp.value[a];
                } else {
                    outflow_weights_[ed.cell * n + a] += w * un * bp.value[a];
                    for (int b = 0; b < n; ++b) local(a, b) -= w * un * bp.value[a] * bp.value[b];
                }
            }
        }
        if (io_.inflow[e]) inflow_ -= io_.flux[e] * params.c_in;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (local(a, b) != 0.0) trip.emplace_back(ed.cell * n + a, ed.cell * n + b, local(a, b));
    }

    rate_.resize(N, N);
    rate_.setFromTriplets(trip.begin(), trip.end());
    rate_ /= phi_;
    rate_.prune(0.0);
    constant_ /= phi_;

    const double h = g.h();
    double dt = std::numeric_limits<double>::infinity();
    if (max_speed > 0.0) dt = std::min(dt, h / (max_speed / phi_));
    if (max_diff > 0.0) dt = std::min(dt, phi_ * h * h / ((2.0 * k + 1) * (2.0 * k + 1)) / max_diff);
    dt_ = std::isfinite(dt) ? params.cfl * dt : 0.0;
}

Eigen::VectorXd TransportOperator::rhs(const DGField& c) const
{
    const Eigen::Map<const Eigen::VectorXd> x(c.data().data(), static_cast<Eigen::Index>(c.data().size()));
    if (x.size() != constant_.size()) throw std::invalid_argument("TransportOperator::rhs: field size mismatch");
    return rate_ * x + constant_;
}

double TransportOperator::mass(const DGField& c) const
{
    const int n = c.dofs_per_cell();
    const double s = std::sqrt(grid_.cell_area());
    double m = 0.0;
    for (int cell = 0; cell < c.cell_count(); ++cell) m += c.data()[static_cast<std::size_t>(cell) * n] * s;
    return phi_ * m;
}

double TransportOperator::outflow_rate(const DGField& c) const
{
    const Eigen::Map<const Eigen::VectorXd> x(c.data().data(), static_cast<Eigen::Index>(c.data().size()));
    return outflow_weights_.dot(x);
}

double TransportOperator::source_rate(const DGField& c) const
{
    const Eigen::Map<const Eigen::VectorXd> x(c.data().data(), static_cast<Eigen::Index>(c.data().size()));
    return source_weights_.dot(x) + source_constant_;
}

TransportState initial_state(const DarcySolution& flow, const TransportParams& params, int order)
{
    TransportState s;
    const double c0 = params.c0;
    s.c = project(flow.mesh().grid(), order, [c0](const Vec2&) { return c0; });
    return s;
}

void step(TransportState& state, const TransportOperator& op, const TransportParams& params, const Mesh& mesh,
          double dt, bool limit)
{
    if (dt <= 0.0) dt = op.stable_dt();
    if (!(dt > 0.0)) throw TransportError("step: no positive time step (velocity and diffusion vanish)");
    const Eigen::VectorXd r = op.rhs(state.c);
    auto& data = state.c.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += dt * r[static_cast<Eigen::Index>(i)];
    if (limit) {
        std::vector<int> all(mesh.cell_count());
        for (int c = 0; c < mesh.cell_count(); ++c) all[c] = c;
        state.c = apply_limiter(state.c, mesh, all);
    }
    state.t += dt;
    state.dt = dt;
    ++state.steps;
    const Grid& g = mesh.grid();
    state.pvi = state.t * op.water_inflow() / (params.phi * g.nx * g.hx * g.ny * g.hy);
    for (double v : data)
        if (!std::isfinite(v)) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "step %d: non-finite concentration at t=%.6g (pvi %.6g, dt %.3g)",
                          state.steps, state.t, state.pvi, dt);
            throw TransportError(msg);
        }
}

std::string snapshot_name(double pvi)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "c_pvi_%g.vtk", pvi);
    return buf;
}

TransportRun run_transport(const Scenario& scenario, const std::string& out_dir, const DarcyOptions& flow_options,
                           const TransportOptions& options)
{
    if (!scenario.transport) throw std::invalid_argument("run_transport: scenario has no [transport] section");
    const TransportParams& params = *scenario.transport;
    if (!(params.end_pvi > 0.0)) throw std::invalid_argument("run_transport: end_pvi must be positive");

    TransportRun run;
    // The transport flux reuses the flow's mass balance, so its residual becomes a source.
    DarcyOptions fo = flow_options;
    fo.refine_steps = std::max(fo.refine_steps, 1);
    run.flow = solve_darcy(scenario, fo);
    const Mesh& mesh = run.flow.mesh();
    const Grid& g = mesh.grid();
    const TransportOperator op(run.flow, params, options);
    if (!(op.water_inflow() > 0.0)) throw TransportError("run_transport: the flow has no inflow boundary");
    const double pore_volume = params.phi * g.nx * g.hx * g.ny * g.hy;
    const double pvi_rate = op.water_inflow() / pore_volume;

    std::vector<double> targets;
    for (double s : params.snapshots)
        if (s > 0.0 && s <= params.end_pvi * (1.0 + 1e-12)) targets.push_back(s);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_field_vtk((std::filesystem::path(out_dir) / "flow.vtk").string(), g,
                        {{"pressure", &run.flow.limited_p}, {"velocity", &run.flow.u}});
    }

    run.state = initial_state(run.flow, params, op.order());
    TransportState& st = run.state;
    const double m0 = op.mass(st.c);
    BalanceRow acc{0.0, 0.0, m0, 0.0, 0.0, 0.0};
    run.balance.push_back(acc);

    std::size_t next = 0;
    const double dt0 = op.stable_dt();
    if (!(dt0 > 0.0)) throw TransportError("run_transport: no positive time step");
    while (st.pvi < params.end_pvi * (1.0 - 1e-12)) {
        double goal = params.end_pvi;
        if (next < targets.size()) goal = std::min(goal, targets[next]);
        const double dt = std::min(dt0, (goal - st.pvi) / pvi_rate);
        const double in = op.inflow_rate() * dt;
        const double out = op.outflow_rate(st.c) * dt;
        const double src = op.source_rate(st.c) * dt;
        step(st, op, params, mesh, dt, options.limit);
        acc.inflow += in;
        acc.outflow += out;
        acc.source += src;
        bool snap = false;
        if (next < targets.size() && std::abs(st.pvi - targets[next]) <= 1e-9 * targets[next]) {
            st.pvi = targets[next];
            snap = true;
        }
        const bool last = st.pvi >= params.end_pvi * (1.0 - 1e-12);
        if (snap || last || (options.balance_every > 0 && st.steps % options.balance_every == 0)) {
            acc.t = st.t;
            acc.pvi = st.pvi;
            acc.mass = op.mass(st.c);
            run.balance.push_back(acc);
        }
        if (snap) {
            std::string path;
            if (!out_dir.empty()) {
                path = (std::filesystem::path(out_dir) / snapshot_name(targets[next])).string();
                write_field_vtk(path, g, {{"concentration", &st.c}});
            }
            run.snapshots.emplace_back(targets[next], path);
            ++next;
        }
    }

    const BalanceRow& end = run.balance.back();
    const double scale = std::max(std::abs(end.inflow), 1e-300);
    run.balance_error = std::abs(end.mass - m0 - end.inflow + end.outflow - end.source) / scale;

    if (!out_dir.empty()) {
        const std::string path = (std::filesystem::path(out_dir) / "balance.csv").string();
        std::ofstream out(path);
        if (!out) throw OutputError("cannot open '" + path + "' for writing");
        out << std::setprecision(17) << "t,pvi,mass,inflow,outflow\n";
        for (const auto& r : run.balance)
            out << r.t << ',' << r.pvi << ',' << r.mass << ',' << r.inflow << ',' << r.outflow << '\n';
        if (!out) throw OutputError("write to '" + path + "' failed");
    }
    return run;
}

}  // namespace rdfm
