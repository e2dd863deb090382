#pragma once

/**
 * @file transport.hpp
 * @brief Interior-penalty DG transport of a concentration in a fixed Darcy
 *        field, stepped with forward Euler.
 *
 * The advective normal flux on each edge is the Darcy numerical flux u_hat.n,
 * the one the flow solve conserves, so a constant concentration matching the
 * inflow value is an exact steady state. With the velocity fixed the semi-
 * discrete right-hand side is affine in c and is assembled once.
 */

#include <string>
#include <vector>

#include "rdfm/darcy.hpp"

namespace rdfm {

struct IoBoundaries {
    std::vector<std::uint8_t> inflow;  ///< per boundary edge: 1 if int_e u_hat.n < 0
    std::vector<double> flux;          ///< int_e u_hat.n per boundary edge
    double total_inflow = 0.0;         ///< -sum over inflow edges of their flux
};

IoBoundaries classify_io_boundaries(const DarcySolution& flow);

struct TransportOptions {
    double penalty_coeff = -1.0;  ///< diffusion penalty factor; <= 0 means 4(k+1)^2
    bool limit = false;           ///< apply the vertex-bound limiter to every cell after each step
    int balance_every = 100;      ///< balance rows every this many steps (plus snapshots and the end)
};

/// d/dt coefficients of c = rate * c + constant, already divided by phi (the basis is orthonormal).
class TransportOperator {
public:
    TransportOperator(const DarcySolution& flow, const TransportParams& params, const TransportOptions& options = {});

    Eigen::VectorXd rhs(const DGField& c) const;

    /// cfl * min(h / lambda_conv, phi h^2 / ((2k+1)^2 lambda_diff)); 0 when both speeds vanish.
    double stable_dt() const { return dt_; }

    double mass(const DGField& c) const;          ///< int phi c
    double inflow_rate() const { return inflow_; }  ///< contaminant entering per unit time
    double outflow_rate(const DGField& c) const;  ///< contaminant leaving per unit time
    double source_rate(const DGField& c) const;   ///< int f c~
    double water_inflow() const { return io_.total_inflow; }

    const IoBoundaries& io() const { return io_; }
    const SparseMatrix& matrix() const { return rate_; }
    const Eigen::VectorXd& constant() const { return constant_; }
    int order() const { return order_; }

private:
    Grid grid_;
    int order_ = 1;
    double phi_ = 1.0;
    double dt_ = 0.0;
    double inflow_ = 0.0;
    IoBoundaries io_;
    SparseMatrix rate_;
    Eigen::VectorXd constant_;
    Eigen::VectorXd outflow_weights_, source_weights_;
    double source_constant_ = 0.0;
};

struct TransportState {
    DGField c;
    double t = 0.0;
    double pvi = 0.0;
    double dt = 0.0;
    int steps = 0;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Initial state c = c0 everywhere.
TransportState initial_state(const DarcySolution& flow, const TransportParams& params, int order);

/**
 * @brief One forward Euler step of length `dt` (the operator's stable step
 * when dt <= 0). Updates t and pvi. Throws TransportError on non-finite values.
 */
void step(TransportState& state, const TransportOperator& op, const TransportParams& params, const Mesh& mesh,
          double dt = 0.0, bool limit = false);

struct BalanceRow {
    double t = 0.0;
    double pvi = 0.0;
    double mass = 0.0;
    double inflow = 0.0;   ///< cumulative
    double outflow = 0.0;  ///< cumulative
    double source = 0.0;   ///< cumulative
};

struct TransportRun {
    DarcySolution flow;
    TransportState state;
    std::vector<BalanceRow> balance;
    std::vector<std::pair<double, std::string>> snapshots;  ///< (pvi, path)
    double balance_error = 0.0;  ///< |dM - in + out - src| / in at the end
};

/// File name used for the snapshot at `pvi`.
std::string snapshot_name(double pvi);

/**
 * @brief Solves the flow once, then steps to end_pvi.
 *
 * Steps are shortened to land on every snapshot time. With a non-empty
 * `out_dir` the snapshots c_pvi_<value>.vtk, the flow field and balance.csv
 * (t,pvi,mass,inflow,outflow) are written there.
 */
TransportRun run_transport(const Scenario& scenario, const std::string& out_dir,
                           const DarcyOptions& flow_options = {}, const TransportOptions& options = {});

}  // namespace rdfm
