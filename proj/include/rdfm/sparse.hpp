#pragma once

/**
 * @file sparse.hpp
 * @brief Sparse linear systems: CSR container, direct and iterative solves,
 *        and exact static condensation of cell-local blocks.
 */

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rdfm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief A x = b in compressed row storage.
 *
 * `block_offsets` optionally partitions the unknowns into contiguous groups
 * (one per cell); the block-Jacobi preconditioner uses it. Empty means one
 * block per unknown.
 *
 * `negative_block`, when non-empty, declares the matrix symmetric
 * quasi-definite: after a symmetric permutation it reads [[A, B], [B^T, -C]]
 * with A and C positive definite, and the flag is 1 for the unknowns of C.
 * The direct solver then factors C by Cholesky instead of running a general LU.
 */
struct LinearSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<int> block_offsets;  ///< size nblocks+1 when set
    std::vector<std::uint8_t> negative_block;

    int size() const { return static_cast<int>(rhs.size()); }
};

enum class SolveMethod { Auto, Direct, Iterative };

struct SolveOptions {
    SolveMethod method = SolveMethod::Auto;
    double tolerance = 1e-10;
    int max_iterations = 20000;
    int restart = 200;
    int direct_limit = 500000;  ///< Auto picks Direct up to this many unknowns
    bool equilibrate = true;    ///< scale rows by their max-norm before factorization
};

struct SolveResult {
    Eigen::VectorXd x;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    SolveMethod method = SolveMethod::Direct;
};

/**
 * Direct: sparse LU with partial pivoting (UMFPACK when available); for
 * quasi-definite systems a Cholesky factorization of C plus preconditioned
 * conjugate gradients on the (small) Schur complement of A.
 * Iterative: restarted GMRES, block-Jacobi preconditioned.
 * Throws SolverError on a singular factorization; iterative stagnation is
 * reported through `converged` with the best residual reached.
 */
SolveResult solve(const LinearSystem& system, const SolveOptions& options = {});

/// ||Ax - b||_2 / max(||b||_2, 1e-300)
double residual(const LinearSystem& system, const Eigen::VectorXd& x);

/// Checks the CSR invariants (square, sorted unique columns, no stored zeros).
void check_structure(const LinearSystem& system);

/// Writes "i j value" lines (0-based) followed by "rhs i value" lines.
void write_coordinate(const LinearSystem& system, const std::string& path);

/**
 * @brief Exact elimination of unknown groups whose diagonal block is block-diagonal.
 *
 * Each group lists unknown indices that are eliminated together with the
 * equations of the same indices. The submatrix coupling different groups
 * must vanish; this is checked. The reduced system keeps the remaining
 * unknowns in their original relative order, together with the matching
 * parts of `block_offsets` and `negative_block`.
 */
class Condensation {
public:
    Condensation(const LinearSystem& system, const std::vector<std::vector<int>>& groups);

    const LinearSystem& reduced() const { return reduced_; }
    LinearSystem& reduced() { return reduced_; }
    /// Expands a solution of the reduced system to the full unknown vector.
    Eigen::VectorXd expand(const Eigen::VectorXd& kept_solution) const;
    const std::vector<int>& kept() const { return kept_; }

private:
    int n_ = 0;
    std::vector<int> kept_;
    // Per group g: eliminated unknowns elim_[elim_off_[g]..), the kept columns
    // they couple to cols_[col_off_[g]..), y = D^-1 b_E, and G = D^-1 A_EC (row-major).
    std::vector<int> elim_, elim_off_;
    std::vector<int> cols_, col_off_;
    std::vector<double> y_;
    std::vector<double> G_;
    std::vector<std::size_t> G_off_;
    LinearSystem reduced_;
};

}  // namespace rdfm
