#include "rdfm/sparse.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#ifdef RDFM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#ifdef RDFM_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

namespace rdfm {

double residual(const LinearSystem& system, const Eigen::VectorXd& x)
{
    if (x.size() != system.rhs.size()) throw std::invalid_argument("residual: dimension mismatch");
    const Eigen::VectorXd r = system.matrix * x - system.rhs;
    return r.norm() / std::max(system.rhs.norm(), 1e-300);
}

void check_structure(const LinearSystem& system)
{
    const auto& A = system.matrix;
    if (A.rows() != A.cols()) throw SolverError("linear system is not square");
    if (A.rows() != system.rhs.size()) throw SolverError("right-hand side length differs from matrix size");
    for (int r = 0; r < A.outerSize(); ++r) {
        int last = -1;
        for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
            if (it.col() <= last) throw SolverError("row " + std::to_string(r) + ": columns not sorted/unique");
            if (it.value() == 0.0) throw SolverError("row " + std::to_string(r) + ": explicit zero stored");
            if (!std::isfinite(it.value())) throw SolverError("row " + std::to_string(r) + ": non-finite entry");
            last = it.col();
        }
    }
}

void write_coordinate(const LinearSystem& system, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    const auto& A = system.matrix;
    for (int r = 0; r < A.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(A, r); it; ++it) out << r << ' ' << it.col() << ' ' << it.value() << '\n';
    for (int i = 0; i < system.rhs.size(); ++i) out << "rhs " << i << ' ' << system.rhs[i] << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace {

/// Block-Jacobi preconditioner usable by Eigen's iterative solvers.
class BlockJacobi {
public:
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

    BlockJacobi() = default;

    void set_blocks(std::vector<int> offsets) { offsets_ = std::move(offsets); }

    template <typename M>
    BlockJacobi& analyzePattern(const M&)
    {
        return *this;
    }

    template <typename M>
    BlockJacobi& factorize(const M& A)
    {
        const int n = static_cast<int>(A.rows());
        if (offsets_.empty() || offsets_.back() != n) {
            offsets_.resize(n + 1);
            for (int i = 0; i <= n; ++i) offsets_[i] = i;
        }
        blocks_.clear();
        for (std::size_t b = 0; b + 1 < offsets_.size(); ++b) {
            const int lo = offsets_[b], sz = offsets_[b + 1] - lo;
            Eigen::MatrixXd D = Eigen::MatrixXd::Zero(sz, sz);
            for (int r = lo; r < lo + sz; ++r)
                for (typename M::InnerIterator it(A, r); it; ++it)
                    if (it.col() >= lo && it.col() < lo + sz) D(r - lo, it.col() - lo) = it.value();
            Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
            if (!lu.isInvertible()) {
                // fall back to the diagonal, guarding zeros
                Eigen::MatrixXd I = Eigen::MatrixXd::Zero(sz, sz);
                for (int i = 0; i < sz; ++i) I(i, i) = D(i, i) != 0.0 ? 1.0 / D(i, i) : 1.0;
                blocks_.push_back(I);
            } else {
                blocks_.push_back(lu.inverse());
            }
        }
        return *this;
    }

    template <typename M>
    BlockJacobi& compute(const M& A)
    {
        return factorize(A);
    }

    template <typename Rhs>
    Eigen::VectorXd solve(const Rhs& b) const
    {
        Eigen::VectorXd x(b.size());
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            const int lo = offsets_[k], sz = offsets_[k + 1] - lo;
            x.segment(lo, sz) = blocks_[k] * b.segment(lo, sz);
        }
        return x;
    }

    Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
    std::vector<int> offsets_;
    std::vector<Eigen::MatrixXd> blocks_;
};

SolveResult solve_lu(const LinearSystem& system, const SolveOptions& options)
{
    using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    const int n = system.size();
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
    if (options.equilibrate) {
        for (int r = 0; r < system.matrix.outerSize(); ++r) {
            double m = 0.0;
            for (SparseMatrix::InnerIterator it(system.matrix, r); it; ++it) m = std::max(m, std::abs(it.value()));
            if (m == 0.0) throw SolverError("singular system: row " + std::to_string(r) + " is empty");
            scale[r] = 1.0 / m;
        }
    }
    ColMatrix A = scale.asDiagonal() * system.matrix;
    const Eigen::VectorXd b = scale.asDiagonal() * system.rhs;

    SolveResult result;
    result.method = SolveMethod::Direct;
#ifdef RDFM_HAVE_UMFPACK
    Eigen::UmfPackLU<ColMatrix> lu;
    // The LDG pattern is structurally symmetric: order on A + A^T.
    lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
    if (const char* ord = std::getenv("RDFM_UMF_ORDERING")) lu.umfpackControl()(UMFPACK_ORDERING) = std::atoi(ord);
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("direct solve: singular or ill-posed system (UMFPACK)");
    result.x = lu.solve(b);
#else
    Eigen::SparseLU<ColMatrix> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("direct solve: singular pivot (" + lu.lastErrorMessage() + ")");
    result.x = lu.solve(b);
#endif
    if (!result.x.allFinite()) throw SolverError("direct solve: non-finite solution (singular system)");
    result.residual = residual(system, result.x);
    result.iterations = 1;
    result.converged = result.residual <= std::max(options.tolerance, 1e-6);
    return result;
}

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

#ifdef RDFM_HAVE_CHOLMOD
using Cholesky = Eigen::CholmodSupernodalLLT<ColMatrix, Eigen::Lower>;
#else
using Cholesky = Eigen::SimplicialLLT<ColMatrix, Eigen::Lower>;
#endif

// Rows `rows` and columns `cols` of A (both given as index lists), scaled by `sign`.
ColMatrix extract(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& col_map,
                  int ncols, double sign)
{
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (SparseMatrix::InnerIterator it(A, rows[i]); it; ++it) {
            const int c = col_map[it.col()];
            if (c >= 0) t.emplace_back(static_cast<int>(i), c, sign * it.value());
        }
    ColMatrix M(static_cast<int>(rows.size()), ncols);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

/**
 * K = [[A, B], [B^T, -C]] (after permutation): Cholesky of C, then conjugate
 * gradients on S = A + B C^-1 B^T preconditioned by A. Returns false when C
 * or A turns out not to be positive definite.
 */
bool solve_quasidefinite(const LinearSystem& system, const SolveOptions& options, SolveResult& result)
{
    const auto& K = system.matrix;
    const int n = system.size();
    std::vector<int> P, U, pmap(n, -1), umap(n, -1);
    for (int i = 0; i < n; ++i) {
        if (system.negative_block[i]) {
            pmap[i] = static_cast<int>(P.size());
            P.push_back(i);
        } else {
            umap[i] = static_cast<int>(U.size());
            U.push_back(i);
        }
    }
    const int np = static_cast<int>(P.size()), nu = static_cast<int>(U.size());

    // Change of variables u = v - E p with E = D^-1 K_UP, D the absolute row
    // sums of A. It keeps the quasi-definite form and adds
    // E^T (2D - A) E to C, which makes C definite where it is only semidefinite.
    ColMatrix Bup, Bpu, Auu, E;
    ColMatrix C = extract(K, P, pmap, np, -1.0);
    Eigen::SimplicialLLT<ColMatrix, Eigen::Lower> precond;
    if (nu > 0) {
        Auu = extract(K, U, umap, nu, 1.0);
        const ColMatrix Bup0 = extract(K, U, pmap, np, 1.0);
        const ColMatrix Bpu0 = extract(K, P, umap, nu, 1.0);
        Eigen::VectorXd dinv(nu);
        for (int i = 0; i < nu; ++i) {
            double sum = 0.0;
            for (SparseMatrix::InnerIterator it(K, U[i]); it; ++it)
                if (umap[it.col()] >= 0) sum += std::abs(it.value());
            if (!(sum > 0.0)) return false;
            dinv[i] = 1.0 / sum;
        }
        E = dinv.asDiagonal() * Bup0;
        const ColMatrix AE = Auu * E;
        Bup = Bup0 - AE;
        Bpu = Bpu0 - ColMatrix(E.transpose()) * Auu;
        C = C + ColMatrix(E.transpose()) * Bup0 + Bpu0 * E - ColMatrix(E.transpose()) * AE;
        C.prune(0.0);
        if (std::getenv("RDFM_PLAIN_PRECOND")) {
            precond.compute(Auu);
        } else {
            Eigen::VectorXd cinv = C.diagonal();
            for (int i = 0; i < np; ++i) cinv[i] = cinv[i] > 0.0 ? 1.0 / cinv[i] : 0.0;
            const ColMatrix M = Auu + ColMatrix(Bup * cinv.asDiagonal() * ColMatrix(Bup.transpose()));
            precond.compute(M);
        }
        if (precond.info() != Eigen::Success) return false;
    }
    Cholesky chol;
#ifdef RDFM_HAVE_CHOLMOD
    chol.cholmod().print = 0;  // failure is reported through info() and handled by the caller
#endif
    chol.compute(C);
    if (chol.info() != Eigen::Success) return false;
    C = ColMatrix();

    int cg_iterations = 0;
    bool cg_ok = true;
    const double cg_tol = std::min(1e-12, 1e-2 * options.tolerance);
    auto block_solve = [&](const Eigen::VectorXd& b) {
        Eigen::VectorXd bu(nu), bp(np);
        for (int i = 0; i < nu; ++i) bu[i] = b[U[i]];
        for (int i = 0; i < np; ++i) bp[i] = b[P[i]];
        if (nu > 0) bp -= E.transpose() * bu;
        Eigen::VectorXd xu = Eigen::VectorXd::Zero(nu);
        if (nu > 0) {
            auto S = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                const Eigen::VectorXd w = chol.solve(Bpu * v);
                return Auu * v + Bup * w;
            };
            const Eigen::VectorXd rhs = bu + Bup * chol.solve(bp);
            const double bnorm = std::max(rhs.norm(), 1e-300);
            Eigen::VectorXd r = rhs, z = precond.solve(r), d = z;
            double rz = r.dot(z);
            const int max_it = std::max(50, std::min(options.max_iterations, 2000));
            int it = 0;
            for (; it < max_it && r.norm() > cg_tol * bnorm; ++it) {
                const Eigen::VectorXd q = S(d);
                const double dq = d.dot(q);
                if (!(dq > 0.0)) {
                    cg_ok = false;
                    break;
                }
                const double a = rz / dq;
                xu += a * d;
                r -= a * q;
                z = precond.solve(r);
                const double rz_new = r.dot(z);
                d = z + (rz_new / rz) * d;
                rz = rz_new;
            }
            cg_iterations += it;
        }
        const Eigen::VectorXd xp = chol.solve((nu > 0 ? Eigen::VectorXd(Bpu * xu) : Eigen::VectorXd::Zero(np)) - bp);
        Eigen::VectorXd x(n);
        if (nu > 0) xu -= E * xp;
        for (int i = 0; i < nu; ++i) x[U[i]] = xu[i];
        for (int i = 0; i < np; ++i) x[P[i]] = xp[i];
        return x;
    };

    Eigen::VectorXd x = block_solve(system.rhs);
    double res = residual(system, x);
    for (int pass = 0; pass < 3 && res > options.tolerance && cg_ok; ++pass) {
        x += block_solve(system.rhs - system.matrix * x);
        res = residual(system, x);
    }
    if (!cg_ok || !x.allFinite()) return false;
    result.x = std::move(x);
    result.residual = res;
    result.iterations = std::max(1, cg_iterations);
    result.method = SolveMethod::Direct;
    result.converged = res <= std::max(options.tolerance, 1e-6);
    return true;
}

SolveResult solve_iterative(const LinearSystem& system, const SolveOptions& options)
{
    Eigen::GMRES<SparseMatrix, BlockJacobi> gmres;
    gmres.preconditioner().set_blocks(system.block_offsets);
    gmres.set_restart(options.restart);
    gmres.setTolerance(options.tolerance);
    gmres.setMaxIterations(options.max_iterations);
    gmres.compute(system.matrix);

    SolveResult result;
    result.method = SolveMethod::Iterative;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(system.size());
    Eigen::VectorXd best = x;
    double best_res = residual(system, x);
    int used = 0;
    // The inner criterion is on the preconditioned residual; restart on the true one.
    for (int pass = 0; pass < 8 && used < options.max_iterations; ++pass) {
        gmres.setMaxIterations(options.max_iterations - used);
        x = gmres.solveWithGuess(system.rhs, x);
        used += static_cast<int>(gmres.iterations());
        const double res = residual(system, x);
        if (std::isfinite(res) && res < best_res) {
            best_res = res;
            best = x;
        }
        if (res <= options.tolerance) break;
        gmres.setTolerance(gmres.tolerance() * 0.1);
    }
    result.x = best;
    result.residual = best_res;
    result.iterations = used;
    result.converged = best_res <= options.tolerance;
    return result;
}

}  // namespace

SolveResult solve(const LinearSystem& system, const SolveOptions& options)
{
    if (system.matrix.rows() != system.matrix.cols() || system.matrix.rows() != system.rhs.size())
        throw SolverError("solve: dimension mismatch");
    if (system.size() == 0) return {Eigen::VectorXd(), 0.0, 0, true, SolveMethod::Direct};

    SolveMethod method = options.method;
    if (method == SolveMethod::Auto)
        method = system.size() <= options.direct_limit ? SolveMethod::Direct : SolveMethod::Iterative;
    if (method == SolveMethod::Iterative) return solve_iterative(system, options);
    if (!system.negative_block.empty()) {
        if (static_cast<int>(system.negative_block.size()) != system.size())
            throw SolverError("solve: negative_block length differs from system size");
        SolveResult r;
        if (solve_quasidefinite(system, options, r)) return r;
    }
    return solve_lu(system, options);
}

Condensation::Condensation(const LinearSystem& system, const std::vector<std::vector<int>>& groups)
    : n_(system.size())
{
    const auto& A = system.matrix;
    std::vector<int> group_of(n_, -1);
    std::vector<int> local(n_, -1);  // position within its group, or within kept_
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t l = 0; l < groups[g].size(); ++l) {
            const int i = groups[g][l];
            if (i < 0 || i >= n_) throw std::invalid_argument("Condensation: index out of range");
            if (group_of[i] != -1) throw std::invalid_argument("Condensation: index in two groups");
            group_of[i] = static_cast<int>(g);
            local[i] = static_cast<int>(l);
        }
    for (int i = 0; i < n_; ++i)
        if (group_of[i] == -1) {
            local[i] = static_cast<int>(kept_.size());
            kept_.push_back(i);
        }
    const int nk = static_cast<int>(kept_.size());
    const int ng = static_cast<int>(groups.size());

    elim_off_.assign(1, 0);
    col_off_.assign(1, 0);
    G_off_.assign(1, 0);
    std::vector<int> marker(nk, -1);
    for (int g = 0; g < ng; ++g) {
        const auto& E = groups[g];
        const int m = static_cast<int>(E.size());
        elim_.insert(elim_.end(), E.begin(), E.end());
        elim_off_.push_back(static_cast<int>(elim_.size()));

        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
        Eigen::VectorXd b(m);
        const int c0 = static_cast<int>(cols_.size());
        for (int r = 0; r < m; ++r) {
            b[r] = system.rhs[E[r]];
            for (SparseMatrix::InnerIterator it(A, E[r]); it; ++it) {
                const int j = static_cast<int>(it.col());
                if (group_of[j] == g) {
                    D(r, local[j]) = it.value();
                } else if (group_of[j] != -1) {
                    throw std::invalid_argument("Condensation: groups are coupled");
                } else if (marker[local[j]] != g) {
                    marker[local[j]] = g;
                    cols_.push_back(local[j]);
                }
            }
        }
        std::sort(cols_.begin() + c0, cols_.end());
        col_off_.push_back(static_cast<int>(cols_.size()));
        const int nc = static_cast<int>(cols_.size()) - c0;

        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(m, nc);
        for (int r = 0; r < m; ++r)
            for (SparseMatrix::InnerIterator it(A, E[r]); it; ++it) {
                const int j = static_cast<int>(it.col());
                if (group_of[j] != -1) continue;
                const auto pos = std::lower_bound(cols_.begin() + c0, cols_.end(), local[j]) - (cols_.begin() + c0);
                R(r, pos) = it.value();
            }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
        if (!lu.isInvertible()) throw SolverError("Condensation: singular local block");
        const Eigen::MatrixXd G = lu.solve(R);
        const Eigen::VectorXd y = lu.solve(b);
        y_.insert(y_.end(), y.data(), y.data() + m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < nc; ++c) G_.push_back(G(r, c));
        G_off_.push_back(G_.size());
    }

    // Row-wise Schur complement: S(r,:) = A_KK(r,:) - sum_E A(r,E) G_E.
    std::vector<int> outer(nk + 1, 0), inner;
    std::vector<double> values;
    inner.reserve(A.nonZeros() / 2);
    values.reserve(A.nonZeros() / 2);
    Eigen::VectorXd rhs(nk);
    std::vector<double> acc(nk, 0.0);
    std::fill(marker.begin(), marker.end(), -1);
    std::vector<int> row_cols;
    for (int rk = 0; rk < nk; ++rk) {
        const int r = kept_[rk];
        row_cols.clear();
        double br = system.rhs[r];
        auto touch = [&](int col, double v) {
            if (marker[col] != rk) {
                marker[col] = rk;
                acc[col] = 0.0;
                row_cols.push_back(col);
            }
            acc[col] += v;
        };
        for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
            const int j = static_cast<int>(it.col());
            const int g = group_of[j];
            if (g == -1) {
                touch(local[j], it.value());
                continue;
            }
            const int l = local[j];
            br -= it.value() * y_[elim_off_[g] + l];
            const int nc = col_off_[g + 1] - col_off_[g];
            const double* Grow = G_.data() + G_off_[g] + static_cast<std::size_t>(l) * nc;
            for (int c = 0; c < nc; ++c)
                if (Grow[c] != 0.0) touch(cols_[col_off_[g] + c], -it.value() * Grow[c]);
        }
        std::sort(row_cols.begin(), row_cols.end());
        for (int c : row_cols)
            if (acc[c] != 0.0) {
                inner.push_back(c);
                values.push_back(acc[c]);
            }
        outer[rk + 1] = static_cast<int>(inner.size());
        rhs[rk] = br;
    }
    reduced_.matrix = Eigen::Map<const SparseMatrix>(nk, nk, static_cast<int>(inner.size()), outer.data(),
                                                     inner.data(), values.data());
    reduced_.rhs = std::move(rhs);

    if (!system.block_offsets.empty()) {
        reduced_.block_offsets.push_back(0);
        for (std::size_t b = 0; b + 1 < system.block_offsets.size(); ++b) {
            int count = 0;
            for (int i = system.block_offsets[b]; i < system.block_offsets[b + 1]; ++i) count += group_of[i] == -1;
            if (count > 0) reduced_.block_offsets.push_back(reduced_.block_offsets.back() + count);
        }
    }
    if (!system.negative_block.empty()) {
        reduced_.negative_block.resize(nk);
        for (int i = 0; i < nk; ++i) reduced_.negative_block[i] = system.negative_block[kept_[i]];
    }
}

Eigen::VectorXd Condensation::expand(const Eigen::VectorXd& kept_solution) const
{
    if (kept_solution.size() != static_cast<Eigen::Index>(kept_.size()))
        throw std::invalid_argument("Condensation::expand: dimension mismatch");
    Eigen::VectorXd x(n_);
    for (std::size_t i = 0; i < kept_.size(); ++i) x[kept_[i]] = kept_solution[i];
    const int ng = static_cast<int>(elim_off_.size()) - 1;
    for (int g = 0; g < ng; ++g) {
        const int m = elim_off_[g + 1] - elim_off_[g];
        const int nc = col_off_[g + 1] - col_off_[g];
        for (int r = 0; r < m; ++r) {
            double v = y_[elim_off_[g] + r];
            const double* Grow = G_.data() + G_off_[g] + static_cast<std::size_t>(r) * nc;
            for (int c = 0; c < nc; ++c) v -= Grow[c] * kept_solution[cols_[col_off_[g] + c]];
            x[elim_[elim_off_[g] + r]] = v;
        }
    }
    return x;
}

}  // namespace rdfm
