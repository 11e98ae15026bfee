#pragma once

#include "ccflow/types.hpp"

#include <Eigen/Sparse>

namespace ccflow {

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct SparseSystem {
    SparseMat A;
    VectorXd rhs;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0; ///< final |r| / |b|
    std::vector<double> residual_history;
    bool converged = false;
};

/// Diagonally preconditioned BiCGStab with a fixed iteration order.
/// Residuals are relative to |b|. Throws SolverError on breakdown or
/// non-convergence, carrying the residual history.
VectorXd linear_solve(const SparseSystem& sys, double tol, int max_iters,
                      SolveStats* stats = nullptr,
                      const VectorXd* x0 = nullptr);

} // namespace ccflow
