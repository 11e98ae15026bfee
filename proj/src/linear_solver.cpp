#include "ccflow/linear_solver.hpp"

#include <cmath>

namespace ccflow {

VectorXd linear_solve(const SparseSystem& sys, double tol, int max_iters,
                      SolveStats* stats, const VectorXd* x0) {
    const long n = sys.rhs.size();
    if (sys.A.rows() != n || sys.A.cols() != n)
        throw SolverError("linear_solve: shape mismatch", {});

    VectorXd inv_diag(n);
    for (long i = 0; i < n; ++i) {
        const double d = sys.A.coeff(i, i);
        inv_diag[i] = (std::abs(d) > 1e-300) ? 1.0 / d : 1.0;
    }

    SolveStats local;
    SolveStats& st = stats ? *stats : local;
    st.residual_history.clear();

    VectorXd x = x0 ? *x0 : VectorXd::Zero(n);
    const double bnorm = sys.rhs.norm();
    if (bnorm == 0.0) {
        st.converged = true;
        return VectorXd::Zero(n);
    }

    VectorXd r = sys.rhs - sys.A * x;
    VectorXd r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    VectorXd v = VectorXd::Zero(n), p = VectorXd::Zero(n);
    VectorXd y(n), z(n), s(n), t(n);

    double res = r.norm() / bnorm;
    st.residual_history.push_back(res);
    if (res <= tol) {
        st.converged = true;
        st.residual = res;
        return x;
    }

    for (int it = 1; it <= max_iters; ++it) {
        const double rho_new = r0.dot(r);
        if (std::abs(rho_new) < 1e-300) {
            // restart with the current residual as the shadow vector
            r0 = r;
            rho = r.squaredNorm();
            p = r;
        } else {
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            p = r + beta * (p - omega * v);
        }
        y = inv_diag.cwiseProduct(p);
        v = sys.A * y;
        const double r0v = r0.dot(v);
        if (std::abs(r0v) < 1e-300)
            throw SolverError("bicgstab breakdown (r0.v ~ 0)",
                              st.residual_history);
        alpha = rho / r0v;
        s = r - alpha * v;
        res = s.norm() / bnorm;
        if (res <= tol) {
            x += alpha * y;
            st.residual_history.push_back(res);
            st.iterations = it;
            st.residual = res;
            st.converged = true;
            return x;
        }
        z = inv_diag.cwiseProduct(s);
        t = sys.A * z;
        const double tt = t.squaredNorm();
        if (tt < 1e-300)
            throw SolverError("bicgstab breakdown (t ~ 0)", st.residual_history);
        omega = t.dot(s) / tt;
        x += alpha * y + omega * z;
        r = s - omega * t;
        res = r.norm() / bnorm;
        st.residual_history.push_back(res);
        st.iterations = it;
        if (res <= tol) {
            st.residual = res;
            st.converged = true;
            return x;
        }
        if (std::abs(omega) < 1e-300)
            throw SolverError("bicgstab breakdown (omega ~ 0)",
                              st.residual_history);
    }
    st.residual = res;
    throw SolverError("bicgstab did not converge in " +
                          std::to_string(max_iters) + " iterations (residual " +
                          std::to_string(res) + ")",
                      st.residual_history);
}

} // namespace ccflow
