#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ccflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Eigen::VectorXd;

/// Chart geometry became invalid (non-positive Jacobian, singular metric,
/// failed Newton inversion inside the tube).
class ChartError : public std::runtime_error {
public:
    explicit ChartError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Argument outside the declared (t, s) or spatial domain.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Linear or nonlinear solve failed; carries the residual history.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Bad configuration file or key.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ccflow
