#pragma once

#include "sinhp/geometry.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <mutex>
#include <optional>

namespace sinhp {

/// Real-valued grid function.
struct Field {
    std::shared_ptr<const Grid> grid;
    Eigen::VectorXd values;

    Field() = default;
    explicit Field(std::shared_ptr<const Grid> g)
        : grid(std::move(g)), values(Eigen::VectorXd::Zero(grid->n_nodes())) {}
    Field(std::shared_ptr<const Grid> g, Eigen::VectorXd v);

    double operator[](int i) const { return values[i]; }
    double& operator[](int i) { return values[i]; }
    int size() const { return static_cast<int>(values.size()); }
    double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
    bool all_finite() const { return values.allFinite(); }
};

/// Discrete -Laplace with the Robin condition du/dnu + lambda u = 0 folded
/// into the boundary rows by ghost elimination against the analytic normal.
/// Row/column ordering matches Grid node order.
class RobinOperator {
public:
    RobinOperator(std::shared_ptr<const Grid> grid, double robin_coeff);

    const std::shared_ptr<const Grid>& grid() const { return grid_; }
    double robin_coeff() const { return lambda_; }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }
    /// Maps boundary data g (values at boundary nodes) to its RHS
    /// contribution: solve A x = rhs + g_map * g.
    const Eigen::SparseMatrix<double>& boundary_data_map() const { return g_map_; }

    /// Matrix-vector product A f.
    Field apply(const Field& f) const;

    /// Solves -lap u = rhs in Omega, du/dnu + lambda u = g on the boundary.
    /// Residual contract: ||A x - b||_inf <= 1e-10 ||b||_inf.
    Field solve(const Field& rhs, const std::optional<Field>& boundary_data = std::nullopt) const;

private:
    void factorize() const;

    std::shared_ptr<const Grid> grid_;
    double lambda_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SparseMatrix<double> g_map_;
    mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    mutable std::once_flag factorized_;
};

inline RobinOperator assemble(std::shared_ptr<const Grid> grid, double robin_coeff) {
    return RobinOperator(std::move(grid), robin_coeff);
}

} // namespace sinhp
