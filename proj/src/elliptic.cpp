#include "sinhp/elliptic.hpp"

#include "sinhp/errors.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace sinhp {

Field::Field(std::shared_ptr<const Grid> g, Eigen::VectorXd v)
    : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->n_nodes())
        throw DomainError("Field: value count does not match grid node count");
}

namespace {

struct MapCoeffs {
    double A, B, C; // flux coefficients
};

} // namespace

RobinOperator::RobinOperator(std::shared_ptr<const Grid> grid, double robin_coeff)
    : grid_(std::move(grid)), lambda_(robin_coeff) {
    if (lambda_ < 0) throw ConfigError("RobinOperator: robin coefficient must be >= 0");

    const Grid& g = *grid_;
    const int n = g.n_nodes();
    const int nr = g.n_radial();
    const int nt = g.n_angular();
    const double du = g.du();
    const double dt = g.dt();
    const bool has_center = g.has_center();
    const bool annulus = g.domain().is_annulus();

    auto coeffs = [&](double u, double t) -> MapCoeffs {
        const double c = g.radius_map(u, t);
        const double cu = g.radius_map_du(u, t);
        const double ct = g.radius_map_dt(u, t);
        return {(ct * ct + c * c) / (cu * c), ct / c, cu / c};
    };

    // Ghost elimination data at a boundary angle index k (outer: level nr+1,
    // inner annulus: level -1):
    //   f_ghost = f_mirror + alpha*(g - lambda f_b) + gamma*(f_{b,k+1} - f_{b,k-1})
    auto ghost_outer = [&](int k) {
        const double t = g.t_of(k);
        const double c = g.radius_map(1.0, t);
        const double cu = g.radius_map_du(1.0, t);
        const double ct = g.radius_map_dt(1.0, t);
        const double S = std::sqrt(ct * ct + c * c);
        const double alpha = 2.0 * du * c * cu / S;
        const double gamma = du * cu * ct / (S * S * dt);
        return std::pair<double, double>(alpha, gamma);
    };
    auto ghost_inner = [&](int /*k*/) {
        // Annulus inner circle: nu points toward the origin; c_t = 0.
        const double cu = g.radius_map_du(0.0, 0.0);
        const double alpha = 2.0 * du * cu;
        return std::pair<double, double>(alpha, 0.0);
    };

    std::vector<Eigen::Triplet<double>> trips, gtrips;
    trips.reserve(static_cast<size_t>(n) * 12);

    for (int row = 0; row < n; ++row) {
        std::map<int, double> acc;          // column -> coefficient
        std::map<int, double> ghost;        // encoded ghost id -> coefficient
        const int gid_outer_base = 1 << 28; // ghost columns, eliminated below
        const int gid_inner_base = 1 << 29;

        auto add = [&](int level, int k, double v) {
            if (v == 0.0) return;
            k = ((k % nt) + nt) % nt;
            if (level == nr + 1) {
                ghost[gid_outer_base + k] += v;
            } else if (level == -1) {
                ghost[gid_inner_base + k] += v;
            } else {
                acc[g.node_index(level, k)] += v;
            }
        };

        const int i = g.level_of(row);
        const int k = g.angular_of(row);
        const double t = g.t_of(k);
        const double u = g.u_of_level(i);

        if (has_center && row == 0) {
            // Polar-origin cell: -lap f |_0 = -[sum_k F^u_{1/2,k} dt] / area_0.
            const double inv_area = 1.0 / g.cell_area(0);
            for (int kk = 0; kk < nt; ++kk) {
                const MapCoeffs m = coeffs(0.5 * du, g.t_of(kk));
                const double w = -dt * inv_area;
                // A*(f_{1,kk} - f_0)/du
                add(1, kk, w * m.A / du);
                add(0, kk, -w * m.A / du);
                // -B * 1/2 * D_t f_{1,kk}   (D_t at the center vanishes)
                add(1, kk + 1, w * (-m.B) * 0.5 / (2.0 * dt));
                add(1, kk - 1, -w * (-m.B) * 0.5 / (2.0 * dt));
            }
        } else {
            const double c = g.radius_map(u, t);
            const double cu = g.radius_map_du(u, t);
            const double inv = 1.0 / (c * cu);

            // Radial fluxes at u +- du/2, tangential at t +- dt/2.
            const MapCoeffs mup = coeffs(u + 0.5 * du, t);
            const MapCoeffs mum = coeffs(u - 0.5 * du, t);
            const MapCoeffs mtp = coeffs(u, t + 0.5 * dt);
            const MapCoeffs mtm = coeffs(u, t - 0.5 * dt);

            auto add_Dt = [&](int level, int kk, double w) {
                // w * D_t f_{level,kk}
                if (has_center && level == 0) return; // center: no tangential variation
                add(level, kk + 1, w / (2.0 * dt));
                add(level, kk - 1, -w / (2.0 * dt));
            };
            auto add_Du = [&](int level, int kk, double w) {
                // w * D_u f_{level,kk}
                add(level + 1, kk, w / (2.0 * du));
                add(level - 1, kk, -w / (2.0 * du));
            };

            const double wu = -inv / du; // applied to (F^u_{+} - F^u_{-})
            // F^u_{i+1/2,k}
            add(i + 1, k, wu * mup.A / du);
            add(i, k, -wu * mup.A / du);
            add_Dt(i, k, wu * (-mup.B) * 0.5);
            add_Dt(i + 1, k, wu * (-mup.B) * 0.5);
            // - F^u_{i-1/2,k}
            add(i, k, -wu * mum.A / du);
            add(i - 1, k, wu * mum.A / du);
            add_Dt(i - 1, k, -wu * (-mum.B) * 0.5);
            add_Dt(i, k, -wu * (-mum.B) * 0.5);

            const double wt = -inv / dt;
            // F^t_{i,k+1/2}
            add(i, k + 1, wt * mtp.C / dt);
            add(i, k, -wt * mtp.C / dt);
            add_Du(i, k, wt * (-mtp.B) * 0.5);
            add_Du(i, k + 1, wt * (-mtp.B) * 0.5);
            // - F^t_{i,k-1/2}
            add(i, k, -wt * mtm.C / dt);
            add(i, k - 1, wt * mtm.C / dt);
            add_Du(i, k - 1, -wt * (-mtm.B) * 0.5);
            add_Du(i, k, -wt * (-mtm.B) * 0.5);
        }

        // Eliminate ghosts through the Robin condition.
        for (const auto& [gid, gc] : ghost) {
            const bool outer = gid < gid_inner_base;
            const int kk = gid & ((1 << 28) - 1);
            if (outer) {
                const auto [alpha, gamma] = ghost_outer(kk);
                acc[g.node_index(nr - 1, kk)] += gc;
                acc[g.node_index(nr, kk)] += -gc * alpha * lambda_;
                if (gamma != 0.0) {
                    acc[g.node_index(nr, kk + 1)] += gc * gamma;
                    acc[g.node_index(nr, kk - 1)] += -gc * gamma;
                }
                gtrips.emplace_back(row, g.node_index(nr, kk), -gc * alpha);
            } else {
                const auto [alpha, gamma] = ghost_inner(kk);
                acc[g.node_index(1, kk)] += gc;
                acc[g.node_index(0, kk)] += -gc * alpha * lambda_;
                gtrips.emplace_back(row, g.node_index(0, kk), -gc * alpha);
            }
        }
        for (const auto& [col, v] : acc) trips.emplace_back(row, col, v);
    }

    A_.resize(n, n);
    A_.setFromTriplets(trips.begin(), trips.end());
    A_.makeCompressed();
    g_map_.resize(n, n);
    g_map_.setFromTriplets(gtrips.begin(), gtrips.end());
    g_map_.makeCompressed();
}

Field RobinOperator::apply(const Field& f) const {
    if (f.grid.get() != grid_.get() && f.size() != grid_->n_nodes())
        throw DomainError("apply: field does not match operator grid");
    Field out(grid_);
    out.values = A_ * f.values;
    return out;
}

void RobinOperator::factorize() const {
    std::call_once(factorized_, [this]() {
        lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        lu_->compute(A_);
        if (lu_->info() != Eigen::Success) {
            lu_.reset();
            throw SolverError("RobinOperator: sparse factorization failed (singular operator; "
                              "lambda = 0 gives a pure Neumann problem with nontrivial kernel)");
        }
    });
    if (!lu_) throw SolverError("RobinOperator: factorization unavailable");
}

Field RobinOperator::solve(const Field& rhs, const std::optional<Field>& boundary_data) const {
    const int n = grid_->n_nodes();
    if (rhs.size() != n) throw DomainError("solve: rhs size mismatch");
    Eigen::VectorXd b = rhs.values;
    if (boundary_data) {
        if (boundary_data->size() != n) throw DomainError("solve: boundary data size mismatch");
        b += g_map_ * boundary_data->values;
    }

    if (lambda_ == 0.0) {
        // Pure Neumann: check discrete compatibility, then solve the bordered
        // system pinning the area-weighted mean to zero.
        double s = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i) {
            s += b[i] * grid_->cell_area(i);
            scale += std::abs(b[i]) * grid_->cell_area(i);
        }
        if (std::abs(s) > 1e-8 * std::max(1.0, scale))
            throw SolverError("solve: Neumann problem (lambda = 0) with incompatible data: "
                              "integral of rhs plus boundary flux = " + std::to_string(s) +
                              " must vanish");
        Eigen::SparseMatrix<double> Aug(n + 1, n + 1);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(A_.nonZeros() + 2 * n);
        for (int kk = 0; kk < A_.outerSize(); ++kk)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, kk); it; ++it)
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        for (int i = 0; i < n; ++i) {
            trips.emplace_back(i, n, grid_->cell_area(i));
            trips.emplace_back(n, i, grid_->cell_area(i));
        }
        Aug.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(Aug);
        if (lu.info() != Eigen::Success)
            throw SolverError("solve: bordered Neumann factorization failed");
        Eigen::VectorXd baug(n + 1);
        baug.head(n) = b;
        baug[n] = 0.0;
        Eigen::VectorXd xaug = lu.solve(baug);
        Field out(grid_);
        out.values = xaug.head(n);
        return out;
    }

    factorize();
    Eigen::VectorXd x = lu_->solve(b);
    // One step of iterative refinement if needed to meet the residual contract.
    const double bnorm = b.lpNorm<Eigen::Infinity>();
    double res = (A_ * x - b).lpNorm<Eigen::Infinity>();
    if (res > 1e-12 * std::max(1.0, bnorm)) {
        x += lu_->solve(b - A_ * x);
        res = (A_ * x - b).lpNorm<Eigen::Infinity>();
    }
    if (res > 1e-10 * std::max(1.0, bnorm))
        throw SolverError("solve: residual " + std::to_string(res) + " exceeds contract");
    Field out(grid_);
    out.values = std::move(x);
    return out;
}

} // namespace sinhp
