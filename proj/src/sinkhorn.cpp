#include "fot/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fot/kernels.hpp"

namespace fot {

Matrix gibbs_kernel(const Matrix& cost, double epsilon) {
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    Matrix k(cost.rows(), cost.cols());
    kernels::exp_neg_scale(cost.data(), cost.size(), 1.0 / epsilon, k.data());
    return k;
}

namespace {

constexpr double kTiny = 1e-300;  // denominator floor against dead rows/cols

// Stabilized kernel exp(-C/eps + A_i + B_j).
void stabilized_kernel(const Matrix& cost, double epsilon,
                       const std::vector<double>& log_u_abs,
                       const std::vector<double>& log_v_abs, Matrix& kernel) {
    const double inv_eps = 1.0 / epsilon;
    for (std::size_t i = 0; i < cost.rows(); ++i) {
        const double ai = log_u_abs[i];
        auto crow = cost.row(i);
        auto krow = kernel.row(i);
        for (std::size_t j = 0; j < cost.cols(); ++j)
            krow[j] = std::exp(-crow[j] * inv_eps + ai + log_v_abs[j]);
    }
}

double max_abs_log(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(std::log(std::max(v, kTiny))));
    return m;
}

}  // namespace

void absorb(ScalingState& state, const Matrix& cost, double epsilon, Matrix& kernel) {
    for (std::size_t i = 0; i < state.u.size(); ++i) {
        state.log_u_abs[i] += std::log(std::max(state.u[i], kTiny));
        state.u[i] = 1.0;
    }
    for (std::size_t j = 0; j < state.v.size(); ++j) {
        state.log_v_abs[j] += std::log(std::max(state.v[j], kTiny));
        state.v[j] = 1.0;
    }
    stabilized_kernel(cost, epsilon, state.log_u_abs, state.log_v_abs, kernel);
}

SinkhornResult sinkhorn_plan(const DiscreteMeasure& a, const DiscreteMeasure& b,
                             const SinkhornConfig& cfg) {
    if (a.dim() != b.dim()) throw DimensionError("sinkhorn_plan: dimension mismatch");
    if (cfg.epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");

    const std::size_t n0 = a.size();
    const std::size_t n1 = b.size();
    const Matrix cost = squared_cost_matrix(a, b);

    double eps = cfg.epsilon;
    if (cfg.epsilon_schedule) eps = std::max(cfg.schedule_start, cfg.epsilon);

    ScalingState st = ScalingState::ones(n0, n1);
    Matrix kernel(n0, n1);
    stabilized_kernel(cost, eps, st.log_u_abs, st.log_v_abs, kernel);

    std::vector<double> kv(n0), ktu(n1);
    double violation = std::numeric_limits<double>::infinity();
    int iters = 0;

    auto marginal_violation = [&]() {
        // After the v-update columns are exact up to rounding; measure both.
        double rv = 0.0, cv = 0.0;
        kernels::matvec(kernel.data(), n0, n1, st.v.data(), kv.data());
        for (std::size_t i = 0; i < n0; ++i)
            rv += std::abs(st.u[i] * kv[i] - a.weights()[i]);
        kernels::matvec_t(kernel.data(), n0, n1, st.u.data(), ktu.data());
        for (std::size_t j = 0; j < n1; ++j)
            cv += std::abs(st.v[j] * ktu[j] - b.weights()[j]);
        return std::max(rv, cv);
    };

    while (true) {
        for (; iters < cfg.max_iter; ++iters) {
            kernels::matvec(kernel.data(), n0, n1, st.v.data(), kv.data());
            for (std::size_t i = 0; i < n0; ++i)
                st.u[i] = a.weights()[i] / std::max(kv[i], kTiny);
            kernels::matvec_t(kernel.data(), n0, n1, st.u.data(), ktu.data());
            for (std::size_t j = 0; j < n1; ++j)
                st.v[j] = b.weights()[j] / std::max(ktu[j], kTiny);

            if (max_abs_log(st.u) > cfg.absorb_threshold ||
                max_abs_log(st.v) > cfg.absorb_threshold)
                absorb(st, cost, eps, kernel);

            violation = marginal_violation();
            if (violation <= cfg.tol) break;
        }
        if (eps <= cfg.epsilon * (1.0 + 1e-12)) break;
        // Anneal: preserve the dual potentials alpha = eps*(A + log u).
        absorb(st, cost, eps, kernel);
        const double next_eps = std::max(cfg.epsilon, eps * cfg.schedule_factor);
        const double ratio = eps / next_eps;
        for (double& x : st.log_u_abs) x *= ratio;
        for (double& x : st.log_v_abs) x *= ratio;
        eps = next_eps;
        stabilized_kernel(cost, eps, st.log_u_abs, st.log_v_abs, kernel);
    }

    Matrix plan(n0, n1);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
            plan(i, j) = st.u[i] * kernel(i, j) * st.v[j];

    if (!(violation <= cfg.tol)) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "sinkhorn did not reach tol %.3e in %d iterations "
                      "(violation %.3e)",
                      cfg.tol, cfg.max_iter, violation);
        throw ConvergenceError(
            msg, TransportPlan{std::move(plan), a.weights(), b.weights()},
            violation);
    }

    double tcost = 0.0, ent = 0.0;
    const double inv_eps = 1.0 / eps;
    for (std::size_t i = 0; i < n0; ++i) {
        const double lu = std::log(st.u[i]) + st.log_u_abs[i];
        for (std::size_t j = 0; j < n1; ++j) {
            const double g = plan(i, j);
            if (g <= 0.0) continue;
            tcost += g * cost(i, j);
            const double lg = lu + std::log(st.v[j]) + st.log_v_abs[j] -
                              cost(i, j) * inv_eps;
            ent += g * lg;
        }
    }
    if (!std::isfinite(tcost) || !std::isfinite(ent))
        throw std::runtime_error("sinkhorn produced non-finite objective");

    return SinkhornResult{TransportPlan{std::move(plan), a.weights(), b.weights()},
                          tcost, ent, iters};
}

}  // namespace fot
