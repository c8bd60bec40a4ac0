#pragma once

#include <stdexcept>
#include <vector>

#include "fot/measures.hpp"

namespace fot {

struct SinkhornConfig {
    double epsilon = 0.1;
    int max_iter = 10000;
    double tol = 5e-7;              // L1 marginal stopping tolerance
    double absorb_threshold = 50.0; // max |log u| triggering absorption
    bool epsilon_schedule = false;  // geometric anneal down to epsilon
    double schedule_factor = 0.5;
    double schedule_start = 1.0;
};

// Left/right Sinkhorn scalings plus the log-domain offsets accumulated by
// absorption. The reconstructed plan is
//   diag(u) * exp(-C/eps + log_u_abs (+) log_v_abs) * diag(v).
struct ScalingState {
    std::vector<double> u, v;
    std::vector<double> log_u_abs, log_v_abs;

    static ScalingState ones(std::size_t rows, std::size_t cols) {
        return {std::vector<double>(rows, 1.0), std::vector<double>(cols, 1.0),
                std::vector<double>(rows, 0.0), std::vector<double>(cols, 0.0)};
    }
};

struct SinkhornResult {
    TransportPlan plan;
    double transport_cost = 0.0;  // <C, gamma>, entropy reported separately
    double entropy_term = 0.0;    // sum gamma log gamma
    int iterations = 0;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::string msg, TransportPlan last, double violation)
        : std::runtime_error(std::move(msg)),
          last_iterate(std::move(last)),
          achieved_violation(violation) {}

    TransportPlan last_iterate;
    double achieved_violation;
};

// Entry = exp(-cost/eps); entries in (0,1] for nonnegative costs.
Matrix gibbs_kernel(const Matrix& cost, double epsilon);

// Recompute `kernel` with the current scalings folded into the log-domain
// offsets and u, v reset to 1. The reconstructed plan is unchanged.
void absorb(ScalingState& state, const Matrix& cost, double epsilon, Matrix& kernel);

SinkhornResult sinkhorn_plan(const DiscreteMeasure& a, const DiscreteMeasure& b,
                             const SinkhornConfig& cfg);

}  // namespace fot
