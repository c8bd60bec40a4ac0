#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fot/measures.hpp"
#include "fot/sinkhorn.hpp"

namespace fot {

// Barycenter support points ("hubs") and their shared marginal.
struct HubSet {
    std::vector<double> hubs;    // k*d row-major
    std::vector<double> masses;  // k, sums to 1
    std::size_t dim = 0;

    std::size_t k() const { return masses.size(); }
    std::span<const double> hub(std::size_t j) const { return {hubs.data() + j * dim, dim}; }
};

struct BarycenterSolution {
    HubSet hub_set;
    TransportPlan plan0;  // hubs x source points
    TransportPlan plan1;  // hubs x target points
    std::vector<double> objective_trace;  // regularized objective per outer iter
    double transport_objective = 0.0;     // <C0,g0> + <C1,g1>, entropy excluded
    int outer_iterations = 0;
};

enum class HubInit { KMeansSource, KMeansTarget, KMeansPooled, Given };

struct FotConfig {
    std::size_t k = 4;
    // The inner problems are k x n and cheap per iteration, so default to a
    // generous cap; the tolerance governs only the free hub marginal since
    // update_plans returns exactly column-feasible plans.
    SinkhornConfig sinkhorn{.max_iter = 1000000, .tol = 5e-7};
    double outer_tol = 1e-6;  // relative change of the transport objective
    int outer_max_iter = 200;
    HubInit init = HubInit::KMeansSource;
    std::vector<double> given_hubs;  // k*d when init == Given
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<double> centers;  // k*d
    std::vector<std::size_t> assignment;
    double objective = 0.0;
};

// Weighted Lloyd iterations from k-means++ seeding, run to assignment
// fixpoint or 100 iterations.
KMeansResult kmeans(std::span<const double> points, std::span<const double> weights,
                    std::size_t dim, std::size_t k, std::uint64_t seed);

// Closed-form hub update: each hub is the mass-weighted average of its
// transported source and target points; masses are the plan0 row sums.
HubSet update_hubs(const DiscreteMeasure& source, const DiscreteMeasure& target,
                   const TransportPlan& plan0, const TransportPlan& plan1);

// State carried between outer iterations to warm-start the inner scalings.
struct PlansState {
    ScalingState s0, s1;
};

struct PlansResult {
    TransportPlan plan0, plan1;
    double transport_cost = 0.0;
    double entropy_term = 0.0;
    int iterations = 0;
};

// Sinkhorn-type KL projection with a free shared hub marginal (the w step).
PlansResult update_plans(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const HubSet& hub_set, const SinkhornConfig& cfg,
                         PlansState* warm = nullptr);

// Alternating minimization for the entropic k-Wasserstein barycenter of the
// two samples.
BarycenterSolution factored_ot(const DiscreteMeasure& source,
                               const DiscreteMeasure& target, const FotConfig& cfg);

}  // namespace fot
