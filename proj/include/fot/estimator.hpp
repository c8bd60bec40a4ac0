#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fot/factored_ot.hpp"
#include "fot/measures.hpp"

namespace fot {

// Per-hub sub-measures over a parent measure's points, with their masses
// and centroids. Rows of `cluster_mass` sum to `masses[j]`; summing over j
// per point recovers the parent weight.
struct SoftPartition {
    Matrix cluster_mass;          // k x n
    std::vector<double> masses;   // lambda_j
    Matrix centroids;             // k x d
};

struct FactoredCoupling {
    SoftPartition source;
    SoftPartition target;
    std::vector<double> masses;  // shared lambda, sums to 1
    std::size_t k() const { return masses.size(); }
};

// Read the coupled partitions out of a converged barycenter solution.
// Clusters whose mass falls below 1e-12 are dropped (effective k shrinks).
FactoredCoupling induce_factored_coupling(const BarycenterSolution& sol,
                                          const DiscreteMeasure& source,
                                          const DiscreteMeasure& target);

// sum_j lambda_j ||mu(C_j^0) - mu(C_j^1)||^2
double cost(const FactoredCoupling& fc);

// Integral of ||x-y||^2 against the induced product coupling, computed both
// directly and through the cost + intra-cluster-variance decomposition;
// throws if the two routes disagree beyond 1e-9 relative.
double total_transport_integral(const FactoredCoupling& fc,
                                const DiscreteMeasure& source,
                                const DiscreteMeasure& target);

// Barycentric displacement map on the source points; n*d row-major.
std::vector<double> transport_map(const FactoredCoupling& fc,
                                  const DiscreteMeasure& source);

// T_sharp(P0): mapped locations carrying the source weights.
DiscreteMeasure pushforward(const FactoredCoupling& fc, const DiscreteMeasure& source);

struct WHatResult {
    double w_hat = 0.0;
    BarycenterSolution solution;
    FactoredCoupling coupling;
};

WHatResult w_hat(const DiscreteMeasure& source, const DiscreteMeasure& target,
                 const FotConfig& cfg);

struct ResultRecord {
    std::string method;
    std::size_t k = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double w_hat = 0.0;
    std::optional<double> plug_in_cost;
    double runtime_ms = 0.0;
    std::size_t n0 = 0, n1 = 0, d = 0;

    std::string to_json() const;
};

}  // namespace fot
