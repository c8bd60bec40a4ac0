#pragma once

#include <stdexcept>

#include "fot/measures.hpp"

namespace fot {

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExactSolution {
    TransportPlan plan;
    double cost = 0.0;  // optimal squared-Wasserstein value
};

inline constexpr std::size_t kDefaultExactCap = 5'000'000;

// Exact discrete OT under squared Euclidean cost, solved as a min-cost flow
// on the dense bipartite graph by successive shortest paths with potentials.
// Throws CapacityError when n0*n1 exceeds size_cap.
ExactSolution solve_exact(const DiscreteMeasure& a, const DiscreteMeasure& b,
                          std::size_t size_cap = kDefaultExactCap);

// Fast path for equal-size uniform instances: the optimum is a permutation
// matrix scaled by 1/n.
ExactSolution solve_assignment(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace fot
