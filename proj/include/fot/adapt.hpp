#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fot/estimator.hpp"
#include "fot/exact_ot.hpp"
#include "fot/measures.hpp"
#include "fot/sinkhorn.hpp"

namespace fot {

enum class AdaptMethod { Fot, Ot, Sinkhorn, Kot, NnOnly };

AdaptMethod parse_adapt_method(const std::string& name);
std::string adapt_method_name(AdaptMethod m);

struct AdaptParams {
    FotConfig fot;                        // used by Fot and (k, seed) by Kot
    SinkhornConfig sinkhorn;              // used by Sinkhorn
    std::size_t exact_cap = kDefaultExactCap;
    std::size_t knn_k = 20;
};

struct AdaptResult {
    std::vector<std::string> predicted_labels;  // one per source point
    std::optional<double> error_rate;           // set when source labels exist
    AdaptMethod method = AdaptMethod::NnOnly;
};

// Map the source points into target space with the chosen transport method,
// then classify each mapped point by majority vote over its knn_k nearest
// target points. Ties break by smallest cumulative distance, then
// lexicographic label order.
AdaptResult adapt_labels(const LabeledDataset& source, const LabeledDataset& target,
                         AdaptMethod method, const AdaptParams& params);

}  // namespace fot
