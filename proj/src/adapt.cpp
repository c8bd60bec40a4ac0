#include "fot/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fot/factored_ot.hpp"
#include "fot/kernels.hpp"

namespace fot {

AdaptMethod parse_adapt_method(const std::string& name) {
    if (name == "fot") return AdaptMethod::Fot;
    if (name == "ot") return AdaptMethod::Ot;
    if (name == "sinkhorn") return AdaptMethod::Sinkhorn;
    if (name == "kot") return AdaptMethod::Kot;
    if (name == "nn_only") return AdaptMethod::NnOnly;
    throw std::invalid_argument("unknown adapt method: " + name);
}

std::string adapt_method_name(AdaptMethod m) {
    switch (m) {
        case AdaptMethod::Fot: return "fot";
        case AdaptMethod::Ot: return "ot";
        case AdaptMethod::Sinkhorn: return "sinkhorn";
        case AdaptMethod::Kot: return "kot";
        case AdaptMethod::NnOnly: return "nn_only";
    }
    return "?";
}

namespace {

// X_i -> sum_j plan_ij Y_j / sum_j plan_ij
std::vector<double> barycentric_projection(const Matrix& plan,
                                           const DiscreteMeasure& target,
                                           const DiscreteMeasure& source) {
    const std::size_t d = target.dim();
    std::vector<double> out(source.points());
    for (std::size_t i = 0; i < plan.rows(); ++i) {
        auto row = plan.row(i);
        double total = std::accumulate(row.begin(), row.end(), 0.0);
        if (total <= 0.0) continue;  // leave the point in place
        for (std::size_t t = 0; t < d; ++t) out[i * d + t] = 0.0;
        for (std::size_t j = 0; j < plan.cols(); ++j) {
            if (row[j] == 0.0) continue;
            auto y = target.point(j);
            for (std::size_t t = 0; t < d; ++t) out[i * d + t] += row[j] * y[t] / total;
        }
    }
    return out;
}

std::vector<double> map_points(const LabeledDataset& source,
                               const LabeledDataset& target, AdaptMethod method,
                               const AdaptParams& params) {
    const DiscreteMeasure& src = source.measure;
    const DiscreteMeasure& tgt = target.measure;
    switch (method) {
        case AdaptMethod::NnOnly:
            return src.points();
        case AdaptMethod::Fot: {
            auto res = w_hat(src, tgt, params.fot);
            return transport_map(res.coupling, src);
        }
        case AdaptMethod::Ot: {
            auto sol = solve_exact(src, tgt, params.exact_cap);
            return barycentric_projection(sol.plan.matrix, tgt, src);
        }
        case AdaptMethod::Sinkhorn: {
            auto res = sinkhorn_plan(src, tgt, params.sinkhorn);
            return barycentric_projection(res.plan.matrix, tgt, src);
        }
        case AdaptMethod::Kot: {
            // k-means both sides, transport the centroids, then displace each
            // point by its centroid's barycentric displacement.
            const std::size_t d = src.dim();
            auto km0 = kmeans(src.points(), src.weights(), d, params.fot.k,
                              params.fot.seed);
            auto km1 = kmeans(tgt.points(), tgt.weights(), d, params.fot.k,
                              params.fot.seed + 1);
            std::vector<double> m0(params.fot.k, 0.0), m1(params.fot.k, 0.0);
            for (std::size_t i = 0; i < src.size(); ++i)
                m0[km0.assignment[i]] += src.weights()[i];
            for (std::size_t i = 0; i < tgt.size(); ++i)
                m1[km1.assignment[i]] += tgt.weights()[i];
            DiscreteMeasure c0(km0.centers, m0, d);
            DiscreteMeasure c1(km1.centers, m1, d);
            auto sol = solve_exact(c0, c1, params.exact_cap);
            auto mapped_centers = barycentric_projection(sol.plan.matrix, c1, c0);
            std::vector<double> out(src.points());
            for (std::size_t i = 0; i < src.size(); ++i) {
                const std::size_t c = km0.assignment[i];
                for (std::size_t t = 0; t < d; ++t)
                    out[i * d + t] +=
                        mapped_centers[c * d + t] - km0.centers[c * d + t];
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

std::string vote(const std::vector<std::pair<double, std::size_t>>& neighbors,
                 const std::vector<std::string>& labels) {
    // label -> (count, cumulative distance)
    std::map<std::string, std::pair<std::size_t, double>> tally;
    for (const auto& [d2, idx] : neighbors) {
        auto& t = tally[labels[idx]];
        ++t.first;
        t.second += std::sqrt(d2);
    }
    const std::string* best = nullptr;
    for (const auto& [label, t] : tally) {
        if (!best) {
            best = &label;
            continue;
        }
        const auto& b = tally.at(*best);
        if (t.first > b.first ||
            (t.first == b.first && t.second < b.second))
            best = &label;
        // equal count and distance: std::map order keeps the lexicographically
        // smaller label.
    }
    return *best;
}

}  // namespace

AdaptResult adapt_labels(const LabeledDataset& source, const LabeledDataset& target,
                         AdaptMethod method, const AdaptParams& params) {
    if (!target.has_labels())
        throw std::invalid_argument("adapt_labels: target must be labeled");
    if (source.measure.dim() != target.measure.dim())
        throw DimensionError("adapt_labels: dimension mismatch");
    const std::size_t n1 = target.measure.size();
    if (params.knn_k == 0 || params.knn_k > n1)
        throw std::invalid_argument("adapt_labels: knn_k must be in [1, n1]");

    const std::vector<double> mapped = map_points(source, target, method, params);
    const std::size_t n0 = source.measure.size();
    const std::size_t d = source.measure.dim();

    Matrix dist(n0, n1);
    kernels::pairwise_sqdist(mapped.data(), n0, target.measure.points().data(), n1, d,
                             dist.data());

    AdaptResult out;
    out.method = method;
    out.predicted_labels.resize(n0);
    std::vector<std::pair<double, std::size_t>> nb(n1);
    for (std::size_t i = 0; i < n0; ++i) {
        for (std::size_t j = 0; j < n1; ++j) nb[j] = {dist(i, j), j};
        std::partial_sort(nb.begin(), nb.begin() + params.knn_k, nb.end());
        out.predicted_labels[i] = vote(
            {nb.begin(), nb.begin() + static_cast<std::ptrdiff_t>(params.knn_k)},
            target.labels);
    }

    if (source.has_labels()) {
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < n0; ++i)
            if (out.predicted_labels[i] != source.labels[i]) ++wrong;
        out.error_rate = static_cast<double>(wrong) / static_cast<double>(n0);
    }
    return out;
}

}  // namespace fot
