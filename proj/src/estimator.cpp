#include "fot/estimator.hpp"

#include <cmath>
#include <sstream>

#include "fot/kernels.hpp"

namespace fot {

namespace {

constexpr double kDropMass = 1e-12;

Matrix compute_centroids(const Matrix& cluster_mass, const std::vector<double>& masses,
                         const DiscreteMeasure& parent) {
    const std::size_t k = masses.size();
    const std::size_t d = parent.dim();
    Matrix c(k, d);
    for (std::size_t j = 0; j < k; ++j) {
        auto row = cluster_mass.row(j);
        for (std::size_t i = 0; i < parent.size(); ++i) {
            auto p = parent.point(i);
            for (std::size_t t = 0; t < d; ++t) c(j, t) += row[i] * p[t];
        }
        for (std::size_t t = 0; t < d; ++t) c(j, t) /= masses[j];
    }
    return c;
}

}  // namespace

FactoredCoupling induce_factored_coupling(const BarycenterSolution& sol,
                                          const DiscreteMeasure& source,
                                          const DiscreteMeasure& target) {
    const std::size_t k_full = sol.plan0.matrix.rows();

    // A single lambda vector is required; the two row-sum vectors agree only
    // to tolerance, so average and renormalize, then rescale each cluster to
    // carry exactly its lambda on both sides.
    const auto rs0 = sol.plan0.row_sums();
    const auto rs1 = sol.plan1.row_sums();
    std::vector<double> lambda(k_full);
    double total = 0.0;
    for (std::size_t j = 0; j < k_full; ++j) {
        lambda[j] = 0.5 * (rs0[j] + rs1[j]);
        total += lambda[j];
    }
    for (double& l : lambda) l /= total;

    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < k_full; ++j)
        if (lambda[j] >= kDropMass) keep.push_back(j);

    const std::size_t k = keep.size();
    FactoredCoupling fc;
    fc.masses.resize(k);
    fc.source.cluster_mass = Matrix(k, source.size());
    fc.target.cluster_mass = Matrix(k, target.size());
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t j = keep[r];
        fc.masses[r] = lambda[j];
        const double scale0 = lambda[j] / rs0[j];
        const double scale1 = lambda[j] / rs1[j];
        for (std::size_t i = 0; i < source.size(); ++i)
            fc.source.cluster_mass(r, i) = sol.plan0.matrix(j, i) * scale0;
        for (std::size_t i = 0; i < target.size(); ++i)
            fc.target.cluster_mass(r, i) = sol.plan1.matrix(j, i) * scale1;
    }
    fc.source.masses = fc.masses;
    fc.target.masses = fc.masses;
    fc.source.centroids = compute_centroids(fc.source.cluster_mass, fc.masses, source);
    fc.target.centroids = compute_centroids(fc.target.cluster_mass, fc.masses, target);
    return fc;
}

double cost(const FactoredCoupling& fc) {
    const std::size_t d = fc.source.centroids.cols();
    double s = 0.0;
    for (std::size_t j = 0; j < fc.k(); ++j) {
        double dist2 = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double diff = fc.source.centroids(j, t) - fc.target.centroids(j, t);
            dist2 += diff * diff;
        }
        s += fc.masses[j] * dist2;
    }
    return s;
}

double total_transport_integral(const FactoredCoupling& fc,
                                const DiscreteMeasure& source,
                                const DiscreteMeasure& target) {
    const Matrix cmat = squared_cost_matrix(source, target);

    // Route (i): directly through the induced coupling
    // sum_j (1/lambda_j) C_j^0 (x) C_j^1.
    double direct = 0.0;
    for (std::size_t j = 0; j < fc.k(); ++j) {
        auto r0 = fc.source.cluster_mass.row(j);
        auto r1 = fc.target.cluster_mass.row(j);
        double acc = 0.0;
        for (std::size_t i = 0; i < source.size(); ++i) {
            if (r0[i] == 0.0) continue;
            acc += r0[i] * kernels::dot(cmat.row(i).data(), r1.data(), target.size());
        }
        direct += acc / fc.masses[j];
    }

    // Route (ii): transport term plus intra-cluster variances.
    double decomposed = cost(fc);
    for (std::size_t j = 0; j < fc.k(); ++j) {
        for (const auto& [part, m] :
             {std::pair<const SoftPartition*, const DiscreteMeasure*>{&fc.source,
                                                                      &source},
              {&fc.target, &target}}) {
            auto row = part->cluster_mass.row(j);
            auto mu = part->centroids.row(j);
            for (std::size_t i = 0; i < m->size(); ++i) {
                auto p = m->point(i);
                double dist2 = 0.0;
                for (std::size_t t = 0; t < m->dim(); ++t) {
                    const double diff = p[t] - mu[t];
                    dist2 += diff * diff;
                }
                decomposed += row[i] * dist2;
            }
        }
    }

    const double rel = std::abs(direct - decomposed) /
                       std::max({std::abs(direct), std::abs(decomposed), 1e-30});
    if (rel > 1e-9 && std::abs(direct - decomposed) > 1e-12)
        throw std::runtime_error(
            "transport integral decomposition mismatch: direct=" +
            std::to_string(direct) + " decomposed=" + std::to_string(decomposed));
    return direct;
}

std::vector<double> transport_map(const FactoredCoupling& fc,
                                  const DiscreteMeasure& source) {
    const std::size_t n = source.size();
    const std::size_t d = source.dim();
    std::vector<double> out(source.points());
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < fc.k(); ++j) total += fc.source.cluster_mass(j, i);
        if (total <= 0.0)
            throw std::runtime_error("transport_map: point " + std::to_string(i) +
                                     " carries no cluster mass");
        for (std::size_t j = 0; j < fc.k(); ++j) {
            const double wj = fc.source.cluster_mass(j, i) / total;
            if (wj == 0.0) continue;
            for (std::size_t t = 0; t < d; ++t)
                out[i * d + t] +=
                    wj * (fc.target.centroids(j, t) - fc.source.centroids(j, t));
        }
    }
    return out;
}

DiscreteMeasure pushforward(const FactoredCoupling& fc, const DiscreteMeasure& source) {
    return DiscreteMeasure(transport_map(fc, source), source.weights(), source.dim());
}

WHatResult w_hat(const DiscreteMeasure& source, const DiscreteMeasure& target,
                 const FotConfig& cfg) {
    WHatResult r;
    r.solution = factored_ot(source, target, cfg);
    r.coupling = induce_factored_coupling(r.solution, source, target);
    r.w_hat = cost(r.coupling);
    return r;
}

std::string ResultRecord::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"method\":\"" << method << "\",\"k\":" << k << ",\"epsilon\":" << epsilon
       << ",\"seed\":" << seed << ",\"w_hat\":" << w_hat << ",\"plug_in_cost\":";
    if (plug_in_cost)
        os << *plug_in_cost;
    else
        os << "null";
    os << ",\"runtime_ms\":" << runtime_ms << ",\"n0\":" << n0 << ",\"n1\":" << n1
       << ",\"d\":" << d << "}";
    return os.str();
}

}  // namespace fot
