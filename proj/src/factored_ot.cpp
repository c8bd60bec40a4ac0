#include "fot/factored_ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "fot/kernels.hpp"
#include "fot/rng.hpp"

namespace fot {

namespace {

constexpr double kTinyMass = 1e-12;
constexpr double kDenFloor = 1e-300;

std::size_t count_distinct(std::span<const double> points, std::size_t dim) {
    const std::size_t n = points.size() / dim;
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < n; ++i)
        seen.emplace(points.begin() + i * dim, points.begin() + (i + 1) * dim);
    return seen.size();
}

std::size_t sample_index(Rng& rng, std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        u -= probs[i];
        if (u <= 0.0) return i;
    }
    return probs.size() - 1;
}

}  // namespace

KMeansResult kmeans(std::span<const double> points, std::span<const double> weights,
                    std::size_t dim, std::size_t k, std::uint64_t seed) {
    const std::size_t n = weights.size();
    if (k == 0 || n == 0) throw std::invalid_argument("kmeans: empty input");
    if (points.size() != n * dim) throw std::invalid_argument("kmeans: shape mismatch");
    if (k > count_distinct(points, dim))
        throw std::invalid_argument("kmeans: k exceeds number of distinct points");

    Rng rng = Rng::stream(seed, 2);
    std::vector<double> centers(k * dim);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<double> probs(n);

    // k-means++ seeding, weighted.
    std::size_t first = sample_index(rng, weights);
    std::copy_n(points.begin() + first * dim, dim, centers.begin());
    for (std::size_t c = 1; c < k; ++c) {
        const double* prev = centers.data() + (c - 1) * dim;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t t = 0; t < dim; ++t) {
                const double diff = points[i * dim + t] - prev[t];
                s += diff * diff;
            }
            d2[i] = std::min(d2[i], s);
            probs[i] = weights[i] * d2[i];
        }
        const std::size_t pick = sample_index(rng, probs);
        std::copy_n(points.begin() + pick * dim, dim, centers.begin() + c * dim);
    }

    std::vector<std::size_t> assign(n, k), prev_assign;
    Matrix cdist(n, k);
    for (int iter = 0; iter < 100; ++iter) {
        prev_assign = assign;
        kernels::pairwise_sqdist(points.data(), n, centers.data(), k, dim,
                                 cdist.data());
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < k; ++c)
                if (cdist(i, c) < cdist(i, best)) best = c;
            assign[i] = best;
        }

        std::vector<double> mass(k, 0.0);
        std::vector<double> sums(k * dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            mass[assign[i]] += weights[i];
            for (std::size_t t = 0; t < dim; ++t)
                sums[assign[i] * dim + t] += weights[i] * points[i * dim + t];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (mass[c] > 0.0) {
                for (std::size_t t = 0; t < dim; ++t)
                    centers[c * dim + t] = sums[c * dim + t] / mass[c];
            } else {
                // Standard empty-cluster repair: restart at the point
                // farthest from its current center.
                std::size_t far = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (cdist(i, assign[i]) > cdist(far, assign[far])) far = i;
                std::copy_n(points.begin() + far * dim, dim,
                            centers.begin() + c * dim);
                assign[far] = c;
            }
        }
        if (assign == prev_assign && iter > 0) break;
    }

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
            const double diff = points[i * dim + t] - centers[assign[i] * dim + t];
            s += diff * diff;
        }
        obj += weights[i] * s;
    }
    return KMeansResult{std::move(centers), std::move(assign), obj};
}

HubSet update_hubs(const DiscreteMeasure& source, const DiscreteMeasure& target,
                   const TransportPlan& plan0, const TransportPlan& plan1) {
    const std::size_t k = plan0.matrix.rows();
    if (plan1.matrix.rows() != k)
        throw std::invalid_argument("update_hubs: plans disagree on k");
    const std::size_t d = source.dim();

    HubSet out;
    out.dim = d;
    out.hubs.assign(k * d, 0.0);
    out.masses.assign(k, 0.0);

    std::vector<std::size_t> dead;
    for (std::size_t j = 0; j < k; ++j) {
        double m0 = 0.0, m1 = 0.0;
        std::vector<double> acc(d, 0.0);
        auto r0 = plan0.matrix.row(j);
        for (std::size_t i = 0; i < source.size(); ++i) {
            m0 += r0[i];
            auto p = source.point(i);
            for (std::size_t t = 0; t < d; ++t) acc[t] += r0[i] * p[t];
        }
        auto r1 = plan1.matrix.row(j);
        for (std::size_t i = 0; i < target.size(); ++i) {
            m1 += r1[i];
            auto p = target.point(i);
            for (std::size_t t = 0; t < d; ++t) acc[t] += r1[i] * p[t];
        }
        out.masses[j] = m0;
        if (m0 + m1 < kTinyMass) {
            dead.push_back(j);
            continue;
        }
        for (std::size_t t = 0; t < d; ++t) out.hubs[j * d + t] = acc[t] / (m0 + m1);
    }

    // Re-seed dead hubs at the source point farthest from any live hub.
    for (std::size_t j : dead) {
        double best = -1.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < source.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            auto p = source.point(i);
            for (std::size_t h = 0; h < k; ++h) {
                if (h == j) continue;
                double s = 0.0;
                for (std::size_t t = 0; t < d; ++t) {
                    const double diff = p[t] - out.hubs[h * d + t];
                    s += diff * diff;
                }
                nearest = std::min(nearest, s);
            }
            if (nearest > best) {
                best = nearest;
                pick = i;
            }
        }
        auto p = source.point(pick);
        std::copy(p.begin(), p.end(), out.hubs.begin() + j * d);
    }

    double total = 0.0;
    for (double m : out.masses) total += m;
    if (total > 0.0)
        for (double& m : out.masses) m /= total;
    return out;
}

namespace {

struct Leg {
    Matrix cost;    // k x n
    Matrix kernel;  // stabilized
    const std::vector<double>* marginal;
    ScalingState* st;
    std::vector<double> kv;   // kernel * v (size k)
    std::vector<double> ktu;  // kernel^T * u (size n)
};

void leg_kernel(Leg& leg, double eps) {
    const double inv_eps = 1.0 / eps;
    const auto& A = leg.st->log_u_abs;
    const auto& B = leg.st->log_v_abs;
    for (std::size_t i = 0; i < leg.cost.rows(); ++i) {
        auto crow = leg.cost.row(i);
        auto krow = leg.kernel.row(i);
        for (std::size_t j = 0; j < leg.cost.cols(); ++j) {
            const double e = std::min(-crow[j] * inv_eps + A[i] + B[j], 700.0);
            krow[j] = std::exp(e);
        }
    }
}

void leg_absorb(Leg& leg, double eps) {
    auto& st = *leg.st;
    for (std::size_t i = 0; i < st.u.size(); ++i) {
        st.log_u_abs[i] += std::log(std::max(st.u[i], kDenFloor));
        st.u[i] = 1.0;
    }
    for (std::size_t j = 0; j < st.v.size(); ++j) {
        st.log_v_abs[j] += std::log(std::max(st.v[j], kDenFloor));
        st.v[j] = 1.0;
    }
    leg_kernel(leg, eps);
}

bool needs_absorb(const Leg& leg, double threshold) {
    for (double x : leg.st->u)
        if (!(std::abs(std::log(std::max(x, kDenFloor))) <= threshold)) return true;
    for (double x : leg.st->v)
        if (!(std::abs(std::log(std::max(x, kDenFloor))) <= threshold)) return true;
    return false;
}

double col_violation(const Leg& leg) {
    double s = 0.0;
    for (std::size_t j = 0; j < leg.ktu.size(); ++j)
        s += std::abs(leg.st->v[j] * leg.ktu[j] - (*leg.marginal)[j]);
    return s;
}

}  // namespace

PlansResult update_plans(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const HubSet& hub_set, const SinkhornConfig& cfg,
                         PlansState* warm) {
    if (hub_set.dim != source.dim() || hub_set.dim != target.dim())
        throw DimensionError("update_plans: hub dimension mismatch");
    const std::size_t k = hub_set.k();
    const std::size_t n0 = source.size();
    const std::size_t n1 = target.size();

    PlansState local{ScalingState::ones(k, n0), ScalingState::ones(k, n1)};
    PlansState& ps = warm ? *warm : local;
    if (ps.s0.u.size() != k) ps.s0 = ScalingState::ones(k, n0);
    if (ps.s1.u.size() != k) ps.s1 = ScalingState::ones(k, n1);

    Leg leg0{Matrix(k, n0), Matrix(k, n0), &source.weights(), &ps.s0,
             std::vector<double>(k), std::vector<double>(n0)};
    Leg leg1{Matrix(k, n1), Matrix(k, n1), &target.weights(), &ps.s1,
             std::vector<double>(k), std::vector<double>(n1)};
    kernels::pairwise_sqdist(hub_set.hubs.data(), k, source.points().data(), n0,
                             hub_set.dim, leg0.cost.data());
    kernels::pairwise_sqdist(hub_set.hubs.data(), k, target.points().data(), n1,
                             hub_set.dim, leg1.cost.data());

    double eps = cfg.epsilon;
    if (cfg.epsilon_schedule) {
        eps = std::max(cfg.schedule_start, cfg.epsilon);
        // Warm offsets encode potentials tuned for cfg.epsilon; restate them
        // at the schedule's starting temperature (alpha = eps * offset stays
        // fixed). Cold states are all ones/zeros, so this is a no-op there.
        const double ratio = cfg.epsilon / eps;
        for (Leg* leg : {&leg0, &leg1}) {
            auto& st = *leg->st;
            for (std::size_t i = 0; i < st.u.size(); ++i) {
                st.log_u_abs[i] =
                    (st.log_u_abs[i] + std::log(std::max(st.u[i], kDenFloor))) * ratio;
                st.u[i] = 1.0;
            }
            for (std::size_t j = 0; j < st.v.size(); ++j) {
                st.log_v_abs[j] =
                    (st.log_v_abs[j] + std::log(std::max(st.v[j], kDenFloor))) * ratio;
                st.v[j] = 1.0;
            }
        }
    }
    leg_kernel(leg0, eps);
    leg_kernel(leg1, eps);

    std::vector<double> w(k);
    int iters = 0;
    double viol = std::numeric_limits<double>::infinity();
    bool reset_used = false;

    while (true) {
        for (; iters < cfg.max_iter; ++iters) {
            // Point-marginal v updates.
            for (Leg* leg : {&leg0, &leg1}) {
                auto& st = *leg->st;
                kernels::matvec_t(leg->kernel.data(), k, st.v.size(), st.u.data(),
                                  leg->ktu.data());
                for (std::size_t j = 0; j < st.v.size(); ++j)
                    st.v[j] = (*leg->marginal)[j] / std::max(leg->ktu[j], kDenFloor);
            }
            // Free shared hub marginal: geometric mean of the two row sums.
            for (Leg* leg : {&leg0, &leg1}) {
                kernels::matvec(leg->kernel.data(), k, leg->st->v.size(),
                                leg->st->v.data(), leg->kv.data());
            }
            for (std::size_t i = 0; i < k; ++i) {
                const double r0 = ps.s0.u[i] * leg0.kv[i];
                const double r1 = ps.s1.u[i] * leg1.kv[i];
                w[i] = std::sqrt(std::max(r0, 0.0) * std::max(r1, 0.0));
            }
            // A fully underflowed kernel (e.g. stale warm state after a large
            // hub move at small eps) yields w == 0 and cannot recover; restart
            // once from a cold state.
            if (!reset_used &&
                *std::max_element(w.begin(), w.end()) <= 0.0) {
                reset_used = true;
                ps.s0 = ScalingState::ones(k, n0);
                ps.s1 = ScalingState::ones(k, n1);
                eps = cfg.epsilon_schedule ? std::max(cfg.schedule_start, cfg.epsilon)
                                          : cfg.epsilon;
                leg_kernel(leg0, eps);
                leg_kernel(leg1, eps);
                continue;
            }
            for (Leg* leg : {&leg0, &leg1})
                for (std::size_t i = 0; i < k; ++i)
                    leg->st->u[i] = w[i] / std::max(leg->kv[i], kDenFloor);

            if (needs_absorb(leg0, cfg.absorb_threshold)) leg_absorb(leg0, eps);
            if (needs_absorb(leg1, cfg.absorb_threshold)) leg_absorb(leg1, eps);

            double v0 = 0.0, v1 = 0.0;
            kernels::matvec_t(leg0.kernel.data(), k, n0, ps.s0.u.data(),
                              leg0.ktu.data());
            kernels::matvec_t(leg1.kernel.data(), k, n1, ps.s1.u.data(),
                              leg1.ktu.data());
            v0 = col_violation(leg0);
            v1 = col_violation(leg1);
            viol = std::max(v0, v1);
            if (viol <= cfg.tol) break;
        }
        if (eps <= cfg.epsilon * (1.0 + 1e-12)) break;
        const double next_eps = std::max(cfg.epsilon, eps * cfg.schedule_factor);
        const double ratio = eps / next_eps;
        for (Leg* leg : {&leg0, &leg1}) {
            leg_absorb(*leg, eps);  // fold u, v first
            for (double& x : leg->st->log_u_abs) x *= ratio;
            for (double& x : leg->st->log_v_abs) x *= ratio;
        }
        eps = next_eps;
        leg_kernel(leg0, eps);
        leg_kernel(leg1, eps);
    }

    // Close with a v-update: the point marginals are the hard constraints
    // (the hub marginal is free), so the returned plans are exactly
    // column-feasible and the residual shows up only in the free row sums.
    auto build = [&](Leg& leg, const DiscreteMeasure& m) {
        auto& st = *leg.st;
        kernels::matvec_t(leg.kernel.data(), k, m.size(), st.u.data(),
                          leg.ktu.data());
        for (std::size_t j = 0; j < m.size(); ++j)
            st.v[j] = (*leg.marginal)[j] / std::max(leg.ktu[j], kDenFloor);
        Matrix plan(k, m.size());
        std::vector<double> row_marg(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < m.size(); ++j) {
                plan(i, j) = st.u[i] * leg.kernel(i, j) * st.v[j];
                row_marg[i] += plan(i, j);
            }
        return TransportPlan{std::move(plan), std::move(row_marg), m.weights()};
    };
    TransportPlan plan0 = build(leg0, source);
    TransportPlan plan1 = build(leg1, target);

    if (!(viol <= cfg.tol)) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "update_plans did not converge (violation %.3e, tol %.3e)",
                      viol, cfg.tol);
        throw ConvergenceError(msg, std::move(plan0), viol);
    }

    double tcost = 0.0, ent = 0.0;
    const double inv_eps = 1.0 / eps;
    for (const auto& [leg, plan] :
         {std::pair<Leg*, TransportPlan*>{&leg0, &plan0}, {&leg1, &plan1}}) {
        const auto& st = *leg->st;
        for (std::size_t i = 0; i < k; ++i) {
            const double lu = std::log(std::max(st.u[i], kDenFloor)) + st.log_u_abs[i];
            for (std::size_t j = 0; j < st.v.size(); ++j) {
                const double g = plan->matrix(i, j);
                if (g <= 0.0) continue;
                tcost += g * leg->cost(i, j);
                ent += g * (lu + std::log(std::max(st.v[j], kDenFloor)) +
                            st.log_v_abs[j] - leg->cost(i, j) * inv_eps);
            }
        }
    }

    return PlansResult{std::move(plan0), std::move(plan1), tcost, ent, iters};
}

BarycenterSolution factored_ot(const DiscreteMeasure& source,
                               const DiscreteMeasure& target, const FotConfig& cfg) {
    if (source.dim() != target.dim())
        throw DimensionError("factored_ot: dimension mismatch");
    if (cfg.k == 0) throw std::invalid_argument("factored_ot: k must be >= 1");

    const std::size_t d = source.dim();
    HubSet hubs;
    hubs.dim = d;
    switch (cfg.init) {
        case HubInit::KMeansSource: {
            auto km = kmeans(source.points(), source.weights(), d, cfg.k, cfg.seed);
            hubs.hubs = std::move(km.centers);
            break;
        }
        case HubInit::KMeansTarget: {
            auto km = kmeans(target.points(), target.weights(), d, cfg.k, cfg.seed);
            hubs.hubs = std::move(km.centers);
            break;
        }
        case HubInit::KMeansPooled: {
            std::vector<double> pts = source.points();
            pts.insert(pts.end(), target.points().begin(), target.points().end());
            std::vector<double> wts;
            for (double x : source.weights()) wts.push_back(0.5 * x);
            for (double x : target.weights()) wts.push_back(0.5 * x);
            auto km = kmeans(pts, wts, d, cfg.k, cfg.seed);
            hubs.hubs = std::move(km.centers);
            break;
        }
        case HubInit::Given:
            if (cfg.given_hubs.size() != cfg.k * d)
                throw std::invalid_argument("factored_ot: given_hubs shape mismatch");
            hubs.hubs = cfg.given_hubs;
            break;
    }
    hubs.masses.assign(cfg.k, 1.0 / static_cast<double>(cfg.k));

    BarycenterSolution sol;
    PlansState warm;
    SinkhornConfig inner = cfg.sinkhorn;
    double prev_transport = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < cfg.outer_max_iter; ++outer) {
        PlansResult plans;
        try {
            plans = update_plans(source, target, hubs, inner, &warm);
        } catch (ConvergenceError& e) {
            throw ConvergenceError("outer iteration " + std::to_string(outer) +
                                       ": " + e.what(),
                                   std::move(e.last_iterate), e.achieved_violation);
        }
        HubSet next_hubs = update_hubs(source, target, plans.plan0, plans.plan1);

        // Transport part re-evaluated at the new hub positions (the hub
        // update moves hubs, the entropy term depends only on the plans).
        Matrix c0(cfg.k, source.size()), c1(cfg.k, target.size());
        kernels::pairwise_sqdist(next_hubs.hubs.data(), cfg.k,
                                 source.points().data(), source.size(), d,
                                 c0.data());
        kernels::pairwise_sqdist(next_hubs.hubs.data(), cfg.k,
                                 target.points().data(), target.size(), d,
                                 c1.data());
        double transport = 0.0;
        for (std::size_t i = 0; i < c0.size(); ++i)
            transport += plans.plan0.matrix.data()[i] * c0.data()[i];
        for (std::size_t i = 0; i < c1.size(); ++i)
            transport += plans.plan1.matrix.data()[i] * c1.data()[i];

        const double reg_obj = transport + inner.epsilon * plans.entropy_term;
        if (!std::isfinite(reg_obj))
            throw std::runtime_error("factored_ot: non-finite objective at outer " +
                                     std::to_string(outer));

        // Both block updates descend exactly; an ascent can only mean the
        // inner-solver residual now exceeds the remaining descent, i.e. we
        // are at the fixpoint up to solver accuracy. Keep the previous
        // iterate and stop.
        if (!sol.objective_trace.empty() && reg_obj > sol.objective_trace.back())
            break;

        hubs = std::move(next_hubs);
        sol.hub_set = hubs;
        sol.plan0 = std::move(plans.plan0);
        sol.plan1 = std::move(plans.plan1);
        sol.objective_trace.push_back(reg_obj);
        sol.transport_objective = transport;
        sol.outer_iterations = outer + 1;

        const double rel = std::abs(prev_transport - transport) /
                           std::max(std::abs(prev_transport), 1e-12);
        if (outer > 0 && rel < cfg.outer_tol) break;
        prev_transport = transport;
    }
    return sol;
}

}  // namespace fot
