#include "fot/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fot/rng.hpp"

namespace fot {

namespace {

std::vector<double> sample_cube(Rng& rng, std::size_t d, std::size_t n) {
    std::vector<double> pts(n * d);
    for (double& x : pts) x = rng.uniform(-1.0, 1.0);
    return pts;
}

void fragment_map(std::vector<double>& pts, std::size_t d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < 2; ++t) {
            double& x = pts[i * d + t];
            x += (x >= 0.0) ? 2.0 : -2.0;  // sign(0) := +1
        }
}

}  // namespace

MeasurePair gen_hypercube_pair(std::size_t d, std::size_t n, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("hypercube generator requires d >= 2");
    Rng src_rng = Rng::stream(seed, 0);
    Rng tgt_rng = Rng::stream(seed, 1);
    std::vector<double> src = sample_cube(src_rng, d, n);
    std::vector<double> tgt = sample_cube(tgt_rng, d, n);
    fragment_map(tgt, d, n);
    return {DiscreteMeasure::uniform(std::move(src), d),
            DiscreteMeasure::uniform(std::move(tgt), d)};
}

MeasurePair gen_disk_annulus_pair(std::size_t d, std::size_t n, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("disk/annulus generator requires d >= 2");
    Rng src_rng = Rng::stream(seed, 0);
    Rng tgt_rng = Rng::stream(seed, 1);

    auto planar = [](Rng& rng, double r_lo2, double r_hi2, double* out) {
        // Area-correct polar sampling: r^2 uniform between the squared radii.
        const double r = std::sqrt(rng.uniform(r_lo2, r_hi2));
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        out[0] = r * std::cos(theta);
        out[1] = r * std::sin(theta);
    };

    std::vector<double> src(n * d), tgt(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        planar(src_rng, 0.0, 1.0, src.data() + i * d);
        for (std::size_t t = 2; t < d; ++t) src[i * d + t] = src_rng.uniform();
        planar(tgt_rng, 4.0, 9.0, tgt.data() + i * d);
        for (std::size_t t = 2; t < d; ++t) tgt[i * d + t] = tgt_rng.uniform();
    }
    return {DiscreteMeasure::uniform(std::move(src), d),
            DiscreteMeasure::uniform(std::move(tgt), d)};
}

LabeledDataset gen_gaussian_mixture(const MixtureSpec& spec, std::uint64_t seed) {
    if (spec.means.empty())
        throw std::invalid_argument("mixture needs at least one component");
    if (spec.n == 0) throw std::invalid_argument("mixture needs n >= 1");
    const std::size_t c = spec.means.size();
    const std::size_t d = spec.means[0].size();
    for (const auto& m : spec.means)
        if (m.size() != d) throw std::invalid_argument("mixture means differ in dim");

    std::vector<double> weights = spec.weights;
    if (weights.empty()) weights.assign(c, 1.0 / static_cast<double>(c));
    if (weights.size() != c)
        throw std::invalid_argument("mixture weights/means size mismatch");
    std::vector<double> cdf(c);
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        acc += weights[j];
        cdf[j] = acc;
    }

    std::vector<std::string> names = spec.labels;
    if (names.empty())
        for (std::size_t j = 0; j < c; ++j) names.push_back(std::to_string(j));

    Rng rng = Rng::stream(seed, 0);
    std::vector<double> pts(spec.n * d);
    std::vector<std::string> labels(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const double u = rng.uniform() * acc;
        std::size_t j = 0;
        while (j + 1 < c && u > cdf[j]) ++j;
        for (std::size_t t = 0; t < d; ++t)
            pts[i * d + t] = spec.means[j][t] + spec.sigma * rng.normal();
        labels[i] = names[j];
    }
    return LabeledDataset{DiscreteMeasure::uniform(std::move(pts), d),
                          std::move(labels)};
}

double disk_annulus_ground_truth() {
    // Composite Simpson on a smooth integrand; converged far past 1e-12.
    const auto f = [](double r) {
        const double s = std::sqrt(4.0 + 5.0 * r * r) - r;
        return s * s * 2.0 * r;
    };
    const std::size_t n = 1 << 12;
    const double h = 1.0 / static_cast<double>(n);
    double sum = f(0.0) + f(1.0);
    for (std::size_t i = 1; i < n; ++i)
        sum += f(static_cast<double>(i) * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace fot
