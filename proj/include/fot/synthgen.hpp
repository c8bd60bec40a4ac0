#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fot/measures.hpp"

namespace fot {

using MeasurePair = std::pair<DiscreteMeasure, DiscreteMeasure>;

// Source: n iid uniform on [-1,1]^d. Target: an independent uniform sample
// pushed through T(x) = x + 2 sign(x) (.) (e1 + e2), sign(0) := +1.
// The true squared distance is 8 for every d >= 2.
MeasurePair gen_hypercube_pair(std::size_t d, std::size_t n, std::uint64_t seed);

// Source: uniform on the unit disk in coords 1-2, uniform [0,1] in coords
// 3..d. Target: same with the disk replaced by the annulus of radii [2,3].
MeasurePair gen_disk_annulus_pair(std::size_t d, std::size_t n, std::uint64_t seed);

struct MixtureSpec {
    std::vector<std::vector<double>> means;  // one per component
    double sigma = 1.0;                      // isotropic std deviation
    std::vector<double> weights;             // empty => equal
    std::size_t n = 0;
    std::vector<std::string> labels;         // empty => "0", "1", ...
};

LabeledDataset gen_gaussian_mixture(const MixtureSpec& spec, std::uint64_t seed);

inline constexpr double kHypercubeGroundTruth = 8.0;

// Ground truth for disk-to-annulus: the monotone radial rearrangement is the
// optimal in-plane map, the remaining coordinates contribute nothing, so
// W_2^2 = integral_0^1 (sqrt(4+5r^2) - r)^2 2r dr, evaluated by quadrature.
double disk_annulus_ground_truth();

}  // namespace fot
