#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "cfmoll/charfn.hpp"
#include "cfmoll/distribution.hpp"
#include "cfmoll/grid.hpp"

namespace cfmoll {

using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// i.i.d. draws from `spec`, one per row.
struct SampleBatch {
    DistributionSpec spec;
    std::uint64_t seed;
    SampleMatrix points;

    std::size_t size() const { return std::size_t(points.rows()); }
    int dimension() const { return int(points.cols()); }
};

/// Draws are generated in tasks of this many samples; task i uses the stream
/// (seed, i), so the batch does not depend on the thread count.
inline constexpr std::size_t samples_per_task = 4096;

SampleBatch sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed, int threads = 0);

/// (1/n) sum_j exp(i <t, x_j>).
Complex empirical_cf(const SampleBatch& batch, std::span<const double> t);
Complex empirical_cf(const SampleBatch& batch, const Vector& t);

/// Fraction of n draws with ||x||_inf > radius.
double mc_tail_prob(const DistributionSpec& spec, double radius, std::size_t n, std::uint64_t seed,
                    int threads = 0);

/// Histogram of X + sigma Z, X ~ spec, Z ~ N(0, I) independent. Lattice points
/// are bin centres; counts are divided by n and the cell volume. Draws that
/// land outside the grid are dropped, so the Riemann sum is the captured mass.
DensityField mollified_histogram(const DistributionSpec& spec, double sigma, const Grid& grid, std::size_t n,
                                 std::uint64_t seed, int threads = 0);

/// CSV x1,...,xd with 17 significant digits.
void write_sample_csv(std::ostream& out, const SampleBatch& batch);
/// Writes `csv_path` and a ".json" sidecar holding spec, seed and n.
void write_sample_batch(const SampleBatch& batch, const std::string& csv_path);

} // namespace cfmoll
