#include "cfmoll/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>

#include "cfmoll/errors.hpp"
#include "cfmoll/field_io.hpp"
#include "cfmoll/parallel.hpp"
#include "cfmoll/random.hpp"

namespace cfmoll {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

constexpr std::uint64_t law_domain = 0;
constexpr std::uint64_t noise_domain = 1;

/// Writes one draw into out[0, d).
using Draw = std::function<void(RandomStream&, double*)>;

Draw compile(const DistributionSpec& spec)
{
    return std::visit(
        Overloaded{
            [](const law::Gaussian& g) -> Draw {
                Eigen::SelfAdjointEigenSolver<Matrix> eig(g.cov);
                const Matrix root =
                    eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
                return [mean = g.mean, root](RandomStream& rng, double* out) {
                    Vector z(mean.size());
                    for (Eigen::Index i = 0; i < z.size(); ++i)
                        z[i] = rng.normal();
                    Eigen::Map<Vector>(out, mean.size()) = mean + root * z;
                };
            },
            [](const law::PointMass& p) -> Draw {
                return [x = p.location](RandomStream&, double* out) { Eigen::Map<Vector>(out, x.size()) = x; };
            },
            [](const law::UniformBox& u) -> Draw {
                return [lo = u.lo, width = Vector(u.hi - u.lo)](RandomStream& rng, double* out) {
                    for (Eigen::Index j = 0; j < lo.size(); ++j)
                        out[j] = lo[j] + width[j] * rng.uniform();
                };
            },
            [](const law::Laplace1D& l) -> Draw {
                return [b = l.scale](RandomStream& rng, double* out) {
                    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                    out[0] = sign * b * -std::log(rng.uniform());
                };
            },
            [](const law::Empirical& e) -> Draw {
                std::vector<double> cumulative(e.weights.size());
                std::partial_sum(e.weights.begin(), e.weights.end(), cumulative.begin());
                std::size_t last = 0;
                for (std::size_t k = 0; k < e.weights.size(); ++k)
                    if (e.weights[k] > 0)
                        last = k;
                return [points = e.points, cumulative, last](RandomStream& rng, double* out) {
                    const double u = rng.uniform() * cumulative.back();
                    auto k = std::size_t(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                         cumulative.begin());
                    k = std::min(k, last);
                    Eigen::Map<Vector>(out, points[k].size()) = points[k];
                };
            },
            [d = spec.dimension()](const law::Convolution& c) -> Draw {
                std::vector<Draw> parts;
                for (const auto& p : c.parts)
                    parts.push_back(compile(p));
                return [parts, d](RandomStream& rng, double* out) {
                    std::vector<double> tmp(static_cast<std::size_t>(d));
                    std::fill(out, out + d, 0.0);
                    for (const auto& part : parts) {
                        part(rng, tmp.data());
                        for (int j = 0; j < d; ++j)
                            out[j] += tmp[std::size_t(j)];
                    }
                };
            },
            [](const law::AffineMap& a) -> Draw {
                return [inner = compile(*a.inner), matrix = a.matrix, shift = a.shift](RandomStream& rng,
                                                                                    double* out) {
                    Vector x(matrix.cols());
                    inner(rng, x.data());
                    Eigen::Map<Vector>(out, shift.size()) = matrix * x + shift;
                };
            },
            [](const law::StandardizedIIDSum& s) -> Draw {
                const double scale = 1.0 / std::sqrt(double(s.n) * s.variance);
                return [base = compile(*s.base), n = s.n, offset = double(s.n) * s.mean,
                        scale](RandomStream& rng, double* out) {
                    double sum = 0.0;
                    for (int i = 0; i < n; ++i) {
                        double x;
                        base(rng, &x);
                        sum += x;
                    }
                    out[0] = (sum - offset) * scale;
                };
            },
            [](const law::Product& p) -> Draw {
                std::vector<Draw> factors;
                for (const auto& f : p.factors)
                    factors.push_back(compile(f));
                return [factors](RandomStream& rng, double* out) {
                    for (std::size_t j = 0; j < factors.size(); ++j)
                        factors[j](rng, out + j);
                };
            },
        },
        spec.node());
}

std::size_t task_count(std::size_t n) { return (n + samples_per_task - 1) / samples_per_task; }

} // namespace

SampleBatch sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed, int threads)
{
    if (n < 1)
        throw ValidationError("sample: n must be >= 1");
    validate(spec);
    const Draw draw = compile(spec);
    const int d = spec.dimension();
    SampleBatch batch{spec, seed, SampleMatrix(Eigen::Index(n), d)};
    detail::parallel_for(task_count(n), threads, [&](std::size_t task) {
        RandomStream rng(seed, task_in_domain(law_domain, task));
        const std::size_t begin = task * samples_per_task;
        const std::size_t end = std::min(n, begin + samples_per_task);
        for (std::size_t i = begin; i < end; ++i)
            draw(rng, batch.points.row(Eigen::Index(i)).data());
    });
    return batch;
}

Complex empirical_cf(const SampleBatch& batch, std::span<const double> t)
{
    if (batch.size() == 0)
        throw ValidationError("empirical_cf: empty batch");
    if (t.size() != std::size_t(batch.dimension()))
        throw ValidationError("empirical_cf: dimension mismatch");
    if (std::all_of(t.begin(), t.end(), [](double v) { return v == 0.0; }))
        return {1.0, 0.0};
    const Eigen::Map<const Vector> tv(t.data(), Eigen::Index(t.size()));
    const Vector phases = batch.points * tv;
    double re = 0.0, im = 0.0;
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        re += std::cos(phases[i]);
        im += std::sin(phases[i]);
    }
    const double n = double(batch.size());
    return {re / n, im / n};
}

Complex empirical_cf(const SampleBatch& batch, const Vector& t)
{
    return empirical_cf(batch, std::span<const double>(t.data(), std::size_t(t.size())));
}

double mc_tail_prob(const DistributionSpec& spec, double radius, std::size_t n, std::uint64_t seed, int threads)
{
    if (!(radius >= 0))
        throw ValidationError("mc_tail_prob: radius must be >= 0");
    const auto batch = sample(spec, n, seed, threads);
    std::size_t outside = 0;
    for (Eigen::Index i = 0; i < batch.points.rows(); ++i)
        if (batch.points.row(i).cwiseAbs().maxCoeff() > radius)
            ++outside;
    return double(outside) / double(n);
}

DensityField mollified_histogram(const DistributionSpec& spec, double sigma, const Grid& grid, std::size_t n,
                                 std::uint64_t seed, int threads)
{
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw ValidationError("mollified_histogram: sigma must be positive");
    if (grid.dimension() != spec.dimension())
        throw ValidationError("mollified_histogram: grid dimension does not match the spec");
    auto batch = sample(spec, n, seed, threads);
    const int d = grid.dimension();
    detail::parallel_for(task_count(n), threads, [&](std::size_t task) {
        RandomStream rng(seed, task_in_domain(noise_domain, task));
        const std::size_t begin = task * samples_per_task;
        const std::size_t end = std::min(n, begin + samples_per_task);
        for (std::size_t i = begin; i < end; ++i)
            for (int j = 0; j < d; ++j)
                batch.points(Eigen::Index(i), j) += sigma * rng.normal();
    });

    std::vector<double> counts(grid.size(), 0.0);
    for (Eigen::Index i = 0; i < batch.points.rows(); ++i) {
        std::size_t flat = 0;
        bool inside = true;
        for (int j = 0; j < d && inside; ++j) {
            const Axis& a = grid.axis(j);
            const double pos = std::floor((batch.points(i, j) - a.min) / a.spacing() + 0.5);
            inside = pos >= 0 && pos < a.count;
            flat = flat * std::size_t(a.count) + (inside ? std::size_t(pos) : 0);
        }
        if (inside)
            counts[flat] += 1.0;
    }
    const double scale = 1.0 / (double(n) * grid.cell_volume());
    DensityField field{grid, std::move(counts), false};
    for (auto& v : field.values)
        v *= scale;
    field.normalized = std::abs(field.riemann_sum() - 1.0) <= normalization_window;
    return field;
}

void write_sample_csv(std::ostream& out, const SampleBatch& batch)
{
    for (int j = 0; j < batch.dimension(); ++j)
        out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < batch.points.rows(); ++i) {
        for (int j = 0; j < batch.dimension(); ++j)
            out << (j ? "," : "") << format_number(batch.points(i, j));
        out << '\n';
    }
}

void write_sample_batch(const SampleBatch& batch, const std::string& csv_path)
{
    std::ofstream csv(csv_path);
    if (!csv)
        throw ValidationError("cannot write " + csv_path);
    write_sample_csv(csv, batch);
    std::ofstream side(with_extension(csv_path, ".json"));
    side << nlohmann::json{{"schema", "cfmoll.sample_batch/1"},
                           {"spec", spec_to_json(batch.spec)},
                           {"seed", batch.seed},
                           {"n", batch.size()}}
                .dump(2)
         << '\n';
}

} // namespace cfmoll
