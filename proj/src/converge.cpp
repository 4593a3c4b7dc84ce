#include "cfmoll/converge.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "cfmoll/errors.hpp"
#include "cfmoll/field_io.hpp"

namespace cfmoll {

namespace {

void require_same_grid(const DensityField& a, const DensityField& b)
{
    if (!(a.grid == b.grid))
        throw ValidationError("density fields live on different grids");
    if (a.values.size() != a.grid.size() || b.values.size() != b.grid.size())
        throw ValidationError("density field value count does not match its grid");
}

} // namespace

double l1_distance(const DensityField& a, const DensityField& b)
{
    require_same_grid(a, b);
    double total = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        total += std::abs(a.values[i] - b.values[i]);
    return total * a.grid.cell_volume();
}

double tv_distance(const DensityField& a, const DensityField& b) { return 0.5 * l1_distance(a, b); }

std::vector<Vector> default_probes(int dimension, int per_axis, double half_width)
{
    if (dimension < 1 || per_axis < 2 || !(half_width > 0))
        throw ValidationError("default_probes: need dimension >= 1, per_axis >= 2, half_width > 0");
    const Grid lattice(std::vector<Axis>(std::size_t(dimension), Axis{-half_width, half_width, per_axis}));
    std::vector<Vector> probes;
    probes.reserve(lattice.size());
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const auto p = lattice.point(i);
        probes.emplace_back(Eigen::Map<const Vector>(p.data(), dimension));
    }
    return probes;
}

double cf_sup_error(const CharFn& cf_n, const CharFn& cf_target, std::span<const Vector> probes)
{
    if (cf_n.dimension() != cf_target.dimension())
        throw ValidationError("cf_sup_error: dimension mismatch");
    if (probes.empty())
        throw ValidationError("cf_sup_error: probe set is empty");
    double worst = 0.0;
    for (const auto& t : probes)
        worst = std::max(worst, std::abs(cf_n(t) - cf_target(t)));
    return worst;
}

double gaussian_max_norm_tail(double radius, int dimension)
{
    if (!(radius >= 0) || dimension < 1)
        throw ValidationError("gaussian_max_norm_tail: need radius >= 0 and dimension >= 1");
    // 1 - (1 - q)^d with q = P(|Z_1| > r), kept accurate for tiny q.
    const double q = std::erfc(radius / std::numbers::sqrt2);
    return -std::expm1(double(dimension) * std::log1p(-q));
}

double gaussian_tail_prob(int k, double epsilon, int dimension)
{
    if (k < 1)
        throw ValidationError("gaussian_tail_prob: k must be >= 1");
    if (!(epsilon > 0))
        throw ValidationError("gaussian_tail_prob: epsilon must be positive");
    return gaussian_max_norm_tail(double(k) * epsilon, dimension);
}

double mass_in_box(const DensityField& field, double radius)
{
    if (!(radius > 0))
        throw ValidationError("mass_in_box: radius must be positive");
    double extent = std::numeric_limits<double>::infinity();
    for (const auto& a : field.grid.axes())
        extent = std::min(extent, std::min(-a.min, a.max));
    if (radius > extent * (1 + 1e-12))
        throw ValidationError("mass_in_box: box [-" + format_number(radius) + ", " + format_number(radius) +
                              "]^d is not inside the grid (largest admissible radius " +
                              format_number(extent) + ")");
    const double limit = radius * (1 + 1e-12);
    const int d = field.grid.dimension();
    std::vector<int> idx(std::size_t(d), 0);
    double total = 0.0;
    for (double value : field.values) {
        bool inside = true;
        for (int j = 0; j < d && inside; ++j)
            inside = std::abs(field.grid.axis(j).point(idx[std::size_t(j)])) <= limit;
        if (inside)
            total += value;
        for (int j = d; j-- > 0;) {
            if (++idx[std::size_t(j)] < field.grid.axis(j).count)
                break;
            idx[std::size_t(j)] = 0;
        }
    }
    return total * field.grid.cell_volume();
}

ConvergenceReport convergence_certificate(std::span<const CharFn> sequence, const CharFn& target,
                                          std::span<const int> k_schedule, const Grid& grid,
                                          double epsilon, const MollificationParams& params,
                                          const CertificateOptions& options)
{
    if (sequence.empty())
        throw ValidationError("convergence_certificate: empty sequence");
    if (k_schedule.empty())
        throw ValidationError("convergence_certificate: empty k schedule");
    if (!(epsilon > 0))
        throw ValidationError("convergence_certificate: epsilon must be positive");
    const int d = target.dimension();
    for (const auto& cf : sequence)
        if (cf.dimension() != d)
            throw ValidationError("convergence_certificate: sequence and target differ in dimension");
    if (grid.dimension() != d)
        throw ValidationError("convergence_certificate: grid dimension does not match the laws");
    for (std::size_t i = 0; i < k_schedule.size(); ++i) {
        if (k_schedule[i] < 1)
            throw ValidationError("convergence_certificate: k values must be >= 1");
        if (i > 0 && k_schedule[i] <= k_schedule[i - 1])
            throw ValidationError("convergence_certificate: k schedule must be strictly increasing");
    }

    ConvergenceReport report;
    report.dimension = d;
    report.epsilon = epsilon;
    report.k_schedule.assign(k_schedule.begin(), k_schedule.end());

    if (options.labels.empty()) {
        for (std::size_t i = 0; i < sequence.size(); ++i)
            report.labels.push_back(long(i + 1));
    } else if (options.labels.size() == sequence.size()) {
        report.labels = options.labels;
    } else {
        throw ValidationError("convergence_certificate: one label per sequence member required");
    }

    const bool default_sigmas = options.sigmas.empty();
    if (default_sigmas) {
        for (int k : k_schedule)
            report.sigma_schedule.push_back(1.0 / double(k));
    } else {
        if (options.sigmas.size() != k_schedule.size())
            throw ValidationError("convergence_certificate: one sigma per k required");
        for (std::size_t i = 0; i < options.sigmas.size(); ++i) {
            if (!(options.sigmas[i] > 0))
                throw ValidationError("convergence_certificate: sigmas must be positive");
            if (i > 0 && options.sigmas[i] > options.sigmas[i - 1])
                throw ValidationError("convergence_certificate: sigmas must be nonincreasing in k");
        }
        report.sigma_schedule = options.sigmas;
    }

    const auto probes = options.probes.empty() ? default_probes(d) : options.probes;
    for (const auto& cf : sequence)
        report.cf_sup_error.push_back(cf_sup_error(cf, target, probes));

    report.l1_mollified.assign(sequence.size(), std::vector<double>(k_schedule.size()));
    for (std::size_t ki = 0; ki < k_schedule.size(); ++ki) {
        const double sigma = report.sigma_schedule[ki];
        const DensityField limit = mollified_density_grid(target, sigma, grid, params);
        for (std::size_t n = 0; n < sequence.size(); ++n) {
            const DensityField field = mollified_density_grid(sequence[n], sigma, grid, params);
            report.l1_mollified[n][ki] = l1_distance(field, limit);
        }
        report.smoothing_remainder.push_back(default_sigmas
                                                 ? gaussian_tail_prob(k_schedule[ki], epsilon, d)
                                                 : gaussian_max_norm_tail(epsilon / sigma, d));
        bool monotone = true;
        for (std::size_t n = 1; n < sequence.size(); ++n)
            monotone = monotone && report.l1_mollified[n][ki] <= report.l1_mollified[n - 1][ki];
        report.monotone_flags.push_back(monotone);
        report.final_l1.push_back(report.l1_mollified.back()[ki]);
    }
    return report;
}

nlohmann::json to_json(const ConvergenceReport& r)
{
    return {{"schema", report_schema},
            {"dimension", r.dimension},
            {"epsilon", r.epsilon},
            {"n", r.labels},
            {"k", r.k_schedule},
            {"sigma", r.sigma_schedule},
            {"cf_sup_error", r.cf_sup_error},
            {"l1_mollified", r.l1_mollified},
            {"smoothing_remainder", r.smoothing_remainder},
            {"monotone_flags", r.monotone_flags},
            {"final_l1", r.final_l1}};
}

ConvergenceReport report_from_json(const nlohmann::json& j)
{
    if (j.value("schema", std::string()) != report_schema)
        throw ValidationError(std::string("convergence report: expected schema ") + report_schema);
    ConvergenceReport r;
    try {
        r.dimension = j.at("dimension").get<int>();
        r.epsilon = j.at("epsilon").get<double>();
        r.labels = j.at("n").get<std::vector<long>>();
        r.k_schedule = j.at("k").get<std::vector<int>>();
        r.sigma_schedule = j.at("sigma").get<std::vector<double>>();
        r.cf_sup_error = j.at("cf_sup_error").get<std::vector<double>>();
        r.l1_mollified = j.at("l1_mollified").get<std::vector<std::vector<double>>>();
        r.smoothing_remainder = j.at("smoothing_remainder").get<std::vector<double>>();
        r.monotone_flags = j.at("monotone_flags").get<std::vector<bool>>();
        r.final_l1 = j.at("final_l1").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("convergence report: ") + e.what());
    }
    return r;
}

void write_report_csv(std::ostream& out, const ConvergenceReport& r)
{
    out << "n,k,sigma,l1,remainder\n";
    for (std::size_t n = 0; n < r.labels.size(); ++n)
        for (std::size_t k = 0; k < r.k_schedule.size(); ++k)
            out << r.labels[n] << ',' << r.k_schedule[k] << ',' << format_number(r.sigma_schedule[k]) << ','
                << format_number(r.l1_mollified[n][k]) << ',' << format_number(r.smoothing_remainder[k]) << '\n';
}

} // namespace cfmoll
