#include "cfmoll/mollify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cfmoll/errors.hpp"
#include "cfmoll/parallel.hpp"

namespace cfmoll {

namespace {

using RowMajorC = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr std::size_t eval_chunk = 4096;
constexpr std::size_t phase_block_entries = std::size_t(1) << 20;

Complex expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

void check_dimension(int d, const MollificationParams& params)
{
    if (d > 3 && !params.allow_high_dimension)
        throw ValidationError("dimension " + std::to_string(d) +
                              " exceeds the default cap of 3; tensor quadrature cost grows as m^d "
                              "(set allow_high_dimension to proceed)");
}

void check_sigma(double sigma)
{
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw ValidationError("sigma must be a positive finite number, got " + std::to_string(sigma));
}

void require_integrable(const CharFn& cf, const MollificationParams& params)
{
    switch (cf.integrable()) {
    case Integrability::yes: return;
    case Integrability::no:
        throw ValidationError("characteristic function (" + cf.provenance() +
                              ") is not integrable, so Fourier inversion does not apply "
                              "(point masses and empirical laws have |cf| that does not decay)");
    case Integrability::unknown:
        if (params.allow_unknown_integrability)
            return;
        throw ValidationError("integrability of the characteristic function (" + cf.provenance() +
                              ") is unknown; declare it or set allow_unknown_integrability");
    }
}

/// Weighted integrand w_k * cf(y_k) * exp(-sigma^2 |y_k|^2 / 2) * (2 pi)^-d on
/// the tensor nodes, row-major with the last axis fastest.
struct Integrand {
    QuadratureRule rule;
    int dimension;
    std::vector<Complex> values;

    std::size_t nodes_per_axis() const { return rule.nodes.size(); }

    double abs_sum() const
    {
        double total = 0.0;
        for (const auto& v : values)
            total += std::abs(v);
        return total;
    }
};

Integrand build_integrand(const CharFn& cf, double sigma, QuadratureRule rule, int threads)
{
    const int d = cf.dimension();
    const std::size_t m = rule.nodes.size();
    std::size_t total = 1;
    for (int j = 0; j < d; ++j)
        total *= m;

    Integrand f{std::move(rule), d, std::vector<Complex>(total)};
    const double scale = std::pow(two_pi, -d);
    const double half_var = 0.5 * sigma * sigma;
    const std::size_t chunks = (total + eval_chunk - 1) / eval_chunk;

    detail::parallel_for(chunks, threads, [&](std::size_t c) {
        std::vector<double> y(static_cast<std::size_t>(d));
        std::vector<std::size_t> idx(static_cast<std::size_t>(d));
        const std::size_t begin = c * eval_chunk;
        const std::size_t end = std::min(total, begin + eval_chunk);
        for (std::size_t flat = begin; flat < end; ++flat) {
            std::size_t rest = flat;
            for (int j = d - 1; j >= 0; --j) {
                idx[std::size_t(j)] = rest % m;
                rest /= m;
            }
            double weight = scale;
            double norm2 = 0.0;
            for (std::size_t j = 0; j < std::size_t(d); ++j) {
                y[j] = f.rule.nodes[idx[j]];
                weight *= f.rule.weights[idx[j]];
                norm2 += y[j] * y[j];
            }
            Complex value = cf(std::span<const double>(y));
            if (half_var > 0)
                value *= std::exp(-half_var * norm2);
            f.values[flat] = weight * value;
        }
    });
    return f;
}

/// sum_k F_k exp(-i <z, y_k>), summed node by node.
Complex direct_sum(const Integrand& f, std::span<const double> z)
{
    const std::size_t m = f.nodes_per_axis();
    const auto d = std::size_t(f.dimension);
    std::vector<std::size_t> idx(d, 0);
    Complex sum(0.0, 0.0);
    for (const auto& value : f.values) {
        double phase = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            phase += z[j] * f.rule.nodes[idx[j]];
        sum += value * expi(-phase);
        for (std::size_t j = d; j-- > 0;) {
            if (++idx[j] < m)
                break;
            idx[j] = 0;
        }
    }
    return sum;
}

/// The same sum on every lattice point of `grid`, contracted one axis at a
/// time: exp(-i<z,y>) factorizes over axes.
std::vector<Complex> grid_sum(const Integrand& f, const Grid& grid, int threads)
{
    const auto d = std::size_t(f.dimension);
    const std::size_t m = f.nodes_per_axis();
    std::vector<std::size_t> shape(d, m);
    std::vector<Complex> current = f.values;

    for (std::size_t j = 0; j < d; ++j) {
        const Axis& axis = grid.axis(int(j));
        const auto rows = std::size_t(axis.count);
        std::size_t pre = 1, post = 1;
        for (std::size_t i = 0; i < j; ++i)
            pre *= shape[i];
        for (std::size_t i = j + 1; i < d; ++i)
            post *= shape[i];

        std::vector<Complex> next(pre * rows * post);
        // Block sizes depend only on the problem shape, never on the thread
        // count, so every output is produced by the same arithmetic.
        const std::size_t block_rows = std::clamp<std::size_t>(phase_block_entries / m, 1, rows);
        const std::size_t blocks = (rows + block_rows - 1) / block_rows;

        detail::parallel_for(blocks, threads, [&](std::size_t b) {
            const std::size_t r0 = b * block_rows;
            const std::size_t rb = std::min(rows, r0 + block_rows) - r0;
            RowMajorC phases(static_cast<Eigen::Index>(rb), static_cast<Eigen::Index>(m));
            for (std::size_t a = 0; a < rb; ++a) {
                const double z = axis.point(int(r0 + a));
                for (std::size_t k = 0; k < m; ++k)
                    phases(Eigen::Index(a), Eigen::Index(k)) = expi(-z * f.rule.nodes[k]);
            }
            for (std::size_t p = 0; p < pre; ++p) {
                Eigen::Map<const RowMajorC> in(current.data() + p * m * post, Eigen::Index(m),
                                               Eigen::Index(post));
                Eigen::Map<RowMajorC> out(next.data() + (p * rows + r0) * post, Eigen::Index(rb),
                                          Eigen::Index(post));
                out.noalias() = phases * in;
            }
        });
        shape[j] = rows;
        current = std::move(next);
    }
    return current;
}

double real_part_checked(Complex value, const MollificationParams& params, const char* what)
{
    const double limit = 100.0 * combined_tolerance(params);
    if (!(std::abs(value.imag()) <= limit)) {
        std::ostringstream msg;
        msg << what << ": imaginary part " << value.imag() << " exceeds " << limit
            << "; the characteristic function is not Hermitian (cf(-t) != conj cf(t))";
        throw NumericFailure(msg.str());
    }
    return value.real();
}

QuadratureRule mollify_rule(const CharFn& cf, double sigma, const MollificationParams& params)
{
    const double radius = params.truncation_radius > 0
                              ? params.truncation_radius
                              : truncation_radius(sigma, params.tail_tol, cf.dimension());
    return make_rule(radius, cf.dimension(), params);
}

QuadratureRule inversion_rule(const CharFn& cf, const MollificationParams& params)
{
    const double radius =
        params.truncation_radius > 0 ? params.truncation_radius : inversion_radius(cf, params).radius;
    return make_rule(radius, cf.dimension(), params);
}

void check_point(const CharFn& cf, std::span<const double> z)
{
    if (z.size() != std::size_t(cf.dimension()))
        throw ValidationError("evaluation point has dimension " + std::to_string(z.size()) +
                              " but the characteristic function has dimension " +
                              std::to_string(cf.dimension()));
}

void check_grid(const CharFn& cf, const Grid& grid)
{
    if (grid.dimension() != cf.dimension())
        throw ValidationError("grid has dimension " + std::to_string(grid.dimension()) +
                              " but the characteristic function has dimension " +
                              std::to_string(cf.dimension()));
}

std::string quadrature_hint(const QuadratureRule& rule)
{
    std::ostringstream msg;
    msg << " (quadrature: R = " << rule.radius << ", " << rule.nodes.size()
        << " nodes per axis; try a larger truncation radius or node count, or a grid that covers "
           "the support)";
    return msg.str();
}

} // namespace

void validate(const MollificationParams& p)
{
    if (!(p.truncation_radius >= 0) || !std::isfinite(p.truncation_radius))
        throw ValidationError("truncation_radius must be >= 0 (0 selects it automatically)");
    if (p.nodes_per_axis != 0 && (p.nodes_per_axis < 16 || p.nodes_per_axis % 2 != 0))
        throw ValidationError("nodes_per_axis must be an even number >= 16");
    if (!(p.tail_tol > 0))
        throw ValidationError("tail_tol must be positive");
    if (!(p.negativity_tol > 0))
        throw ValidationError("negativity_tol must be positive");
    if (!(p.max_frequency_step > 0))
        throw ValidationError("max_frequency_step must be positive");
    if (!(p.max_inversion_radius > 0) || !std::isfinite(p.max_inversion_radius))
        throw ValidationError("max_inversion_radius must be positive");
    if (p.threads < 0)
        throw ValidationError("threads must be >= 0");
}

double truncation_radius(double sigma, double tail_tol, int dimension)
{
    check_sigma(sigma);
    if (!(tail_tol > 0))
        throw ValidationError("tail_tol must be positive");
    if (dimension < 1)
        throw ValidationError("dimension must be >= 1");

    // (2 pi)^-d * full integral = (2 pi)^{-d/2} sigma^-d; the union bound over
    // axes gives a tail of d * (2 pi)^{-d/2} sigma^-d * erfc(sigma R / sqrt 2).
    const double d = dimension;
    const double full = std::pow(two_pi, -0.5 * d) * std::pow(sigma, -d);
    if (tail_tol >= full)
        return 1.0;
    const double target = tail_tol / (full * d);

    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (std::erfc(mid) > target ? lo : hi) = mid;
    }
    return std::max(1.0, hi * std::numbers::sqrt2 / sigma);
}

InversionRadius inversion_radius(const CharFn& cf, const MollificationParams& params)
{
    validate(params);
    constexpr int probes = 8;
    constexpr double growth = 1.25;
    const int d = cf.dimension();
    const double cap = params.max_inversion_radius;
    const double threshold = std::numbers::pi * params.tail_tol;

    double widest = 0.0;
    std::vector<double> t(std::size_t(d), 0.0);
    for (int j = 0; j < d; ++j) {
        bool settled = false;
        for (double r = 0.5; 2.0 * r <= cap; r *= growth) {
            double level = 0.0;
            for (double sign : {-1.0, 1.0}) {
                for (int p = 0; p < probes; ++p) {
                    t[std::size_t(j)] = sign * r * (1.0 + double(p) / probes);
                    level = std::max(level, std::abs(cf(std::span<const double>(t))));
                }
            }
            t[std::size_t(j)] = 0.0;
            if (r * level < threshold) {
                widest = std::max(widest, r);
                settled = true;
                break;
            }
        }
        if (!settled)
            return {cap, true};
    }
    return {std::min(cap, 2.0 * widest), false};
}

QuadratureRule make_rule(double radius, int dimension, const MollificationParams& params)
{
    validate(params);
    if (!(radius > 0) || !std::isfinite(radius))
        throw ValidationError("quadrature radius must be positive and finite");
    int m = params.nodes_per_axis > 0 ? params.nodes_per_axis : (dimension <= 2 ? 512 : 64);
    const double needed = std::ceil(2.0 * radius / params.max_frequency_step) + 1.0;
    if (needed > m) {
        if (std::pow(needed, dimension) > params.max_total_nodes)
            throw ValidationError("quadrature would need " + std::to_string(needed) + "^" +
                                  std::to_string(dimension) + " nodes for radius " +
                                  std::to_string(radius) + "; raise max_frequency_step or lower the radius");
        m = int(needed);
        m += m % 2;
    }
    if (std::pow(double(m), dimension) > params.max_total_nodes)
        throw ValidationError("quadrature with " + std::to_string(m) + " nodes per axis in dimension " +
                              std::to_string(dimension) + " exceeds max_total_nodes");

    QuadratureRule rule{radius, std::vector<double>(std::size_t(m)), std::vector<double>(std::size_t(m))};
    const double h = 2.0 * radius / double(m - 1);
    for (int k = 0; k < m; ++k) {
        // Symmetric about zero so Hermitian integrands sum to a real value.
        const double offset = double(k) - 0.5 * double(m - 1);
        rule.nodes[std::size_t(k)] = offset * h;
        rule.weights[std::size_t(k)] = (k == 0 || k == m - 1) ? 0.5 * h : h;
    }
    return rule;
}

double mollified_density_at(const CharFn& cf, double sigma, std::span<const double> z,
                            const MollificationParams& params)
{
    check_sigma(sigma);
    check_point(cf, z);
    check_dimension(cf.dimension(), params);
    const auto f = build_integrand(cf, sigma, mollify_rule(cf, sigma, params), params.threads);
    return real_part_checked(direct_sum(f, z), params, "mollified_density_at");
}

DensityField mollified_density_grid(const CharFn& cf, double sigma, const Grid& grid,
                                    const MollificationParams& params)
{
    check_sigma(sigma);
    check_grid(cf, grid);
    check_dimension(cf.dimension(), params);
    const auto f = build_integrand(cf, sigma, mollify_rule(cf, sigma, params), params.threads);
    const auto sums = grid_sum(f, grid, params.threads);

    DensityField field{grid, std::vector<double>(sums.size()), false};
    for (std::size_t i = 0; i < sums.size(); ++i) {
        double v = real_part_checked(sums[i], params, "mollified_density_grid");
        if (v < -params.negativity_tol) {
            std::ostringstream msg;
            msg << "mollified_density_grid: density " << v << " at grid index " << i
                << " is below -" << params.negativity_tol << quadrature_hint(f.rule);
            throw NumericFailure(msg.str());
        }
        field.values[i] = v < 0 ? 0.0 : v;
    }
    const double mass = field.riemann_sum();
    if (!(std::abs(mass - 1.0) <= normalization_window)) {
        std::ostringstream msg;
        msg << "mollified_density_grid: Riemann sum " << mass << " is outside 1 +- "
            << normalization_window << quadrature_hint(f.rule);
        throw NumericFailure(msg.str());
    }
    field.normalized = true;
    return field;
}

double invert_density_at(const CharFn& cf, std::span<const double> z, const MollificationParams& params)
{
    check_point(cf, z);
    require_integrable(cf, params);
    check_dimension(cf.dimension(), params);
    const auto f = build_integrand(cf, 0.0, inversion_rule(cf, params), params.threads);
    const double value = real_part_checked(direct_sum(f, z), params, "invert_density_at");
    const double bound = f.abs_sum();
    if (value > bound + 1e-6)
        throw NumericFailure("invert_density_at: value exceeds the L1 bound of the characteristic function");
    if (value < -params.negativity_tol) {
        std::ostringstream msg;
        msg << "invert_density_at: density " << value << " is below -" << params.negativity_tol
            << quadrature_hint(f.rule);
        throw NumericFailure(msg.str());
    }
    return value;
}

DensityField invert_density_grid(const CharFn& cf, const Grid& grid, const MollificationParams& params)
{
    check_grid(cf, grid);
    require_integrable(cf, params);
    check_dimension(cf.dimension(), params);
    const auto f = build_integrand(cf, 0.0, inversion_rule(cf, params), params.threads);
    const auto sums = grid_sum(f, grid, params.threads);
    const double bound = f.abs_sum();

    DensityField field{grid, std::vector<double>(sums.size()), false};
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const double v = real_part_checked(sums[i], params, "invert_density_grid");
        if (v > bound + 1e-6)
            throw NumericFailure("invert_density_grid: value exceeds the L1 bound of the characteristic function");
        if (v < -params.negativity_tol) {
            std::ostringstream msg;
            msg << "invert_density_grid: density " << v << " at grid index " << i << " is below -"
                << params.negativity_tol << quadrature_hint(f.rule);
            throw NumericFailure(msg.str());
        }
        field.values[i] = v < 0 ? 0.0 : v;
    }
    field.normalized = std::abs(field.riemann_sum() - 1.0) <= normalization_window;
    return field;
}

double cf_l1_bound(const CharFn& cf, const MollificationParams& params)
{
    require_integrable(cf, params);
    check_dimension(cf.dimension(), params);
    return build_integrand(cf, 0.0, inversion_rule(cf, params), params.threads).abs_sum();
}

} // namespace cfmoll
