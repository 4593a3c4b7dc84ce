#include <cmath>
#include <numbers>
#include <sstream>

#include "cfmoll/cli.hpp"
#include "cfmoll/converge.hpp"
#include "cfmoll/errors.hpp"
#include "cfmoll/field_io.hpp"
#include "cfmoll/oracle.hpp"

namespace cfmoll {

namespace {

double normal_pdf(double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); }

CheckResult check(std::string name, bool passed, double value, double limit)
{
    std::ostringstream detail;
    detail << "value " << format_number(value) << " limit " << format_number(limit);
    return {std::move(name), passed, detail.str()};
}

std::vector<DistributionSpec> fixture_specs()
{
    Matrix cov(2, 2);
    cov << 1.0, 0.3, 0.3, 0.5;
    Matrix rot(2, 2);
    rot << 0.8, -0.6, 0.6, 0.8;
    return {normal(0.3, 2.0),
            gaussian(Vector::Constant(2, 0.1), cov),
            point_mass(1.5),
            uniform(-1.0, 2.0),
            laplace(0.7),
            rademacher(),
            convolution({uniform(-1, 1), laplace(1.0)}),
            affine(rot, Vector::Constant(2, 0.5), product({uniform(-1, 1), laplace(1.0)})),
            standardized_iid_sum(bernoulli(0.5), 9, 0.5, 0.25),
            product({normal(0, 1), uniform(0, 1)})};
}

} // namespace

std::vector<CheckResult> run_selfcheck(std::uint64_t seed, int threads)
{
    std::vector<CheckResult> results;
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            results.push_back(body());
        } catch (const std::exception& e) {
            results.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };
    MollificationParams params;
    params.threads = threads;

    guarded("cf-invariants", [&] {
        double worst = 0.0;
        for (const auto& spec : fixture_specs()) {
            const auto cf = make_cf(spec);
            const int d = cf.dimension();
            worst = std::max(worst, std::abs(cf(Vector::Zero(d)) - Complex(1.0, 0.0)));
            for (int i = 1; i <= 40; ++i) {
                Vector t(d);
                for (int j = 0; j < d; ++j)
                    t[j] = std::sin(1.7 * i + 2.3 * j) * 0.5 * i;
                const Complex v = cf(t);
                worst = std::max(worst, std::abs(cf(Vector(-t)) - std::conj(v)));
                worst = std::max(worst, std::abs(v) - 1.0);
            }
        }
        return check("cf-invariants", worst <= 1e-12, worst, 1e-12);
    });

    guarded("mollify-semigroup", [&] {
        const auto cf = make_cf(uniform(-1, 1));
        const auto twice = gaussian_mollify_cf(gaussian_mollify_cf(cf, 0.3), 0.4);
        const auto once = gaussian_mollify_cf(cf, 0.5);
        double worst = 0.0;
        for (double t = -6; t <= 6; t += 0.25)
            worst = std::max(worst, std::abs(twice(t) - once(t)));
        return check("mollify-semigroup", worst <= 1e-14, worst, 1e-14);
    });

    guarded("gaussian-inversion", [&] {
        const auto field = invert_density_grid(make_cf(normal(0, 1)), parse_grid("-5:5:101"), params);
        double worst = 0.0;
        for (std::size_t i = 0; i < field.values.size(); ++i)
            worst = std::max(worst, std::abs(field.values[i] - normal_pdf(field.grid.point(i)[0], 1.0)));
        return check("gaussian-inversion", worst <= 1e-6, worst, 1e-6);
    });

    guarded("mollified-gaussian-closed-form", [&] {
        const auto field = mollified_density_grid(make_cf(normal(0, 1)), 0.5, parse_grid("-8:8:512"), params);
        double worst = 0.0;
        for (std::size_t i = 0; i < field.values.size(); ++i)
            worst = std::max(worst, std::abs(field.values[i] - normal_pdf(field.grid.point(i)[0], 1.25)));
        return check("mollified-gaussian-closed-form", worst <= 1e-6, worst, 1e-6);
    });

    guarded("laplace-inversion", [&] {
        const auto cf = make_cf(laplace(1.0));
        double worst = 0.0;
        for (double z : {-1.0, 0.0, 1.0})
            worst = std::max(worst, std::abs(invert_density_at(cf, std::span(&z, 1), params) -
                                             0.5 * std::exp(-std::abs(z))));
        return check("laplace-inversion", worst <= 1e-4, worst, 1e-4);
    });

    guarded("l1-bound", [&] {
        const double c = cf_l1_bound(make_cf(laplace(1.0)), params);
        return check("l1-bound", std::abs(c - 0.5) <= 1e-4, std::abs(c - 0.5), 1e-4);
    });

    guarded("cross-formula", [&] {
        // The default tail_tol bounds each path's truncation error by 1e-8 only.
        MollificationParams tight = params;
        tight.tail_tol = 1e-12;
        double worst = 0.0;
        const double sigmas[] = {0.4, 0.7, 1.1};
        std::size_t i = 0;
        for (const auto& spec : fixture_specs()) {
            if (spec.dimension() != 1)
                continue;
            const auto cf = make_cf(spec);
            const double sigma = sigmas[i++ % 3];
            const double z = 0.37 * double(i) - 1.0;
            const double a = mollified_density_at(cf, sigma, std::span(&z, 1), tight);
            const double b = invert_density_at(gaussian_mollify_cf(cf, sigma), std::span(&z, 1), tight);
            worst = std::max(worst, std::abs(a - b));
        }
        return check("cross-formula", worst <= 1e-9, worst, 1e-9);
    });

    guarded("normalization", [&] {
        double worst = 0.0;
        for (const auto& spec : fixture_specs()) {
            if (spec.dimension() != 1)
                continue;
            const auto field = mollified_density_grid(make_cf(spec), 0.5, parse_grid("-12:12:961"), params);
            worst = std::max(worst, std::abs(field.riemann_sum() - 1.0));
        }
        return check("normalization", worst <= normalization_window, worst, normalization_window);
    });

    guarded("axis-swap-symmetry", [&] {
        const auto field = mollified_density_grid(make_cf(product({uniform(-1, 1), uniform(-1, 1)})), 0.5,
                                                  parse_grid("-4:4:81,-4:4:81"), params);
        double worst = 0.0;
        for (int a = 0; a < 81; ++a)
            for (int b = 0; b < 81; ++b)
                worst = std::max(worst, std::abs(field.values[std::size_t(a * 81 + b)] -
                                                 field.values[std::size_t(b * 81 + a)]));
        return check("axis-swap-symmetry", worst <= 1e-12, worst, 1e-12);
    });

    guarded("smoothing-remainder", [&] {
        double prev = 2.0;
        bool decreasing = true;
        for (int k = 1; k <= 40; ++k) {
            const double v = gaussian_tail_prob(k, 0.1, 1);
            decreasing = decreasing && v < prev;
            prev = v;
        }
        const double at4 = gaussian_tail_prob(40, 0.1, 1);
        return check("smoothing-remainder", decreasing && at4 < 1e-3, at4, 1e-3);
    });

    guarded("mc-tail-agreement", [&] {
        double worst = 0.0;
        for (int d : {1, 2})
            for (int k : {1, 2, 4}) {
                const double sd = 1.0 / k;
                const auto spec = gaussian(Vector::Zero(d), Matrix::Identity(d, d) * sd * sd);
                const double mc = mc_tail_prob(spec, 0.5, 100000, seed + std::uint64_t(10 * d + k), threads);
                worst = std::max(worst, std::abs(mc - gaussian_tail_prob(k, 0.5, d)));
            }
        return check("mc-tail-agreement", worst <= 0.01, worst, 0.01);
    });

    return results;
}

} // namespace cfmoll
