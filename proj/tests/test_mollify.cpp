#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cfmoll/errors.hpp"
#include "cfmoll/mollify.hpp"
#include "support/oracles.hpp"
#include "support/random_specs.hpp"

using namespace cfmoll;
using std::numbers::pi;

namespace {

double at(const CharFn& cf, double sigma, double z, const MollificationParams& p = {})
{
    return mollified_density_at(cf, sigma, std::span<const double>(&z, 1), p);
}

double inv(const CharFn& cf, double z, const MollificationParams& p = {})
{
    return invert_density_at(cf, std::span<const double>(&z, 1), p);
}

double sup_error(const DensityField& f, const std::function<double(const std::vector<double>&)>& exact)
{
    double worst = 0;
    for (std::size_t i = 0; i < f.grid.size(); ++i)
        worst = std::max(worst, std::abs(f.values[i] - exact(f.grid.point(i))));
    return worst;
}

} // namespace

TEST_CASE("truncation_radius: examples and monotonicity")
{
    // Oracle: (2 pi)^-1 * integral_{|y|>R} exp(-y^2/2) dy = 2 Phi(-R) / sqrt(2 pi).
    const double root = oracle::bisect(
        [](double r) { return 2 * oracle::Phi(-r) / std::sqrt(2 * pi) - 1e-6; }, 1.0, 10.0);
    CHECK(root == doctest::Approx(4.707589832900272).epsilon(1e-9));
    const double r = truncation_radius(1.0, 1e-6, 1);
    CHECK(r >= root - 1e-9);
    CHECK(r <= root + 1e-6);

    CHECK(truncation_radius(1.0, 1.0, 1) == 1.0);
    CHECK(truncation_radius(1.0, 0.5, 2) == 1.0);

    for (int d = 1; d <= 3; ++d)
        for (double tol : {1e-4, 1e-8, 1e-12}) {
            CHECK(truncation_radius(2.0, tol, d) <= truncation_radius(1.0, tol, d));
            CHECK(truncation_radius(0.5, tol, d) >= truncation_radius(1.0, tol, d));
            CHECK(truncation_radius(1.0, tol / 10, d) >= truncation_radius(1.0, tol, d));
        }

    CHECK_THROWS_AS(truncation_radius(0.0, 1e-8, 1), ValidationError);
    CHECK_THROWS_AS(truncation_radius(-1.0, 1e-8, 1), ValidationError);
    CHECK_THROWS_AS(truncation_radius(1.0, 0.0, 1), ValidationError);
}

TEST_CASE("property: truncation_radius meets its tail bound")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + int(rng() % 3);
        const double sigma = testgen::uni(rng, 0.05, 3);
        const double tol = std::pow(10.0, testgen::uni(rng, -12, -2));
        const double r = truncation_radius(sigma, tol, d);
        // Union bound over axes of the per-axis tail, computed with the oracle erfc.
        const double full = std::sqrt(2 * pi) / sigma;
        const double tail = 2 * oracle::Phi(-sigma * r) * full;
        const double bound = d * tail * std::pow(full, d - 1) / std::pow(2 * pi, d);
        CHECK(bound <= tol * (1 + 1e-9));
    }
}

TEST_CASE("mollified_density_at: examples")
{
    CHECK(std::abs(at(make_cf(point_mass(0.0)), 1.0, 0.0) - 1 / std::sqrt(2 * pi)) <= 1e-7);
    CHECK(std::abs(at(make_cf(normal(0, 1)), 1.0, 0.0) - 0.28209479177387814) <= 1e-7);
    const double oracle_value = 0.5 * (oracle::Phi(2) - oracle::Phi(-2));
    CHECK(oracle_value == doctest::Approx(0.4772498680518208).epsilon(1e-12));
    CHECK(std::abs(at(make_cf(uniform(-1, 1)), 0.5, 0.0) - oracle_value) < 1e-8);
}

TEST_CASE("mollified_density_at: a non-Hermitian CharFn is a numeric failure")
{
    const CharFn broken(1, [](std::span<const double> t) { return std::exp(Complex(-t[0] * t[0], 0)) * Complex(1, t[0] > 0 ? 1 : 0); },
                        Integrability::yes);
    CHECK_THROWS_AS(at(broken, 1.0, 0.0), NumericFailure);
    CHECK_THROWS_AS(at(make_cf(normal(0, 1)), 0.0, 0.0), ValidationError);
    const double z2[2] = {0, 0};
    CHECK_THROWS_AS(mollified_density_at(make_cf(normal(0, 1)), 1.0, z2), ValidationError);
}

TEST_CASE("mollified_density_grid: examples")
{
    const auto std_normal = make_cf(point_mass(0.0));
    const auto f = mollified_density_grid(std_normal, 1.0, parse_grid("-8:8:1024"));
    CHECK(f.normalized);
    CHECK(sup_error(f, [](const auto& z) { return oracle::normal_pdf(z[0]); }) <= 1e-6);
    CHECK(std::abs(f.riemann_sum() - 1) <= normalization_window);

    const auto closed = mollified_density_grid(make_cf(normal(0, 1)), 0.5, parse_grid("-8:8:512"));
    CHECK(sup_error(closed, [](const auto& z) { return oracle::normal_pdf(z[0], 1.25); }) <= 1e-6);

    // Swapping the two axes of a symmetric law leaves the field unchanged.
    const Grid g2 = parse_grid("-3:3:61,-3:3:61");
    const auto sq = mollified_density_grid(make_cf(product({uniform(-1, 1), uniform(-1, 1)})), 0.5, g2);
    double worst = 0;
    for (int i = 0; i < 61; ++i)
        for (int j = 0; j < 61; ++j)
            worst = std::max(worst, std::abs(sq.values[std::size_t(i * 61 + j)] - sq.values[std::size_t(j * 61 + i)]));
    CHECK(worst <= 1e-12);
    CHECK(sq.normalized);
}

TEST_CASE("mollified_density_grid: agrees with the pointwise path")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        const int d = 1 + trial % 2;
        const auto cf = make_cf(testgen::random_spec(rng, d, 1));
        const double sigma = testgen::uni(rng, 0.4, 1.5);
        MollificationParams p;
        p.nodes_per_axis = d == 1 ? 256 : 64;
        const Grid grid = d == 1 ? parse_grid("-12:12:97") : parse_grid("-6:6:13,-5:7:11");
        DensityField f{grid, {}, false};
        try {
            f = mollified_density_grid(cf, sigma, grid, p);
        } catch (const NumericFailure&) {
            continue;  // support not covered by this grid
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto z = grid.point(i);
            const double direct = mollified_density_at(cf, sigma, z, p);
            CHECK(std::abs(f.values[i] - std::max(direct, 0.0)) <= 1e-10);
        }
    }
}

TEST_CASE("property: normalization of mollified fields")
{
    std::mt19937_64 rng(12);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto spec = testgen::random_spec(rng, 1);
        const double sigma = testgen::uni(rng, 0.3, 2);
        const auto f = mollified_density_grid(make_cf(spec), sigma, parse_grid("-40:40:1601"));
        CHECK(f.normalized);
        CHECK(std::abs(f.riemann_sum() - 1) <= normalization_window);
        for (double v : f.values)
            CHECK(v >= 0.0);
        ++checked;
    }
    CHECK(checked == 40);
}

TEST_CASE("mollified_density_grid: failure modes")
{
    // Half the mass lies off the grid.
    CHECK_THROWS_AS(mollified_density_grid(make_cf(normal(0, 1)), 0.5, parse_grid("0:8:200")), NumericFailure);

    // 2 exp(-t^2/2) - 1 is Hermitian with value 1 at 0 but is not a CF; its mollification goes negative.
    const CharFn fake(1, [](std::span<const double> t) { return Complex(2 * std::exp(-t[0] * t[0] / 2) - 1, 0); },
                      Integrability::unknown);
    CHECK_THROWS_AS(mollified_density_grid(fake, 0.5, parse_grid("-6:6:121")), NumericFailure);

    MollificationParams odd;
    odd.nodes_per_axis = 33;
    CHECK_THROWS_AS(mollified_density_grid(make_cf(normal(0, 1)), 1.0, parse_grid("-5:5:11"), odd), ValidationError);
    MollificationParams few;
    few.nodes_per_axis = 8;
    CHECK_THROWS_AS(mollified_density_grid(make_cf(normal(0, 1)), 1.0, parse_grid("-5:5:11"), few), ValidationError);

    const auto d4 = make_cf(gaussian(Vector::Zero(4), Matrix::Identity(4, 4)));
    const Grid g4 = parse_grid("-1:1:2,-1:1:2,-1:1:2,-1:1:2");
    CHECK_THROWS_AS(mollified_density_grid(d4, 1.0, g4), ValidationError);
    MollificationParams high;
    high.allow_high_dimension = true;
    high.nodes_per_axis = 16;
    high.truncation_radius = 4;
    const double z4[4] = {0, 0, 0, 0};
    CHECK(mollified_density_at(d4, 1.0, z4, high) == doctest::Approx(std::pow(4 * pi, -2)).epsilon(1e-6));

    CHECK_THROWS_AS(mollified_density_grid(make_cf(normal(0, 1)), 1.0, parse_grid("-1:1:3,-1:1:3")), ValidationError);
}

TEST_CASE("mollified_density_grid: result does not depend on the thread count")
{
    const auto cf = make_cf(product({laplace(0.7), uniform(-1, 2)}));
    const Grid grid = parse_grid("-6:6:49,-5:6:45");
    MollificationParams one;
    one.threads = 1;
    one.nodes_per_axis = 128;
    MollificationParams many = one;
    many.threads = 5;
    const auto a = mollified_density_grid(cf, 0.6, grid, one);
    const auto b = mollified_density_grid(cf, 0.6, grid, many);
    CHECK(a.values == b.values);
}

TEST_CASE("invert_density_at: examples")
{
    CHECK(std::abs(inv(make_cf(laplace(1)), 0.0) - 0.5) <= 1e-4);
    CHECK(std::abs(inv(make_cf(normal(0, 1)), 0.0) - 1 / std::sqrt(2 * pi)) <= 1e-10);
    CHECK_THROWS_AS(inv(make_cf(point_mass(0.0)), 0.0), ValidationError);
    CHECK_THROWS_AS(inv(make_cf(uniform(-1, 1)), 0.0), ValidationError);

    MollificationParams unsafe;
    unsafe.allow_unknown_integrability = true;
    unsafe.truncation_radius = 200;
    // The triangular law has an integrable CF that the flags cannot see.
    const auto tri = convolve(make_cf(uniform(-1, 1)), make_cf(uniform(-1, 1)));
    CHECK(tri.integrable() == Integrability::unknown);
    CHECK(std::abs(inv(tri, 0.0, unsafe) - 0.5) <= 2e-3);
    CHECK(std::abs(inv(tri, 1.0, unsafe) - 0.25) <= 2e-3);

    unsafe.truncation_radius = 0;
    CHECK_THROWS_AS(inv(make_cf(point_mass(0.0)), 0.0, unsafe), ValidationError);
}

TEST_CASE("invert_density_grid: Gaussian and Laplace")
{
    const auto f = invert_density_grid(make_cf(normal(0, 1)), parse_grid("-5:5:101"));
    CHECK(sup_error(f, [](const auto& z) { return oracle::normal_pdf(z[0]); }) <= 1e-6);

    const auto lap = invert_density_grid(make_cf(laplace(1)), parse_grid("-6:6:121"));
    CHECK(sup_error(lap, [](const auto& z) { return 0.5 * std::exp(-std::abs(z[0])); }) <= 1e-4);
    // exp(-6) of the mass lies outside [-6, 6].
    CHECK_FALSE(lap.normalized);
    CHECK(invert_density_grid(make_cf(laplace(1)), parse_grid("-12:12:241")).normalized);

    const auto partial = invert_density_grid(make_cf(normal(0, 1)), parse_grid("0:5:51"));
    CHECK_FALSE(partial.normalized);
}

TEST_CASE("inversion_radius: capped for slowly decaying CFs")
{
    const auto g = inversion_radius(make_cf(normal(0, 1)), {});
    CHECK_FALSE(g.capped);
    CHECK(g.radius > 4);
    CHECK(g.radius < 40);
    MollificationParams small;
    small.max_inversion_radius = 50;
    const auto l = inversion_radius(make_cf(laplace(1)), small);
    CHECK(l.capped);
    CHECK(l.radius == 50);
}

TEST_CASE("cf_l1_bound: examples")
{
    CHECK(std::abs(cf_l1_bound(make_cf(laplace(1))) - 0.5) <= 1e-4);
    CHECK(std::abs(cf_l1_bound(make_cf(normal(0, 1))) - 1 / std::sqrt(2 * pi)) <= 1e-10);
    CHECK(std::abs(cf_l1_bound(gaussian_mollify_cf(make_cf(point_mass(0.0)), 1.0)) - 1 / std::sqrt(2 * pi)) <= 1e-10);
    CHECK_THROWS_AS(cf_l1_bound(make_cf(point_mass(0.0))), ValidationError);
}

TEST_CASE("property: the two density formulas agree on mollified CFs")
{
    std::mt19937_64 rng(21);
    MollificationParams p;
    p.tail_tol = 1e-12;
    for (int trial = 0; trial < 30; ++trial) {
        const auto cf = make_cf(testgen::random_spec(rng, 1, 1));
        const double sigma = testgen::uni(rng, 0.3, 2);
        const auto smooth = gaussian_mollify_cf(cf, sigma);
        for (int i = 0; i < 4; ++i) {
            const double z = testgen::uni(rng, -4, 4);
            CHECK(std::abs(at(cf, sigma, z, p) - inv(smooth, z, p)) <= 1e-9);
        }
    }
}

TEST_CASE("property: inversion never exceeds the L1 bound")
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + int(rng() % 2);
        const auto cf = gaussian_mollify_cf(make_cf(testgen::random_spec(rng, d, 1)), testgen::uni(rng, 0.3, 1.5));
        MollificationParams p;
        if (d == 2)
            p.nodes_per_axis = 64;
        const double c = cf_l1_bound(cf, p);
        for (int i = 0; i < 5; ++i) {
            const std::vector<double> z(std::size_t(d), testgen::uni(rng, -3, 3));
            CHECK(invert_density_at(cf, z, p) <= c + 1e-6);
        }
    }
}

TEST_CASE("MollificationParams validation")
{
    MollificationParams p;
    p.truncation_radius = -1;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = {};
    p.tail_tol = 0;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = {};
    p.negativity_tol = -1;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = {};
    p.nodes_per_axis = 17;
    CHECK_THROWS_AS(validate(p), ValidationError);
    CHECK_NOTHROW(validate(MollificationParams{}));
}

TEST_CASE("grid parsing and formatting")
{
    const Grid g = parse_grid("-1:1:3,0:2.5:6");
    CHECK(g.dimension() == 2);
    CHECK(g.size() == 18);
    CHECK(g.cell_volume() == doctest::Approx(0.5));
    CHECK(g.point(5) == std::vector<double>{-1.0, 2.5});
    CHECK(g.unravel(7) == std::vector<int>{1, 1});
    CHECK(parse_grid(format_grid(g)) == g);
    for (const char* bad : {"", "1:0:5", "0:1:1", "0:1", "0:1:5x", "a:b:c", "0:1:5,"})
        CHECK_THROWS_AS(parse_grid(bad), ValidationError);
}

TEST_CASE("check_field")
{
    const Grid g = parse_grid("0:1:3");
    CHECK_NOTHROW(check_field({g, {0, 2, 0}, true}));
    CHECK_THROWS_AS(check_field({g, {1, 1}, false}), ValidationError);
    CHECK_THROWS_AS(check_field({g, {1, -1e-5, 1}, false}), ValidationError);
    CHECK_NOTHROW(check_field({g, {1, -1e-7, 1}, false}));
    CHECK_THROWS_AS(check_field({g, {2, 2, 2}, true}), ValidationError);
}
