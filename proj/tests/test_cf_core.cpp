#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cfmoll/charfn.hpp"
#include "cfmoll/errors.hpp"
#include "support/oracles.hpp"
#include "support/random_specs.hpp"

using namespace cfmoll;
using std::numbers::pi;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector out(Eigen::Index(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

Vector random_t(std::mt19937_64& rng, int d, double scale = 6.0)
{
    return Vector::NullaryExpr(d, [&] { return testgen::uni(rng, -scale, scale); });
}

} // namespace

TEST_CASE("make_cf: closed-form examples")
{
    CHECK(make_cf(normal(0, 1))(0.0) == Complex(1.0, 0.0));

    const Complex at_pi = make_cf(point_mass(1.0))(pi);
    CHECK(at_pi.real() == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(at_pi.imag()) < 1e-15);

    // Oracle: (1/2) * integral_{-1}^{1} exp(i pi y) dy by Simpson.
    const auto oracle = oracle::simpson([](double y) { return 0.5 * std::exp(Complex(0, pi * y)); }, -1.0, 1.0);
    const Complex u = make_cf(uniform(-1, 1))(pi);
    CHECK(std::abs(u - oracle) < 1e-12);
    CHECK(std::abs(u) < 1e-15);
}

TEST_CASE("make_cf: each constructor against its formula")
{
    Matrix cov(2, 2);
    cov << 2.0, 0.5, 0.5, 1.0;
    const Vector mean = vec({0.3, -1.0});
    const Vector t = vec({0.7, -0.4});
    const Complex g = make_cf(gaussian(mean, cov))(t);
    CHECK(std::abs(g - std::exp(Complex(-0.5 * t.dot(cov * t), mean.dot(t)))) < 1e-15);

    CHECK(std::abs(make_cf(laplace(2.0))(1.5) - Complex(1.0 / (1.0 + 9.0), 0)) < 1e-16);

    const auto emp = make_cf(empirical({vec({0.0}), vec({2.0})}, {0.25, 0.75}));
    CHECK(std::abs(emp(1.1) - (0.25 + 0.75 * std::exp(Complex(0, 2.2)))) < 1e-15);

    // Affine: law of A X + b for X ~ N(0, I_2) is N(b, A A^T).
    Matrix a(2, 2);
    a << 1.0, 2.0, 0.0, 1.0;
    const Vector b = vec({0.5, -0.5});
    const auto aff = make_cf(affine(a, b, gaussian(Vector::Zero(2), Matrix::Identity(2, 2))));
    const auto direct = make_cf(gaussian(b, a * a.transpose()));
    CHECK(std::abs(aff(t) - direct(t)) < 1e-15);

    // Standardized Rademacher sum: cos(t / sqrt n)^n.
    const auto sum = make_cf(standardized_iid_sum(rademacher(), 9));
    CHECK(std::abs(sum(1.3) - std::pow(std::cos(1.3 / 3.0), 9)) < 1e-15);
    // Bernoulli(1/2) with declared mean and variance gives the same law.
    const auto bern = make_cf(standardized_iid_sum(bernoulli(0.5), 9, 0.5, 0.25));
    CHECK(std::abs(bern(1.3) - sum(1.3)) < 1e-14);

    const auto prod = make_cf(product({uniform(0, 1), laplace(1.0)}));
    const Complex u01 = (std::exp(Complex(0, 0.7)) - 1.0) / Complex(0, 0.7);
    CHECK(std::abs(prod(t) - u01 / (1.0 + 0.16)) < 1e-15);

    const auto conv = make_cf(convolution({normal(1, 1), normal(-1, 3)}));
    CHECK(std::abs(conv(0.8) - make_cf(normal(0, 4))(0.8)) < 1e-15);
}

TEST_CASE("make_cf: uniform box near t = 0 uses the analytic limit")
{
    const auto cf = make_cf(uniform(-1, 3));
    CHECK(cf(0.0) == Complex(1.0, 0.0));
    // Either side of the switch the two branches agree with the exact ratio.
    for (double t : {1e-12, 4.9e-9, 5.1e-9, 1e-7, 1e-3}) {
        const Complex exact = (std::exp(Complex(0, 3 * t)) - std::exp(Complex(0, -t))) / Complex(0, 4 * t);
        CHECK(std::abs(cf(t) - exact) < 1e-9);
        CHECK(std::abs(cf(t)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("make_cf: integrability flags")
{
    CHECK(make_cf(normal(0, 1)).integrable() == Integrability::yes);
    CHECK(make_cf(laplace(1)).integrable() == Integrability::yes);
    CHECK(make_cf(point_mass(0.0)).integrable() == Integrability::no);
    CHECK(make_cf(rademacher()).integrable() == Integrability::no);
    CHECK(make_cf(uniform(0, 1)).integrable() == Integrability::unknown);
    Matrix singular(2, 2);
    singular << 1, 1, 1, 1;
    CHECK(make_cf(gaussian(Vector::Zero(2), singular)).integrable() == Integrability::no);
    CHECK(make_cf(convolution({uniform(0, 1), laplace(1)})).integrable() == Integrability::yes);
    CHECK(make_cf(convolution({uniform(0, 1), point_mass(0.0)})).integrable() == Integrability::unknown);
    CHECK(make_cf(standardized_iid_sum(laplace(1), 4)).integrable() == Integrability::yes);
    CHECK(make_cf(standardized_iid_sum(rademacher(), 4)).integrable() == Integrability::unknown);
    CHECK(make_cf(product({laplace(1), normal(0, 1)})).integrable() == Integrability::yes);
    CHECK(make_cf(product({laplace(1), point_mass(0.0)})).integrable() == Integrability::no);
    Matrix rot(2, 2);
    rot << 0, 1, 1, 0;
    CHECK(make_cf(affine(rot, Vector::Zero(2), product({laplace(1), laplace(2)}))).integrable() ==
          Integrability::yes);
    CHECK(make_cf(affine(Matrix::Ones(1, 2), Vector::Zero(1), product({laplace(1), laplace(2)}))).integrable() ==
          Integrability::unknown);
}

TEST_CASE("convolve: examples and errors")
{
    const auto chi = make_cf(convolution({uniform(-1, 2), laplace(0.5)}));
    const auto ident = convolve(chi, make_cf(point_mass(0.0)));
    for (double t = -5; t <= 5; t += 0.37)
        CHECK(ident(t) == chi(t));

    const double s2 = 0.3;
    const auto both = convolve(make_cf(normal(0, 1)), make_cf(normal(0, s2)));
    CHECK(std::abs(both(1.7) - std::exp(-(1 + s2) * 1.7 * 1.7 / 2)) < 1e-15);

    // Oracle: CF of the triangular density (2 - |y|)/4 on [-2, 2] at pi.
    const auto tri = oracle::simpson(
        [](double y) { return (2 - std::abs(y)) / 4 * std::exp(Complex(0, pi * y)); }, -2.0, 2.0);
    const auto uu = convolve(make_cf(uniform(-1, 1)), make_cf(uniform(-1, 1)));
    CHECK(std::abs(uu(pi) - tri) < 1e-12);

    CHECK(convolve(make_cf(laplace(1)), make_cf(uniform(0, 1))).integrable() == Integrability::yes);
    CHECK(convolve(make_cf(uniform(0, 1)), make_cf(uniform(0, 1))).integrable() == Integrability::unknown);
    CHECK_THROWS_AS(convolve(make_cf(normal(0, 1)), make_cf(point_mass(vec({0, 0})))), ValidationError);
}

TEST_CASE("gaussian_mollify_cf: examples, semigroup, errors")
{
    const auto g = gaussian_mollify_cf(make_cf(point_mass(0.0)), 1.0);
    CHECK(g.integrable() == Integrability::yes);
    for (double t = -4; t <= 4; t += 0.5)
        CHECK(std::abs(g(t) - std::exp(-t * t / 2)) < 1e-16);

    CHECK(std::abs(gaussian_mollify_cf(make_cf(normal(0, 1)), 0.5)(1.0) - std::exp(-0.625)) < 1e-16);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + int(rng() % 2);
        const auto cf = make_cf(testgen::random_spec(rng, d));
        const double s1 = testgen::uni(rng, 0.05, 2), s2 = testgen::uni(rng, 0.05, 2);
        const auto twice = gaussian_mollify_cf(gaussian_mollify_cf(cf, s1), s2);
        const auto once = gaussian_mollify_cf(cf, std::sqrt(s1 * s1 + s2 * s2));
        for (int i = 0; i < 10; ++i) {
            const Vector t = random_t(rng, d);
            CHECK(std::abs(twice(t) - once(t)) <= 1e-14);
        }
    }

    CHECK_THROWS_AS(gaussian_mollify_cf(make_cf(normal(0, 1)), 0.0), ValidationError);
    CHECK_THROWS_AS(gaussian_mollify_cf(make_cf(normal(0, 1)), -1.0), ValidationError);
}

TEST_CASE("property: every constructed CF satisfies chi(0)=1, |chi|<=1, Hermitian symmetry")
{
    std::mt19937_64 rng(20211);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + int(rng() % 3);
        const auto spec = testgen::random_spec(rng, d);
        const auto cf = make_cf(spec);
        REQUIRE(cf.dimension() == d);
        CHECK(cf(Vector::Zero(d)) == Complex(1.0, 0.0));
        for (int i = 0; i < 25; ++i) {
            const Vector t = random_t(rng, d, i < 5 ? 1e-6 : 8.0);
            const Complex v = cf(t);
            CHECK(std::abs(v) <= 1.0 + 1e-12);
            CHECK(std::abs(cf(Vector(-t)) - std::conj(v)) <= 1e-12);
        }
    }
}

TEST_CASE("property: convolve is commutative and associative")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 1 + int(rng() % 2);
        const auto a = make_cf(testgen::random_spec(rng, d, 1));
        const auto b = make_cf(testgen::random_spec(rng, d, 1));
        const auto c = make_cf(testgen::random_spec(rng, d, 1));
        const auto ab = convolve(a, b), ba = convolve(b, a);
        const auto left = convolve(convolve(a, b), c), right = convolve(a, convolve(b, c));
        for (int i = 0; i < 10; ++i) {
            const Vector t = random_t(rng, d);
            CHECK(std::abs(ab(t) - ba(t)) <= 1e-14);
            CHECK(std::abs(left(t) - right(t)) <= 1e-14);
        }
    }
}

TEST_CASE("property: standardized sums of symmetric bases have real CFs")
{
    const std::vector<DistributionSpec> bases{rademacher(), uniform(-std::sqrt(3.0), std::sqrt(3.0)),
                                              laplace(1 / std::sqrt(2.0)), normal(0, 1),
                                              empirical({vec({-2}), vec({0}), vec({2})}, {0.125, 0.75, 0.125})};
    for (const auto& base : bases)
        for (int n : {1, 2, 5, 30, 101}) {
            const auto cf = make_cf(standardized_iid_sum(base, n));
            for (double t = -7; t <= 7; t += 0.31)
                CHECK(std::abs(cf(t).imag()) <= 1e-12);
        }
}

TEST_CASE("CharFn: evaluating at the wrong dimension is a validation error")
{
    const auto cf = make_cf(normal(0, 1));
    CHECK_THROWS_AS(cf(vec({1.0, 2.0})), ValidationError);
    CHECK_THROWS_AS(CharFn(0, [](std::span<const double>) { return Complex(1); }, Integrability::no),
                    ValidationError);
}
