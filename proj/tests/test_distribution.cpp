#include <doctest.h>

#include <random>

#include "cfmoll/charfn.hpp"
#include "cfmoll/errors.hpp"
#include "support/random_specs.hpp"

using namespace cfmoll;
using nlohmann::json;

TEST_CASE("factories validate their invariants")
{
    Matrix asym(2, 2);
    asym << 1, 0.5, 0.4, 1;
    CHECK_THROWS_AS(gaussian(Vector::Zero(2), asym), ValidationError);
    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(gaussian(Vector::Zero(2), indefinite), ValidationError);
    CHECK_THROWS_AS(gaussian(Vector::Zero(2), Matrix::Identity(3, 3)), ValidationError);
    Matrix tiny_negative = Matrix::Identity(2, 2);
    tiny_negative(1, 1) = -1e-13;  // within -1e-12 * trace
    CHECK_NOTHROW(gaussian(Vector::Zero(2), tiny_negative));

    CHECK_THROWS_AS(uniform(1, 1), ValidationError);
    CHECK_THROWS_AS(uniform_box(Vector::Zero(2), Vector::Ones(3)), ValidationError);
    CHECK_THROWS_AS(laplace(0), ValidationError);
    CHECK_THROWS_AS(empirical({Vector::Zero(1)}, {0.9}), ValidationError);
    CHECK_NOTHROW(empirical({Vector::Zero(1)}, {1.0 + 5e-13}));
    CHECK_THROWS_AS(empirical({Vector::Zero(1), Vector::Zero(1)}, {1.5, -0.5}), ValidationError);
    CHECK_THROWS_AS(empirical({Vector::Zero(1), Vector::Zero(2)}), ValidationError);
    CHECK_THROWS_AS(empirical({}), ValidationError);
    CHECK_THROWS_AS(convolution({normal(0, 1), point_mass(Vector::Zero(2))}), ValidationError);
    CHECK_THROWS_AS(convolution({}), ValidationError);
    CHECK_THROWS_AS(affine(Matrix::Identity(2, 3), Vector::Zero(2), normal(0, 1)), ValidationError);
    CHECK_THROWS_AS(affine(Matrix::Identity(2, 2), Vector::Zero(1), point_mass(Vector::Zero(2))),
                    ValidationError);
    CHECK_THROWS_AS(standardized_iid_sum(rademacher(), 0), ValidationError);
    CHECK_THROWS_AS(standardized_iid_sum(point_mass(Vector::Zero(2)), 3), ValidationError);
    CHECK_THROWS_AS(standardized_iid_sum(rademacher(), 3, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(product({normal(0, 1), point_mass(Vector::Zero(2))}), ValidationError);
    CHECK_THROWS_AS(bernoulli(1.5), ValidationError);
}

TEST_CASE("dimension bookkeeping")
{
    CHECK(normal(0, 1).dimension() == 1);
    CHECK(product({normal(0, 1), laplace(1), uniform(0, 1)}).dimension() == 3);
    CHECK(affine(Matrix::Ones(3, 1), Vector::Zero(3), laplace(1)).dimension() == 3);
    CHECK(empirical({Vector::Zero(2)}).dimension() == 2);
}

TEST_CASE("spec_from_json: schema examples")
{
    const auto g = spec_from_json(json::parse(R"({"type": "gaussian", "mean": [0, 1], "cov": [[1, 0], [0, 2]]})"));
    CHECK(g.dimension() == 2);
    CHECK(g.as<law::Gaussian>()->cov(1, 1) == 2.0);

    const auto scalar = spec_from_json(json::parse(R"({"type": "gaussian", "mean": 0.5, "cov": 2})"));
    CHECK(scalar.dimension() == 1);

    const auto nested = spec_from_json(json::parse(R"({
        "type": "convolution",
        "parts": [
            {"type": "uniform_box", "lo": [-1], "hi": [1]},
            {"type": "standardized_iid_sum", "n": 4, "mean": 0.5, "variance": 0.25,
             "base": {"type": "empirical", "points": [[0], [1]], "weights": [0.5, 0.5]}},
            {"type": "affine", "matrix": [[2]], "shift": [1], "inner": {"type": "laplace", "scale": 1}}
        ]})"));
    CHECK(nested.dimension() == 1);
    CHECK(nested.as<law::Convolution>()->parts.size() == 3);

    const auto emp = spec_from_json(json::parse(R"({"type": "empirical", "points": [[0], [1], [2], [3]]})"));
    CHECK(emp.as<law::Empirical>()->weights == std::vector<double>(4, 0.25));
}

TEST_CASE("spec_from_json: malformed input is a validation error")
{
    const char* bad[] = {
        R"([1, 2])",
        R"({"mean": [0]})",
        R"({"type": "cauchy", "scale": 1})",
        R"({"type": "gaussian", "mean": [0]})",
        R"({"type": "gaussian", "mean": [0], "cov": [["a"]]})",
        R"({"type": "gaussian", "mean": [0, 0], "cov": [[1, 0], [0]]})",
        R"({"type": "laplace", "scale": -1})",
        R"({"type": "empirical", "points": [[0], [1]], "weights": [0.3, 0.3]})",
        R"({"type": "convolution", "parts": {"type": "laplace", "scale": 1}})",
        R"({"type": "standardized_iid_sum", "n": 2.5, "base": {"type": "laplace", "scale": 1}})",
        R"({"type": "product", "factors": [{"type": "point_mass", "location": [0, 0]}]})",
    };
    for (const char* text : bad)
        CHECK_THROWS_AS(spec_from_json(json::parse(text)), ValidationError);
    CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), ValidationError);
}

TEST_CASE("property: JSON round trip preserves the law")
{
    std::mt19937_64 rng(314);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + int(rng() % 3);
        const auto spec = testgen::random_spec(rng, d);
        const auto text = spec_to_json(spec).dump();
        const auto back = spec_from_json(json::parse(text));
        CHECK(spec_to_json(back) == spec_to_json(spec));
        const auto a = make_cf(spec), b = make_cf(back);
        for (int i = 0; i < 5; ++i) {
            const Vector t = Vector::NullaryExpr(d, [&] { return testgen::uni(rng, -4, 4); });
            CHECK(a(t) == b(t));
        }
    }
}
