#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace cfmoll {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DistributionSpec;

namespace law {

struct Gaussian {
    Vector mean;
    Matrix cov;
};

struct PointMass {
    Vector location;
};

/// Uniform law on the box [lo, hi], hi > lo componentwise.
struct UniformBox {
    Vector lo;
    Vector hi;
};

/// Density exp(-|x|/scale) / (2 scale) on the real line.
struct Laplace1D {
    double scale;
};

struct Empirical {
    std::vector<Vector> points;
    std::vector<double> weights;
};

/// Law of the sum of independent draws from each part.
struct Convolution {
    std::vector<DistributionSpec> parts;
};

/// Law of matrix * X + shift for X ~ inner.
struct AffineMap {
    Matrix matrix;
    Vector shift;
    std::shared_ptr<const DistributionSpec> inner;
};

/// Law of (X_1 + ... + X_n - n * mean) / sqrt(n * variance) for i.i.d. X_i ~ base.
/// mean and variance are declared by the caller and not checked against base;
/// a wrong declaration yields a sum that is not standardized.
struct StandardizedIIDSum {
    std::shared_ptr<const DistributionSpec> base;
    int n;
    double mean = 0.0;
    double variance = 1.0;
};

/// Independent product of one-dimensional factors; factor j drives coordinate j.
struct Product {
    std::vector<DistributionSpec> factors;
};

} // namespace law

/// Declarative description of a probability law on R^d.
///
/// Instances are built through the factory functions below, which validate
/// their arguments, or through from_json(). A DistributionSpec is an
/// immutable value; nested specs are shared.
class DistributionSpec {
public:
    using Node = std::variant<law::Gaussian, law::PointMass, law::UniformBox, law::Laplace1D,
                              law::Empirical, law::Convolution, law::AffineMap,
                              law::StandardizedIIDSum, law::Product>;

    explicit DistributionSpec(Node node);

    const Node& node() const { return node_; }
    int dimension() const { return dimension_; }

    template <class T>
    const T* as() const { return std::get_if<T>(&node_); }

private:
    Node node_;
    int dimension_;
};

DistributionSpec gaussian(Vector mean, Matrix cov);
DistributionSpec normal(double mean, double variance);
DistributionSpec point_mass(Vector location);
DistributionSpec point_mass(double location);
DistributionSpec uniform_box(Vector lo, Vector hi);
DistributionSpec uniform(double lo, double hi);
DistributionSpec laplace(double scale);
/// Empty weights means uniform weights.
DistributionSpec empirical(std::vector<Vector> points, std::vector<double> weights = {});
DistributionSpec convolution(std::vector<DistributionSpec> parts);
DistributionSpec affine(Matrix matrix, Vector shift, DistributionSpec inner);
DistributionSpec standardized_iid_sum(DistributionSpec base, int n, double mean = 0.0,
                                      double variance = 1.0);
DistributionSpec product(std::vector<DistributionSpec> factors);

/// Two-point law on {-1, +1} with equal weights (mean 0, variance 1).
DistributionSpec rademacher();
/// Bernoulli(p) on {0, 1}.
DistributionSpec bernoulli(double p);

/// Throws ValidationError on a broken invariant anywhere in the tree.
void validate(const DistributionSpec& spec);

/// JSON schema:
///   {"type": "gaussian", "mean": [..], "cov": [[..], ..]}
///   {"type": "point_mass", "location": [..]}
///   {"type": "uniform_box", "lo": [..], "hi": [..]}
///   {"type": "laplace", "scale": b}
///   {"type": "empirical", "points": [[..], ..], "weights": [..]}      weights optional
///   {"type": "convolution", "parts": [spec, ..]}
///   {"type": "affine", "matrix": [[..], ..], "shift": [..], "inner": spec}
///   {"type": "standardized_iid_sum", "base": spec, "n": n, "mean": m, "variance": v}
///   {"type": "product", "factors": [spec, ..]}
/// Vectors of length one may be given as bare numbers and a 1x1 "cov" as a number.
DistributionSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const DistributionSpec& spec);

DistributionSpec load_spec(const std::string& path);

} // namespace cfmoll
