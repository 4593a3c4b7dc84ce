#include "cfmoll/distribution.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cfmoll/errors.hpp"

namespace cfmoll {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require(bool ok, const std::string& message)
{
    if (!ok)
        throw ValidationError(message);
}

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

int check_node(const DistributionSpec::Node& node)
{
    return std::visit(
        Overloaded{
            [](const law::Gaussian& g) {
                const auto d = g.mean.size();
                require(d >= 1, "gaussian: mean must be non-empty");
                require(g.cov.rows() == d && g.cov.cols() == d,
                        "gaussian: covariance must be " + std::to_string(d) + "x" +
                            std::to_string(d));
                require(all_finite(g.mean) && all_finite(g.cov), "gaussian: non-finite entry");
                const double scale = std::max(1.0, g.cov.cwiseAbs().maxCoeff());
                require((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                        "gaussian: covariance is not symmetric");
                Eigen::SelfAdjointEigenSolver<Matrix> eig(g.cov, Eigen::EigenvaluesOnly);
                const double floor = -1e-12 * std::abs(g.cov.trace());
                require(eig.eigenvalues().minCoeff() >= floor,
                        "gaussian: covariance is not positive semidefinite");
                return int(d);
            },
            [](const law::PointMass& p) {
                require(p.location.size() >= 1, "point_mass: location must be non-empty");
                require(all_finite(p.location), "point_mass: non-finite location");
                return int(p.location.size());
            },
            [](const law::UniformBox& u) {
                require(u.lo.size() >= 1 && u.lo.size() == u.hi.size(),
                        "uniform_box: lo and hi must be non-empty and of equal length");
                require(all_finite(u.lo) && all_finite(u.hi), "uniform_box: non-finite bound");
                require((u.hi.array() > u.lo.array()).all(),
                        "uniform_box: hi must exceed lo on every axis");
                return int(u.lo.size());
            },
            [](const law::Laplace1D& l) {
                require(std::isfinite(l.scale) && l.scale > 0, "laplace: scale must be positive");
                return 1;
            },
            [](const law::Empirical& e) {
                require(!e.points.empty(), "empirical: needs at least one point");
                require(e.points.size() == e.weights.size(),
                        "empirical: points and weights differ in length");
                const auto d = e.points.front().size();
                require(d >= 1, "empirical: points must be non-empty vectors");
                for (const auto& p : e.points) {
                    require(p.size() == d, "empirical: points differ in dimension");
                    require(all_finite(p), "empirical: non-finite point");
                }
                double total = 0.0;
                for (double w : e.weights) {
                    require(std::isfinite(w) && w >= 0, "empirical: weights must be nonnegative");
                    total += w;
                }
                require(std::abs(total - 1.0) <= 1e-12, "empirical: weights must sum to 1");
                return int(d);
            },
            [](const law::Convolution& c) {
                require(!c.parts.empty(), "convolution: needs at least one part");
                const int d = c.parts.front().dimension();
                for (const auto& part : c.parts)
                    require(part.dimension() == d, "convolution: parts differ in dimension");
                return d;
            },
            [](const law::AffineMap& a) {
                require(a.inner != nullptr, "affine: missing inner spec");
                require(a.matrix.rows() >= 1, "affine: matrix must have at least one row");
                require(a.matrix.cols() == a.inner->dimension(),
                        "affine: matrix has " + std::to_string(a.matrix.cols()) +
                            " columns but inner dimension is " +
                            std::to_string(a.inner->dimension()));
                require(a.shift.size() == a.matrix.rows(),
                        "affine: shift length must equal matrix rows");
                require(all_finite(a.matrix) && all_finite(a.shift), "affine: non-finite entry");
                return int(a.matrix.rows());
            },
            [](const law::StandardizedIIDSum& s) {
                require(s.base != nullptr, "standardized_iid_sum: missing base spec");
                require(s.base->dimension() == 1, "standardized_iid_sum: base must be 1-d");
                require(s.n >= 1, "standardized_iid_sum: n must be >= 1");
                require(std::isfinite(s.mean), "standardized_iid_sum: non-finite mean");
                require(std::isfinite(s.variance) && s.variance > 0,
                        "standardized_iid_sum: declared variance must be positive");
                return 1;
            },
            [](const law::Product& p) {
                require(!p.factors.empty(), "product: needs at least one factor");
                for (const auto& f : p.factors)
                    require(f.dimension() == 1, "product: factors must be 1-d");
                return int(p.factors.size());
            },
        },
        node);
}

} // namespace

DistributionSpec::DistributionSpec(Node node) : node_(std::move(node)), dimension_(check_node(node_)) {}

DistributionSpec gaussian(Vector mean, Matrix cov)
{
    return DistributionSpec(law::Gaussian{std::move(mean), std::move(cov)});
}

DistributionSpec normal(double mean, double variance)
{
    return gaussian(Vector::Constant(1, mean), Matrix::Constant(1, 1, variance));
}

DistributionSpec point_mass(Vector location) { return DistributionSpec(law::PointMass{std::move(location)}); }

DistributionSpec point_mass(double location) { return point_mass(Vector::Constant(1, location)); }

DistributionSpec uniform_box(Vector lo, Vector hi)
{
    return DistributionSpec(law::UniformBox{std::move(lo), std::move(hi)});
}

DistributionSpec uniform(double lo, double hi) { return uniform_box(Vector::Constant(1, lo), Vector::Constant(1, hi)); }

DistributionSpec laplace(double scale) { return DistributionSpec(law::Laplace1D{scale}); }

DistributionSpec empirical(std::vector<Vector> points, std::vector<double> weights)
{
    if (weights.empty() && !points.empty())
        weights.assign(points.size(), 1.0 / double(points.size()));
    return DistributionSpec(law::Empirical{std::move(points), std::move(weights)});
}

DistributionSpec convolution(std::vector<DistributionSpec> parts)
{
    return DistributionSpec(law::Convolution{std::move(parts)});
}

DistributionSpec affine(Matrix matrix, Vector shift, DistributionSpec inner)
{
    return DistributionSpec(law::AffineMap{std::move(matrix), std::move(shift),
                                           std::make_shared<const DistributionSpec>(std::move(inner))});
}

DistributionSpec standardized_iid_sum(DistributionSpec base, int n, double mean, double variance)
{
    return DistributionSpec(law::StandardizedIIDSum{
        std::make_shared<const DistributionSpec>(std::move(base)), n, mean, variance});
}

DistributionSpec product(std::vector<DistributionSpec> factors)
{
    return DistributionSpec(law::Product{std::move(factors)});
}

DistributionSpec rademacher()
{
    return empirical({Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)}, {0.5, 0.5});
}

DistributionSpec bernoulli(double p)
{
    if (!(p >= 0 && p <= 1))
        throw ValidationError("bernoulli: p must lie in [0, 1]");
    return empirical({Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)}, {1.0 - p, p});
}

void validate(const DistributionSpec& spec)
{
    std::visit(Overloaded{
                   [](const law::Convolution& c) {
                       for (const auto& p : c.parts)
                           validate(p);
                   },
                   [](const law::Product& p) {
                       for (const auto& f : p.factors)
                           validate(f);
                   },
                   [](const law::AffineMap& a) {
                       if (a.inner)
                           validate(*a.inner);
                   },
                   [](const law::StandardizedIIDSum& s) {
                       if (s.base)
                           validate(*s.base);
                   },
                   [](const auto&) {},
               },
               spec.node());
    check_node(spec.node());
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

const json& field(const json& j, const char* key, const std::string& type)
{
    auto it = j.find(key);
    if (it == j.end())
        throw ValidationError(type + ": missing field \"" + key + "\"");
    return *it;
}

double number(const json& j, const std::string& what)
{
    if (!j.is_number())
        throw ValidationError(what + ": expected a number");
    return j.get<double>();
}

Vector vector_from(const json& j, const std::string& what)
{
    if (j.is_number())
        return Vector::Constant(1, j.get<double>());
    if (!j.is_array())
        throw ValidationError(what + ": expected an array of numbers");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[Eigen::Index(i)] = number(j[i], what);
    return v;
}

Matrix matrix_from(const json& j, const std::string& what)
{
    if (j.is_number())
        return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty())
        throw ValidationError(what + ": expected a non-empty array of rows");
    const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ValidationError(what + ": rows must be arrays of equal length");
        for (std::size_t c = 0; c < cols; ++c)
            m(Eigen::Index(r), Eigen::Index(c)) = number(j[r][c], what);
    }
    return m;
}

std::vector<DistributionSpec> specs_from(const json& j, const std::string& what)
{
    if (!j.is_array())
        throw ValidationError(what + ": expected an array of specs");
    std::vector<DistributionSpec> out;
    out.reserve(j.size());
    for (const auto& item : j)
        out.push_back(spec_from_json(item));
    return out;
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

DistributionSpec spec_from_json(const json& j)
{
    if (!j.is_object())
        throw ValidationError("spec: expected a JSON object");
    const auto& type_field = field(j, "type", "spec");
    if (!type_field.is_string())
        throw ValidationError("spec: \"type\" must be a string");
    const auto type = type_field.get<std::string>();

    if (type == "gaussian")
        return gaussian(vector_from(field(j, "mean", type), "gaussian.mean"),
                        matrix_from(field(j, "cov", type), "gaussian.cov"));
    if (type == "point_mass")
        return point_mass(vector_from(field(j, "location", type), "point_mass.location"));
    if (type == "uniform_box")
        return uniform_box(vector_from(field(j, "lo", type), "uniform_box.lo"),
                           vector_from(field(j, "hi", type), "uniform_box.hi"));
    if (type == "laplace")
        return laplace(number(field(j, "scale", type), "laplace.scale"));
    if (type == "empirical") {
        const auto& pts = field(j, "points", type);
        if (!pts.is_array())
            throw ValidationError("empirical.points: expected an array");
        std::vector<Vector> points;
        for (const auto& p : pts)
            points.push_back(vector_from(p, "empirical.points"));
        std::vector<double> weights;
        if (auto it = j.find("weights"); it != j.end()) {
            const Vector w = vector_from(*it, "empirical.weights");
            weights.assign(w.data(), w.data() + w.size());
        }
        return empirical(std::move(points), std::move(weights));
    }
    if (type == "convolution")
        return convolution(specs_from(field(j, "parts", type), "convolution.parts"));
    if (type == "affine") {
        const auto& inner = field(j, "inner", type);
        return affine(matrix_from(field(j, "matrix", type), "affine.matrix"),
                      vector_from(field(j, "shift", type), "affine.shift"), spec_from_json(inner));
    }
    if (type == "standardized_iid_sum") {
        const auto& n = field(j, "n", type);
        if (!n.is_number_integer())
            throw ValidationError("standardized_iid_sum.n: expected an integer");
        return standardized_iid_sum(spec_from_json(field(j, "base", type)), n.get<int>(),
                                    j.contains("mean") ? number(j["mean"], "mean") : 0.0,
                                    j.contains("variance") ? number(j["variance"], "variance") : 1.0);
    }
    if (type == "product")
        return product(specs_from(field(j, "factors", type), "product.factors"));

    throw ValidationError("spec: unknown type \"" + type + "\"");
}

json spec_to_json(const DistributionSpec& spec)
{
    return std::visit(
        Overloaded{
            [](const law::Gaussian& g) {
                return json{{"type", "gaussian"}, {"mean", to_json(g.mean)}, {"cov", to_json(g.cov)}};
            },
            [](const law::PointMass& p) {
                return json{{"type", "point_mass"}, {"location", to_json(p.location)}};
            },
            [](const law::UniformBox& u) {
                return json{{"type", "uniform_box"}, {"lo", to_json(u.lo)}, {"hi", to_json(u.hi)}};
            },
            [](const law::Laplace1D& l) { return json{{"type", "laplace"}, {"scale", l.scale}}; },
            [](const law::Empirical& e) {
                json points = json::array();
                for (const auto& p : e.points)
                    points.push_back(to_json(p));
                return json{{"type", "empirical"}, {"points", points}, {"weights", e.weights}};
            },
            [](const law::Convolution& c) {
                json parts = json::array();
                for (const auto& p : c.parts)
                    parts.push_back(spec_to_json(p));
                return json{{"type", "convolution"}, {"parts", parts}};
            },
            [](const law::AffineMap& a) {
                return json{{"type", "affine"},
                            {"matrix", to_json(a.matrix)},
                            {"shift", to_json(a.shift)},
                            {"inner", spec_to_json(*a.inner)}};
            },
            [](const law::StandardizedIIDSum& s) {
                return json{{"type", "standardized_iid_sum"},
                            {"base", spec_to_json(*s.base)},
                            {"n", s.n},
                            {"mean", s.mean},
                            {"variance", s.variance}};
            },
            [](const law::Product& p) {
                json factors = json::array();
                for (const auto& f : p.factors)
                    factors.push_back(spec_to_json(f));
                return json{{"type", "product"}, {"factors", factors}};
            },
        },
        spec.node());
}

DistributionSpec load_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("spec file " + path + " is not valid JSON: " + e.what());
    }
    return spec_from_json(j);
}

} // namespace cfmoll
