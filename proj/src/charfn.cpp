#include "cfmoll/charfn.hpp"

#include <cmath>
#include <numbers>

#include "cfmoll/errors.hpp"

namespace cfmoll {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

using ConstMap = Eigen::Map<const Vector>;

ConstMap as_vector(std::span<const double> t) { return {t.data(), Eigen::Index(t.size())}; }

Complex expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

Complex ipow(Complex base, int n)
{
    Complex result(1.0, 0.0);
    while (n > 0) {
        if (n & 1)
            result *= base;
        base *= base;
        n >>= 1;
    }
    return result;
}

/// sin(x)/x with the t -> 0 limit handled by a two-term Taylor expansion.
double sinc(double x)
{
    if (std::abs(2.0 * x) < 1e-8)
        return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

bool is_zero(std::span<const double> t)
{
    for (double v : t)
        if (v != 0.0)
            return false;
    return true;
}

CharFn gaussian_cf(const law::Gaussian& g)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(g.cov, Eigen::EigenvaluesOnly);
    const auto flag = eig.eigenvalues().minCoeff() > 0 ? Integrability::yes : Integrability::no;
    return CharFn(
        int(g.mean.size()),
        [mean = g.mean, cov = g.cov](std::span<const double> t) {
            const auto tv = as_vector(t);
            const double quad = tv.dot(cov * tv);
            return std::exp(-0.5 * quad) * expi(mean.dot(tv));
        },
        flag, "gaussian");
}

CharFn uniform_box_cf(const law::UniformBox& u)
{
    const Vector center = 0.5 * (u.lo + u.hi);
    const Vector half_width = 0.5 * (u.hi - u.lo);
    return CharFn(
        int(u.lo.size()),
        [center, half_width](std::span<const double> t) {
            // (e^{it hi} - e^{it lo}) / (it (hi - lo)) = e^{it c} sin(t w/2) / (t w/2)
            Complex value(1.0, 0.0);
            for (std::size_t j = 0; j < t.size(); ++j) {
                const auto jj = Eigen::Index(j);
                value *= expi(t[j] * center[jj]) * sinc(t[j] * half_width[jj]);
            }
            return value;
        },
        Integrability::unknown, "uniform_box");
}

CharFn empirical_cf_of(const law::Empirical& e)
{
    const auto d = e.points.front().size();
    Matrix points(d, Eigen::Index(e.points.size()));
    for (std::size_t k = 0; k < e.points.size(); ++k)
        points.col(Eigen::Index(k)) = e.points[k];
    return CharFn(
        int(d),
        [points, weights = e.weights](std::span<const double> t) {
            if (is_zero(t))
                return Complex(1.0, 0.0);
            const Vector phases = points.transpose() * as_vector(t);
            Complex sum(0.0, 0.0);
            for (Eigen::Index k = 0; k < phases.size(); ++k)
                sum += weights[std::size_t(k)] * expi(phases[k]);
            return sum;
        },
        Integrability::no, "empirical");
}

CharFn affine_cf(const law::AffineMap& a)
{
    const CharFn inner = make_cf(*a.inner);
    auto flag = Integrability::unknown;
    if (inner.integrable() == Integrability::yes && a.matrix.rows() == a.matrix.cols() &&
        Eigen::FullPivLU<Matrix>(a.matrix).isInvertible())
        flag = Integrability::yes;
    return CharFn(
        int(a.matrix.rows()),
        [inner, transposed = Matrix(a.matrix.transpose()), shift = a.shift](std::span<const double> t) {
            const auto tv = as_vector(t);
            const Vector pulled = transposed * tv;
            return inner(pulled) * expi(shift.dot(tv));
        },
        flag, "affine");
}

CharFn standardized_sum_cf(const law::StandardizedIIDSum& s)
{
    const CharFn base = make_cf(*s.base);
    const double scale = 1.0 / std::sqrt(double(s.n) * s.variance);
    const double drift = -double(s.n) * s.mean * scale;
    const auto flag = base.integrable() == Integrability::yes ? Integrability::yes : Integrability::unknown;
    return CharFn(
        1,
        [base, scale, drift, n = s.n](std::span<const double> t) {
            Complex value = ipow(base(t[0] * scale), n);
            if (drift != 0.0)
                value *= expi(drift * t[0]);
            return value;
        },
        flag, "standardized_iid_sum");
}

CharFn product_cf(const law::Product& p)
{
    std::vector<CharFn> factors;
    bool all_yes = true;
    bool any_no = false;
    for (const auto& f : p.factors) {
        factors.push_back(make_cf(f));
        all_yes = all_yes && factors.back().integrable() == Integrability::yes;
        any_no = any_no || factors.back().integrable() == Integrability::no;
    }
    const auto flag = all_yes ? Integrability::yes : any_no ? Integrability::no : Integrability::unknown;
    return CharFn(
        int(factors.size()),
        [factors](std::span<const double> t) {
            Complex value(1.0, 0.0);
            for (std::size_t j = 0; j < factors.size(); ++j)
                value *= factors[j](t[j]);
            return value;
        },
        flag, "product");
}

} // namespace

const char* to_string(Integrability flag)
{
    switch (flag) {
    case Integrability::yes: return "yes";
    case Integrability::no: return "no";
    case Integrability::unknown: break;
    }
    return "unknown";
}

CharFn::CharFn(int dimension, Eval eval, Integrability integrable, std::string provenance)
    : dimension_(dimension), eval_(std::move(eval)), integrable_(integrable), provenance_(std::move(provenance))
{
    if (dimension_ < 1)
        throw ValidationError("characteristic function dimension must be >= 1");
    if (!eval_)
        throw ValidationError("characteristic function needs an evaluator");
}

Complex CharFn::operator()(std::span<const double> t) const
{
    if (t.size() != std::size_t(dimension_))
        throw ValidationError("characteristic function of dimension " + std::to_string(dimension_) +
                              " evaluated at a point of dimension " + std::to_string(t.size()));
    return eval_(t);
}

CharFn make_cf(const DistributionSpec& spec)
{
    return std::visit(
        Overloaded{
            [](const law::Gaussian& g) { return gaussian_cf(g); },
            [](const law::PointMass& p) {
                return CharFn(
                    int(p.location.size()),
                    [x = p.location](std::span<const double> t) { return expi(x.dot(as_vector(t))); },
                    Integrability::no, "point_mass");
            },
            [](const law::UniformBox& u) { return uniform_box_cf(u); },
            [](const law::Laplace1D& l) {
                return CharFn(
                    1,
                    [b = l.scale](std::span<const double> t) {
                        const double bt = b * t[0];
                        return Complex(1.0 / (1.0 + bt * bt), 0.0);
                    },
                    Integrability::yes, "laplace");
            },
            [](const law::Empirical& e) { return empirical_cf_of(e); },
            [](const law::Convolution& c) {
                CharFn acc = make_cf(c.parts.front());
                for (std::size_t k = 1; k < c.parts.size(); ++k)
                    acc = convolve(acc, make_cf(c.parts[k]));
                return acc;
            },
            [](const law::AffineMap& a) { return affine_cf(a); },
            [](const law::StandardizedIIDSum& s) { return standardized_sum_cf(s); },
            [](const law::Product& p) { return product_cf(p); },
        },
        spec.node());
}

CharFn convolve(const CharFn& a, const CharFn& b)
{
    if (a.dimension() != b.dimension())
        throw ValidationError("convolve: dimension mismatch (" + std::to_string(a.dimension()) + " vs " +
                              std::to_string(b.dimension()) + ")");
    const bool yes = a.integrable() == Integrability::yes || b.integrable() == Integrability::yes;
    return CharFn(
        a.dimension(), [a, b](std::span<const double> t) { return a(t) * b(t); },
        yes ? Integrability::yes : Integrability::unknown, "convolution");
}

CharFn gaussian_mollify_cf(const CharFn& cf, double sigma)
{
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw ValidationError("gaussian_mollify_cf: sigma must be a positive finite number");
    const double half_var = 0.5 * sigma * sigma;
    return CharFn(
        cf.dimension(),
        [cf, half_var](std::span<const double> t) {
            double norm2 = 0.0;
            for (double v : t)
                norm2 += v * v;
            return cf(t) * std::exp(-half_var * norm2);
        },
        Integrability::yes, "mollified(" + cf.provenance() + ")");
}

} // namespace cfmoll
