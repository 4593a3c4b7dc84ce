#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>

#include "cfmoll/distribution.hpp"

namespace cfmoll {

using Complex = std::complex<double>;

enum class Integrability { yes, no, unknown };

const char* to_string(Integrability flag);

/// Evaluable characteristic function t -> E exp(i <t, X>) of a law on R^d.
///
/// Evaluation is pure and safe to call concurrently.
class CharFn {
public:
    using Eval = std::function<Complex(std::span<const double>)>;

    CharFn(int dimension, Eval eval, Integrability integrable, std::string provenance = {});

    int dimension() const { return dimension_; }
    Integrability integrable() const { return integrable_; }
    const std::string& provenance() const { return provenance_; }

    Complex operator()(std::span<const double> t) const;
    Complex operator()(const Vector& t) const { return (*this)(std::span<const double>(t.data(), std::size_t(t.size()))); }
    Complex operator()(double t) const { return (*this)(std::span<const double>(&t, 1)); }

private:
    int dimension_;
    Eval eval_;
    Integrability integrable_;
    std::string provenance_;
};

CharFn make_cf(const DistributionSpec& spec);

/// Characteristic function of the convolution of two laws (pointwise product).
CharFn convolve(const CharFn& a, const CharFn& b);

/// t -> cf(t) * exp(-sigma^2 <t,t> / 2), the law of X + sigma Z with Z ~ N(0, I).
CharFn gaussian_mollify_cf(const CharFn& cf, double sigma);

} // namespace cfmoll
