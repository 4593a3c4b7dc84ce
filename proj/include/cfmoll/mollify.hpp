#pragma once

#include <span>

#include "cfmoll/charfn.hpp"
#include "cfmoll/grid.hpp"

namespace cfmoll {

/// Quadrature configuration shared by the mollified-density and inversion
/// routines. Zero-valued fields mean "choose automatically".
struct MollificationParams {
    /// Half-width R of the frequency box [-R, R]^d. 0: from tail_tol
    /// (mollified density) or from a scan of |cf| (direct inversion).
    double truncation_radius = 0.0;
    /// Minimum trapezoid nodes per axis; must be even and >= 16. 0: 512 for
    /// d <= 2, 64 for d == 3. Raised automatically so the frequency step
    /// never exceeds max_frequency_step.
    int nodes_per_axis = 0;
    double tail_tol = 1e-8;
    double negativity_tol = default_negativity_tol;
    /// Upper bound on the trapezoid step h. The quadrature sees the density
    /// periodized with period 2*pi/h, so this bounds aliasing.
    double max_frequency_step = 0.25;
    /// Radius at which the |cf| scan for direct inversion gives up.
    double max_inversion_radius = 1e4;
    /// Refuse more than this many tensor nodes in total.
    double max_total_nodes = 1 << 26;
    bool allow_unknown_integrability = false;
    bool allow_high_dimension = false;
    /// Worker threads for grid evaluation; 0 uses the hardware concurrency.
    /// Results do not depend on this value.
    int threads = 0;
};

void validate(const MollificationParams& params);

/// Tolerance on the discarded imaginary part is 100x this value.
inline double combined_tolerance(const MollificationParams& p) { return p.tail_tol + p.negativity_tol; }

/// Smallest R >= 1 with (2 pi)^-d * integral over ||y||_inf > R of
/// exp(-sigma^2 |y|^2 / 2) dy <= tail_tol, using a union bound over axes.
/// Returns 1.0 when the bound holds for every R.
double truncation_radius(double sigma, double tail_tol, int dimension);

struct InversionRadius {
    double radius;
    /// True when the scan hit max_inversion_radius before |cf| became small;
    /// accuracy is then limited by the truncated tail.
    bool capped;
};

/// Frequency radius for direct inversion. Walks outwards along each axis and
/// stops at the first r where r * max|cf| over probes in [r, 2r) drops below
/// pi * tail_tol; the radius is twice the largest such r.
InversionRadius inversion_radius(const CharFn& cf, const MollificationParams& params);

/// Trapezoid rule on [-radius, radius].
struct QuadratureRule {
    double radius;
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadratureRule make_rule(double radius, int dimension, const MollificationParams& params);

/// g_sigma(z) = (2 pi)^-d * integral cf(y) exp(-i<z,y> - sigma^2 <y,y>/2) dy,
/// the density of X + sigma Z.
double mollified_density_at(const CharFn& cf, double sigma, std::span<const double> z,
                            const MollificationParams& params = {});

/// Grid version of mollified_density_at. Clamps values in [-negativity_tol, 0)
/// to zero and throws NumericFailure on larger negativity or when the Riemann
/// sum misses 1 by more than normalization_window.
DensityField mollified_density_grid(const CharFn& cf, double sigma, const Grid& grid,
                                    const MollificationParams& params = {});

/// g(z) = (2 pi)^-d * integral cf(y) exp(-i<z,y>) dy for integrable cf.
double invert_density_at(const CharFn& cf, std::span<const double> z,
                         const MollificationParams& params = {});

/// Grid version of invert_density_at. The normalized flag is set when the
/// Riemann sum falls inside the window; a grid that does not cover the
/// support is not an error here.
DensityField invert_density_grid(const CharFn& cf, const Grid& grid, const MollificationParams& params = {});

/// C = (2 pi)^-d * integral |cf|, estimated with the inversion quadrature.
double cf_l1_bound(const CharFn& cf, const MollificationParams& params = {});

} // namespace cfmoll
