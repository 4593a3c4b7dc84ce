#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "cfmoll/charfn.hpp"
#include "cfmoll/grid.hpp"
#include "cfmoll/mollify.hpp"

namespace cfmoll {

/// Riemann-sum L1 distance sum |a_i - b_i| * cell_volume on a shared grid.
double l1_distance(const DensityField& a, const DensityField& b);
/// Total variation distance, half the L1 distance.
double tv_distance(const DensityField& a, const DensityField& b);

/// `per_axis` uniform points per axis on [-half_width, half_width]^d.
std::vector<Vector> default_probes(int dimension, int per_axis = 129, double half_width = 5.0);

/// max over probes of |cf_n(t) - cf_target(t)|.
double cf_sup_error(const CharFn& cf_n, const CharFn& cf_target, std::span<const Vector> probes);

/// P(||Z||_inf > radius) = 1 - (Phi(r) - Phi(-r))^d for Z ~ N(0, I_d).
double gaussian_max_norm_tail(double radius, int dimension);

/// P(||Z||_inf > k * epsilon), the mass that smoothing with sigma = 1/k moves
/// farther than epsilon.
double gaussian_tail_prob(int k, double epsilon, int dimension);

/// Riemann sum over lattice points with ||z||_inf <= radius. The box must lie
/// inside the grid.
double mass_in_box(const DensityField& field, double radius);

struct CertificateOptions {
    /// Index n attached to each sequence member; default 1, 2, ...
    std::vector<long> labels;
    /// Mollification scales per k; default 1/k.
    std::vector<double> sigmas;
    /// Probe set for cf_sup_error; default default_probes(d).
    std::vector<Vector> probes;
};

/// Numbers behind the three ingredients of the continuity argument: CF
/// pointwise error per n, Scheffe L1 distance of the mollified laws per
/// (n, k), and the smoothing remainder per k. It states no verdict.
struct ConvergenceReport {
    int dimension = 0;
    double epsilon = 0.0;
    std::vector<long> labels;
    std::vector<int> k_schedule;
    std::vector<double> sigma_schedule;
    std::vector<double> cf_sup_error;
    /// l1_mollified[n][k].
    std::vector<std::vector<double>> l1_mollified;
    std::vector<double> smoothing_remainder;
    /// Per k: l1_mollified is nonincreasing along n.
    std::vector<bool> monotone_flags;
    /// Per k: l1_mollified at the last n.
    std::vector<double> final_l1;
};

ConvergenceReport convergence_certificate(std::span<const CharFn> sequence, const CharFn& target,
                                          std::span<const int> k_schedule, const Grid& grid,
                                          double epsilon, const MollificationParams& params,
                                          const CertificateOptions& options = {});

inline constexpr const char* report_schema = "cfmoll.convergence_report/1";

nlohmann::json to_json(const ConvergenceReport& report);
ConvergenceReport report_from_json(const nlohmann::json& j);

/// One row per (n, k): n,k,sigma,l1,remainder.
void write_report_csv(std::ostream& out, const ConvergenceReport& report);

} // namespace cfmoll
