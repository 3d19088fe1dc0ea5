#ifndef SIDEBAND_NULLFINDER_HPP
#define SIDEBAND_NULLFINDER_HPP

#include "sideband/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sideband
{

enum class NullMethod
{
    closed_form_split,
    newton_2d,
    grid_refine,
};

std::string_view to_string(NullMethod method) noexcept;

// A point (Delta_p*, g*) in mechanical units where the probe-frequency
// numerator vanishes.
struct CancellationPoint
{
    double delta_p_star = 0.0;
    double g_star = 0.0;
    double residual = 0.0; // |numerator_plus| at the point
    NullMethod method = NullMethod::closed_form_split;
    int iterations = 0;
};

enum class SweepVariable
{
    probe_detuning,
    coupling,
};

std::string_view to_string(SweepVariable v) noexcept;

struct SweepAxis
{
    SweepVariable variable = SweepVariable::probe_detuning;
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    // Linear spacing; the last point is exactly `stop`.
    double value(int i) const;
    void validate() const;
};

struct SweepRow
{
    double axis_value = 0.0;
    cplx c_plus{};
    cplx c_minus{};
};

struct SweepTable
{
    SweepAxis axis{};
    ReducedContext base{}; // context for every row except the swept field
    std::vector<SweepRow> rows;
};

struct BandwidthReport
{
    double peak_center = 0.0; // Delta_p, mechanical units
    double fwhm_hz = 0.0;
    double peak_value = 0.0;  // max |c-|^2
    double half_max_low = 0.0;
    double half_max_high = 0.0;
};

struct NullOptions
{
    double tolerance = 1e-12;
    double agreement = 1e-10;
};

// numerator_plus = A B - i g^2.
cplx stokes_null_residual(const ReducedContext &ctx);

// d numerator_plus / d Delta_p.
cplx stokes_null_residual_derivative(const ReducedContext &ctx);

// Positive roots of Re(A B) = 0 in Delta_p, ascending.
std::vector<double> real_part_roots(const ReducedContext &ctx);

// Closed-form split: Re(A B) fixes Delta_p, Im(A B) then gives g^2.
CancellationPoint closed_form_stokes_null(const ReducedContext &ctx_template);

// Damped Newton iteration on (Re N, Im N) in the unknowns (Delta_p, g^2).
CancellationPoint newton_stokes_null(const ReducedContext &ctx_template, double delta_p_seed,
                                     double g_seed, double tol, int max_iterations = 100);

// Coarse grid search on |N| followed by Newton refinement.
CancellationPoint grid_refine_stokes_null(const ReducedContext &ctx_template, double tol);

// Closed form, cross-checked against grid-seeded Newton.
CancellationPoint find_stokes_null(const ReducedContext &ctx_template, const NullOptions &opts = {});

// Number of distinct positive-g nulls with Delta_p in (lo, hi), counted from
// sign changes of Re(A B) on a uniform grid.
int count_stokes_nulls(const ReducedContext &ctx_template, double lo, double hi, int samples);

// Evaluates the closed-form response along an axis. `threads` > 1 splits the
// grid into contiguous blocks; rows are identical for any thread count.
SweepTable scan_intensity(const ReducedContext &ctx_template, const SweepAxis &axis,
                          int threads = 1);

// FWHM of the |c-|^2 peak of a probe-detuning sweep, in Hz.
BandwidthReport bandwidth(const SweepTable &table, double omega_m);

// Coupling sweep with Delta_p pinned to omega_m.
SweepTable eit_comparison(const ReducedContext &ctx_template, const SweepAxis &g_axis,
                          int threads = 1);

} // namespace sideband

#endif // SIDEBAND_NULLFINDER_HPP
