#ifndef SIDEBAND_TIMEDOMAIN_HPP
#define SIDEBAND_TIMEDOMAIN_HPP

#include "sideband/model.hpp"
#include "sideband/nullfinder.hpp"

#include <span>
#include <utility>
#include <vector>

namespace sideband
{

// Two-tone drive in the frame rotating at the pump frequency.
struct DriveSpec
{
    double pump_amplitude = 0.0; // eps_L >= 0, 1/s
    double pump_phase = 0.0;     // rad
    cplx probe_amplitude{};      // eps_p, 1/s
    double probe_detuning = 0.0; // Delta_p = omega_p - omega_L, rad/s

    void validate() const;
};

enum class Scheme
{
    rk4,   // classical fourth order
    rkf78, // Runge-Kutta-Fehlberg 7(8), used at fixed step
};

struct InitialState
{
    cplx c{};
    double q = 0.0;
    double p = 0.0;
};

struct IntegrateOptions
{
    double record_start = 0.0; // samples before this time are not stored
    int stride = 1;            // store every stride-th step
    Scheme scheme = Scheme::rkf78;
    bool verify_step = true;   // rerun at dt/2 and compare the stored samples
    double step_tolerance = 1e-6;
    InitialState initial{};
};

struct TimeTrace
{
    std::vector<double> t;
    std::vector<cplx> c;
    std::vector<double> q; // m
    std::vector<double> p; // kg m/s
    PhysicalParams params{};
    DriveSpec drive{};
    double dt = 0.0;
    // max relative change of the stored samples under dt -> dt/2 (0 if unchecked)
    double step_halving_deviation = 0.0;
};

// Fixed-step integration of the mean-field equations
//   c' = -(kappa + i Delta_c) c + i g0 c q + eps_L e^{i phi} + eps_p e^{-i Delta_p t}
//   q' = p / m
//   p' = -m wm^2 q - gamma p + hbar g0 |c|^2
// starting at rest unless options.initial says otherwise.
TimeTrace integrate(const PhysicalParams &params, const DriveSpec &drive, double t_end, double dt,
                    const IntegrateOptions &options = {});

struct DemodResult
{
    cplx dc{};
    cplx a_plus{};  // coefficient of e^{-i Delta_p t}
    cplx a_minus{}; // coefficient of e^{+i Delta_p t}
    double fit_residual_rms = 0.0;
    std::size_t samples = 0;
};

// Least-squares fit of c(t) on [window.first, window.second) to
// dc + a_plus e^{-i Delta_p t} + a_minus e^{+i Delta_p t}. With a window of
// whole probe periods the harmonics of Delta_p drop out exactly.
DemodResult demodulate(std::span<const double> t, std::span<const cplx> c, double probe_detuning,
                       std::pair<double, double> window);
DemodResult demodulate(const TimeTrace &trace, double probe_detuning,
                       std::pair<double, double> window);

// Slowest decay rate (rad/s) among the linearised poles that feed the cavity
// field; mechanical poles are ignored when the effective coupling is zero.
double slowest_decay_rate(const PhysicalParams &params, const SteadyState &steady);

struct OracleOptions
{
    int steps_per_period = 128; // probe beat periods
    int window_periods = 40;
    double settle_factor = 10.0; // settle = factor / slowest_decay_rate
    int min_settle_periods = 200; // floor on the settle time, in probe periods
    Scheme scheme = Scheme::rkf78;
    bool verify_step = true;
};

struct OracleComparison
{
    PumpSetting pump{};
    SteadyState steady{};
    ReducedContext ctx{};
    cplx probe{};             // eps_p used, 1/s
    double settle_time = 0.0; // s
    double dt = 0.0;          // s
    DemodResult demod{};
    // a_plus / eps_p and a_minus / conj(eps_p), reduced units
    cplx measured_plus{};
    cplx measured_minus{};
    SidebandResponse printed{};
    SidebandResponse linearized{};
    double rel_error_plus = 0.0;  // against linearized
    double rel_error_minus = 0.0; // against linearized
    double magnitude_error_minus_printed = 0.0; // | |measured-| - |printed-| | / |printed-|
    double step_halving_deviation = 0.0;
};

// Relative error of a sideband amplitude. Amplitudes predicted below 1e-3 of
// the stronger sideband are measured against the stronger one instead.
double sideband_error(cplx measured, cplx predicted, cplx other_predicted);

// Pump for g_target, integrate with a weak probe at probe_detuning (rad/s),
// demodulate and compare against both analytic responses.
// `trace_out`, when given, receives the demodulated part of the trajectory.
OracleComparison oracle_compare(const PhysicalParams &params, double g_target, double probe_detuning,
                                double probe_ratio, const OracleOptions &options = {},
                                TimeTrace *trace_out = nullptr);

struct OperatingNull
{
    CancellationPoint point{};
    PumpSetting pump{};
    SteadyState steady{};
    ReducedContext ctx{}; // realised context at the null
    int iterations = 0;
};

// Null of the context the pumped cavity actually realises: the effective
// detuning depends on the pump needed for g*, so the two are iterated.
OperatingNull locate_operating_null(const PhysicalParams &params, const NullOptions &opts = {});

} // namespace sideband

#endif // SIDEBAND_TIMEDOMAIN_HPP
