#include "sideband/timedomain.hpp"

#include "sideband/errors.hpp"

#include <Eigen/Dense>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace sideband
{

namespace
{

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr cplx I{0.0, 1.0};

using State = std::array<double, 4>; // Re c, Im c, q, p

struct MeanFieldSystem
{
    double kappa;
    double detuning;
    double g0;
    double mass;
    double omega_m2;
    double gamma;
    cplx pump;
    cplx probe;
    double probe_detuning;

    void operator()(const State &x, State &dxdt, double t) const
    {
        const cplx c(x[0], x[1]);
        const double q = x[2];
        const cplx dc = -cplx(kappa, detuning) * c + I * (g0 * q) * c + pump +
                        probe * std::polar(1.0, -probe_detuning * t);
        dxdt[0] = dc.real();
        dxdt[1] = dc.imag();
        dxdt[2] = x[3] / mass;
        dxdt[3] = -mass * omega_m2 * q - gamma * x[3] + constants::hbar * g0 * std::norm(c);
    }
};

struct Samples
{
    std::vector<double> t;
    std::vector<cplx> c;
    std::vector<double> q;
    std::vector<double> p;
};

bool all_finite(const State &x)
{
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

template <class Stepper>
Samples run(const MeanFieldSystem &sys, const InitialState &init, long long steps, double dt,
            long long first_record, long long stride)
{
    Stepper stepper;
    State x{init.c.real(), init.c.imag(), init.q, init.p};
    Samples out;
    const auto reserve = static_cast<std::size_t>(std::max(0LL, (steps - first_record) / stride + 1));
    out.t.reserve(reserve);
    out.c.reserve(reserve);
    out.q.reserve(reserve);
    out.p.reserve(reserve);

    const auto record = [&](long long n) {
        if (n >= first_record && (n - first_record) % stride == 0)
        {
            out.t.push_back(static_cast<double>(n) * dt);
            out.c.emplace_back(x[0], x[1]);
            out.q.push_back(x[2]);
            out.p.push_back(x[3]);
        }
    };

    record(0);
    for (long long n = 0; n < steps; ++n)
    {
        stepper.do_step(sys, x, static_cast<double>(n) * dt, dt);
        if ((n & 4095) == 0 && !all_finite(x))
            throw Error(Errc::non_finite, "state overflowed at t = " + std::to_string(n * dt));
        record(n + 1);
    }
    if (!all_finite(x))
        throw Error(Errc::non_finite, "state is not finite at t_end");
    return out;
}

Samples run_scheme(Scheme scheme, const MeanFieldSystem &sys, const InitialState &init,
                   long long steps, double dt, long long first_record, long long stride)
{
    namespace ode = boost::numeric::odeint;
    if (scheme == Scheme::rk4)
        return run<ode::runge_kutta4<State>>(sys, init, steps, dt, first_record, stride);
    return run<ode::runge_kutta_fehlberg78<State>>(sys, init, steps, dt, first_record, stride);
}

double max_abs(const std::vector<double> &v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

void DriveSpec::validate() const
{
    if (!(pump_amplitude >= 0.0) || !std::isfinite(pump_amplitude))
        throw Error(Errc::invalid_argument, "pump amplitude must be >= 0");
    if (!std::isfinite(probe_amplitude.real()) || !std::isfinite(probe_amplitude.imag()) ||
        !std::isfinite(probe_detuning) || !std::isfinite(pump_phase))
        throw Error(Errc::invalid_argument, "drive must be finite");
}

TimeTrace integrate(const PhysicalParams &params, const DriveSpec &drive, double t_end, double dt,
                    const IntegrateOptions &options)
{
    params.validate();
    drive.validate();
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw Error(Errc::invalid_argument, "t_end and dt must be > 0");
    if (options.stride < 1)
        throw Error(Errc::invalid_argument, "stride must be >= 1");

    const double kc = params.kappa_effective();
    const double fastest =
        std::max({params.mechanical_frequency, std::abs(params.bare_detuning), kc});
    if (dt > two_pi / (50.0 * fastest))
        throw Error(Errc::step_too_large, "dt exceeds 2 pi / (50 max(omega_m, |Delta_c|, kappa))");

    const double wm = params.mechanical_frequency;
    const MeanFieldSystem sys{kc,
                              params.bare_detuning,
                              params.coupling_constant(),
                              params.mirror_mass,
                              wm * wm,
                              params.mechanical_damping,
                              std::polar(drive.pump_amplitude, drive.pump_phase),
                              drive.probe_amplitude,
                              drive.probe_detuning};

    const auto steps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
    const auto first = std::clamp(static_cast<long long>(std::ceil(options.record_start / dt - 1e-9)),
                                  0LL, steps);
    const long long stride = options.stride;

    Samples s = run_scheme(options.scheme, sys, options.initial, steps, dt, first, stride);

    TimeTrace trace;
    trace.params = params;
    trace.drive = drive;
    trace.dt = dt;

    if (options.verify_step)
    {
        const Samples h =
            run_scheme(options.scheme, sys, options.initial, 2 * steps, dt / 2.0, 2 * first, 2 * stride);
        double c_scale = 0.0;
        for (const cplx &v : s.c)
            c_scale = std::max(c_scale, std::abs(v));
        const double q_scale = max_abs(s.q);
        const double p_scale = max_abs(s.p);
        double dev = 0.0;
        for (std::size_t i = 0; i < s.t.size(); ++i)
        {
            if (c_scale > 0.0)
                dev = std::max(dev, std::abs(s.c[i] - h.c[i]) / c_scale);
            if (q_scale > 0.0)
                dev = std::max(dev, std::abs(s.q[i] - h.q[i]) / q_scale);
            if (p_scale > 0.0)
                dev = std::max(dev, std::abs(s.p[i] - h.p[i]) / p_scale);
        }
        trace.step_halving_deviation = dev;
        if (dev > options.step_tolerance)
            throw Error(Errc::step_too_large,
                        "step halving changed the trace by " + std::to_string(dev));
    }

    trace.t = std::move(s.t);
    trace.c = std::move(s.c);
    trace.q = std::move(s.q);
    trace.p = std::move(s.p);
    return trace;
}

DemodResult demodulate(std::span<const double> t, std::span<const cplx> c, double probe_detuning,
                       std::pair<double, double> window)
{
    if (t.size() != c.size())
        throw Error(Errc::invalid_argument, "time and signal lengths differ");
    if (t.size() < 3 || !(window.second > window.first))
        throw Error(Errc::window_too_short, "window is empty");
    const double slack = 1e-9 * (t.back() - t.front());
    if (window.first < t.front() - slack || window.second > t.back() + slack)
        throw Error(Errc::window_too_short, "window lies outside the trace");

    // Half-open window: a sample sitting on the closing edge would be the
    // first sample of the next period and break tone orthogonality.
    const auto lo = std::lower_bound(t.begin(), t.end(), window.first - slack);
    const auto hi = std::lower_bound(t.begin(), t.end(), window.second - slack);
    const auto first = static_cast<std::size_t>(lo - t.begin());
    const auto n = hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
    if (n < 3)
        throw Error(Errc::window_too_short, "fewer than 3 samples in window");

    const double span = window.second - window.first;
    if (std::abs(probe_detuning) * span < two_pi * 20.0 * (1.0 - 1e-9))
        throw Error(Errc::ill_conditioned, "window spans fewer than 20 probe periods");

    Eigen::MatrixXcd basis(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXcd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto row = static_cast<Eigen::Index>(i);
        const cplx tone = std::polar(1.0, -probe_detuning * t[first + i]);
        basis(row, 0) = 1.0;
        basis(row, 1) = tone;
        basis(row, 2) = std::conj(tone);
        y(row) = c[first + i];
    }
    const Eigen::Vector3cd coef = basis.colPivHouseholderQr().solve(y);
    const Eigen::VectorXcd resid = y - basis * coef;

    DemodResult r;
    r.dc = coef(0);
    r.a_plus = coef(1);
    r.a_minus = coef(2);
    r.fit_residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    r.samples = n;
    return r;
}

DemodResult demodulate(const TimeTrace &trace, double probe_detuning,
                       std::pair<double, double> window)
{
    return demodulate(std::span<const double>(trace.t), std::span<const cplx>(trace.c),
                      probe_detuning, window);
}

double slowest_decay_rate(const PhysicalParams &params, const SteadyState &steady)
{
    const double wm = params.mechanical_frequency;
    const double k = params.kappa_effective() / wm;
    const double d = steady.effective_detuning / wm;
    const double g = params.coupling_constant() * params.zero_point_length() / wm;
    const double cr = steady.c0.real();
    const double ci = steady.c0.imag();

    if (g * std::abs(steady.c0) == 0.0)
        return params.kappa_effective();

    // Fluctuations (Re dc, Im dc, dq / x_zpf, dp / (m wm x_zpf)), time in 1/wm.
    Eigen::Matrix4d jac;
    jac << -k, d, -g * ci, 0.0,
           -d, -k, g * cr, 0.0,
           0.0, 0.0, 0.0, 1.0,
           2.0 * g * cr, 2.0 * g * ci, -1.0, -params.mechanical_damping / wm;
    const Eigen::EigenSolver<Eigen::Matrix4d> es(jac, false);
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < 4; ++i)
        slowest = std::min(slowest, -es.eigenvalues()(i).real());
    if (!(slowest > 0.0))
        throw Error(Errc::invalid_argument, "steady state is dynamically unstable");
    return slowest * wm;
}

double sideband_error(cplx measured, cplx predicted, cplx other_predicted)
{
    const double own = std::abs(predicted);
    const double scale = own >= 1e-3 * std::abs(other_predicted) ? own : std::abs(other_predicted);
    if (scale == 0.0)
        return std::abs(measured);
    return std::abs(measured - predicted) / scale;
}

OracleComparison oracle_compare(const PhysicalParams &params, double g_target, double probe_detuning,
                                double probe_ratio, const OracleOptions &options,
                                TimeTrace *trace_out)
{
    if (!(probe_ratio > 0.0) || probe_ratio > 1e-2)
        throw Error(Errc::invalid_argument, "probe_ratio must lie in (0, 1e-2]");
    if (!(probe_detuning != 0.0) || !std::isfinite(probe_detuning))
        throw Error(Errc::invalid_argument, "probe detuning must be non-zero");
    if (options.steps_per_period < 1 || options.window_periods < 20 || options.min_settle_periods < 0)
        throw Error(Errc::invalid_argument,
                    "need >= 1 step per period, >= 20 window periods and a non-negative settle floor");

    OracleComparison out;
    out.pump = pump_power_for_coupling(params, g_target);
    const PhysicalParams pumped = params.with_pump(PumpAmplitude{out.pump.amplitude});
    out.steady = solve_steady_state(pumped);
    out.ctx = reduce(pumped, out.steady, probe_detuning);

    const double eps_l = out.pump.amplitude;
    out.probe = probe_ratio * (eps_l > 0.0 ? eps_l : params.cavity_decay);

    out.printed = sideband_response(out.ctx);
    const double phase = std::abs(out.steady.c0) > 0.0 ? std::arg(out.steady.c0) : 0.0;
    out.linearized = linearized_response(out.ctx, phase);

    const double period = two_pi / std::abs(probe_detuning);
    const double kc = pumped.kappa_effective();
    const double fastest = std::max({pumped.mechanical_frequency, std::abs(pumped.bare_detuning), kc});
    int per_period = options.steps_per_period;
    while (period / per_period > two_pi / (50.0 * fastest))
        per_period *= 2;
    out.dt = period / per_period;

    out.settle_time = options.settle_factor / slowest_decay_rate(pumped, out.steady);
    const auto settle_periods = std::max(static_cast<long long>(std::ceil(out.settle_time / period)),
                                         static_cast<long long>(options.min_settle_periods));
    const auto first_step = settle_periods * per_period;
    const auto last_step = first_step + static_cast<long long>(options.window_periods) * per_period;

    DriveSpec drive;
    drive.pump_amplitude = eps_l;
    drive.probe_amplitude = out.probe;
    drive.probe_detuning = probe_detuning;

    IntegrateOptions iopt;
    iopt.record_start = static_cast<double>(first_step) * out.dt;
    iopt.scheme = options.scheme;
    iopt.verify_step = options.verify_step;
    const TimeTrace trace =
        integrate(pumped, drive, static_cast<double>(last_step) * out.dt, out.dt, iopt);
    out.step_halving_deviation = trace.step_halving_deviation;

    out.demod = demodulate(trace, probe_detuning, {trace.t.front(), trace.t.back()});
    const double wm = pumped.mechanical_frequency;
    out.measured_plus = out.demod.a_plus / out.probe * wm;
    out.measured_minus = out.demod.a_minus / std::conj(out.probe) * wm;
    if (trace_out)
        *trace_out = trace;

    out.rel_error_plus = sideband_error(out.measured_plus, out.linearized.c_plus, out.linearized.c_minus);
    out.rel_error_minus =
        sideband_error(out.measured_minus, out.linearized.c_minus, out.linearized.c_plus);
    const double printed_minus = std::abs(out.printed.c_minus);
    out.magnitude_error_minus_printed =
        printed_minus > 0.0 ? std::abs(std::abs(out.measured_minus) - printed_minus) / printed_minus
                            : std::abs(out.measured_minus);
    return out;
}

OperatingNull locate_operating_null(const PhysicalParams &params, const NullOptions &opts)
{
    params.validate();
    const double wm = params.mechanical_frequency;
    OperatingNull out;
    double detuning = params.bare_detuning;
    for (int it = 1; it <= 100; ++it)
    {
        ReducedContext ctx = reduce(params, 0.0, 0.0);
        ctx.detuning = detuning / wm;
        const CancellationPoint point = find_stokes_null(ctx, opts);
        out.pump = pump_power_for_coupling(params, point.g_star * wm);
        out.steady = solve_steady_state(params.with_pump(PumpAmplitude{out.pump.amplitude}));
        out.iterations = it;
        const double next = out.steady.effective_detuning;
        const bool done = std::abs(next - detuning) <= 1e-15 * std::abs(detuning);
        detuning = next;
        if (done)
            break;
    }
    const PhysicalParams pumped = params.with_pump(PumpAmplitude{out.pump.amplitude});
    ReducedContext ctx = reduce(pumped, out.steady, 0.0);
    out.point = find_stokes_null(ctx, opts);
    ctx.probe_detuning = out.point.delta_p_star;
    out.ctx = ctx;
    return out;
}

} // namespace sideband
