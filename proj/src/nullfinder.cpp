#include "sideband/nullfinder.hpp"

#include "sideband/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace sideband
{

namespace
{

constexpr cplx I{0.0, 1.0};

ReducedContext at(ReducedContext ctx, double delta_p, double g)
{
    ctx.probe_detuning = delta_p;
    ctx.coupling = g;
    return ctx;
}

// Re(A B) = kappa (x^2 - 1) + gamma x (Delta + x).
double real_part(const ReducedContext &ctx, double x)
{
    return ctx.kappa * (x - 1.0) * (x + 1.0) + ctx.gamma * x * (ctx.detuning + x);
}

// Im(A B) = kappa gamma x - (Delta + x)(x^2 - 1); equals g^2 on the null.
double imag_part(const ReducedContext &ctx, double x)
{
    return ctx.kappa * ctx.gamma * x - (ctx.detuning + x) * (x - 1.0) * (x + 1.0);
}

std::pair<double, double> grid_seed(const ReducedContext &ctx)
{
    double best = std::numeric_limits<double>::infinity();
    std::pair<double, double> seed{1.0, 0.0};
    for (int i = 1; i < 2000; ++i)
    {
        const double x = 2.0 * i / 2000.0;
        for (int j = 0; j <= 50; ++j)
        {
            const double g = 0.05 * j / 50.0;
            const double r = std::abs(stokes_null_residual(at(ctx, x, g)));
            if (r < best)
            {
                best = r;
                seed = {x, g};
            }
        }
    }
    return seed;
}

} // namespace

std::string_view to_string(NullMethod method) noexcept
{
    switch (method)
    {
    case NullMethod::closed_form_split: return "closed_form_split";
    case NullMethod::newton_2d: return "newton_2d";
    case NullMethod::grid_refine: return "grid_refine";
    }
    return "unknown";
}

std::string_view to_string(SweepVariable v) noexcept
{
    return v == SweepVariable::probe_detuning ? "probe_detuning" : "coupling";
}

double SweepAxis::value(int i) const
{
    if (i == count - 1)
        return stop;
    return start + (stop - start) * (static_cast<double>(i) / (count - 1));
}

void SweepAxis::validate() const
{
    if (count < 2)
        throw Error(Errc::invalid_argument, "sweep axis needs at least 2 points");
    if (!(std::isfinite(start) && std::isfinite(stop)) || start == stop)
        throw Error(Errc::invalid_argument, "sweep axis must be strictly monotone");
    if (variable == SweepVariable::coupling && std::min(start, stop) < 0.0)
        throw Error(Errc::invalid_argument, "coupling axis must be non-negative");
}

cplx stokes_null_residual(const ReducedContext &ctx) { return response_parts(ctx).numerator_plus; }

cplx stokes_null_residual_derivative(const ReducedContext &ctx)
{
    const ResponseParts p = response_parts(ctx);
    const double x = ctx.probe_detuning;
    return -I * p.B + p.A * cplx(2.0 * x, ctx.gamma);
}

std::vector<double> real_part_roots(const ReducedContext &ctx)
{
    const double a = ctx.kappa + ctx.gamma;
    const double b = ctx.gamma * ctx.detuning;
    const double c = -ctx.kappa;
    const double disc = b * b - 4.0 * a * c;
    std::vector<double> roots;
    if (disc < 0.0)
        return roots;
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b == 0.0 ? 1.0 : b));
    for (double x : {q / a, c / q})
        if (x > 0.0)
            roots.push_back(x);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

CancellationPoint closed_form_stokes_null(const ReducedContext &ctx_template)
{
    ctx_template.validate();
    if (ctx_template.gamma == 0.0)
        throw Error(Errc::degenerate, "undamped mirror: only the trivial g = 0 null exists");

    const auto roots = real_part_roots(ctx_template);
    if (roots.empty())
        throw Error(Errc::no_physical_root, "Re(A B) = 0 has no positive root");
    const double x = *std::min_element(roots.begin(), roots.end(), [](double l, double r) {
        return std::abs(l - 1.0) < std::abs(r - 1.0);
    });

    const double g2 = imag_part(ctx_template, x);
    if (g2 < 0.0)
        throw Error(Errc::no_physical_root, "null requires g^2 < 0");

    CancellationPoint p;
    p.delta_p_star = x;
    p.g_star = std::sqrt(g2);
    p.residual = std::abs(stokes_null_residual(at(ctx_template, x, p.g_star)));
    p.method = NullMethod::closed_form_split;
    p.iterations = 0;
    return p;
}

CancellationPoint newton_stokes_null(const ReducedContext &ctx_template, double delta_p_seed,
                                     double g_seed, double tol, int max_iterations)
{
    ctx_template.validate();
    double x = delta_p_seed;
    double s = g_seed * g_seed;

    const auto residual_at = [&](double xx, double ss) {
        return std::abs(response_parts(at(ctx_template, xx, 0.0)).numerator_plus - I * ss);
    };

    double r = residual_at(x, s);
    int it = 0;
    // Iterate past `tol` until the residual stops improving.
    while (r > 0.0 && it < max_iterations)
    {
        const cplx n = response_parts(at(ctx_template, x, 0.0)).numerator_plus - I * s;
        const cplx dn = stokes_null_residual_derivative(at(ctx_template, x, 0.0));
        // J = [[Re dn, 0], [Im dn, -1]] for unknowns (x, s).
        if (dn.real() == 0.0)
            throw Error(Errc::degenerate, "Newton Jacobian is singular");
        const double dx = -n.real() / dn.real();
        const double ds = n.imag() + dn.imag() * dx;

        double step = 1.0;
        double x_new = x + dx;
        double s_new = s + ds;
        double r_new = residual_at(x_new, s_new);
        while (r_new > r && step > 1e-6)
        {
            step *= 0.5;
            x_new = x + step * dx;
            s_new = s + step * ds;
            r_new = residual_at(x_new, s_new);
        }
        if (r < tol && r_new >= r)
            break;
        ++it;
        x = x_new;
        s = s_new;
        r = r_new;
    }
    if (r >= tol)
        throw Error(Errc::no_physical_root, "Newton iteration did not reach tolerance");
    if (s < 0.0)
        throw Error(Errc::no_physical_root, "null requires g^2 < 0");
    if (!(x > 0.0))
        throw Error(Errc::no_physical_root, "null requires Delta_p > 0");

    CancellationPoint p;
    p.delta_p_star = x;
    p.g_star = std::sqrt(s);
    p.residual = std::abs(stokes_null_residual(at(ctx_template, x, p.g_star)));
    p.method = NullMethod::newton_2d;
    p.iterations = it;
    return p;
}

CancellationPoint grid_refine_stokes_null(const ReducedContext &ctx_template, double tol)
{
    ctx_template.validate();
    if (ctx_template.gamma == 0.0)
        throw Error(Errc::degenerate, "undamped mirror: only the trivial g = 0 null exists");
    const auto [x0, g0] = grid_seed(ctx_template);
    CancellationPoint p = newton_stokes_null(ctx_template, x0, g0, tol);
    p.method = NullMethod::grid_refine;
    return p;
}

CancellationPoint find_stokes_null(const ReducedContext &ctx_template, const NullOptions &opts)
{
    const CancellationPoint closed = closed_form_stokes_null(ctx_template);
    CancellationPoint newton = grid_refine_stokes_null(ctx_template, opts.tolerance);
    newton.method = NullMethod::newton_2d;

    if (std::abs(closed.delta_p_star - newton.delta_p_star) > opts.agreement ||
        std::abs(closed.g_star - newton.g_star) > opts.agreement)
        throw Error(Errc::method_disagreement, "closed-form and Newton nulls differ");

    if (closed.residual < opts.tolerance)
        return closed;
    if (newton.residual < opts.tolerance)
        return newton;
    throw Error(Errc::no_physical_root, "null residual above tolerance");
}

int count_stokes_nulls(const ReducedContext &ctx_template, double lo, double hi, int samples)
{
    if (samples < 2 || !(hi > lo))
        throw Error(Errc::invalid_argument, "census grid must be increasing with >= 2 samples");
    int count = 0;
    double x_prev = lo;
    double f_prev = real_part(ctx_template, x_prev);
    for (int i = 1; i < samples; ++i)
    {
        const double x = lo + (hi - lo) * i / (samples - 1);
        const double f = real_part(ctx_template, x);
        if (f == 0.0 || (f_prev < 0.0) != (f < 0.0))
        {
            double a = x_prev, b = x;
            for (int k = 0; k < 200 && b - a > 0.0; ++k)
            {
                const double m = 0.5 * (a + b);
                if (m == a || m == b)
                    break;
                if ((real_part(ctx_template, a) < 0.0) != (real_part(ctx_template, m) < 0.0))
                    b = m;
                else
                    a = m;
            }
            if (imag_part(ctx_template, 0.5 * (a + b)) > 0.0)
                ++count;
        }
        x_prev = x;
        f_prev = f;
    }
    return count;
}

SweepTable scan_intensity(const ReducedContext &ctx_template, const SweepAxis &axis, int threads)
{
    ctx_template.validate();
    axis.validate();

    SweepTable table;
    table.axis = axis;
    table.base = ctx_template;
    table.rows.resize(static_cast<std::size_t>(axis.count));

    const auto fill = [&](int begin, int end) {
        for (int i = begin; i < end; ++i)
        {
            ReducedContext ctx = ctx_template;
            const double v = axis.value(i);
            if (axis.variable == SweepVariable::probe_detuning)
                ctx.probe_detuning = v;
            else
                ctx.coupling = v;
            try
            {
                const SidebandResponse r = sideband_response(ctx);
                table.rows[static_cast<std::size_t>(i)] = {v, r.c_plus, r.c_minus};
            }
            catch (const Error &e)
            {
                throw Error(e.code(), "grid index " + std::to_string(i) + ": " + e.what());
            }
        }
    };

    const int n_threads = std::clamp(threads, 1, axis.count);
    if (n_threads == 1)
    {
        fill(0, axis.count);
        return table;
    }

    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_threads));
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n_threads; ++t)
        {
            const int begin = static_cast<int>(static_cast<long long>(axis.count) * t / n_threads);
            const int end = static_cast<int>(static_cast<long long>(axis.count) * (t + 1) / n_threads);
            pool.emplace_back([&, t, begin, end] {
                try
                {
                    fill(begin, end);
                }
                catch (...)
                {
                    failures[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
    }
    for (const auto &f : failures)
        if (f)
            std::rethrow_exception(f);
    return table;
}

BandwidthReport bandwidth(const SweepTable &table, double omega_m)
{
    if (table.axis.variable != SweepVariable::probe_detuning)
        throw Error(Errc::invalid_argument, "bandwidth needs a probe-detuning sweep");
    const auto &rows = table.rows;
    if (rows.size() < 3)
        throw Error(Errc::no_peak, "too few samples for a peak");

    std::vector<double> y(rows.size());
    std::transform(rows.begin(), rows.end(), y.begin(),
                   [](const SweepRow &r) { return std::norm(r.c_minus); });
    const auto peak_it = std::max_element(y.begin(), y.end());
    const auto peak = static_cast<std::size_t>(peak_it - y.begin());
    const double y_max = *peak_it;
    if (!(y_max >= 1e-30))
        throw Error(Errc::flat_spectrum, "|c-|^2 below 1e-30 everywhere");
    if (peak == 0 || peak + 1 == y.size())
        throw Error(Errc::no_peak, "maximum lies on the sweep boundary");

    const double half = 0.5 * y_max;
    const auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double x0 = rows[inside].axis_value, x1 = rows[outside].axis_value;
        return x0 + (half - y[inside]) * (x1 - x0) / (y[outside] - y[inside]);
    };

    std::size_t l = peak;
    while (l > 0 && y[l - 1] >= half)
        --l;
    if (l == 0)
        throw Error(Errc::no_peak, "low half-maximum crossing outside sweep");
    std::size_t r = peak;
    while (r + 1 < y.size() && y[r + 1] >= half)
        ++r;
    if (r + 1 == y.size())
        throw Error(Errc::no_peak, "high half-maximum crossing outside sweep");

    BandwidthReport rep;
    rep.peak_center = rows[peak].axis_value;
    rep.peak_value = y_max;
    rep.half_max_low = crossing(l, l - 1);
    rep.half_max_high = crossing(r, r + 1);
    rep.fwhm_hz = std::abs(rep.half_max_high - rep.half_max_low) * omega_m / (2.0 * std::numbers::pi);
    return rep;
}

SweepTable eit_comparison(const ReducedContext &ctx_template, const SweepAxis &g_axis, int threads)
{
    if (g_axis.variable != SweepVariable::coupling)
        throw Error(Errc::invalid_argument, "EIT comparison sweeps the coupling");
    ReducedContext ctx = ctx_template;
    ctx.probe_detuning = 1.0;
    return scan_intensity(ctx, g_axis, threads);
}

} // namespace sideband
