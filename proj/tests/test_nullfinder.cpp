#include "sideband/errors.hpp"
#include "sideband/nullfinder.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace sideband;

namespace
{

ReducedContext preset_context(double g, double dp)
{
    const PhysicalParams p = membrane_preset();
    const double wm = p.mechanical_frequency;
    return reduce(p, g * wm, dp * wm);
}

// Reference values computed at 50-digit precision.
constexpr double ref_dp = 0.999995486667198;
constexpr double ref_g = 0.0043;
constexpr double ref_abs2_plus = 6.7866261535701599e-4;
constexpr double ref_abs2_minus = 0.24819053949965489;
constexpr double ref_residual = 9.6687707442890284e-7;
constexpr double null_dp = 0.99999097338321563;
constexpr double null_g = 0.0060163450189302208;
constexpr double null_abs2_minus = 0.24937880403173896;

} // namespace

TEST_CASE("reference operating point values")
{
    const SidebandResponse r = sideband_response(preset_context(ref_g, ref_dp));
    // |c+|^2 comes out of a near-cancellation, so a few ulps of the inputs show up here
    CHECK(std::norm(r.c_plus) == doctest::Approx(ref_abs2_plus).epsilon(1e-9));
    CHECK(std::norm(r.c_minus) == doctest::Approx(ref_abs2_minus).epsilon(1e-12));
    CHECK(std::abs(stokes_null_residual(r.ctx)) == doctest::Approx(ref_residual).epsilon(1e-9));
}

TEST_CASE("exact null of the preset")
{
    const ReducedContext tmpl = preset_context(0.0, 0.0);
    const CancellationPoint p = find_stokes_null(tmpl);
    CHECK(p.delta_p_star == doctest::Approx(null_dp).epsilon(1e-13));
    CHECK(p.g_star == doctest::Approx(null_g).epsilon(1e-11));
    CHECK(p.residual < 1e-12);

    ReducedContext at = tmpl;
    at.probe_detuning = p.delta_p_star;
    at.coupling = p.g_star;
    const SidebandResponse r = sideband_response(at);
    CHECK(std::norm(r.c_plus) / std::norm(r.c_minus) < 1e-10);
    CHECK(std::norm(r.c_minus) == doctest::Approx(null_abs2_minus).epsilon(1e-10));
}

TEST_CASE("Re(A B) root sits just below the Lorentzian estimate")
{
    const ReducedContext tmpl = preset_context(0.0, 0.0);
    const std::vector<double> roots = real_part_roots(tmpl);
    REQUIRE(roots.size() == 1);
    const double k = tmpl.kappa, g = tmpl.gamma, d = tmpl.detuning, x = roots[0];
    CHECK(std::abs((k + g) * x * x + g * d * x - k) < 1e-15);
    CHECK(x < std::sqrt(k / (k + g)));
}

TEST_CASE("closed form needs mechanical damping")
{
    ReducedContext tmpl = preset_context(0.0, 0.0);
    tmpl.gamma = 0.0;
    try
    {
        (void)closed_form_stokes_null(tmpl);
        FAIL("expected Degenerate");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == Errc::degenerate);
    }
}

TEST_CASE("residual derivative matches finite differences")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i)
    {
        ReducedContext c;
        c.kappa = 0.02 + u(rng);
        c.gamma = 1e-6 + 1e-2 * u(rng);
        c.detuning = 0.5 + u(rng);
        c.coupling = 0.05 * u(rng);
        c.probe_detuning = 0.5 + u(rng);
        const double h = 1e-6;
        ReducedContext lo = c, hi = c;
        lo.probe_detuning -= h;
        hi.probe_detuning += h;
        const cplx fd = (stokes_null_residual(hi) - stokes_null_residual(lo)) / (2.0 * h);
        const cplx an = stokes_null_residual_derivative(c);
        CHECK(std::abs(fd - an) < 1e-7 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("closed form, Newton and grid search agree")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 50; ++i)
    {
        ReducedContext c;
        c.kappa = 0.05 + 0.25 * u(rng);
        c.gamma = std::pow(10.0, -7.0 + 3.0 * u(rng));
        c.detuning = 0.8 + 0.4 * u(rng);
        CancellationPoint closed;
        try
        {
            closed = closed_form_stokes_null(c);
        }
        catch (const Error &e)
        {
            CHECK(e.code() == Errc::no_physical_root);
            continue;
        }
        if (closed.g_star > 0.045)
            continue; // outside the coarse grid
        const CancellationPoint grid = grid_refine_stokes_null(c, 1e-12);
        const CancellationPoint newton =
            newton_stokes_null(c, closed.delta_p_star * (1.0 + 1e-4), closed.g_star * 1.1, 1e-12);
        CHECK(grid.delta_p_star == doctest::Approx(closed.delta_p_star).epsilon(1e-10));
        CHECK(grid.g_star == doctest::Approx(closed.g_star).epsilon(1e-9));
        CHECK(newton.delta_p_star == doctest::Approx(closed.delta_p_star).epsilon(1e-10));
        CHECK(newton.g_star == doctest::Approx(closed.g_star).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("the preset has a single null")
{
    const ReducedContext tmpl = preset_context(0.0, 0.0);
    CHECK(count_stokes_nulls(tmpl, 1e-9, 2.0, 200001) == 1);
}

TEST_CASE("independent grid locates the same null")
{
    // brute force |N| over a fine grid around the expected point, no Newton
    const ReducedContext tmpl = preset_context(0.0, 0.0);
    double best = 1e300, bx = 0.0, bg = 0.0;
    for (int i = 0; i <= 2000; ++i)
    {
        const double x = 0.999985 + 1e-5 * i / 2000.0;
        for (int j = 0; j <= 400; ++j)
        {
            ReducedContext c = tmpl;
            c.probe_detuning = x;
            c.coupling = 0.004 + 0.004 * j / 400.0;
            const double r = std::abs(stokes_null_residual(c));
            if (r < best)
            {
                best = r;
                bx = x;
                bg = c.coupling;
            }
        }
    }
    // a coupling grid step of 1e-5 moves the best probe cell by ~1.5e-8
    CHECK(std::abs(bx - null_dp) <= 3e-8);
    CHECK(std::abs(bg - null_g) <= 1e-5);
}

TEST_CASE("EIT probe keeps a large imaginary part")
{
    const ReducedContext tmpl = preset_context(0.0, 1.0);
    const SweepTable t = eit_comparison(tmpl, {SweepVariable::coupling, 0.002, 0.01, 801});
    for (const SweepRow &r : t.rows)
        CHECK(std::abs(r.c_plus.imag()) > 0.1);

    ReducedContext at = tmpl;
    at.coupling = 0.0043;
    at.probe_detuning = 1.0;
    const cplx c = sideband_response(at).c_plus;
    CHECK(c.real() == doctest::Approx(0.048461899200264097).epsilon(1e-11));
    CHECK(c.imag() == doctest::Approx(-0.49515355418398928).epsilon(1e-11));
}

TEST_CASE("anti-Stokes bandwidth")
{
    const PhysicalParams p = membrane_preset();
    const ReducedContext tmpl = preset_context(ref_g, 0.0);
    const SweepTable t = scan_intensity(tmpl, {SweepVariable::probe_detuning, 0.9995, 1.0005, 20001});
    const BandwidthReport b = bandwidth(t, p.mechanical_frequency);
    // reference: 1e6-point scan gives 24.858924 Hz; to leading order the width is g^2/kappa
    CHECK(b.fwhm_hz == doctest::Approx(24.858924).epsilon(1e-4));
    const double analytic = ref_g * ref_g / tmpl.kappa * p.mechanical_frequency / (2 * std::numbers::pi);
    CHECK(b.fwhm_hz == doctest::Approx(analytic).epsilon(5e-3));
    CHECK(b.peak_value == doctest::Approx(0.24819087).epsilon(1e-6));
    CHECK(b.peak_center == doctest::Approx(0.99999538).epsilon(1e-7));
}

TEST_CASE("bandwidth errors")
{
    const ReducedContext flat = preset_context(0.0, 0.0);
    const SweepTable t0 = scan_intensity(flat, {SweepVariable::probe_detuning, 0.9995, 1.0005, 101});
    CHECK_THROWS_AS((void)bandwidth(t0, 1.0), Error);
    try
    {
        (void)bandwidth(t0, 1.0);
    }
    catch (const Error &e)
    {
        CHECK(e.code() == Errc::flat_spectrum);
    }

    const ReducedContext g = preset_context(ref_g, 0.0);
    const SweepTable edge = scan_intensity(g, {SweepVariable::probe_detuning, 0.99, 0.999, 101});
    try
    {
        (void)bandwidth(edge, 1.0);
        FAIL("expected NoPeak");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == Errc::no_peak);
    }
}

TEST_CASE("sweeps are identical for any thread count")
{
    const ReducedContext tmpl = preset_context(0.0, ref_dp);
    const SweepAxis axis{SweepVariable::coupling, 0.0, 0.01, 2001};
    const SweepTable one = scan_intensity(tmpl, axis, 1);
    for (int threads : {2, 3, 7})
    {
        const SweepTable many = scan_intensity(tmpl, axis, threads);
        REQUIRE(many.rows.size() == one.rows.size());
        bool same = true;
        for (std::size_t i = 0; i < one.rows.size(); ++i)
            same = same && many.rows[i].axis_value == one.rows[i].axis_value &&
                   many.rows[i].c_plus == one.rows[i].c_plus && many.rows[i].c_minus == one.rows[i].c_minus;
        CHECK(same);
    }
    CHECK(one.rows.back().axis_value == 0.01);
}

TEST_CASE("sweep axis validation")
{
    CHECK_THROWS_AS((SweepAxis{SweepVariable::coupling, 0.0, 1.0, 1}.validate()), Error);
    CHECK_THROWS_AS((SweepAxis{SweepVariable::coupling, 1.0, 1.0, 10}.validate()), Error);
    CHECK_THROWS_AS((SweepAxis{SweepVariable::coupling, -1.0, 1.0, 10}.validate()), Error);
    CHECK_NOTHROW((SweepAxis{SweepVariable::probe_detuning, 1.0, 0.5, 10}.validate()));
}
