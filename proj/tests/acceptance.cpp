// Acceptance checks for the preset experiment. Prints one line per criterion
// and exits non-zero if any of them fails.

#include "sideband/config.hpp"
#include "sideband/errors.hpp"
#include "sideband/run.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace sideband;
namespace fs = std::filesystem;

namespace
{

struct Verdict
{
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char *name, double budget_s, const std::function<Verdict()> &body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try
    {
        v = body();
    }
    catch (const std::exception &e)
    {
        v = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = v.pass;
    if (secs > budget_s)
    {
        pass = false;
        v.detail += fmt::format("; over time budget {} s", budget_s);
    }
    if (!pass)
        ++failures;
    fmt::print("{} [{}] {}: {} ({:.3f} s)\n", pass ? "PASS" : "FAIL", id, name, v.detail, secs);
    std::fflush(stdout);
}

ReducedContext preset_context(double g, double dp)
{
    const PhysicalParams p = membrane_preset();
    return reduce(p, g * p.mechanical_frequency, dp * p.mechanical_frequency);
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string &name)
{
    const fs::path dir = fs::temp_directory_path() / ("sideband_acceptance_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

int main()
{
    const ReducedContext tmpl = preset_context(0.0, 0.0);

    criterion(1, "Stokes-null certificate", 1.0, [&] {
        const CancellationPoint p = find_stokes_null(tmpl);
        ReducedContext at = tmpl;
        at.probe_detuning = p.delta_p_star;
        at.coupling = p.g_star;
        const SidebandResponse r = sideband_response(at);
        const double ratio = std::norm(r.c_plus) / std::norm(r.c_minus);
        const double num = std::abs(r.parts.numerator_plus);
        return Verdict{num < 1e-12 && ratio < 1e-10,
                       fmt::format("Delta_p* = {:.17g}, g* = {:.17g}, |N+| = {:.3e}, |c+|^2/|c-|^2 = {:.3e}",
                                   p.delta_p_star, p.g_star, num, ratio)};
    });

    criterion(2, "anti-Stokes level at the null", 1.0, [&] {
        const CancellationPoint p = find_stokes_null(tmpl);
        ReducedContext at = tmpl;
        at.probe_detuning = p.delta_p_star;
        at.coupling = p.g_star;
        const double level = std::norm(sideband_response(at).c_minus);
        return Verdict{std::abs(level - 0.25) <= 0.01, fmt::format("|c-|^2 = {:.12f}", level)};
    });

    criterion(3, "reference point audit", 5.0, [&] {
        const ReferenceOperatingPoint ref;
        const SidebandResponse r = sideband_response(preset_context(ref.coupling, ref.probe_detuning));
        RunConfig c = default_config();
        c.output_dir = scratch("null");
        std::ostringstream out, err;
        const RunOutcome o = run(c, Command::null, out, err);
        const std::string note = slurp(c.output_dir / "discrepancy.txt");
        const bool note_ok = o.exit_code == 0 && note.find("exact root") != std::string::npos &&
                             note.find("reference point") != std::string::npos;
        return Verdict{std::norm(r.c_plus) < 1e-2 && note_ok,
                       fmt::format("|c+|^2 = {:.6e} at ({}, {}); discrepancy note {}", std::norm(r.c_plus),
                                   ref.probe_detuning, ref.coupling, note_ok ? "written" : "missing")};
    });

    criterion(4, "anti-Stokes bandwidth in [50, 1000] Hz", 5.0, [&] {
        const PhysicalParams p = membrane_preset();
        const SweepAxis axis{SweepVariable::probe_detuning, 0.9995, 1.0005, 20001};
        const ReferenceOperatingPoint ref;
        const BandwidthReport op = bandwidth(scan_intensity(preset_context(ref.coupling, 0.0), axis),
                                             p.mechanical_frequency);
        const double g_star = find_stokes_null(tmpl).g_star;
        const BandwidthReport at_null =
            bandwidth(scan_intensity(preset_context(g_star, 0.0), axis), p.mechanical_frequency);
        return Verdict{op.fwhm_hz >= 50.0 && op.fwhm_hz <= 1000.0,
                       fmt::format("FWHM = {:.6f} Hz at g = {} (at g* = {:.6f}: {:.6f} Hz)", op.fwhm_hz,
                                   ref.coupling, g_star, at_null.fwhm_hz)};
    });

    criterion(5, "EIT distinctness", 1.0, [&] {
        const SweepTable t =
            eit_comparison(preset_context(0.0, 1.0), {SweepVariable::coupling, 0.002, 0.01, 8001});
        double worst = 1e300;
        for (const SweepRow &r : t.rows)
            worst = std::min(worst, std::abs(r.c_plus.imag()));
        return Verdict{worst > 0.1, fmt::format("min |Im c+| over g in [0.002, 0.01] = {:.6f}", worst)};
    });

    criterion(6, "linear solve vs closed form", 5.0, [&] {
        std::mt19937_64 rng(20261018);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_plus = 0.0, worst_minus = 0.0, worst_phase = 0.0;
        for (int i = 0; i < 100; ++i)
        {
            ReducedContext c;
            c.kappa = 0.01 + 0.99 * u(rng);
            c.gamma = std::pow(10.0, -7.0 + 5.0 * u(rng));
            c.detuning = 0.5 + u(rng);
            c.coupling = 1e-4 + 0.05 * u(rng);
            c.probe_detuning = 0.9 + 0.2 * u(rng);
            const double phi = 2.0 * std::numbers::pi * u(rng);
            const SidebandResponse a = sideband_response(c);
            const SidebandResponse b = linearized_response(c, phi);
            worst_plus = std::max(worst_plus, std::abs(a.c_plus - b.c_plus) / std::abs(a.c_plus));
            worst_minus = std::max(worst_minus,
                                   std::abs(std::abs(a.c_minus) - std::abs(b.c_minus)) / std::abs(a.c_minus));
            worst_phase = std::max(worst_phase, std::abs(std::arg(b.c_minus / a.c_minus)));
        }
        return Verdict{worst_plus < 1e-12 && worst_minus < 1e-12,
                       fmt::format("max rel |c+| gap {:.3e}, max rel |c-| magnitude gap {:.3e}, "
                                   "max c- phase mismatch {:.3f} rad (reported only)",
                                   worst_plus, worst_minus, worst_phase)};
    });

    criterion(7, "time-domain agreement at 5 detunings", 300.0, [&] {
        const PhysicalParams p = membrane_preset();
        const double wm = p.mechanical_frequency;
        const OperatingNull op = locate_operating_null(p);
        double worst = 0.0;
        double dark = 0.0;
        for (double dp : {0.999, 0.9995, op.point.delta_p_star, 1.0005, 1.001})
        {
            const OracleComparison c = oracle_compare(p, op.ctx.coupling * wm, dp * wm, 1e-3);
            worst = std::max({worst, c.rel_error_plus, c.rel_error_minus});
            if (dp == op.point.delta_p_star)
                dark = std::abs(c.measured_plus) / std::abs(c.measured_minus);
        }
        return Verdict{worst <= 5e-3, fmt::format("max relative error {:.3e} at g = {:.10f}; |a+|/|a-| at the "
                                                  "null = {:.3e}",
                                                  worst, op.ctx.coupling, dark)};
    });

    criterion(8, "exact extinction without coupling", 10.0, [&] {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0.5, 1.5);
        bool exact = true;
        for (int i = 0; i < 1000; ++i)
        {
            ReducedContext c = preset_context(0.0, u(rng));
            c.detuning *= u(rng);
            c.kappa *= u(rng);
            exact = exact && sideband_response(c).c_minus == cplx(0.0, 0.0);
        }
        PhysicalParams p = membrane_preset();
        p.mechanical_coupling = false;
        const OracleComparison c = oracle_compare(p, 0.0, 0.9995 * p.mechanical_frequency, 1e-3);
        const double leak = std::abs(c.demod.a_minus) / std::abs(c.demod.a_plus);
        return Verdict{exact && leak < 1e-10,
                       fmt::format("c- == 0 for g = 0: {}; time-domain |a-|/|a+| = {:.3e}",
                                   exact ? "yes" : "no", leak)};
    });

    criterion(9, "deterministic sweeps", 30.0, [&] {
        RunConfig c = default_config();
        std::ostringstream out, err;
        c.threads = 1;
        c.output_dir = scratch("sweep_1");
        run(c, Command::sweep, out, err);
        const fs::path first = c.output_dir;
        c.threads = 4;
        c.output_dir = scratch("sweep_4");
        run(c, Command::sweep, out, err);
        const fs::path second = c.output_dir;
        c.output_dir = scratch("sweep_4b");
        run(c, Command::sweep, out, err);
        bool same = true;
        int files = 0;
        for (const auto &entry : fs::directory_iterator(first))
        {
            if (entry.path().extension() != ".csv")
                continue;
            ++files;
            const std::string a = slurp(entry.path());
            same = same && !a.empty() && a == slurp(second / entry.path().filename()) &&
                   a == slurp(c.output_dir / entry.path().filename());
        }
        return Verdict{same && files > 0,
                       fmt::format("{} CSV files byte-identical across 3 runs (1 and 4 threads): {}", files,
                                   same ? "yes" : "no")};
    });

    fmt::print("{} of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
