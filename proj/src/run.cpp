#include "sideband/run.hpp"

#include "sideband/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include "json.hpp"
#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#ifndef SIDEBAND_VERSION
#define SIDEBAND_VERSION "dev"
#endif

namespace sideband
{

namespace
{

namespace fs = std::filesystem;

std::string num(double v) { return fmt::format("{:.17g}", v); }

class CsvFile
{
public:
    explicit CsvFile(const fs::path &path) : out_(path, std::ios::binary)
    {
        if (!out_)
            throw Error(Errc::invalid_argument, "cannot write " + path.string());
    }

    void line(std::string_view text) { out_ << text << '\n'; }

private:
    std::ofstream out_;
};

struct Context
{
    const RunConfig &cfg;
    std::ostream &out;
    std::vector<fs::path> artifacts;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    bool gates_failed = false;

    Context(const RunConfig &c, std::ostream &o) : cfg(c), out(o) {}

    fs::path artifact(const std::string &name)
    {
        fs::path p = cfg.output_dir / name;
        artifacts.push_back(p);
        return p;
    }
};

ReducedContext analytic_context(const RunConfig &cfg, double coupling, double probe_detuning)
{
    const double wm = cfg.params.mechanical_frequency;
    return reduce(cfg.params, coupling * wm, probe_detuning * wm);
}

void write_response_rows(const fs::path &path, const std::vector<SidebandResponse> &rows, cplx c0)
{
    CsvFile csv(path);
    csv.line("source,probe_detuning,coupling,re_c_plus,im_c_plus,abs2_c_plus,re_c_minus,im_c_minus,"
             "abs2_c_minus,re_out_plus,im_out_plus,re_out_minus,im_out_minus");
    for (const SidebandResponse &r : rows)
    {
        const OutputFieldComponents o = output_field(r, c0, r.ctx.kappa);
        csv.line(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}",
                             r.source == ResponseSource::closed_form ? "closed_form" : "linear_solve",
                             num(r.ctx.probe_detuning), num(r.ctx.coupling), num(r.c_plus.real()),
                             num(r.c_plus.imag()), num(std::norm(r.c_plus)), num(r.c_minus.real()),
                             num(r.c_minus.imag()), num(std::norm(r.c_minus)), num(o.out_plus.real()),
                             num(o.out_plus.imag()), num(o.out_minus.real()), num(o.out_minus.imag())));
    }
}

void cmd_steady(Context &ctx)
{
    const PhysicalParams params = resolve_params(ctx.cfg);
    const SteadyState s = solve_steady_state(params);
    const double wm = params.mechanical_frequency;
    const double g = effective_coupling(params, s);
    const FixedPointResidual res = fixed_point_residual(params, s);

    fmt::print(ctx.out, "pump power         {} W\n", num(params.pump_power()));
    fmt::print(ctx.out, "pump amplitude     {} 1/s\n", num(params.pump_amplitude()));
    fmt::print(ctx.out, "c0                 {} {:+.17g}i\n", num(s.c0.real()), s.c0.imag());
    fmt::print(ctx.out, "photon number      {}\n", num(s.photon_number));
    fmt::print(ctx.out, "q0                 {} m\n", num(s.q0));
    fmt::print(ctx.out, "effective detuning {} omega_m\n", num(s.effective_detuning / wm));
    fmt::print(ctx.out, "effective coupling {} omega_m\n", num(g / wm));
    fmt::print(ctx.out, "branch count       {}{}\n", s.branch_count,
               s.degenerate_bistability ? " (degenerate)" : "");
    fmt::print(ctx.out, "fixed-point residual amplitude {:.3e} detuning {:.3e}\n", res.amplitude,
               res.detuning);

    CsvFile csv(ctx.artifact("steady.csv"));
    csv.line("pump_power_w,pump_amplitude_per_s,re_c0,im_c0,photon_number,q0_m,"
             "effective_detuning_rad_per_s,effective_detuning_reduced,coupling_reduced,branch_count,"
             "degenerate_bistability");
    csv.line(fmt::format("{},{},{},{},{},{},{},{},{},{},{}", num(params.pump_power()),
                         num(params.pump_amplitude()), num(s.c0.real()), num(s.c0.imag()),
                         num(s.photon_number), num(s.q0), num(s.effective_detuning),
                         num(s.effective_detuning / wm), num(g / wm), s.branch_count,
                         s.degenerate_bistability ? 1 : 0));
}

void cmd_response(Context &ctx)
{
    const ReducedContext rc = analytic_context(ctx.cfg, ctx.cfg.coupling, ctx.cfg.probe_detuning);
    const SteadyState s = solve_steady_state(resolve_params(ctx.cfg));
    const double phase = std::abs(s.c0) > 0.0 ? std::arg(s.c0) : 0.0;
    const SidebandResponse closed = sideband_response(rc);
    const SidebandResponse lin = linearized_response(rc, phase);

    fmt::print(ctx.out, "context (omega_m units): kappa {} gamma {} Delta {} g {} Delta_p {}\n",
               num(rc.kappa), num(rc.gamma), num(rc.detuning), num(rc.coupling),
               num(rc.probe_detuning));
    for (const SidebandResponse *r : {&closed, &lin})
        fmt::print(ctx.out, "{:<12} c+ = {} {:+.17g}i  |c+|^2 = {}   c- = {} {:+.17g}i  |c-|^2 = {}\n",
                   r == &closed ? "closed form" : "linearized", num(r->c_plus.real()),
                   r->c_plus.imag(), num(std::norm(r->c_plus)), num(r->c_minus.real()),
                   r->c_minus.imag(), num(std::norm(r->c_minus)));
    const double phase_gap = std::arg(lin.c_minus / closed.c_minus);
    if (std::norm(closed.c_minus) > 0.0)
        fmt::print(ctx.out, "c- phase difference (linearized - closed form): {} rad (c0 phase {} rad)\n",
                   num(phase_gap), num(phase));

    write_response_rows(ctx.artifact("response.csv"), {closed, lin}, s.c0);
}

void cmd_sweep(Context &ctx)
{
    int index = 0;
    for (const SweepSpec &spec : ctx.cfg.sweeps)
    {
        const bool g_axis = spec.axis.variable == SweepVariable::coupling;
        const ReducedContext rc = analytic_context(ctx.cfg, g_axis ? 0.0 : spec.fixed,
                                                   g_axis ? spec.fixed : 0.0);
        const SweepTable table = scan_intensity(rc, spec.axis, ctx.cfg.threads);
        const std::string name = fmt::format("sweep_{}_{}.csv", index++, to_string(spec.axis.variable));
        write_sweep_csv(ctx.artifact(name), table);

        std::size_t peak = 0;
        for (std::size_t i = 1; i < table.rows.size(); ++i)
            if (std::norm(table.rows[i].c_minus) > std::norm(table.rows[peak].c_minus))
                peak = i;
        fmt::print(ctx.out, "{}: {} rows over {} in [{}, {}] (omega_m units); max |c-|^2 = {} at {}\n",
                   name, table.rows.size(), to_string(spec.axis.variable), num(spec.axis.start),
                   num(spec.axis.stop), num(std::norm(table.rows[peak].c_minus)),
                   num(table.rows[peak].axis_value));
    }
}

void cmd_null(Context &ctx)
{
    const RunConfig &cfg = ctx.cfg;
    const ReducedContext tmpl = analytic_context(cfg, 0.0, 0.0);
    const CancellationPoint p = find_stokes_null(tmpl, cfg.null_options);

    ReducedContext at_null = tmpl;
    at_null.probe_detuning = p.delta_p_star;
    at_null.coupling = p.g_star;
    const SidebandResponse r = sideband_response(at_null);
    const double ratio = std::norm(r.c_plus) / std::norm(r.c_minus);
    const int census = count_stokes_nulls(tmpl, 1e-9, 2.0, 200001);

    fmt::print(ctx.out, "Stokes null (omega_m units)\n");
    fmt::print(ctx.out, "  Delta_p* = {}\n  g*       = {}\n", num(p.delta_p_star), num(p.g_star));
    fmt::print(ctx.out, "  residual |A B - i g^2| = {:.3e}\n", p.residual);
    fmt::print(ctx.out, "  method {} ({} iterations)\n", to_string(p.method), p.iterations);
    fmt::print(ctx.out, "  |c+|^2 = {:.3e}  |c-|^2 = {}  ratio = {:.3e}\n", std::norm(r.c_plus),
               num(std::norm(r.c_minus)), ratio);
    fmt::print(ctx.out, "  nulls with Delta_p in (0, 2): {}\n", census);

    CsvFile csv(ctx.artifact("null.csv"));
    csv.line("delta_p_star,g_star,residual,method,iterations,abs2_c_plus,abs2_c_minus,null_count");
    csv.line(fmt::format("{},{},{},{},{},{},{},{}", num(p.delta_p_star), num(p.g_star), num(p.residual),
                         to_string(p.method), p.iterations, num(std::norm(r.c_plus)),
                         num(std::norm(r.c_minus)), census));

    // Audit of the reference operating point against the exact root.
    ReducedContext ref = tmpl;
    ref.probe_detuning = cfg.reference.probe_detuning;
    ref.coupling = cfg.reference.coupling;
    const SidebandResponse rr = sideband_response(ref);
    const double lorentz = std::sqrt(tmpl.kappa / (tmpl.kappa + tmpl.gamma));

    std::ofstream note(ctx.artifact("discrepancy.txt"), std::ios::binary);
    note << "Reference operating point vs exact root of the probe-frequency numerator\n";
    note << "context: kappa = " << num(tmpl.kappa) << ", gamma = " << num(tmpl.gamma)
         << ", Delta = " << num(tmpl.detuning) << " (omega_m units)\n\n";
    note << "reference point   Delta_p = " << num(ref.probe_detuning) << ", g = " << num(ref.coupling)
         << "\n";
    note << "  |A B - i g^2|   = " << num(std::abs(rr.parts.numerator_plus)) << "\n";
    note << "  |c+|^2          = " << num(std::norm(rr.c_plus)) << "\n";
    note << "  |c-|^2          = " << num(std::norm(rr.c_minus)) << "\n";
    note << "exact root        Delta_p = " << num(p.delta_p_star) << ", g = " << num(p.g_star) << "\n";
    note << "  |A B - i g^2|   = " << num(p.residual) << "\n";
    note << "  |c+|^2          = " << num(std::norm(r.c_plus)) << "\n";
    note << "  |c-|^2          = " << num(std::norm(r.c_minus)) << "\n";
    note << "offset            dDelta_p = " << num(ref.probe_detuning - p.delta_p_star)
         << ", dg = " << num(ref.coupling - p.g_star) << "\n";
    note << "sqrt(kappa/(kappa+gamma)) = " << num(lorentz)
         << " (reference Delta_p - this = " << num(ref.probe_detuning - lorentz) << ")\n";
    note << "Re(A B) = (kappa+gamma) Delta_p^2 + gamma Delta Delta_p - kappa is quadratic in Delta_p;"
            " positive roots in (0, 2): "
         << census << "\n";
    note << "verdict: reference point "
         << (std::abs(rr.parts.numerator_plus) < cfg.null_options.tolerance ? "is" : "is not")
         << " a root of the numerator at tolerance " << num(cfg.null_options.tolerance) << "\n";

    fmt::print(ctx.out, "reference point ({}, {}): |c+|^2 = {:.6e}, |c-|^2 = {:.6f}\n",
               num(ref.probe_detuning), num(ref.coupling), std::norm(rr.c_plus), std::norm(rr.c_minus));
    ctx.extra["null"] = {{"delta_p_star", p.delta_p_star}, {"g_star", p.g_star}, {"residual", p.residual},
                         {"ratio", ratio}};
}

void cmd_eit(Context &ctx)
{
    const ReducedContext rc = analytic_context(ctx.cfg, 0.0, 1.0);
    const SweepTable table = eit_comparison(rc, ctx.cfg.eit_axis, ctx.cfg.threads);
    write_sweep_csv(ctx.artifact("eit.csv"), table);

    double min_imag = std::numeric_limits<double>::infinity();
    for (const SweepRow &row : table.rows)
        if (row.axis_value >= 0.002 && row.axis_value <= 0.01)
            min_imag = std::min(min_imag, std::abs(row.c_plus.imag()));
    fmt::print(ctx.out, "EIT condition Delta_p = 1 omega_m: {} rows over g in [{}, {}]\n",
               table.rows.size(), num(ctx.cfg.eit_axis.start), num(ctx.cfg.eit_axis.stop));
    if (std::isfinite(min_imag))
        fmt::print(ctx.out, "min |Im c+| for g in [0.002, 0.01]: {}\n", num(min_imag));
}

void cmd_bandwidth(Context &ctx)
{
    const ReducedContext rc = analytic_context(ctx.cfg, ctx.cfg.bandwidth.fixed, 0.0);
    const SweepTable table = scan_intensity(rc, ctx.cfg.bandwidth.axis, ctx.cfg.threads);
    write_sweep_csv(ctx.artifact("bandwidth_scan.csv"), table);
    const BandwidthReport b = bandwidth(table, ctx.cfg.params.mechanical_frequency);

    fmt::print(ctx.out, "anti-Stokes peak at g = {} omega_m\n", num(ctx.cfg.bandwidth.fixed));
    fmt::print(ctx.out, "  center   {} omega_m\n  peak     {}\n  FWHM     {} Hz\n", num(b.peak_center),
               num(b.peak_value), num(b.fwhm_hz));

    CsvFile csv(ctx.artifact("bandwidth.csv"));
    csv.line("peak_center,fwhm_hz,peak_value,half_max_low,half_max_high");
    csv.line(fmt::format("{},{},{},{},{}", num(b.peak_center), num(b.fwhm_hz), num(b.peak_value),
                         num(b.half_max_low), num(b.half_max_high)));
}

struct OperatingChoice
{
    double coupling = 0.0;       // rad/s
    double probe_detuning = 0.0; // rad/s
};

OperatingChoice operating_point(const RunConfig &cfg, const PointChoice &coupling,
                                const PointChoice &probe)
{
    const double wm = cfg.params.mechanical_frequency;
    OperatingChoice out;
    if (coupling.at_null)
    {
        const OperatingNull op = locate_operating_null(cfg.params, cfg.null_options);
        out.coupling = op.ctx.coupling * wm;
        out.probe_detuning = op.point.delta_p_star * wm;
    }
    else
    {
        out.coupling = coupling.value * wm;
        const PumpSetting pump = pump_power_for_coupling(cfg.params, out.coupling);
        const PhysicalParams pumped = cfg.params.with_pump(PumpAmplitude{pump.amplitude});
        const ReducedContext rc = reduce(pumped, solve_steady_state(pumped), 0.0);
        if (probe.at_null)
            out.probe_detuning = closed_form_stokes_null(rc).delta_p_star * wm;
    }
    if (!probe.at_null)
        out.probe_detuning = probe.value * wm;
    return out;
}

void cmd_simulate(Context &ctx)
{
    const RunConfig &cfg = ctx.cfg;
    const SimulateSettings &s = cfg.simulate;
    const double wm = cfg.params.mechanical_frequency;
    const OperatingChoice op = operating_point(cfg, s.coupling, s.probe_detuning);

    TimeTrace trace;
    const OracleComparison cmp =
        oracle_compare(cfg.params, op.coupling, op.probe_detuning, s.probe_ratio, s.oracle, &trace);

    fmt::print(ctx.out, "operating point g = {} omega_m, Delta_p = {} omega_m\n", num(op.coupling / wm),
               num(op.probe_detuning / wm));
    fmt::print(ctx.out, "pump {} W, eps_L {} 1/s, eps_p {} 1/s\n", num(cmp.pump.power),
               num(cmp.pump.amplitude), num(cmp.probe.real()));
    fmt::print(ctx.out, "settle {} s, dt {} s, window {} samples, step-halving deviation {:.3e}\n",
               num(cmp.settle_time), num(cmp.dt), cmp.demod.samples, cmp.step_halving_deviation);
    fmt::print(ctx.out, "a+/eps_p  = {} {:+.17g}i (omega_m units)\n", num(cmp.measured_plus.real()),
               cmp.measured_plus.imag());
    fmt::print(ctx.out, "a-/eps_p* = {} {:+.17g}i (omega_m units)\n", num(cmp.measured_minus.real()),
               cmp.measured_minus.imag());
    fmt::print(ctx.out, "fit residual rms {:.3e}\n", cmp.demod.fit_residual_rms);

    {
        CsvFile csv(ctx.artifact("trace.csv"));
        csv.line("t,re_c,im_c,q,p");
        for (std::size_t i = 0; i < trace.t.size(); i += static_cast<std::size_t>(s.trace_stride))
            csv.line(fmt::format("{},{},{},{},{}", num(trace.t[i]), num(trace.c[i].real()),
                                 num(trace.c[i].imag()), num(trace.q[i]), num(trace.p[i])));
    }
    CsvFile csv(ctx.artifact("demod.csv"));
    csv.line("re_dc,im_dc,re_a_plus,im_a_plus,re_a_minus,im_a_minus,fit_residual_rms,samples");
    csv.line(fmt::format("{},{},{},{},{},{},{},{}", num(cmp.demod.dc.real()), num(cmp.demod.dc.imag()),
                         num(cmp.demod.a_plus.real()), num(cmp.demod.a_plus.imag()),
                         num(cmp.demod.a_minus.real()), num(cmp.demod.a_minus.imag()),
                         num(cmp.demod.fit_residual_rms), cmp.demod.samples));
}

void cmd_verify(Context &ctx)
{
    const RunConfig &cfg = ctx.cfg;
    const VerifySettings &v = cfg.verify;
    const double wm = cfg.params.mechanical_frequency;

    CsvFile csv(ctx.artifact("verify.csv"));
    csv.line("probe_detuning,re_measured_plus,im_measured_plus,re_linearized_plus,im_linearized_plus,"
             "re_measured_minus,im_measured_minus,re_linearized_minus,im_linearized_minus,"
             "abs_printed_minus,rel_error_plus,rel_error_minus,magnitude_error_minus_printed,"
             "step_halving_deviation,pass");

    bool all_ok = true;
    for (const PointChoice &probe : v.probe_detunings)
    {
        const OperatingChoice op = operating_point(cfg, v.coupling, probe);
        const OracleComparison c =
            oracle_compare(cfg.params, op.coupling, op.probe_detuning, v.probe_ratio, v.oracle);
        bool ok = c.rel_error_plus <= v.tolerance && c.rel_error_minus <= v.tolerance;
        std::string note;
        if (probe.at_null && op.coupling > 0.0)
        {
            const bool dark = std::abs(c.measured_plus) < v.dark_ratio * std::abs(c.measured_minus);
            ok = ok && dark;
            note = fmt::format("  |a+|/|a-| = {:.3e}", std::abs(c.measured_plus) / std::abs(c.measured_minus));
        }
        if (op.coupling == 0.0)
            note = fmt::format("  Stokes amplitude |a-/eps_p*| = {:.3e}", std::abs(c.measured_minus));
        all_ok = all_ok && ok;

        fmt::print(ctx.out, "{} Delta_p = {:.12f} omega_m  err+ {:.3e}  err- {:.3e}  |c-| printed vs measured {:.3e}{}\n",
                   ok ? "PASS" : "FAIL", op.probe_detuning / wm, c.rel_error_plus, c.rel_error_minus,
                   c.magnitude_error_minus_printed, note);
        csv.line(fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", num(op.probe_detuning / wm),
                             num(c.measured_plus.real()), num(c.measured_plus.imag()),
                             num(c.linearized.c_plus.real()), num(c.linearized.c_plus.imag()),
                             num(c.measured_minus.real()), num(c.measured_minus.imag()),
                             num(c.linearized.c_minus.real()), num(c.linearized.c_minus.imag()),
                             num(std::abs(c.printed.c_minus)), num(c.rel_error_plus),
                             num(c.rel_error_minus), num(c.magnitude_error_minus_printed),
                             num(c.step_halving_deviation), ok ? 1 : 0));
    }
    if (!all_ok)
        ctx.gates_failed = true;
}

} // namespace

std::optional<Command> parse_command(std::string_view name)
{
    for (Command c : {Command::steady, Command::response, Command::sweep, Command::null, Command::eit,
                      Command::bandwidth, Command::simulate, Command::verify})
        if (to_string(c) == name)
            return c;
    return std::nullopt;
}

std::string_view to_string(Command command) noexcept
{
    switch (command)
    {
    case Command::steady: return "steady";
    case Command::response: return "response";
    case Command::sweep: return "sweep";
    case Command::null: return "null";
    case Command::eit: return "eit";
    case Command::bandwidth: return "bandwidth";
    case Command::simulate: return "simulate";
    case Command::verify: return "verify";
    }
    return "unknown";
}

void write_sweep_csv(const fs::path &path, const SweepTable &table)
{
    CsvFile csv(path);
    csv.line(sweep_csv_header);
    for (const SweepRow &r : table.rows)
        csv.line(fmt::format("{},{},{},{},{},{},{}", num(r.axis_value), num(r.c_plus.real()),
                             num(r.c_plus.imag()), num(std::norm(r.c_plus)), num(r.c_minus.real()),
                             num(r.c_minus.imag()), num(std::norm(r.c_minus))));
}

std::string sha256_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::invalid_argument, "cannot read " + path.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    EVP_DigestInit_ex(md.get(), EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf{};
    while (in)
    {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0)
            EVP_DigestUpdate(md.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(md.get(), digest.data(), &len);

    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

RunOutcome run(const RunConfig &config, Command command, std::ostream &out, std::ostream &err)
{
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(config.output_dir);
    Context ctx(config, out);

    RunOutcome outcome;
    try
    {
        switch (command)
        {
        case Command::steady: cmd_steady(ctx); break;
        case Command::response: cmd_response(ctx); break;
        case Command::sweep: cmd_sweep(ctx); break;
        case Command::null: cmd_null(ctx); break;
        case Command::eit: cmd_eit(ctx); break;
        case Command::bandwidth: cmd_bandwidth(ctx); break;
        case Command::simulate: cmd_simulate(ctx); break;
        case Command::verify: cmd_verify(ctx); break;
        }
    }
    catch (const Error &e)
    {
        if (e.is_config_error())
            throw;
        fmt::print(err, "error: {}\n", e.what());
        outcome.exit_code = 2;
    }
    if (ctx.gates_failed)
    {
        fmt::print(err, "error: verification gates failed\n");
        outcome.exit_code = 2;
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::ordered_json m;
    m["tool"] = "sideband";
    m["version"] = SIDEBAND_VERSION;
    m["command"] = std::string(to_string(command));
    m["exit_code"] = outcome.exit_code;
    m["conventions"] = {
        {"kappa_convention",
         config.params.conventions.kappa == KappaConvention::single ? "single" : "as_printed"},
        {"q0_sign", config.params.conventions.q0_sign == Q0Sign::derived ? "derived" : "as_printed"}};

    nlohmann::ordered_json derived;
    derived["omega_m_rad_per_s"] = config.params.mechanical_frequency;
    derived["omega_c_rad_per_s"] = config.params.cavity_frequency();
    derived["g0_rad_per_s_m"] = config.params.coupling_constant();
    derived["x_scale_m"] = config.params.zero_point_length();
    try
    {
        const PhysicalParams p = resolve_params(config);
        derived["eps_L_per_s"] = p.pump_amplitude();
        derived["pump_power_w"] = p.pump_power();
    }
    catch (const Error &)
    {
        derived["eps_L_per_s"] = nullptr;
    }
    m["derived"] = derived;
    if (!ctx.extra.empty())
        m["results"] = ctx.extra;

    m["outputs"] = nlohmann::ordered_json::array();
    for (const fs::path &p : ctx.artifacts)
        if (fs::exists(p))
            m["outputs"].push_back(
                {{"file", p.filename().string()}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
    m["wall_clock_s"] = elapsed;
    m["config_echo"] = echo_config(config);

    outcome.artifacts = ctx.artifacts;
    outcome.manifest = config.output_dir / (std::string(to_string(command)) + "_manifest.json");
    std::ofstream(outcome.manifest, std::ios::binary) << m.dump(2) << '\n';
    return outcome;
}

} // namespace sideband
