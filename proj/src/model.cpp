#include "sideband/model.hpp"

#include "sideband/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace sideband
{

namespace
{

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr cplx I{0.0, 1.0};

void require(bool ok, const std::string &what)
{
    if (!ok)
        throw Error(Errc::invalid_argument, what);
}

bool finite(double x) { return std::isfinite(x); }

// Real roots of u^3 + a u^2 + b u + c, each polished by Newton's method.
std::vector<double> real_cubic_roots(double a, double b, double c)
{
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double shift = -a / 3.0;

    std::vector<double> roots;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0.0)
    {
        const double s = std::sqrt(disc);
        roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) + shift);
    }
    else if (p == 0.0)
    {
        roots.push_back(shift);
    }
    else
    {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back(r * std::cos(phi - two_pi * k / 3.0) + shift);
    }

    for (double &u : roots)
    {
        for (int it = 0; it < 60; ++it)
        {
            const double f = ((u + a) * u + b) * u + c;
            const double df = (3.0 * u + 2.0 * a) * u + b;
            if (df == 0.0)
                break;
            const double step = f / df;
            u -= step;
            if (std::abs(step) <= 1e-17 * std::max(std::abs(u), 1e-300))
                break;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

} // namespace

// ---------------------------------------------------------------------------
// PhysicalParams

void PhysicalParams::validate() const
{
    require(cavity_length > 0.0 && finite(cavity_length), "cavity_length must be > 0");
    require(pump_wavelength > 0.0 && finite(pump_wavelength), "pump_wavelength must be > 0");
    require(mirror_mass > 0.0 && finite(mirror_mass), "mirror_mass must be > 0");
    require(mechanical_frequency > 0.0 && finite(mechanical_frequency),
            "mechanical_frequency must be > 0");
    require(mechanical_damping >= 0.0 && finite(mechanical_damping),
            "mechanical_damping must be >= 0");
    require(cavity_decay > 0.0 && finite(cavity_decay), "cavity_decay must be > 0");
    require(finite(bare_detuning), "bare_detuning must be finite");
    if (const auto *power = std::get_if<PumpPower>(&pump))
        require(power->watts >= 0.0 && finite(power->watts), "pump_power must be >= 0");
    else
    {
        const double eps = std::get<PumpAmplitude>(pump).per_second;
        require(eps >= 0.0 && finite(eps), "pump_amplitude must be >= 0");
    }
}

double PhysicalParams::cavity_frequency() const
{
    return two_pi * constants::speed_of_light / pump_wavelength;
}

double PhysicalParams::pump_frequency() const { return cavity_frequency() - bare_detuning; }

double PhysicalParams::coupling_constant() const
{
    return mechanical_coupling ? cavity_frequency() / cavity_length : 0.0;
}

double PhysicalParams::zero_point_length() const
{
    return std::sqrt(constants::hbar / (mirror_mass * mechanical_frequency));
}

double PhysicalParams::kappa_effective() const
{
    return conventions.kappa == KappaConvention::single ? cavity_decay : 2.0 * cavity_decay;
}

double PhysicalParams::q0_sign() const
{
    return conventions.q0_sign == Q0Sign::derived ? 1.0 : -1.0;
}

double PhysicalParams::pump_amplitude() const
{
    if (const auto *power = std::get_if<PumpPower>(&pump))
        return std::sqrt(2.0 * cavity_decay * power->watts / (constants::hbar * pump_frequency()));
    return std::get<PumpAmplitude>(pump).per_second;
}

double PhysicalParams::pump_power() const
{
    if (const auto *power = std::get_if<PumpPower>(&pump))
        return power->watts;
    const double eps = std::get<PumpAmplitude>(pump).per_second;
    return eps * eps * constants::hbar * pump_frequency() / (2.0 * cavity_decay);
}

double PhysicalParams::shift_per_photon() const
{
    const double g0 = coupling_constant();
    return constants::hbar * g0 * g0 /
           (mirror_mass * mechanical_frequency * mechanical_frequency);
}

PhysicalParams PhysicalParams::with_pump(PumpSpec spec) const
{
    PhysicalParams out = *this;
    out.pump = spec;
    return out;
}

PhysicalParams membrane_preset()
{
    PhysicalParams p;
    p.cavity_length = 6.7e-2;
    p.pump_wavelength = 1.064e-6;
    p.mirror_mass = 4.0e-11;
    p.mechanical_frequency = two_pi * 134.0e3;
    // 0.76 taken in the same angular units as omega_m.
    p.mechanical_damping = 0.76;
    p.cavity_decay = p.mechanical_frequency / 10.0;
    p.bare_detuning = p.mechanical_frequency;
    p.pump = PumpAmplitude{0.0};
    return p;
}

// ---------------------------------------------------------------------------
// Reduced units

void ReducedContext::validate() const
{
    require(kappa > 0.0 && finite(kappa), "reduced kappa must be > 0");
    require(gamma >= 0.0 && finite(gamma), "reduced gamma must be >= 0");
    require(coupling >= 0.0 && finite(coupling), "reduced coupling must be >= 0");
    require(finite(detuning) && finite(probe_detuning), "reduced detunings must be finite");
    require(omega_m > 0.0 && finite(omega_m), "omega_m must be > 0");
}

ReducedContext reduce(const PhysicalParams &params, double coupling, double probe_detuning)
{
    const double wm = params.mechanical_frequency;
    require(wm > 0.0, "omega_m must be > 0");
    ReducedContext ctx;
    ctx.kappa = params.cavity_decay / wm;
    ctx.gamma = params.mechanical_damping / wm;
    ctx.detuning = params.bare_detuning / wm;
    ctx.coupling = coupling / wm;
    ctx.probe_detuning = probe_detuning / wm;
    ctx.omega_m = wm;
    return ctx;
}

ReducedContext reduce(const PhysicalParams &params, const SteadyState &steady, double probe_detuning)
{
    ReducedContext ctx = reduce(params, effective_coupling(params, steady), probe_detuning);
    ctx.detuning = steady.effective_detuning / params.mechanical_frequency;
    return ctx;
}

RestoredRates restore(const ReducedContext &ctx)
{
    const double wm = ctx.omega_m;
    return {ctx.kappa * wm, ctx.gamma * wm, ctx.detuning * wm, ctx.coupling * wm,
            ctx.probe_detuning * wm};
}

// ---------------------------------------------------------------------------
// Steady state

std::vector<double> bistability_roots(const PhysicalParams &params)
{
    params.validate();
    const double eps = params.pump_amplitude();
    const double kc = params.kappa_effective();
    const double dc = params.bare_detuning;
    const double shift = params.shift_per_photon();

    if (eps == 0.0)
        return {0.0};
    if (shift == 0.0)
        return {eps * eps / (kc * kc + dc * dc)};

    // u = s K n / omega_m is the detuning shift in mechanical units:
    // u (kc^2 + (dc - u)^2) = s K eps^2 / omega_m^3, with s the q0 sign.
    const double wm = params.mechanical_frequency;
    const double s = params.q0_sign();
    const double k = kc / wm;
    const double d = dc / wm;
    const double rhs = s * shift * (eps / wm) * (eps / wm) / wm;
    const auto u_roots = real_cubic_roots(-2.0 * d, k * k + d * d, -rhs);

    std::vector<double> photons;
    for (double u : u_roots)
    {
        const double n = u * wm / (s * shift);
        if (n >= 0.0)
            photons.push_back(n);
    }
    if (photons.empty())
        throw Error(Errc::no_real_root, "bistability cubic has no non-negative root");
    std::sort(photons.begin(), photons.end());
    return photons;
}

SteadyState solve_steady_state(const PhysicalParams &params)
{
    const auto roots = bistability_roots(params);
    const double eps = params.pump_amplitude();
    const double kc = params.kappa_effective();
    const double g0 = params.coupling_constant();
    const double wm = params.mechanical_frequency;
    const double q_per_photon =
        params.q0_sign() * constants::hbar * g0 / (params.mirror_mass * wm * wm);

    SteadyState out;
    out.branch_count = static_cast<int>(roots.size());
    if (roots.size() == 3)
    {
        for (std::size_t i = 0; i + 1 < roots.size(); ++i)
            if (std::abs(roots[i + 1] - roots[i]) <= 1e-9 * std::abs(roots[i + 1]))
                out.degenerate_bistability = true;
    }

    if (eps == 0.0)
    {
        out.effective_detuning = params.bare_detuning;
        return out;
    }

    // Lowest branch; a few fixed-point passes tie c0, q0 and Delta_eff
    // together to rounding.
    double n = roots.front();
    for (int pass = 0; pass < 4; ++pass)
    {
        out.q0 = q_per_photon * n;
        out.effective_detuning = params.bare_detuning - g0 * out.q0;
        out.c0 = eps / cplx(kc, out.effective_detuning);
        n = std::norm(out.c0);
    }
    out.photon_number = std::norm(out.c0);
    return out;
}

FixedPointResidual fixed_point_residual(const PhysicalParams &params, const SteadyState &steady)
{
    const double eps = params.pump_amplitude();
    const double kc = params.kappa_effective();
    const double g0 = params.coupling_constant();
    const double wm = params.mechanical_frequency;
    const double q0 = params.q0_sign() * constants::hbar * g0 * std::norm(steady.c0) /
                      (params.mirror_mass * wm * wm);

    FixedPointResidual r;
    const double amp_scale = eps > 0.0 ? eps : 1.0;
    r.amplitude = std::abs(steady.c0 * cplx(kc, steady.effective_detuning) - eps) / amp_scale;
    const double det_scale =
        std::max({std::abs(params.bare_detuning), std::abs(steady.effective_detuning), 1e-300});
    r.detuning =
        std::abs(steady.effective_detuning - (params.bare_detuning - g0 * q0)) / det_scale;
    return r;
}

double effective_coupling(const PhysicalParams &params, const SteadyState &steady)
{
    return params.coupling_constant() * std::abs(steady.c0) * params.zero_point_length();
}

// ---------------------------------------------------------------------------
// First-order response

ResponseParts response_parts(const ReducedContext &ctx)
{
    const double k = ctx.kappa;
    const double d = ctx.detuning;
    const double dp = ctx.probe_detuning;
    const double g2 = ctx.coupling * ctx.coupling;

    ResponseParts p;
    p.A = cplx(k, -(d + dp));
    p.A_prime = cplx(k, d - dp);
    p.B = cplx(dp * dp - 1.0, ctx.gamma * dp);
    p.numerator_plus = p.A * p.B - I * g2;
    p.numerator_minus = I * g2;
    p.denominator = (p.A * p.A_prime) * p.B + 2.0 * d * g2;
    return p;
}

SidebandResponse sideband_response(const ReducedContext &ctx)
{
    ctx.validate();
    SidebandResponse r;
    r.ctx = ctx;
    r.parts = response_parts(ctx);
    if (std::abs(r.parts.denominator) < 1e-300)
        throw Error(Errc::singular_denominator, "response denominator vanishes");
    r.c_plus = r.parts.numerator_plus / r.parts.denominator;
    r.c_minus = r.parts.numerator_minus / r.parts.denominator;
    r.source = ResponseSource::closed_form;
    return r;
}

SidebandResponse linearized_response(const ReducedContext &ctx, double c0_phase)
{
    ctx.validate();
    const ResponseParts parts = response_parts(ctx);
    const double g2 = ctx.coupling * ctx.coupling;
    const cplx phase = std::polar(1.0, c0_phase);

    // Unknowns (c+, conj(c-), Q) with Q = g0 |c0| q1 in reduced units:
    //   A' c+                 - i e^{i phi} Q  = 1
    //          A conj(c-)     + i e^{-i phi} Q = 0
    //   g^2 e^{-i phi} c+ + g^2 e^{i phi} conj(c-) + B Q = 0
    Eigen::Matrix3cd m;
    m << parts.A_prime, 0.0, -I * phase,
         0.0, parts.A, I * std::conj(phase),
         g2 * std::conj(phase), g2 * phase, parts.B;
    Eigen::Vector3cd rhs(1.0, 0.0, 0.0);

    // Row equilibration so the rank test is scale-free.
    for (int i = 0; i < 3; ++i)
    {
        const double scale = m.row(i).cwiseAbs().maxCoeff();
        if (scale == 0.0)
            throw Error(Errc::singular_system, "zero row in linearized system");
        m.row(i) /= scale;
        rhs(i) /= scale;
    }
    const Eigen::JacobiSVD<Eigen::Matrix3cd> svd(m);
    const auto sv = svd.singularValues();
    if (!(sv(2) > 1e-12 * sv(0)))
        throw Error(Errc::singular_system, "linearized system is singular");

    // Extended precision for the elimination itself; B is tiny next to g^2
    // near resonance and double LU loses a few digits there.
    using cld = std::complex<long double>;
    const Eigen::Matrix<cld, 3, 3> m_ext = m.cast<cld>();
    const Eigen::Matrix<cld, 3, 1> x_ext = m_ext.fullPivLu().solve(rhs.cast<cld>());
    const Eigen::Vector3cd x = x_ext.cast<cplx>();

    SidebandResponse r;
    r.ctx = ctx;
    r.c_plus = x(0);
    r.c_minus = std::conj(x(1));
    r.parts = parts;
    r.parts.numerator_plus = r.c_plus;
    r.parts.numerator_minus = r.c_minus;
    r.parts.denominator = 1.0;
    r.source = ResponseSource::linear_solve;
    return r;
}

OutputFieldComponents output_field(const SidebandResponse &resp, cplx c0, double kappa)
{
    return {2.0 * kappa * c0, 2.0 * kappa * resp.c_plus, 2.0 * kappa * resp.c_minus};
}

// ---------------------------------------------------------------------------
// Pump <-> coupling

PumpSetting pump_power_for_coupling(const PhysicalParams &params, double g_target)
{
    params.validate();
    require(g_target >= 0.0 && finite(g_target), "g_target must be >= 0");

    PumpSetting out;
    out.x_scale = params.zero_point_length();
    if (g_target == 0.0)
        return out;

    const double g0 = params.coupling_constant();
    if (g0 == 0.0)
        throw Error(Errc::not_attainable, "mechanical coupling is disabled");

    const double gain = g0 * out.x_scale; // g per unit |c0|
    const double n = (g_target / gain) * (g_target / gain);
    const double kc = params.kappa_effective();
    const double d_eff = params.bare_detuning - params.q0_sign() * params.shift_per_photon() * n;
    double eps = std::sqrt(n * (kc * kc + d_eff * d_eff));

    // The lower branch of the forward solve must reproduce the target.
    for (int it = 1; it <= 1000; ++it)
    {
        const auto steady = solve_steady_state(params.with_pump(PumpAmplitude{eps}));
        const double achieved = gain * std::abs(steady.c0);
        out.iterations = it;
        out.achieved_g = achieved;
        if (std::abs(achieved - g_target) <= 1e-12 * g_target)
            break;
        if (!(achieved > 0.0))
            throw Error(Errc::not_attainable, "forward solve returned zero field");
        eps *= g_target / achieved;
        if (it == 1000)
            throw Error(Errc::not_attainable, "pump iteration did not converge");
    }
    if (std::abs(out.achieved_g - g_target) > 1e-9 * g_target)
        throw Error(Errc::not_attainable, "achieved coupling misses target");

    out.amplitude = eps;
    out.power = params.with_pump(PumpAmplitude{eps}).pump_power();
    return out;
}

} // namespace sideband
