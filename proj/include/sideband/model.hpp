#ifndef SIDEBAND_MODEL_HPP
#define SIDEBAND_MODEL_HPP

#include <complex>
#include <numbers>
#include <variant>
#include <vector>

namespace sideband
{

using cplx = std::complex<double>;

namespace constants
{
inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double hbar = 1.054571817e-34;       // J s
} // namespace constants

// Steady-state amplitude denominator: kappa (single) or 2 kappa (as printed).
enum class KappaConvention
{
    single,
    as_printed,
};

// Sign of the static mirror displacement: +hbar g0 |c0|^2 / (m wm^2) from the
// Hamiltonian, or the negated form.
enum class Q0Sign
{
    derived,
    as_printed,
};

struct Conventions
{
    KappaConvention kappa = KappaConvention::single;
    Q0Sign q0_sign = Q0Sign::derived;
};

struct PumpPower
{
    double watts = 0.0;
};

struct PumpAmplitude
{
    double per_second = 0.0;
};

using PumpSpec = std::variant<PumpPower, PumpAmplitude>;

// Laboratory description of the membrane-in-the-middle cavity.
// All rates and frequencies are angular (rad/s).
struct PhysicalParams
{
    double cavity_length = 0.0;        // m
    double pump_wavelength = 0.0;      // m
    double mirror_mass = 0.0;          // kg
    double mechanical_frequency = 0.0; // rad/s
    double mechanical_damping = 0.0;   // rad/s
    double cavity_decay = 0.0;         // rad/s
    double bare_detuning = 0.0;        // rad/s, omega_c - omega_L
    PumpSpec pump = PumpAmplitude{};
    // false forces g0 = 0 (mirror decoupled from the field).
    bool mechanical_coupling = true;
    Conventions conventions{};

    // Throws Error(invalid_argument) naming the first violated invariant.
    void validate() const;

    double cavity_frequency() const;  // 2 pi c / lambda
    double pump_frequency() const;    // omega_c - Delta_c
    double coupling_constant() const; // g0 = omega_c / L, rad/(s m)
    double zero_point_length() const; // sqrt(hbar / (m omega_m)), m
    double kappa_effective() const;   // decay used in the steady state and dynamics
    double q0_sign() const;           // +1 derived, -1 as printed
    double pump_amplitude() const;    // eps_L, 1/s
    double pump_power() const;        // P_L, W
    // hbar g0^2 / (m omega_m^2): detuning shift per intracavity photon.
    double shift_per_photon() const;

    PhysicalParams with_pump(PumpSpec spec) const;
};

// Parameters of the experiment the figures are built on. The pump is left at
// zero; choose it with pump_power_for_coupling.
PhysicalParams membrane_preset();

// Operating point reported alongside the preset (reduced units).
struct ReferenceOperatingPoint
{
    double probe_detuning = 0.999995486667198;
    double coupling = 0.0043;
};

// Dimensionless model inputs; every rate is divided by omega_m.
struct ReducedContext
{
    double kappa = 0.0;
    double gamma = 0.0;
    double detuning = 0.0;
    double coupling = 0.0;
    double probe_detuning = 0.0;
    double omega_m = 1.0; // rad/s, kept for unit restoration

    void validate() const;
};

struct RestoredRates
{
    double kappa = 0.0;
    double gamma = 0.0;
    double detuning = 0.0;
    double coupling = 0.0;
    double probe_detuning = 0.0;
};

// Uses the bare detuning Delta_c as the effective detuning.
ReducedContext reduce(const PhysicalParams &params, double coupling, double probe_detuning);
RestoredRates restore(const ReducedContext &ctx);

struct SteadyState
{
    cplx c0{};
    double q0 = 0.0;                  // m
    double effective_detuning = 0.0;  // rad/s
    double photon_number = 0.0;       // |c0|^2
    int branch_count = 0;             // real roots of the bistability cubic
    bool degenerate_bistability = false;
};

// All real photon-number roots of the bistability cubic, ascending.
std::vector<double> bistability_roots(const PhysicalParams &params);

// Self-consistent intracavity field and mirror offset on the lowest branch.
SteadyState solve_steady_state(const PhysicalParams &params);

struct FixedPointResidual
{
    double amplitude = 0.0; // |c0 (kappa + i Delta_eff) - eps_L| / eps_L
    double detuning = 0.0;  // |Delta_eff - (Delta_c - g0 q0)| / |Delta_c|
};

FixedPointResidual fixed_point_residual(const PhysicalParams &params, const SteadyState &steady);

// g = g0 |c0| sqrt(hbar / (m omega_m)), rad/s.
double effective_coupling(const PhysicalParams &params, const SteadyState &steady);

// Context at the realised steady state: Delta_eff and g taken from `steady`.
ReducedContext reduce(const PhysicalParams &params, const SteadyState &steady, double probe_detuning);

struct ResponseParts
{
    cplx A{};       // kappa - i (Delta + Delta_p)
    cplx A_prime{}; // kappa + i (Delta - Delta_p)
    cplx B{};       // Delta_p^2 - 1 + i gamma Delta_p
    cplx numerator_plus{};
    cplx numerator_minus{};
    cplx denominator{};
};

ResponseParts response_parts(const ReducedContext &ctx);

enum class ResponseSource
{
    closed_form,
    // c_plus/c_minus come from a linear solve; numerators hold the amplitudes
    // and the denominator is 1.
    linear_solve,
};

struct SidebandResponse
{
    cplx c_plus{};
    cplx c_minus{};
    ReducedContext ctx{};
    ResponseParts parts{};
    ResponseSource source = ResponseSource::closed_form;
};

// First-order amplitudes from the closed-form expressions.
SidebandResponse sideband_response(const ReducedContext &ctx);

// First-order amplitudes from the 3x3 linear system for (c+, c-*, q1) obtained
// by linearising the rotating-frame equations of motion around c0.
SidebandResponse linearized_response(const ReducedContext &ctx, double c0_phase);

struct OutputFieldComponents
{
    cplx out0{};
    cplx out_plus{};
    cplx out_minus{};
};

// eps_out = 2 kappa <c>, component by component.
OutputFieldComponents output_field(const SidebandResponse &resp, cplx c0, double kappa);

struct PumpSetting
{
    double power = 0.0;         // W
    double amplitude = 0.0;     // 1/s
    double achieved_g = 0.0;    // rad/s
    double x_scale = 0.0;       // m
    int iterations = 0;
};

// Pump power that realises an effective coupling g_target (rad/s) at fixed
// bare detuning.
PumpSetting pump_power_for_coupling(const PhysicalParams &params, double g_target);

} // namespace sideband

#endif // SIDEBAND_MODEL_HPP
