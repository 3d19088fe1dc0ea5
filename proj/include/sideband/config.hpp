#ifndef SIDEBAND_CONFIG_HPP
#define SIDEBAND_CONFIG_HPP

#include "sideband/model.hpp"
#include "sideband/nullfinder.hpp"
#include "sideband/timedomain.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sideband
{

// How the pump is specified; the coupling form is resolved through
// pump_power_for_coupling.
struct PumpChoice
{
    enum class Kind
    {
        power,     // W
        amplitude, // 1/s
        coupling,  // effective coupling in units of omega_m
    };
    Kind kind = Kind::coupling;
    double value = 0.0043;
};

// A reduced-unit value or the keyword `stokes_null` (self-found null).
struct PointChoice
{
    bool at_null = true;
    double value = 0.0;
};

struct SweepSpec
{
    SweepAxis axis{};
    double fixed = 0.0; // value of the other variable (coupling or probe detuning)
};

struct SimulateSettings
{
    PointChoice coupling{};
    PointChoice probe_detuning{};
    double probe_ratio = 1e-3;
    OracleOptions oracle{};
    int trace_stride = 1;
};

struct VerifySettings
{
    PointChoice coupling{};
    std::vector<PointChoice> probe_detunings{{false, 0.999}, {false, 0.9995}, {true, 0.0},
                                             {false, 1.0005}, {false, 1.001}};
    double probe_ratio = 1e-3;
    double tolerance = 5e-3;
    double dark_ratio = 1e-3; // |a+| / |a-| bound at the null
    OracleOptions oracle{};
};

struct RunConfig
{
    std::optional<std::string> preset;
    PhysicalParams params{}; // pump not yet applied
    PumpChoice pump{};
    std::filesystem::path output_dir = "out";
    int threads = 1;

    double coupling = 0.0043;                    // response, reduced
    double probe_detuning = 0.999995486667198;   // response, reduced
    std::vector<SweepSpec> sweeps;
    NullOptions null_options{};
    ReferenceOperatingPoint reference{};
    SweepAxis eit_axis{SweepVariable::coupling, 0.0, 0.01, 1001};
    SweepSpec bandwidth{{SweepVariable::probe_detuning, 0.9995, 1.0005, 20001}, 0.0043};
    SimulateSettings simulate{};
    VerifySettings verify{};
};

RunConfig default_config();

// Parses YAML text. Errors: parse_error (with line/column), validation_error
// naming the key, unit_missing for untagged frequencies.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::filesystem::path &path);

// Normalised YAML with every default filled in; parse_config(echo) == config.
std::string echo_config(const RunConfig &config);

// Physical parameters with the configured pump applied.
PhysicalParams resolve_params(const RunConfig &config);

KappaConvention parse_kappa_convention(const std::string &text);
Q0Sign parse_q0_sign(const std::string &text);

} // namespace sideband

#endif // SIDEBAND_CONFIG_HPP
