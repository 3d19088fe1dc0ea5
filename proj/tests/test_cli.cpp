#include "sideband/config.hpp"
#include "sideband/errors.hpp"
#include "sideband/run.hpp"

#include "doctest.h"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace sideband;
namespace fs = std::filesystem;

namespace
{

Errc code_of(const std::string &yaml)
{
    try
    {
        (void)parse_config(yaml);
    }
    catch (const Error &e)
    {
        return e.code();
    }
    FAIL("config was accepted: " << yaml);
    return Errc::invalid_argument;
}

std::string message_of(const std::string &yaml)
{
    try
    {
        (void)parse_config(yaml);
    }
    catch (const Error &e)
    {
        return e.what();
    }
    return {};
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
    const fs::path dir = fs::temp_directory_path() / ("sideband_test_" + name);
    fs::remove_all(dir);
    return dir;
}

const char *explicit_params = R"(
params:
  cavity_length: 6.7e-2
  pump_wavelength: 1.064e-6
  mirror_mass: 4e-11
  mechanical_frequency: {value: 134000, unit: hz}
  mechanical_damping: {value: 0.76, unit: hz}
  cavity_decay: {value: 0.1, unit: omega_m}
  bare_detuning: {value: 1, unit: omega_m}
)";

} // namespace

TEST_CASE("preset values")
{
    const PhysicalParams p = membrane_preset();
    CHECK(p.cavity_length == 6.7e-2);
    CHECK(p.pump_wavelength == 1.064e-6);
    CHECK(p.mirror_mass == 4e-11);
    CHECK(p.mechanical_frequency == doctest::Approx(2 * std::numbers::pi * 134e3).epsilon(1e-15));
    CHECK(p.mechanical_damping == 0.76);
    CHECK(p.cavity_decay == doctest::Approx(0.1 * p.mechanical_frequency).epsilon(1e-15));
    CHECK(p.bare_detuning == doctest::Approx(p.mechanical_frequency).epsilon(1e-15));
    CHECK(p.coupling_constant() == doctest::Approx(2.64e16).epsilon(1e-3));
}

TEST_CASE("unit tags convert frequencies")
{
    const RunConfig c = parse_config(explicit_params);
    const double wm = 2 * std::numbers::pi * 134000.0;
    CHECK(c.params.mechanical_frequency == doctest::Approx(wm).epsilon(1e-15));
    CHECK(c.params.mechanical_damping == doctest::Approx(2 * std::numbers::pi * 0.76).epsilon(1e-15));
    CHECK(c.params.cavity_decay == doctest::Approx(0.1 * wm).epsilon(1e-15));
    CHECK(c.params.bare_detuning == doctest::Approx(wm).epsilon(1e-15));
}

TEST_CASE("preset and params are exclusive")
{
    CHECK(code_of(std::string("preset: membrane\n") + explicit_params) == Errc::validation_error);
}

TEST_CASE("frequencies need a unit")
{
    std::string text = explicit_params;
    text.replace(text.find("{value: 0.76, unit: hz}"), 23, "0.76");
    CHECK(code_of(text) == Errc::unit_missing);
}

TEST_CASE("syntax errors carry a position")
{
    const std::string text = "preset: membrane\npump: {power_w: [1, 2\n";
    CHECK(code_of(text) == Errc::parse_error);
    CHECK(message_of(text).find("line") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their location")
{
    const std::string text = "preset: membrane\nresponse:\n  copuling: 0.004\n";
    CHECK(code_of(text) == Errc::validation_error);
    const std::string msg = message_of(text);
    CHECK(msg.find("copuling") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
}

TEST_CASE("conventions parse from either spelling")
{
    CHECK(parse_kappa_convention("as-printed") == KappaConvention::as_printed);
    CHECK(parse_kappa_convention("as_printed") == KappaConvention::as_printed);
    CHECK(parse_q0_sign("derived") == Q0Sign::derived);
    CHECK_THROWS_AS((void)parse_q0_sign("positive"), Error);
}

TEST_CASE("echoed configuration parses back to itself")
{
    const std::string text = std::string(explicit_params) + R"(
pump: {power_w: 4.5e-9}
conventions: {kappa_convention: as-printed}
output: {directory: somewhere, threads: 3}
sweep:
  - {axis: coupling, start: 0, stop: 0.02, count: 11, probe_detuning: 0.99999}
simulate: {coupling: 0.005, probe_detuning: stokes_null, probe_ratio: 0.0005}
verify: {probe_detunings: [0.999, stokes_null, 1.001]}
)";
    const RunConfig c = parse_config(text);
    const std::string echo = echo_config(c);
    const RunConfig again = parse_config(echo);
    CHECK(echo_config(again) == echo);
    CHECK(again.params.conventions.kappa == KappaConvention::as_printed);
    CHECK(again.threads == 3);
    CHECK(again.sweeps.size() == 1);
    CHECK(again.params.mechanical_damping == c.params.mechanical_damping);
    CHECK(again.simulate.probe_detuning.at_null);
    CHECK(again.verify.probe_detunings.size() == 3);
}

TEST_CASE("default configuration echoes cleanly")
{
    const RunConfig c = default_config();
    CHECK(echo_config(parse_config(echo_config(c))) == echo_config(c));
}

TEST_CASE("sweep output is byte identical across runs and thread counts")
{
    RunConfig c = default_config();
    std::ostringstream out, err;
    c.output_dir = scratch("sweep_a");
    c.threads = 1;
    REQUIRE(run(c, Command::sweep, out, err).exit_code == 0);
    const fs::path first = c.output_dir;
    c.output_dir = scratch("sweep_b");
    c.threads = 4;
    REQUIRE(run(c, Command::sweep, out, err).exit_code == 0);
    for (const char *name : {"sweep_0_coupling.csv", "sweep_1_probe_detuning.csv"})
    {
        const std::string a = slurp(first / name);
        CHECK(!a.empty());
        CHECK(a == slurp(c.output_dir / name));
        CHECK(a.substr(0, sweep_csv_header.size()) == sweep_csv_header);
    }
}

TEST_CASE("manifest checksums reproduce on a re-run")
{
    RunConfig c = default_config();
    c.output_dir = scratch("manifest");
    std::ostringstream out, err;
    const RunOutcome r = run(c, Command::null, out, err);
    REQUIRE(r.exit_code == 0);
    const auto m = nlohmann::json::parse(slurp(r.manifest));
    CHECK(m["command"] == "null");
    REQUIRE(m["outputs"].size() == 2);

    // re-run from the echoed configuration into a fresh directory
    RunConfig again = parse_config(m["config_echo"].get<std::string>());
    again.output_dir = scratch("manifest_again");
    REQUIRE(run(again, Command::null, out, err).exit_code == 0);
    for (const auto &o : m["outputs"])
    {
        const fs::path p = again.output_dir / o["file"].get<std::string>();
        CHECK(sha256_file(p) == o["sha256"].get<std::string>());
    }
}

TEST_CASE("sha256 of a known string")
{
    const fs::path p = fs::temp_directory_path() / "sideband_test_abc.txt";
    std::ofstream(p, std::ios::binary) << "abc";
    CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("numerical failure gives exit code 2")
{
    RunConfig c = default_config();
    c.output_dir = scratch("fail");
    c.bandwidth.axis = {SweepVariable::probe_detuning, 0.99, 0.999, 101}; // peak outside the scan
    std::ostringstream out, err;
    CHECK(run(c, Command::bandwidth, out, err).exit_code == 2);
    CHECK(err.str().find("NoPeak") != std::string::npos);
}

TEST_CASE("commands round trip through their names")
{
    for (Command c : {Command::steady, Command::response, Command::sweep, Command::null, Command::eit,
                      Command::bandwidth, Command::simulate, Command::verify})
        CHECK(parse_command(to_string(c)) == c);
    CHECK_FALSE(parse_command("plot").has_value());
}
