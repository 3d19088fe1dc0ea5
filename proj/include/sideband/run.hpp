#ifndef SIDEBAND_RUN_HPP
#define SIDEBAND_RUN_HPP

#include "sideband/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sideband
{

enum class Command
{
    steady,
    response,
    sweep,
    null,
    eit,
    bandwidth,
    simulate,
    verify,
};

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command command) noexcept;

// Column order of every response-sweep CSV.
inline constexpr std::string_view sweep_csv_header =
    "axis_value,re_c_plus,im_c_plus,abs2_c_plus,re_c_minus,im_c_minus,abs2_c_minus";

void write_sweep_csv(const std::filesystem::path &path, const SweepTable &table);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path &path);

struct RunOutcome
{
    int exit_code = 0;
    std::vector<std::filesystem::path> artifacts;
    std::filesystem::path manifest;
};

// Executes one command, writing CSV artifacts and `<command>_manifest.json`
// into config.output_dir. Numerical failures are reported on `err` and give
// exit code 2; configuration errors propagate as Error.
RunOutcome run(const RunConfig &config, Command command, std::ostream &out, std::ostream &err);

} // namespace sideband

#endif // SIDEBAND_RUN_HPP
