#ifndef SIDEBAND_ERRORS_HPP
#define SIDEBAND_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sideband
{

enum class Errc
{
    // model
    no_real_root,
    singular_denominator,
    singular_system,
    not_attainable,
    invalid_argument,
    // nullfinder
    no_physical_root,
    method_disagreement,
    degenerate,
    no_peak,
    flat_spectrum,
    // timedomain
    step_too_large,
    non_finite,
    window_too_short,
    ill_conditioned,
    // configuration
    parse_error,
    validation_error,
    unit_missing,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error
{
public:
    Error(Errc code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

    bool is_config_error() const noexcept
    {
        return code_ == Errc::parse_error || code_ == Errc::validation_error ||
               code_ == Errc::unit_missing;
    }

private:
    Errc code_;
};

} // namespace sideband

#endif // SIDEBAND_ERRORS_HPP
