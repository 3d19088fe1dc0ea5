#include "sideband/errors.hpp"

namespace sideband
{

std::string_view to_string(Errc code) noexcept
{
    switch (code)
    {
    case Errc::no_real_root: return "NoRealRoot";
    case Errc::singular_denominator: return "SingularDenominator";
    case Errc::singular_system: return "SingularSystem";
    case Errc::not_attainable: return "NotAttainable";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::no_physical_root: return "NoPhysicalRoot";
    case Errc::method_disagreement: return "MethodDisagreement";
    case Errc::degenerate: return "Degenerate";
    case Errc::no_peak: return "NoPeak";
    case Errc::flat_spectrum: return "FlatSpectrum";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::non_finite: return "NonFinite";
    case Errc::window_too_short: return "WindowTooShort";
    case Errc::ill_conditioned: return "IllConditioned";
    case Errc::parse_error: return "ParseError";
    case Errc::validation_error: return "ValidationError";
    case Errc::unit_missing: return "UnitMissing";
    }
    return "Unknown";
}

} // namespace sideband
