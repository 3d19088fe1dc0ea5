#include "sideband/config.hpp"

#include "sideband/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace sideband
{

namespace
{

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string where(const YAML::Node &node)
{
    const YAML::Mark m = node.Mark();
    if (m.is_null())
        return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

[[noreturn]] void invalid(const std::string &key, const std::string &why, const YAML::Node &node)
{
    throw Error(Errc::validation_error, "'" + key + "' " + why + where(node));
}

void check_keys(const YAML::Node &node, const std::string &section,
                std::initializer_list<const char *> allowed)
{
    if (!node.IsMap())
        invalid(section, "must be a mapping", node);
    for (const auto &kv : node)
    {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return key == a; }))
            invalid(section.empty() ? key : section + "." + key, "is not a recognised key", kv.first);
    }
}

template <class T>
T get(const YAML::Node &node, const std::string &key)
{
    try
    {
        return node.as<T>();
    }
    catch (const YAML::BadConversion &)
    {
        invalid(key, "has the wrong type", node);
    }
}

double get_double(const YAML::Node &parent, const char *key, double fallback, const std::string &section)
{
    const YAML::Node n = parent[key];
    return n ? get<double>(n, section + "." + key) : fallback;
}

int get_int(const YAML::Node &parent, const char *key, int fallback, const std::string &section)
{
    const YAML::Node n = parent[key];
    return n ? get<int>(n, section + "." + key) : fallback;
}

// {value: x, unit: hz | rad_per_s | omega_m}; omega_m needs the mechanical
// frequency already resolved.
double frequency(const YAML::Node &node, const std::string &key, std::optional<double> omega_m)
{
    if (!node.IsMap())
        throw Error(Errc::unit_missing,
                    "'" + key + "' needs {value, unit} with unit hz|rad_per_s|omega_m" + where(node));
    check_keys(node, key, {"value", "unit"});
    if (!node["unit"])
        throw Error(Errc::unit_missing, "'" + key + "' has no unit tag" + where(node));
    if (!node["value"])
        invalid(key + ".value", "is required", node);
    const double value = get<double>(node["value"], key + ".value");
    const auto unit = get<std::string>(node["unit"], key + ".unit");
    if (unit == "hz")
        return two_pi * value;
    if (unit == "rad_per_s")
        return value;
    if (unit == "omega_m")
    {
        if (!omega_m)
            invalid(key + ".unit", "cannot be omega_m", node["unit"]);
        return value * *omega_m;
    }
    invalid(key + ".unit", "must be hz, rad_per_s or omega_m", node["unit"]);
}

PointChoice point(const YAML::Node &node, const std::string &key)
{
    if (node.IsScalar() && node.Scalar() == "stokes_null")
        return {true, 0.0};
    return {false, get<double>(node, key)};
}

SweepVariable sweep_variable(const YAML::Node &node, const std::string &key)
{
    const auto s = get<std::string>(node, key);
    if (s == "probe_detuning")
        return SweepVariable::probe_detuning;
    if (s == "coupling")
        return SweepVariable::coupling;
    invalid(key, "must be probe_detuning or coupling", node);
}

Scheme scheme(const YAML::Node &node, const std::string &key)
{
    const auto s = get<std::string>(node, key);
    if (s == "rk4")
        return Scheme::rk4;
    if (s == "rkf78")
        return Scheme::rkf78;
    invalid(key, "must be rk4 or rkf78", node);
}

void oracle_settings(const YAML::Node &node, const std::string &section, OracleOptions &o)
{
    o.steps_per_period = get_int(node, "steps_per_period", o.steps_per_period, section);
    o.window_periods = get_int(node, "window_periods", o.window_periods, section);
    o.settle_factor = get_double(node, "settle_factor", o.settle_factor, section);
    o.min_settle_periods = get_int(node, "min_settle_periods", o.min_settle_periods, section);
    if (node["scheme"])
        o.scheme = scheme(node["scheme"], section + ".scheme");
    if (o.steps_per_period < 1)
        invalid(section + ".steps_per_period", "must be >= 1", node);
    if (o.window_periods < 20)
        invalid(section + ".window_periods", "must be >= 20", node);
    if (!(o.settle_factor > 0.0))
        invalid(section + ".settle_factor", "must be > 0", node);
    if (o.min_settle_periods < 0)
        invalid(section + ".min_settle_periods", "must be >= 0", node);
}

void emit_point(YAML::Emitter &out, const char *key, const PointChoice &p)
{
    out << YAML::Key << key << YAML::Value;
    if (p.at_null)
        out << "stokes_null";
    else
        out << p.value;
}

void emit_oracle(YAML::Emitter &out, const OracleOptions &o)
{
    out << YAML::Key << "steps_per_period" << YAML::Value << o.steps_per_period;
    out << YAML::Key << "window_periods" << YAML::Value << o.window_periods;
    out << YAML::Key << "settle_factor" << YAML::Value << o.settle_factor;
    out << YAML::Key << "min_settle_periods" << YAML::Value << o.min_settle_periods;
    out << YAML::Key << "scheme" << YAML::Value << (o.scheme == Scheme::rk4 ? "rk4" : "rkf78");
}

void emit_frequency(YAML::Emitter &out, const char *key, double rad_per_s)
{
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "value" << YAML::Value << rad_per_s;
    out << YAML::Key << "unit" << YAML::Value << "rad_per_s";
    out << YAML::EndMap;
}

} // namespace

KappaConvention parse_kappa_convention(const std::string &text)
{
    if (text == "single")
        return KappaConvention::single;
    if (text == "as_printed" || text == "as-printed")
        return KappaConvention::as_printed;
    throw Error(Errc::validation_error, "'kappa_convention' must be single or as-printed");
}

Q0Sign parse_q0_sign(const std::string &text)
{
    if (text == "derived")
        return Q0Sign::derived;
    if (text == "as_printed" || text == "as-printed")
        return Q0Sign::as_printed;
    throw Error(Errc::validation_error, "'q0_sign' must be derived or as-printed");
}

RunConfig default_config()
{
    RunConfig c;
    c.preset = "membrane";
    c.params = membrane_preset();
    const ReferenceOperatingPoint ref;
    c.sweeps = {
        {{SweepVariable::coupling, 0.0, 0.01, 2001}, ref.probe_detuning},
        {{SweepVariable::probe_detuning, 0.9995, 1.0005, 20001}, ref.coupling},
    };
    return c;
}

RunConfig parse_config(const std::string &text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException &e)
    {
        throw Error(Errc::parse_error, e.msg + " (line " + std::to_string(e.mark.line + 1) +
                                           ", column " + std::to_string(e.mark.column + 1) + ")");
    }
    if (root.IsNull())
        root = YAML::Node(YAML::NodeType::Map);
    check_keys(root, "", {"preset", "params", "pump", "conventions", "output", "response", "sweep",
                          "null", "eit", "bandwidth", "simulate", "verify"});

    RunConfig cfg = default_config();
    cfg.preset.reset();

    if (root["preset"] && root["params"])
        invalid("preset", "and 'params' are mutually exclusive", root["params"]);
    if (const YAML::Node n = root["preset"])
    {
        const auto name = get<std::string>(n, "preset");
        if (name != "membrane")
            invalid("preset", "is unknown (available: membrane)", n);
        cfg.preset = name;
        cfg.params = membrane_preset();
    }
    else if (const YAML::Node p = root["params"])
    {
        check_keys(p, "params", {"cavity_length", "pump_wavelength", "mirror_mass",
                                 "mechanical_frequency", "mechanical_damping", "cavity_decay",
                                 "bare_detuning", "mechanical_coupling"});
        for (const char *key : {"cavity_length", "pump_wavelength", "mirror_mass",
                                "mechanical_frequency", "mechanical_damping", "cavity_decay",
                                "bare_detuning"})
            if (!p[key])
                invalid(std::string("params.") + key, "is required", p);
        PhysicalParams &pp = cfg.params;
        pp = PhysicalParams{};
        pp.cavity_length = get<double>(p["cavity_length"], "params.cavity_length");
        pp.pump_wavelength = get<double>(p["pump_wavelength"], "params.pump_wavelength");
        pp.mirror_mass = get<double>(p["mirror_mass"], "params.mirror_mass");
        pp.mechanical_frequency =
            frequency(p["mechanical_frequency"], "params.mechanical_frequency", std::nullopt);
        const double wm = pp.mechanical_frequency;
        pp.mechanical_damping = frequency(p["mechanical_damping"], "params.mechanical_damping", wm);
        pp.cavity_decay = frequency(p["cavity_decay"], "params.cavity_decay", wm);
        pp.bare_detuning = frequency(p["bare_detuning"], "params.bare_detuning", wm);
        if (p["mechanical_coupling"])
            pp.mechanical_coupling = get<bool>(p["mechanical_coupling"], "params.mechanical_coupling");
    }
    else
    {
        throw Error(Errc::validation_error, "exactly one of 'preset' or 'params' is required");
    }

    if (const YAML::Node n = root["pump"])
    {
        check_keys(n, "pump", {"power_w", "amplitude_per_s", "coupling"});
        if (n.size() != 1)
            invalid("pump", "needs exactly one of power_w, amplitude_per_s, coupling", n);
        if (n["power_w"])
            cfg.pump = {PumpChoice::Kind::power, get<double>(n["power_w"], "pump.power_w")};
        else if (n["amplitude_per_s"])
            cfg.pump = {PumpChoice::Kind::amplitude,
                        get<double>(n["amplitude_per_s"], "pump.amplitude_per_s")};
        else
            cfg.pump = {PumpChoice::Kind::coupling, get<double>(n["coupling"], "pump.coupling")};
        if (!(cfg.pump.value >= 0.0))
            invalid("pump", "must be >= 0", n);
    }

    if (const YAML::Node n = root["conventions"])
    {
        check_keys(n, "conventions", {"kappa_convention", "q0_sign"});
        if (n["kappa_convention"])
            cfg.params.conventions.kappa = parse_kappa_convention(
                get<std::string>(n["kappa_convention"], "conventions.kappa_convention"));
        if (n["q0_sign"])
            cfg.params.conventions.q0_sign =
                parse_q0_sign(get<std::string>(n["q0_sign"], "conventions.q0_sign"));
    }

    if (const YAML::Node n = root["output"])
    {
        check_keys(n, "output", {"directory", "threads"});
        if (n["directory"])
            cfg.output_dir = get<std::string>(n["directory"], "output.directory");
        cfg.threads = get_int(n, "threads", cfg.threads, "output");
        if (cfg.threads < 1)
            invalid("output.threads", "must be >= 1", n);
    }

    if (const YAML::Node n = root["response"])
    {
        check_keys(n, "response", {"coupling", "probe_detuning"});
        cfg.coupling = get_double(n, "coupling", cfg.coupling, "response");
        cfg.probe_detuning = get_double(n, "probe_detuning", cfg.probe_detuning, "response");
    }

    if (const YAML::Node n = root["sweep"])
    {
        if (!n.IsSequence())
            invalid("sweep", "must be a list of axes", n);
        cfg.sweeps.clear();
        for (std::size_t i = 0; i < n.size(); ++i)
        {
            const YAML::Node s = n[i];
            const std::string section = "sweep[" + std::to_string(i) + "]";
            check_keys(s, section, {"axis", "start", "stop", "count", "coupling", "probe_detuning"});
            if (!s["axis"] || !s["start"] || !s["stop"] || !s["count"])
                invalid(section, "needs axis, start, stop and count", s);
            SweepSpec spec;
            spec.axis.variable = sweep_variable(s["axis"], section + ".axis");
            spec.axis.start = get<double>(s["start"], section + ".start");
            spec.axis.stop = get<double>(s["stop"], section + ".stop");
            spec.axis.count = get<int>(s["count"], section + ".count");
            const char *other =
                spec.axis.variable == SweepVariable::coupling ? "probe_detuning" : "coupling";
            const char *wrong =
                spec.axis.variable == SweepVariable::coupling ? "coupling" : "probe_detuning";
            if (s[wrong])
                invalid(section + "." + wrong, "is the swept variable", s[wrong]);
            const ReferenceOperatingPoint ref;
            spec.fixed = get_double(s, other,
                                    spec.axis.variable == SweepVariable::coupling ? ref.probe_detuning
                                                                                  : ref.coupling,
                                    section);
            try
            {
                spec.axis.validate();
            }
            catch (const Error &e)
            {
                invalid(section, e.what(), s);
            }
            cfg.sweeps.push_back(spec);
        }
    }

    if (const YAML::Node n = root["null"])
    {
        check_keys(n, "null", {"tolerance", "agreement", "reference"});
        cfg.null_options.tolerance = get_double(n, "tolerance", cfg.null_options.tolerance, "null");
        cfg.null_options.agreement = get_double(n, "agreement", cfg.null_options.agreement, "null");
        if (const YAML::Node r = n["reference"])
        {
            check_keys(r, "null.reference", {"probe_detuning", "coupling"});
            cfg.reference.probe_detuning =
                get_double(r, "probe_detuning", cfg.reference.probe_detuning, "null.reference");
            cfg.reference.coupling = get_double(r, "coupling", cfg.reference.coupling, "null.reference");
        }
    }

    if (const YAML::Node n = root["eit"])
    {
        check_keys(n, "eit", {"start", "stop", "count"});
        cfg.eit_axis.start = get_double(n, "start", cfg.eit_axis.start, "eit");
        cfg.eit_axis.stop = get_double(n, "stop", cfg.eit_axis.stop, "eit");
        cfg.eit_axis.count = get_int(n, "count", cfg.eit_axis.count, "eit");
    }

    if (const YAML::Node n = root["bandwidth"])
    {
        check_keys(n, "bandwidth", {"start", "stop", "count", "coupling"});
        SweepAxis &a = cfg.bandwidth.axis;
        a.start = get_double(n, "start", a.start, "bandwidth");
        a.stop = get_double(n, "stop", a.stop, "bandwidth");
        a.count = get_int(n, "count", a.count, "bandwidth");
        cfg.bandwidth.fixed = get_double(n, "coupling", cfg.bandwidth.fixed, "bandwidth");
    }

    if (const YAML::Node n = root["simulate"])
    {
        check_keys(n, "simulate", {"coupling", "probe_detuning", "probe_ratio", "steps_per_period",
                                   "window_periods", "settle_factor", "min_settle_periods", "scheme", "trace_stride"});
        SimulateSettings &s = cfg.simulate;
        if (n["coupling"])
            s.coupling = point(n["coupling"], "simulate.coupling");
        if (n["probe_detuning"])
            s.probe_detuning = point(n["probe_detuning"], "simulate.probe_detuning");
        s.probe_ratio = get_double(n, "probe_ratio", s.probe_ratio, "simulate");
        s.trace_stride = get_int(n, "trace_stride", s.trace_stride, "simulate");
        if (s.trace_stride < 1)
            invalid("simulate.trace_stride", "must be >= 1", n);
        oracle_settings(n, "simulate", s.oracle);
    }

    if (const YAML::Node n = root["verify"])
    {
        check_keys(n, "verify", {"coupling", "probe_detunings", "probe_ratio", "tolerance",
                                 "dark_ratio", "steps_per_period", "window_periods",
                                 "settle_factor", "min_settle_periods", "scheme"});
        VerifySettings &v = cfg.verify;
        if (n["coupling"])
            v.coupling = point(n["coupling"], "verify.coupling");
        if (const YAML::Node list = n["probe_detunings"])
        {
            if (!list.IsSequence() || list.size() == 0)
                invalid("verify.probe_detunings", "must be a non-empty list", list);
            v.probe_detunings.clear();
            for (std::size_t i = 0; i < list.size(); ++i)
                v.probe_detunings.push_back(point(list[i], "verify.probe_detunings"));
        }
        v.probe_ratio = get_double(n, "probe_ratio", v.probe_ratio, "verify");
        v.tolerance = get_double(n, "tolerance", v.tolerance, "verify");
        v.dark_ratio = get_double(n, "dark_ratio", v.dark_ratio, "verify");
        oracle_settings(n, "verify", v.oracle);
    }

    try
    {
        cfg.params.validate();
    }
    catch (const Error &e)
    {
        throw Error(Errc::validation_error, e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::parse_error, "cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string echo_config(const RunConfig &c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    if (c.preset)
    {
        out << YAML::Key << "preset" << YAML::Value << *c.preset;
    }
    else
    {
        const PhysicalParams &p = c.params;
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "cavity_length" << YAML::Value << p.cavity_length;
        out << YAML::Key << "pump_wavelength" << YAML::Value << p.pump_wavelength;
        out << YAML::Key << "mirror_mass" << YAML::Value << p.mirror_mass;
        emit_frequency(out, "mechanical_frequency", p.mechanical_frequency);
        emit_frequency(out, "mechanical_damping", p.mechanical_damping);
        emit_frequency(out, "cavity_decay", p.cavity_decay);
        emit_frequency(out, "bare_detuning", p.bare_detuning);
        out << YAML::Key << "mechanical_coupling" << YAML::Value << p.mechanical_coupling;
        out << YAML::EndMap;
    }

    out << YAML::Key << "pump" << YAML::Value << YAML::BeginMap;
    switch (c.pump.kind)
    {
    case PumpChoice::Kind::power: out << YAML::Key << "power_w"; break;
    case PumpChoice::Kind::amplitude: out << YAML::Key << "amplitude_per_s"; break;
    case PumpChoice::Kind::coupling: out << YAML::Key << "coupling"; break;
    }
    out << YAML::Value << c.pump.value << YAML::EndMap;

    out << YAML::Key << "conventions" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kappa_convention" << YAML::Value
        << (c.params.conventions.kappa == KappaConvention::single ? "single" : "as_printed");
    out << YAML::Key << "q0_sign" << YAML::Value
        << (c.params.conventions.q0_sign == Q0Sign::derived ? "derived" : "as_printed");
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "directory" << YAML::Value << c.output_dir.string();
    out << YAML::Key << "threads" << YAML::Value << c.threads;
    out << YAML::EndMap;

    out << YAML::Key << "response" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "coupling" << YAML::Value << c.coupling;
    out << YAML::Key << "probe_detuning" << YAML::Value << c.probe_detuning;
    out << YAML::EndMap;

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginSeq;
    for (const SweepSpec &s : c.sweeps)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "axis" << YAML::Value << std::string(to_string(s.axis.variable));
        out << YAML::Key << "start" << YAML::Value << s.axis.start;
        out << YAML::Key << "stop" << YAML::Value << s.axis.stop;
        out << YAML::Key << "count" << YAML::Value << s.axis.count;
        out << YAML::Key
            << (s.axis.variable == SweepVariable::coupling ? "probe_detuning" : "coupling")
            << YAML::Value << s.fixed;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "null" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tolerance" << YAML::Value << c.null_options.tolerance;
    out << YAML::Key << "agreement" << YAML::Value << c.null_options.agreement;
    out << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "probe_detuning" << YAML::Value << c.reference.probe_detuning;
    out << YAML::Key << "coupling" << YAML::Value << c.reference.coupling;
    out << YAML::EndMap << YAML::EndMap;

    out << YAML::Key << "eit" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << c.eit_axis.start;
    out << YAML::Key << "stop" << YAML::Value << c.eit_axis.stop;
    out << YAML::Key << "count" << YAML::Value << c.eit_axis.count;
    out << YAML::EndMap;

    out << YAML::Key << "bandwidth" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << c.bandwidth.axis.start;
    out << YAML::Key << "stop" << YAML::Value << c.bandwidth.axis.stop;
    out << YAML::Key << "count" << YAML::Value << c.bandwidth.axis.count;
    out << YAML::Key << "coupling" << YAML::Value << c.bandwidth.fixed;
    out << YAML::EndMap;

    out << YAML::Key << "simulate" << YAML::Value << YAML::BeginMap;
    emit_point(out, "coupling", c.simulate.coupling);
    emit_point(out, "probe_detuning", c.simulate.probe_detuning);
    out << YAML::Key << "probe_ratio" << YAML::Value << c.simulate.probe_ratio;
    out << YAML::Key << "trace_stride" << YAML::Value << c.simulate.trace_stride;
    emit_oracle(out, c.simulate.oracle);
    out << YAML::EndMap;

    out << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
    emit_point(out, "coupling", c.verify.coupling);
    out << YAML::Key << "probe_detunings" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const PointChoice &p : c.verify.probe_detunings)
    {
        if (p.at_null)
            out << "stokes_null";
        else
            out << p.value;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "probe_ratio" << YAML::Value << c.verify.probe_ratio;
    out << YAML::Key << "tolerance" << YAML::Value << c.verify.tolerance;
    out << YAML::Key << "dark_ratio" << YAML::Value << c.verify.dark_ratio;
    emit_oracle(out, c.verify.oracle);
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

PhysicalParams resolve_params(const RunConfig &config)
{
    const PhysicalParams &base = config.params;
    switch (config.pump.kind)
    {
    case PumpChoice::Kind::power: return base.with_pump(PumpPower{config.pump.value});
    case PumpChoice::Kind::amplitude: return base.with_pump(PumpAmplitude{config.pump.value});
    case PumpChoice::Kind::coupling:
        break;
    }
    const PumpSetting s =
        pump_power_for_coupling(base, config.pump.value * base.mechanical_frequency);
    return base.with_pump(PumpAmplitude{s.amplitude});
}

} // namespace sideband
