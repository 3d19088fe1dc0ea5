#include "sideband/config.hpp"
#include "sideband/errors.hpp"
#include "sideband/run.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char **argv)
{
    CLI::App app{"Two-tone sideband response of a driven optomechanical cavity"};
    app.set_version_flag("--version", SIDEBAND_VERSION);

    std::string command;
    std::string config_path;
    std::string out_dir;
    std::string kappa_convention;
    std::string q0_sign;
    int threads = 0;

    app.add_option("command", command,
                   "steady | response | sweep | null | eit | bandwidth | simulate | verify")
        ->required();
    app.add_option("-c,--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_dir, "output directory (overrides the config)");
    app.add_option("--kappa-convention", kappa_convention, "single | as-printed");
    app.add_option("--q0-sign", q0_sign, "derived | as-printed");
    app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const auto cmd = sideband::parse_command(command);
    if (!cmd)
    {
        std::cerr << "error: unknown command '" << command << "'\n";
        return 1;
    }

    try
    {
        sideband::RunConfig cfg =
            config_path.empty() ? sideband::default_config() : sideband::load_config(config_path);
        if (!out_dir.empty())
            cfg.output_dir = out_dir;
        if (!kappa_convention.empty())
            cfg.params.conventions.kappa = sideband::parse_kappa_convention(kappa_convention);
        if (!q0_sign.empty())
            cfg.params.conventions.q0_sign = sideband::parse_q0_sign(q0_sign);
        if (threads > 0)
            cfg.threads = threads;

        const sideband::RunOutcome r = sideband::run(cfg, *cmd, std::cout, std::cerr);
        std::cout << "manifest: " << r.manifest.string() << '\n';
        return r.exit_code;
    }
    catch (const sideband::Error &e)
    {
        std::cerr << "error [" << sideband::to_string(e.code()) << "]: " << e.what() << '\n';
        return e.is_config_error() ? 1 : 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
