#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "relstring/commands.hpp"
#include "relstring/errors.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"relstring: relativistic strings in curved space-times"};
    app.require_subcommand(1);

    std::string scenario;
    std::string grid_override;
    double t_max = 0.0;
    std::string out;

    const char* commands[][2] = {
        {"check", "physicality, existence criterion and corollary flags"},
        {"simulate", "run transport and the light-cone solver, write snapshots and a manifest"},
        {"compare", "closed-form and staged solutions against the general solver over a refinement ladder"},
        {"speeds", "write initial speed functionals and transported speed fields"},
    };
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("scenario", scenario, "scenario file (JSON)")->required();
        sub->add_option("--grid-override", grid_override, "lattice step h, or cells:N");
        sub->add_option("--tmax", t_max, "final time");
        sub->add_option("--out", out, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : relstring::kExitParse;
    }

    relstring::CommandOptions options;
    try {
        if (!grid_override.empty()) relstring::parse_grid_override(grid_override, options);
    } catch (const relstring::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return relstring::kExitParse;
    }
    if (t_max > 0.0) options.t_max = t_max;
    if (!out.empty()) options.out = out;

    const std::string command = app.get_subcommands().front()->get_name();
    return relstring::run_command(command, scenario, options, std::cout, std::cerr);
}
