#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracwave/errors.hpp"
#include "fracwave/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fracwave: forward and inverse solvers for the time-fractional wave equation"};
    app.name("fracwave");

    std::string task, config, out;
    std::vector<std::string> overrides;
    app.add_option("task", task,
                   "one of: direct, ip1, ip2, mlf-table, convergence, props-check")
        ->required();
    app.add_option("--config", config, "scenario config file (JSON)")->required();
    app.add_option("--set", overrides, "override a config field, e.g. --set problem.M=512");
    app.add_option("--out", out, "output directory (overrides config output.dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        fracwave::scenario::RunReport rep = fracwave::scenario::run(config, overrides, out, task);
        fracwave::scenario::print_report(std::cout, rep);
        return rep.all_pass() ? 0 : 3;
    } catch (const fracwave::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fracwave::IncompatibleData& e) {
        std::cerr << "data validation error: " << e.what() << "\n";
        return 2;
    } catch (const fracwave::DegenerateWeight& e) {
        std::cerr << "data validation error: " << e.what() << "\n";
        return 2;
    } catch (const fracwave::DegenerateForcing& e) {
        std::cerr << "data validation error: " << e.what() << "\n";
        return 2;
    } catch (const fracwave::ScenarioError& e) {
        std::cerr << "data validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}
