// Command-line front end for the fast-convection solver.
//
//   fastconv run <config>       execute an experiment described by a config file
//   fastconv audit <dir>        recompute every check of a stored experiment
//   fastconv resume <dir>       finish or extend a stored experiment
//   fastconv plotdata <dir>     emit plot-ready CSV files next to the artifacts
//
// Environment:
//   FASTCONV_OUT       output root for new experiments (default: ./out,
//                      overridden by run.out in the config)
//   FASTCONV_WORKERS   worker threads (default: hardware concurrency)
//
// Exit status is 0 exactly when every check of the resulting report passes.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fastconv/experiment.hpp"

namespace {

int report_outcome(const fastconv::Report& rep) {
    std::cout << rep.to_text();
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-volume runs for fast-convection diffusion equations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string dir_path;
    int workers = 0;
    std::string out_root;

    CLI::App* cmd_run = app.add_subcommand("run", "execute an experiment config");
    cmd_run->add_option("config", config_path, "experiment config file")->required();
    cmd_run->add_option("--workers", workers, "worker threads (0 = default)");
    cmd_run->add_option("--out", out_root, "output root (overrides run.out and FASTCONV_OUT)");

    CLI::App* cmd_audit = app.add_subcommand("audit", "recompute checks from stored artifacts");
    cmd_audit->add_option("dir", dir_path, "experiment directory (or a checkpoint inside one)")
        ->required();

    CLI::App* cmd_resume = app.add_subcommand("resume", "finish or extend a stored experiment");
    cmd_resume->add_option("dir", dir_path, "experiment directory (or a checkpoint inside one)")
        ->required();
    cmd_resume->add_option("--workers", workers, "worker threads (0 = default)");

    CLI::App* cmd_plot = app.add_subcommand("plotdata", "emit plot-ready CSV files");
    cmd_plot->add_option("dir", dir_path, "experiment directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            fastconv::ExperimentSpec spec = fastconv::parse_config(config_path);
            if (!out_root.empty()) spec.out_root = out_root;
            return report_outcome(fastconv::execute(spec, workers));
        }
        if (cmd_audit->parsed()) return report_outcome(fastconv::audit(dir_path));
        if (cmd_resume->parsed()) return report_outcome(fastconv::resume(dir_path, workers));
        if (cmd_plot->parsed()) {
            fastconv::emit_plotdata(dir_path);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "fastconv: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
