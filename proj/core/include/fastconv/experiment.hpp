#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fastconv/config.hpp"
#include "fastconv/stepper.hpp"

namespace fastconv {

/// Experiment families the harness knows how to run and check.
enum class Preset {
    heat_baseline,
    decay_fit,
    selfsim_collapse,
    uniqueness,
    sign_preservation,
    contraction,
    comparison,
    entropy_audit,
    tail_report,
    sandwich,
    energy_report,
};

std::string preset_name(Preset p);
Preset preset_from_name(const std::string& name);

/// A fully resolved experiment: the base run plus the preset's parameters.
/// Every field has a documented config key (see the config reference in the
/// README); parse fills defaults, validate() fails fast before any run.
struct ExperimentSpec {
    Preset preset = Preset::decay_fit;
    RunConfig base;
    std::filesystem::path out_root;

    // heat_baseline
    std::vector<double> spacings;
    double ratio_lo = 3.0;
    double ratio_hi = 5.0;

    // decay_fit
    double fit_lo = 1.0;
    double fit_hi = 100.0;
    double slope_tol_rel = 0.05;

    // selfsim_collapse
    std::vector<double> times;
    double collapse_final_rel = 0.25;
    double marginal_tol_rel = 5e-3;

    // uniqueness / sign_preservation
    std::vector<double> widths;
    std::string alt_init = "box";
    double distance_floor = 0.0;  // admissible extrapolated limit; 0 = report only
    double amplitude_rel = 0.5;
    double sign_final_rel = 0.10;

    // contraction / comparison
    int pairs = 20;
    unsigned seed = 2026;

    // entropy_audit
    int levels = 32;
    int bumps = 20;
    double cell_tol_rel = 1e-8;
    double residual_tol_rel = 1e-6;

    // tail_report
    std::vector<double> radii;
    double refine = 2.0;
    double enlarge = 2.0;
    double stability_factor = 2.0;

    // sandwich
    double slab_r = 0.5;
    double sandwich_tol_rel = 1e-6;

    // energy_report
    double tau = 0.0;  // 0 = start of the run
    double energy_slack = 1e-3;

    // every preset
    double mass_tol_rel = 1e-8;

    void validate() const;
};

/// One measured value against its bound. relation is one of ">=", "<=",
/// "in" (lo..hi), or "report" (no assertion); note records where the
/// tolerance comes from.
struct CheckRow {
    std::string name;
    double measured = 0.0;
    std::string relation = "report";
    double lo = 0.0;
    double hi = 0.0;
    bool pass = true;
    std::string note;
};

struct SnapshotRef {
    std::string run;
    double t = 0.0;
    std::string file;  // run-directory-relative path
};

struct Report {
    std::string run_id;
    Preset preset = Preset::decay_fit;
    std::string version;
    std::string config_hash;
    double wall_seconds = 0.0;
    std::vector<CheckRow> checks;
    std::vector<std::string> tables;  // run-directory-relative CSV paths
    std::vector<SnapshotRef> snapshots;
    std::vector<std::string> failures;  // per-run error manifest

    bool all_pass() const;
    std::string to_text() const;
};

// ---- configuration -------------------------------------------------------

ExperimentSpec parse_config(const std::filesystem::path& file);
ExperimentSpec parse_config_text(const std::string& text, const std::string& origin);

/// Canonical resolved form; reparses to an identical spec, and is what the
/// config hash is taken over.
std::string dump_config(const ExperimentSpec& spec);

std::uint64_t fnv1a64(std::string_view bytes);
std::string config_hash(const ExperimentSpec& spec);

/// Output root: $FASTCONV_OUT when set, else "out" under the working dir.
std::filesystem::path default_out_root();
/// Worker count: $FASTCONV_WORKERS when set, else hardware concurrency.
int default_workers();

std::string code_version();

// ---- execution -----------------------------------------------------------

/// Runs every trajectory the preset needs (independent runs go across the
/// worker pool), persists per-run artifacts, evaluates the preset's checks
/// from the persisted artifacts, and publishes the run directory atomically
/// (built under a temp name, renamed into place). Returns the report; solver
/// errors in individual runs land in Report::failures, not exceptions.
Report execute(const ExperimentSpec& spec, int workers = 0);

/// Re-evaluates every check of a finished (or partial) run directory from
/// its artifacts alone and rewrites report.txt. Bit-identical tables and
/// check values to the original execute, by construction: execute evaluates
/// through the same loader.
Report audit(const std::filesystem::path& run_dir);

/// Completes a partial run directory: finished runs are kept, runs whose
/// checkpoint stops short of time.end are continued from the checkpoint,
/// missing runs are executed fresh. Continuation reproduces the uninterrupted
/// artifacts bit-exactly when the restart time is one of output.snapshots.
/// Accepts the run directory or a checkpoint directory inside it.
Report resume(const std::filesystem::path& path, int workers = 0);

/// Writes plotting-ready CSVs (log-log decay columns, rescaled profile
/// slices, width/distance tables) under <run_dir>/plotdata.
void emit_plotdata(const std::filesystem::path& run_dir);

// ---- CSV helpers ---------------------------------------------------------

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;

    std::size_t rows() const { return cols.empty() ? 0 : cols.front().size(); }
    const std::vector<double>& col(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace fastconv
