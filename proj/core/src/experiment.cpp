#include "fastconv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fastconv/config.hpp"
#include "fastconv/diagnostics.hpp"
#include "fastconv/entropy.hpp"
#include "fastconv/selfsim.hpp"
#include "fastconv/snapshot.hpp"

namespace fastconv {

namespace fs = std::filesystem;

namespace {

constexpr double time_eps = 1e-9;

std::string g17(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

// Compact form for run-directory names.
std::string g6(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

double l1_distance(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument("l1_distance: fields live on different grids");
    Field d(a.grid());
    for (std::int64_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return lp_norm(d, 1.0);
}

std::vector<double> merge_times(std::vector<double> base, std::span<const double> extra) {
    for (double t : extra) base.push_back(t);
    std::sort(base.begin(), base.end());
    std::vector<double> out;
    for (double t : base) {
        if (!out.empty() && std::abs(t - out.back()) <= time_eps * std::max(1.0, std::abs(t)))
            continue;
        out.push_back(t);
    }
    return out;
}

}  // namespace

// ---- CSV -------------------------------------------------------------------

const std::vector<double>& CsvTable::col(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return cols[j];
    throw std::invalid_argument("csv: no column named '" + name + "'");
}

void write_csv(const fs::path& path, const CsvTable& table) {
    if (table.header.size() != table.cols.size())
        throw std::invalid_argument("csv: header/column count mismatch");
    const std::size_t rows = table.rows();
    for (const auto& c : table.cols)
        if (c.size() != rows) throw std::invalid_argument("csv: ragged columns");

    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t j = 0; j < table.header.size(); ++j)
        os << (j ? "," : "") << table.header[j];
    os << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < table.cols.size(); ++j)
            os << (j ? "," : "") << table.cols[j][i];
        os << "\n";
    }
    write_text_atomic(path, os.str());
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path.string());
    {
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) t.header.push_back(tok);
    }
    t.cols.assign(t.header.size(), {});
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::size_t j = 0;
        while (std::getline(ls, tok, ',')) {
            if (j >= t.cols.size())
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": more fields than header columns");
            double v = 0.0;
            const char* end = tok.data() + tok.size();
            auto [ptr, ec] = std::from_chars(tok.data(), end, v);
            if (ec != std::errc{} || ptr != end)
                throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                         ": bad number '" + tok + "'");
            t.cols[j++].push_back(v);
        }
        if (j != t.cols.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": fewer fields than header columns");
    }
    return t;
}

// ---- hashing, environment, version ------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "fnv1a:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(dump_config(spec));
    return os.str();
}

std::string code_version() {
#ifdef FASTCONV_VERSION
    return FASTCONV_VERSION;
#else
    return "0.0.0-dev";
#endif
}

std::filesystem::path default_out_root() {
    if (const char* env = std::getenv("FASTCONV_OUT"); env && *env) return fs::path(env);
    return fs::path("out");
}

int default_workers() {
    if (const char* env = std::getenv("FASTCONV_WORKERS"); env && *env) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// ---- preset names ------------------------------------------------------------

namespace {
constexpr std::pair<Preset, const char*> preset_table[] = {
    {Preset::heat_baseline, "heat_baseline"},
    {Preset::decay_fit, "decay_fit"},
    {Preset::selfsim_collapse, "selfsim_collapse"},
    {Preset::uniqueness, "uniqueness"},
    {Preset::sign_preservation, "sign_preservation"},
    {Preset::contraction, "contraction"},
    {Preset::comparison, "comparison"},
    {Preset::entropy_audit, "entropy_audit"},
    {Preset::tail_report, "tail_report"},
    {Preset::sandwich, "sandwich"},
    {Preset::energy_report, "energy_report"},
};
}  // namespace

std::string preset_name(Preset p) {
    for (auto [k, n] : preset_table)
        if (k == p) return n;
    return "?";
}

Preset preset_from_name(const std::string& name) {
    for (auto [k, n] : preset_table)
        if (name == n) return k;
    std::string known;
    for (auto [k, n] : preset_table) known += std::string(known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "' (one of: " + known + ")");
}

// ---- RunConfig <-> dotted keys ------------------------------------------------

namespace {

OperatorKind operator_kind_from(const ConfigMap& c, const std::string& key,
                                const std::string& token) {
    if (token == "full") return OperatorKind::full_laplacian;
    if (token == "reduced") return OperatorKind::reduced_laplacian;
    if (token == "reduced_axial") return OperatorKind::reduced_plus_axial;
    c.fail_at(key, "unknown operator '" + token + "' (full | reduced | reduced_axial)");
}

std::string operator_kind_token(OperatorKind k) {
    switch (k) {
        case OperatorKind::full_laplacian: return "full";
        case OperatorKind::reduced_laplacian: return "reduced";
        case OperatorKind::reduced_plus_axial: return "reduced_axial";
    }
    return "?";
}

InitialRecipe::Kind init_kind_from(const ConfigMap& c, const std::string& key,
                                   const std::string& token) {
    if (token == "gaussian") return InitialRecipe::Kind::gaussian;
    if (token == "box") return InitialRecipe::Kind::box;
    if (token == "bump") return InitialRecipe::Kind::bump;
    if (token == "heat_kernel") return InitialRecipe::Kind::heat_kernel;
    c.fail_at(key, "unknown initial data '" + token +
                       "' (gaussian | box | bump | heat_kernel)");
}

std::string init_kind_token(InitialRecipe::Kind k) {
    switch (k) {
        case InitialRecipe::Kind::gaussian: return "gaussian";
        case InitialRecipe::Kind::box: return "box";
        case InitialRecipe::Kind::bump: return "bump";
        case InitialRecipe::Kind::heat_kernel: return "heat_kernel";
    }
    return "?";
}

std::vector<double> axis_list(const ConfigMap& c, const std::string& key, int dim) {
    std::vector<double> v = c.require_list(key);
    if (v.size() == 1 && dim == 2) v.push_back(v[0]);
    if (static_cast<int>(v.size()) != dim)
        c.fail_at(key, "expected one value per axis (or one shared value)");
    return v;
}

RunConfig load_run_config(const ConfigMap& c) {
    RunConfig cfg;
    const int dim = static_cast<int>(c.get_int("grid.dim", 1));
    if (dim < 1 || dim > max_dim) c.fail_at("grid.dim", "dim must be 1 or 2");
    const auto lo = axis_list(c, "grid.lo", dim);
    const auto hi = axis_list(c, "grid.hi", dim);
    const auto sp = axis_list(c, "grid.spacing", dim);
    cfg.grid = Grid::centered(dim, lo, hi, sp);

    cfg.op.kind = operator_kind_from(c, "operator.kind", c.get_string("operator.kind", "full"));
    cfg.op.eps = c.get_double("operator.eps", 0.0);

    cfg.flux.q = c.get_double("flux.q", 0.75);
    cfg.flux.eta = c.get_double("flux.eta", -1.0);
    cfg.flux.odd_extension = c.get_bool("flux.odd", true);
    cfg.flux.u_floor = c.get_double("flux.floor", 0.0);
    cfg.convection = c.get_bool("run.convection", true);

    cfg.init.kind = init_kind_from(c, "init.kind", c.get_string("init.kind", "gaussian"));
    cfg.init.param = c.get_double("init.param", 0.1);
    cfg.mass = c.get_double("init.mass", 1.0);

    cfg.t_start = c.get_double("time.start", 0.0);
    cfg.t_end = c.get_double("time.end", 1.0);
    cfg.cfl = c.get_double("time.cfl", 0.9);
    cfg.theta = c.get_double("time.theta", 1.0);
    cfg.dt_max = c.get_double("time.dt_max", 0.0);
    cfg.dt_rel = c.get_double("time.dt_rel", 0.0);
    cfg.dt_rel_offset = c.get_double("time.dt_rel_offset", 0.0);

    cfg.lin_tol = c.get_double("solve.tol", 1e-10);
    cfg.lin_max_iter = static_cast<int>(c.get_int("solve.max_iter", 2000));

    cfg.snapshot_times = c.get_list("output.snapshots", {cfg.t_end});
    cfg.tail_radii = c.get_list("output.tail_radii", {});
    cfg.series_stride = static_cast<int>(c.get_int("output.series_stride", 1));
    cfg.boundary_leak_tol = c.get_double("output.boundary_tol", 1e-8);

    if (c.has("audit.window")) {
        std::vector<double> w = c.require_list("audit.window");
        if (w.size() != 2 || !(w[0] < w[1]))
            c.fail_at("audit.window", "expected two increasing times");
        cfg.audit_window = std::pair<double, double>(w[0], w[1]);
    }
    cfg.run_id = c.get_string("run.name", "run");
    return cfg;
}

void dump_run_config(std::ostringstream& os, const RunConfig& cfg, bool with_name) {
    const Grid& g = cfg.grid;
    auto list = [](auto&& values) {
        std::ostringstream ls;
        ls << std::setprecision(17);
        bool first = true;
        for (double v : values) {
            if (!first) ls << " ";
            ls << v;
            first = false;
        }
        return ls.str();
    };
    std::vector<double> lo, hi, sp;
    for (int a = 0; a < g.dim(); ++a) {
        lo.push_back(g.lo(a));
        hi.push_back(g.hi(a));
        sp.push_back(g.spacing(a));
    }
    if (with_name) os << "run.name = " << cfg.run_id << "\n";
    os << "grid.dim = " << g.dim() << "\n";
    os << "grid.lo = " << list(lo) << "\n";
    os << "grid.hi = " << list(hi) << "\n";
    os << "grid.spacing = " << list(sp) << "\n";
    os << "operator.kind = " << operator_kind_token(cfg.op.kind) << "\n";
    os << "operator.eps = " << g17(cfg.op.eps) << "\n";
    os << "flux.q = " << g17(cfg.flux.q) << "\n";
    os << "flux.eta = " << g17(cfg.flux.eta) << "\n";
    os << "flux.odd = " << (cfg.flux.odd_extension ? "true" : "false") << "\n";
    os << "flux.floor = " << g17(cfg.flux.u_floor) << "\n";
    os << "run.convection = " << (cfg.convection ? "true" : "false") << "\n";
    os << "init.kind = " << init_kind_token(cfg.init.kind) << "\n";
    os << "init.param = " << g17(cfg.init.param) << "\n";
    os << "init.mass = " << g17(cfg.mass) << "\n";
    os << "time.start = " << g17(cfg.t_start) << "\n";
    os << "time.end = " << g17(cfg.t_end) << "\n";
    os << "time.cfl = " << g17(cfg.cfl) << "\n";
    os << "time.theta = " << g17(cfg.theta) << "\n";
    os << "time.dt_max = " << g17(cfg.dt_max) << "\n";
    os << "time.dt_rel = " << g17(cfg.dt_rel) << "\n";
    os << "time.dt_rel_offset = " << g17(cfg.dt_rel_offset) << "\n";
    os << "solve.tol = " << g17(cfg.lin_tol) << "\n";
    os << "solve.max_iter = " << cfg.lin_max_iter << "\n";
    os << "output.snapshots = " << list(cfg.snapshot_times) << "\n";
    if (!cfg.tail_radii.empty()) os << "output.tail_radii = " << list(cfg.tail_radii) << "\n";
    os << "output.series_stride = " << cfg.series_stride << "\n";
    os << "output.boundary_tol = " << g17(cfg.boundary_leak_tol) << "\n";
    if (cfg.audit_window) {
        os << "audit.window = " << g17(cfg.audit_window->first) << " "
           << g17(cfg.audit_window->second) << "\n";
    }
}

std::string run_config_text(const RunConfig& cfg) {
    std::ostringstream os;
    dump_run_config(os, cfg, true);
    return os.str();
}

}  // namespace

// ---- ExperimentSpec ------------------------------------------------------------

void ExperimentSpec::validate() const {
    base.validate();
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("experiment: " + what);
    };
    auto strictly_decreasing = [](std::span<const double> v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1])) return false;
        return true;
    };
    need(mass_tol_rel > 0.0, "preset.mass_tol must be positive");
    switch (preset) {
        case Preset::heat_baseline:
            need(spacings.size() >= 2, "heat_baseline needs at least two grid spacings");
            need(strictly_decreasing(spacings), "spacings must be strictly decreasing");
            for (double s : spacings) need(s > 0.0, "spacings must be positive");
            need(base.op.kind == OperatorKind::full_laplacian,
                 "heat_baseline compares against the free heat kernel; operator.kind must be "
                 "full");
            need(base.init.kind == InitialRecipe::Kind::heat_kernel,
                 "heat_baseline requires init.kind = heat_kernel (the warm start is the exact "
                 "solution)");
            need(ratio_lo > 0.0 && ratio_hi > ratio_lo, "ratio window must satisfy 0 < lo < hi");
            break;
        case Preset::decay_fit:
            need(fit_lo > 0.0 && fit_hi > fit_lo, "fit window must satisfy 0 < lo < hi");
            need(slope_tol_rel > 0.0, "preset.slope_tol must be positive");
            break;
        case Preset::selfsim_collapse:
            need(!times.empty(), "selfsim_collapse needs probe times");
            for (std::size_t i = 0; i < times.size(); ++i) {
                need(times[i] > base.t_start, "probe times must lie after the start");
                if (i) need(times[i] > times[i - 1], "probe times must increase");
                need(4.0 * times[i] <= base.t_end + time_eps,
                     "probe time 4t exceeds the run end");
            }
            need(collapse_final_rel > 0.0, "preset.collapse_final_rel must be positive");
            need(marginal_tol_rel > 0.0, "preset.marginal_tol must be positive");
            break;
        case Preset::uniqueness:
            need(!widths.empty(), "uniqueness needs mollifier widths");
            need(strictly_decreasing(widths), "widths must be strictly decreasing");
            need(distance_floor >= 0.0, "preset.distance_floor must be nonnegative");
            break;
        case Preset::sign_preservation:
            need(!widths.empty(), "sign_preservation needs perturbation widths");
            need(strictly_decreasing(widths), "widths must be strictly decreasing");
            need(amplitude_rel > 0.0, "preset.amplitude_rel must be positive");
            need(sign_final_rel > 0.0, "preset.sign_final_rel must be positive");
            break;
        case Preset::contraction:
        case Preset::comparison:
            need(pairs >= 1, "preset.pairs must be at least 1");
            break;
        case Preset::entropy_audit:
            need(base.audit_window.has_value(), "entropy_audit requires audit.window");
            need(levels >= 1, "preset.levels must be at least 1");
            need(bumps >= 1, "preset.bumps must be at least 1");
            need(cell_tol_rel > 0.0 && residual_tol_rel > 0.0, "tolerances must be positive");
            break;
        case Preset::tail_report:
            need(!radii.empty(), "tail_report needs radii");
            for (std::size_t i = 0; i < radii.size(); ++i) {
                need(radii[i] > 0.0, "radii must be positive");
                if (i) need(radii[i] > radii[i - 1], "radii must increase");
            }
            need(refine > 1.0, "preset.refine must exceed 1");
            need(enlarge > 1.0, "preset.enlarge must exceed 1");
            need(stability_factor >= 1.0, "preset.stability_factor must be at least 1");
            break;
        case Preset::sandwich:
            need(base.init.kind == InitialRecipe::Kind::box ||
                     base.init.kind == InitialRecipe::Kind::bump,
                 "sandwich requires compactly supported initial data (box or bump)");
            need(slab_r > 0.0, "preset.r must be positive");
            need(base.init.param <= slab_r + time_eps,
                 "initial support must fit inside the slab half-width r");
            need(sandwich_tol_rel > 0.0, "preset.sandwich_tol must be positive");
            break;
        case Preset::energy_report:
            need(tau >= 0.0, "preset.tau must be nonnegative");
            need(tau < base.t_end, "preset.tau must precede the run end");
            need(energy_slack >= 0.0, "preset.energy_slack must be nonnegative");
            break;
    }
}

namespace {

ExperimentSpec spec_from_map(const ConfigMap& c) {
    ExperimentSpec s;
    s.preset = [&] {
        const std::string token = c.require_string("run.preset");
        try {
            return preset_from_name(token);
        } catch (const std::exception& e) {
            c.fail_at("run.preset", e.what());
        }
    }();
    s.base = load_run_config(c);
    s.base.run_id = c.get_string("run.id", preset_name(s.preset));
    s.out_root = c.has("run.out") ? fs::path(c.require_string("run.out")) : default_out_root();
    s.mass_tol_rel = c.get_double("preset.mass_tol", 1e-8);

    switch (s.preset) {
        case Preset::heat_baseline:
            s.spacings = c.get_list("preset.spacings", {0.04, 0.02, 0.01});
            s.ratio_lo = c.get_double("preset.ratio_lo", 3.0);
            s.ratio_hi = c.get_double("preset.ratio_hi", 5.0);
            break;
        case Preset::decay_fit:
            s.fit_lo = c.get_double("preset.fit_lo", 1.0);
            s.fit_hi = c.get_double("preset.fit_hi", 100.0);
            s.slope_tol_rel = c.get_double("preset.slope_tol", 0.05);
            break;
        case Preset::selfsim_collapse:
            s.times = c.get_list("preset.times", {1.0, 4.0, 16.0});
            s.collapse_final_rel = c.get_double("preset.collapse_final_rel", 0.25);
            s.marginal_tol_rel = c.get_double("preset.marginal_tol", 5e-3);
            break;
        case Preset::uniqueness:
            s.widths = c.get_list("preset.widths", {0.4, 0.2, 0.1, 0.05});
            s.alt_init = c.get_string("preset.alt_init", "box");
            init_kind_from(c, "preset.alt_init", s.alt_init);
            s.distance_floor = c.get_double("preset.distance_floor", 0.0);
            break;
        case Preset::sign_preservation:
            s.widths = c.get_list("preset.widths", {0.8, 0.4, 0.2, 0.1});
            s.amplitude_rel = c.get_double("preset.amplitude_rel", 0.5);
            s.sign_final_rel = c.get_double("preset.sign_final_rel", 0.10);
            break;
        case Preset::contraction:
        case Preset::comparison:
            s.pairs = static_cast<int>(c.get_int("preset.pairs", 20));
            s.seed = static_cast<unsigned>(c.get_int("preset.seed", 2026));
            break;
        case Preset::entropy_audit:
            s.levels = static_cast<int>(c.get_int("preset.levels", 32));
            s.bumps = static_cast<int>(c.get_int("preset.bumps", 20));
            s.cell_tol_rel = c.get_double("preset.cell_tol", 1e-8);
            s.residual_tol_rel = c.get_double("preset.residual_tol", 1e-6);
            break;
        case Preset::tail_report:
            s.radii = c.get_list("preset.radii", {10.0, 20.0});
            s.refine = c.get_double("preset.refine", 2.0);
            s.enlarge = c.get_double("preset.enlarge", 2.0);
            s.stability_factor = c.get_double("preset.stability_factor", 2.0);
            break;
        case Preset::sandwich:
            s.slab_r = c.get_double("preset.r", 0.5);
            s.sandwich_tol_rel = c.get_double("preset.sandwich_tol", 1e-6);
            break;
        case Preset::energy_report:
            s.tau = c.get_double("preset.tau", 0.0);
            s.energy_slack = c.get_double("preset.energy_slack", 1e-3);
            break;
    }
    return s;
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin) {
    ConfigMap c = ConfigMap::parse_text(text, origin);
    ExperimentSpec s = spec_from_map(c);
    c.forbid_unknown();
    s.validate();
    return s;
}

ExperimentSpec parse_config(const fs::path& file) {
    ConfigMap c = ConfigMap::parse_file(file);
    ExperimentSpec s = spec_from_map(c);
    c.forbid_unknown();
    s.validate();
    return s;
}

std::string dump_config(const ExperimentSpec& s) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "run.preset = " << preset_name(s.preset) << "\n";
    os << "run.id = " << s.base.run_id << "\n";
    dump_run_config(os, s.base, false);
    auto list = [](std::span<const double> values) {
        std::ostringstream ls;
        ls << std::setprecision(17);
        for (std::size_t i = 0; i < values.size(); ++i) ls << (i ? " " : "") << values[i];
        return ls.str();
    };
    os << "preset.mass_tol = " << g17(s.mass_tol_rel) << "\n";
    switch (s.preset) {
        case Preset::heat_baseline:
            os << "preset.spacings = " << list(s.spacings) << "\n";
            os << "preset.ratio_lo = " << g17(s.ratio_lo) << "\n";
            os << "preset.ratio_hi = " << g17(s.ratio_hi) << "\n";
            break;
        case Preset::decay_fit:
            os << "preset.fit_lo = " << g17(s.fit_lo) << "\n";
            os << "preset.fit_hi = " << g17(s.fit_hi) << "\n";
            os << "preset.slope_tol = " << g17(s.slope_tol_rel) << "\n";
            break;
        case Preset::selfsim_collapse:
            os << "preset.times = " << list(s.times) << "\n";
            os << "preset.collapse_final_rel = " << g17(s.collapse_final_rel) << "\n";
            os << "preset.marginal_tol = " << g17(s.marginal_tol_rel) << "\n";
            break;
        case Preset::uniqueness:
            os << "preset.widths = " << list(s.widths) << "\n";
            os << "preset.alt_init = " << s.alt_init << "\n";
            os << "preset.distance_floor = " << g17(s.distance_floor) << "\n";
            break;
        case Preset::sign_preservation:
            os << "preset.widths = " << list(s.widths) << "\n";
            os << "preset.amplitude_rel = " << g17(s.amplitude_rel) << "\n";
            os << "preset.sign_final_rel = " << g17(s.sign_final_rel) << "\n";
            break;
        case Preset::contraction:
        case Preset::comparison:
            os << "preset.pairs = " << s.pairs << "\n";
            os << "preset.seed = " << s.seed << "\n";
            break;
        case Preset::entropy_audit:
            os << "preset.levels = " << s.levels << "\n";
            os << "preset.bumps = " << s.bumps << "\n";
            os << "preset.cell_tol = " << g17(s.cell_tol_rel) << "\n";
            os << "preset.residual_tol = " << g17(s.residual_tol_rel) << "\n";
            break;
        case Preset::tail_report:
            os << "preset.radii = " << list(s.radii) << "\n";
            os << "preset.refine = " << g17(s.refine) << "\n";
            os << "preset.enlarge = " << g17(s.enlarge) << "\n";
            os << "preset.stability_factor = " << g17(s.stability_factor) << "\n";
            break;
        case Preset::sandwich:
            os << "preset.r = " << g17(s.slab_r) << "\n";
            os << "preset.sandwich_tol = " << g17(s.sandwich_tol_rel) << "\n";
            break;
        case Preset::energy_report:
            os << "preset.tau = " << g17(s.tau) << "\n";
            os << "preset.energy_slack = " << g17(s.energy_slack) << "\n";
            break;
    }
    return os.str();
}

// ---- planned runs ---------------------------------------------------------------

namespace {

struct Variant {
    std::string name;
    bool is_pair = false;
    RunConfig cfg;
    // Initial-state builders; u0 empty means make_initial from cfg. v0 (pairs
    // only) receives the built u0, so rearrangements of it are expressible.
    std::function<Field(const RunConfig&)> u0;
    std::function<Field(const RunConfig&, const Field&)> v0;
};

Grid respaced(const Grid& g, double spacing) {
    std::vector<double> lo, hi, sp;
    for (int a = 0; a < g.dim(); ++a) {
        lo.push_back(g.lo(a));
        hi.push_back(g.hi(a));
        sp.push_back(spacing);
    }
    return Grid::centered(g.dim(), lo, hi, sp);
}

Grid scaled_box(const Grid& g, double factor) {
    std::vector<double> lo, hi, sp;
    for (int a = 0; a < g.dim(); ++a) {
        lo.push_back(g.lo(a) * factor);
        hi.push_back(g.hi(a) * factor);
        sp.push_back(g.spacing(a));
    }
    return Grid::centered(g.dim(), lo, hi, sp);
}

Grid refined_grid(const Grid& g, double factor) {
    std::vector<double> lo, hi, sp;
    for (int a = 0; a < g.dim(); ++a) {
        lo.push_back(g.lo(a));
        hi.push_back(g.hi(a));
        sp.push_back(g.spacing(a) / factor);
    }
    return Grid::centered(g.dim(), lo, hi, sp);
}

// Sum of one to three randomly parameterized mollifiers. Every draw happens
// unconditionally in a fixed order, so the data for pair i depends only on
// (seed, i).
Field random_mix(std::mt19937& rng, const RunConfig& base) {
    std::uniform_int_distribution<int> count_dist(1, 3);
    std::uniform_int_distribution<int> kind_dist(0, 2);
    std::uniform_real_distribution<double> width_dist(0.6, 1.6);
    std::uniform_real_distribution<double> mass_dist(0.3, 1.0);
    static constexpr InitialRecipe::Kind kinds[] = {
        InitialRecipe::Kind::gaussian, InitialRecipe::Kind::box, InitialRecipe::Kind::bump};

    double dx = 0.0;
    for (int a = 0; a < base.grid.dim(); ++a) dx = std::max(dx, base.grid.spacing(a));

    const int n = count_dist(rng);
    Field acc(base.grid, 0.0);
    for (int j = 0; j < 3; ++j) {
        InitialRecipe r;
        r.kind = kinds[kind_dist(rng)];
        r.param = std::max(width_dist(rng) * base.init.param, 3.0 * dx);
        const double m = mass_dist(rng) * base.mass;
        if (j >= n) continue;
        const Field part = make_initial(r, m, base.grid);
        for (std::int64_t i = 0; i < acc.size(); ++i) acc[i] += part[i];
    }
    return acc;
}

std::mt19937 pair_rng(unsigned seed, int index) {
    return std::mt19937(seed + 1000003u * static_cast<unsigned>(index + 1));
}

std::vector<Variant> plan(const ExperimentSpec& s) {
    std::vector<Variant> out;
    const RunConfig& base = s.base;

    switch (s.preset) {
        case Preset::heat_baseline: {
            for (double sp : s.spacings) {
                Variant v;
                v.name = "dx" + g6(sp);
                v.cfg = base;
                v.cfg.grid = respaced(base.grid, sp);
                v.cfg.convection = false;
                // Backward Euler carries an O(dt) error; keep it at the
                // O(dx^2) spatial level by shrinking the cap quadratically.
                if (base.dt_max > 0.0)
                    v.cfg.dt_max = base.dt_max * (sp / s.spacings.front()) * (sp / s.spacings.front());
                v.cfg.snapshot_times = merge_times(base.snapshot_times,
                                                   std::vector<double>{base.t_end});
                v.cfg.run_id = v.name;
                out.push_back(std::move(v));
            }
            break;
        }
        case Preset::decay_fit:
        case Preset::entropy_audit: {
            Variant v;
            v.name = "run";
            v.cfg = base;
            v.cfg.run_id = v.name;
            out.push_back(std::move(v));
            break;
        }
        case Preset::selfsim_collapse: {
            Variant v;
            v.name = "run";
            v.cfg = base;
            std::vector<double> extra;
            for (double t : s.times) {
                extra.push_back(t);
                extra.push_back(4.0 * t);
            }
            v.cfg.snapshot_times = merge_times(base.snapshot_times, extra);
            v.cfg.run_id = v.name;
            out.push_back(std::move(v));
            break;
        }
        case Preset::uniqueness: {
            for (double w : s.widths) {
                Variant v;
                v.name = "w" + g6(w);
                v.cfg = base;
                v.cfg.init.param = w;
                v.cfg.run_id = v.name;
                v.is_pair = true;
                const InitialRecipe::Kind kind_a = base.init.kind;
                const std::string alt = s.alt_init;
                v.u0 = [kind_a, w](const RunConfig& cfg) {
                    return make_initial(InitialRecipe{kind_a, w}, cfg.mass, cfg.grid);
                };
                v.v0 = [alt, w](const RunConfig& cfg, const Field&) {
                    InitialRecipe r;
                    r.kind = alt == "gaussian"      ? InitialRecipe::Kind::gaussian
                             : alt == "box"        ? InitialRecipe::Kind::box
                             : alt == "bump"       ? InitialRecipe::Kind::bump
                                                   : InitialRecipe::Kind::heat_kernel;
                    r.param = w;
                    return make_initial(r, cfg.mass, cfg.grid);
                };
                out.push_back(std::move(v));
            }
            break;
        }
        case Preset::sign_preservation: {
            for (double w : s.widths) {
                Variant v;
                v.name = "w" + g6(w);
                v.cfg = base;
                v.cfg.run_id = v.name;
                const double rel = s.amplitude_rel;
                v.u0 = [rel, w](const RunConfig& cfg) {
                    Field u = make_initial(cfg.init, cfg.mass, cfg.grid);
                    const Field d = dipole_perturbation(cfg.grid, rel * max_value(u), w);
                    for (std::int64_t i = 0; i < u.size(); ++i) u[i] += d[i];
                    return u;
                };
                out.push_back(std::move(v));
            }
            break;
        }
        case Preset::contraction: {
            for (int i = 0; i < s.pairs; ++i) {
                Variant v;
                std::ostringstream name;
                name << "pair" << std::setw(2) << std::setfill('0') << i;
                v.name = name.str();
                v.cfg = base;
                v.cfg.run_id = v.name;
                v.is_pair = true;
                const unsigned seed = s.seed;
                v.u0 = [seed, i](const RunConfig& cfg) {
                    auto rng = pair_rng(seed, 2 * i);
                    return random_mix(rng, cfg);
                };
                v.v0 = [seed, i](const RunConfig& cfg, const Field&) {
                    auto rng = pair_rng(seed, 2 * i + 1);
                    return random_mix(rng, cfg);
                };
                out.push_back(std::move(v));
            }
            break;
        }
        case Preset::comparison: {
            for (int i = 0; i < s.pairs; ++i) {
                Variant v;
                std::ostringstream name;
                name << "pair" << std::setw(2) << std::setfill('0') << i;
                v.name = name.str();
                v.cfg = base;
                v.cfg.run_id = v.name;
                v.is_pair = true;
                const unsigned seed = s.seed;
                v.u0 = [seed, i](const RunConfig& cfg) {
                    auto rng = pair_rng(seed, 2 * i);
                    return random_mix(rng, cfg);
                };
                // Ordered partner: u0 plus a nonnegative hump.
                v.v0 = [seed, i](const RunConfig& cfg, const Field& u0) {
                    auto rng = pair_rng(seed, 2 * i + 1);
                    std::uniform_real_distribution<double> mass_dist(0.2, 0.8);
                    double dx = 0.0;
                    for (int a = 0; a < cfg.grid.dim(); ++a)
                        dx = std::max(dx, cfg.grid.spacing(a));
                    InitialRecipe r;
                    r.kind = InitialRecipe::Kind::bump;
                    r.param = std::max(cfg.init.param, 3.0 * dx);
                    const Field extra = make_initial(r, mass_dist(rng) * cfg.mass, cfg.grid);
                    Field v0 = u0;
                    for (std::int64_t j = 0; j < v0.size(); ++j) v0[j] += extra[j];
                    return v0;
                };
                out.push_back(std::move(v));
            }
            break;
        }
        case Preset::tail_report: {
            std::vector<double> record;
            for (double r : s.radii) record.push_back(2.0 * r);
            auto with_tails = [&](RunConfig cfg, const std::string& name) {
                cfg.tail_radii = merge_times(cfg.tail_radii, record);
                cfg.run_id = name;
                Variant v;
                v.name = name;
                v.cfg = std::move(cfg);
                return v;
            };
            out.push_back(with_tails(base, "base"));
            {
                RunConfig cfg = base;
                cfg.grid = refined_grid(base.grid, s.refine);
                if (base.dt_max > 0.0) cfg.dt_max = base.dt_max / s.refine;
                out.push_back(with_tails(std::move(cfg), "refined"));
            }
            {
                RunConfig cfg = base;
                cfg.grid = scaled_box(base.grid, s.enlarge);
                out.push_back(with_tails(std::move(cfg), "enlarged"));
            }
            break;
        }
        case Preset::sandwich: {
            Variant v;
            v.name = "pair";
            v.cfg = base;
            v.cfg.run_id = v.name;
            v.is_pair = true;
            const double r = s.slab_r;
            v.v0 = [r](const RunConfig&, const Field& u0) { return slab_data(u0, r); };
            out.push_back(std::move(v));
            break;
        }
        case Preset::energy_report: {
            Variant v;
            v.name = "run";
            v.cfg = base;
            if (s.tau > base.t_start)
                v.cfg.snapshot_times = merge_times(base.snapshot_times,
                                                   std::vector<double>{s.tau});
            v.cfg.run_id = v.name;
            out.push_back(std::move(v));
            break;
        }
    }
    return out;
}

}  // namespace

// ---- persistence -----------------------------------------------------------------

namespace {

std::string snapshot_file(std::size_t idx) {
    std::ostringstream os;
    os << "s" << std::setw(3) << std::setfill('0') << idx << ".f64";
    return os.str();
}

std::string window_file(std::size_t idx) {
    std::ostringstream os;
    os << "w" << std::setw(3) << std::setfill('0') << idx << ".f64";
    return os.str();
}

void save_trajectory(const fs::path& dir, const Trajectory& tr, double wall_seconds) {
    fs::create_directories(dir / "snapshots");
    fs::create_directories(dir / "checkpoint");
    write_text_atomic(dir / "config.txt", run_config_text(tr.config));

    const StepSeries& s = tr.series;
    CsvTable series;
    series.header = {"t",   "dt",  "mass",     "l1",       "l2",
                     "linf", "min", "max",      "neg_mass", "boundary"};
    series.cols = {s.t,     s.dt,    s.mass,  s.l1,       s.l2,
                   s.linf,  s.min_v, s.max_v, s.neg_mass, s.boundary_mass};
    for (std::size_t j = 0; j < s.tail.size(); ++j) {
        series.header.push_back("tail" + std::to_string(j));
        series.cols.push_back(s.tail[j]);
    }
    write_csv(dir / "series.csv", series);

    CsvTable energy;
    energy.header = {"t_after", "dt", "grad_energy"};
    energy.cols = {tr.energy.t_after, tr.energy.dt, tr.energy.grad_energy};
    write_csv(dir / "energy.csv", energy);

    CsvTable snaps;
    snaps.header = {"idx", "t"};
    snaps.cols.assign(2, {});
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        snaps.cols[0].push_back(static_cast<double>(i));
        snaps.cols[1].push_back(tr.snapshots[i].first);
        write_snapshot(dir / "snapshots" / snapshot_file(i), tr.snapshots[i].second,
                       tr.snapshots[i].first, tr.run_id);
    }
    write_csv(dir / "snapshots.csv", snaps);

    if (!tr.window.t.empty()) {
        fs::create_directories(dir / "window");
        CsvTable win;
        win.header = {"idx", "t", "dt_used"};
        win.cols.assign(3, {});
        for (std::size_t i = 0; i < tr.window.t.size(); ++i) {
            win.cols[0].push_back(static_cast<double>(i));
            win.cols[1].push_back(tr.window.t[i]);
            win.cols[2].push_back(tr.window.dt_used[i]);
            write_snapshot(dir / "window" / window_file(i), tr.window.state[i], tr.window.t[i],
                           tr.run_id);
        }
        write_csv(dir / "window.csv", win);
    }

    write_snapshot(dir / "checkpoint" / "state.f64", tr.snapshots.back().second,
                   tr.snapshots.back().first, tr.run_id);

    // Written last: its presence marks the run as complete.
    std::ostringstream meta;
    meta << "steps = " << tr.steps_taken << "\n";
    meta << "wall_seconds = " << g17(wall_seconds) << "\n";
    write_text_atomic(dir / "meta.txt", meta.str());
}

bool run_complete(const fs::path& dir) { return fs::exists(dir / "meta.txt"); }

Trajectory load_trajectory(const fs::path& dir) {
    ConfigMap c = ConfigMap::parse_file(dir / "config.txt");
    Trajectory tr;
    tr.config = load_run_config(c);
    c.forbid_unknown();
    tr.run_id = tr.config.run_id;

    CsvTable series = read_csv(dir / "series.csv");
    StepSeries& s = tr.series;
    s.t = series.col("t");
    s.dt = series.col("dt");
    s.mass = series.col("mass");
    s.l1 = series.col("l1");
    s.l2 = series.col("l2");
    s.linf = series.col("linf");
    s.min_v = series.col("min");
    s.max_v = series.col("max");
    s.neg_mass = series.col("neg_mass");
    s.boundary_mass = series.col("boundary");
    for (std::size_t j = 0; j < tr.config.tail_radii.size(); ++j)
        s.tail.push_back(series.col("tail" + std::to_string(j)));

    CsvTable energy = read_csv(dir / "energy.csv");
    tr.energy.t_after = energy.col("t_after");
    tr.energy.dt = energy.col("dt");
    tr.energy.grad_energy = energy.col("grad_energy");

    CsvTable snaps = read_csv(dir / "snapshots.csv");
    for (std::size_t i = 0; i < snaps.rows(); ++i) {
        LoadedSnapshot ls = read_snapshot(dir / "snapshots" / snapshot_file(i));
        tr.snapshots.emplace_back(snaps.col("t")[i], std::move(ls.field));
    }

    if (fs::exists(dir / "window.csv")) {
        CsvTable win = read_csv(dir / "window.csv");
        for (std::size_t i = 0; i < win.rows(); ++i) {
            LoadedSnapshot ls = read_snapshot(dir / "window" / window_file(i));
            tr.window.t.push_back(win.col("t")[i]);
            tr.window.dt_used.push_back(win.col("dt_used")[i]);
            tr.window.state.push_back(std::move(ls.field));
        }
    }

    if (fs::exists(dir / "meta.txt")) {
        ConfigMap meta = ConfigMap::parse_file(dir / "meta.txt");
        tr.steps_taken = meta.get_int("steps", 0);
        meta.get_double("wall_seconds", 0.0);
    }
    return tr;
}

long load_steps(const fs::path& dir) {
    ConfigMap meta = ConfigMap::parse_file(dir / "meta.txt");
    const long steps = meta.get_int("steps", 0);
    meta.get_double("wall_seconds", 0.0);
    return steps;
}

double load_wall(const fs::path& dir) {
    ConfigMap meta = ConfigMap::parse_file(dir / "meta.txt");
    meta.get_int("steps", 0);
    return meta.get_double("wall_seconds", 0.0);
}

void save_pair(const fs::path& dir, const RunPair& pr, double wall_seconds) {
    fs::create_directories(dir);
    save_trajectory(dir / "u", pr.u, wall_seconds);
    save_trajectory(dir / "v", pr.v, wall_seconds);
    CsvTable table;
    table.header = {"t", "l1_dist", "overtake", "mass_u", "mass_v"};
    table.cols = {pr.t, pr.l1_dist, pr.overtake, pr.mass_u, pr.mass_v};
    write_csv(dir / "pair.csv", table);
    std::ostringstream meta;
    meta << "steps = " << pr.u.steps_taken << "\n";
    meta << "wall_seconds = " << g17(wall_seconds) << "\n";
    write_text_atomic(dir / "meta.txt", meta.str());
}

RunPair load_pair(const fs::path& dir) {
    RunPair pr;
    pr.u = load_trajectory(dir / "u");
    pr.v = load_trajectory(dir / "v");
    CsvTable table = read_csv(dir / "pair.csv");
    pr.t = table.col("t");
    pr.l1_dist = table.col("l1_dist");
    pr.overtake = table.col("overtake");
    pr.mass_u = table.col("mass_u");
    pr.mass_v = table.col("mass_v");
    return pr;
}

void execute_variant(const Variant& v, const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const Field u0 = v.u0 ? v.u0(v.cfg) : make_initial(v.cfg.init, v.cfg.mass, v.cfg.grid);
    if (v.is_pair) {
        const Field v0 = v.v0(v.cfg, u0);
        RunPair pr = run_coupled(v.cfg, u0, v0);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        save_pair(dir, pr, wall);
    } else {
        Trajectory tr = run_from(v.cfg, u0, v.cfg.t_start);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        save_trajectory(dir, tr, wall);
    }
}

void run_jobs(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                job(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

// ---- check evaluation ---------------------------------------------------------

bool Report::all_pass() const {
    if (!failures.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

namespace {

CheckRow make_row(std::string name, double measured, std::string relation, double lo, double hi,
                  std::string note) {
    CheckRow row;
    row.name = std::move(name);
    row.measured = measured;
    row.relation = std::move(relation);
    row.lo = lo;
    row.hi = hi;
    row.note = std::move(note);
    if (row.relation == "report") {
        row.pass = true;
    } else if (!std::isfinite(measured)) {
        row.pass = false;
    } else if (row.relation == ">=") {
        row.pass = measured >= lo;
    } else if (row.relation == "<=") {
        row.pass = measured <= hi;
    } else if (row.relation == "<") {
        row.pass = measured < hi;
    } else if (row.relation == ">") {
        row.pass = measured > lo;
    } else if (row.relation == "in") {
        row.pass = measured >= lo && measured <= hi;
    } else {
        throw std::logic_error("unknown relation " + row.relation);
    }
    return row;
}

struct EvalContext {
    const ExperimentSpec& spec;
    fs::path dir;
    Report& rep;

    fs::path runs() const { return dir / "runs"; }
    fs::path tables() const { return dir / "tables"; }

    void add_table(const std::string& name, const CsvTable& t) {
        fs::create_directories(tables());
        write_csv(tables() / name, t);
        rep.tables.push_back("tables/" + name);
    }
};

// Mass drift and snapshot index for one stored run.
void generic_run_rows(EvalContext& ctx, const std::string& label, const fs::path& dir) {
    const Trajectory tr = load_trajectory(dir);
    const auto& mass = tr.series.mass;
    if (!mass.empty()) {
        double drift = 0.0;
        for (double m : mass) drift = std::max(drift, std::abs(m - mass.front()));
        const double rel = drift / std::max(std::abs(mass.front()), 1e-300);
        ctx.rep.checks.push_back(make_row(
            "mass_drift/" + label, rel, "<=", 0.0, ctx.spec.mass_tol_rel,
            "largest relative drift of the discrete mass over the recorded series"));
    }
    CsvTable snaps = read_csv(dir / "snapshots.csv");
    const fs::path rel_dir = fs::relative(dir, ctx.dir);
    for (std::size_t i = 0; i < snaps.rows(); ++i) {
        SnapshotRef ref;
        ref.run = label;
        ref.t = snaps.col("t")[i];
        ref.file = (rel_dir / "snapshots" / snapshot_file(i)).generic_string();
        ctx.rep.snapshots.push_back(std::move(ref));
    }
}

void eval_heat_baseline(EvalContext& ctx, const std::vector<Variant>& variants) {
    std::vector<double> errs;
    CsvTable table;
    table.header = {"spacing", "l1_error"};
    table.cols.assign(2, {});
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const Variant& v = variants[i];
        const Trajectory tr = load_trajectory(ctx.runs() / v.name);
        const RunConfig& cfg = tr.config;
        const double kernel_time = cfg.init.param + (cfg.t_end - cfg.t_start);
        const Field exact = make_initial(InitialRecipe{InitialRecipe::Kind::heat_kernel,
                                                       kernel_time},
                                         cfg.mass, cfg.grid);
        const double err = l1_distance(tr.snapshots.back().second, exact);
        errs.push_back(err);
        table.cols[0].push_back(ctx.spec.spacings[i]);
        table.cols[1].push_back(err);
        ctx.rep.checks.push_back(make_row("l1_error/" + v.name, err, "report", 0, 0,
                                          "distance to the exact kernel at the final time"));
    }
    ctx.add_table("heat_error.csv", table);
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double ratio = errs[i] / errs[i + 1];
        ctx.rep.checks.push_back(make_row(
            "error_ratio/" + variants[i].name + ":" + variants[i + 1].name, ratio, "in",
            ctx.spec.ratio_lo, ctx.spec.ratio_hi,
            "second-order spatial accuracy halves the error fourfold per refinement, 25% slack"));
    }
}

void eval_decay_fit(EvalContext& ctx) {
    const Trajectory tr = load_trajectory(ctx.runs() / "run");
    const Exponents e = exponents(tr.config.grid.dim(), tr.config.flux.q);
    const double inf = std::numeric_limits<double>::infinity();

    CsvTable table;
    table.header = {"p", "slope", "theory", "stderr", "samples"};
    table.cols.assign(5, {});
    const struct {
        double p;
        const char* label;
    } norms[] = {{inf, "linf"}, {2.0, "l2"}};
    for (const auto& n : norms) {
        const DecayFit fit = decay_fit(tr, n.p, ctx.spec.fit_lo, ctx.spec.fit_hi);
        const double theory = -e.alpha * (std::isinf(n.p) ? 1.0 : 1.0 - 1.0 / n.p);
        const double tol = ctx.spec.slope_tol_rel * std::abs(theory);
        table.cols[0].push_back(std::isinf(n.p) ? 0.0 : n.p);
        table.cols[1].push_back(fit.slope);
        table.cols[2].push_back(theory);
        table.cols[3].push_back(fit.stderr_slope);
        table.cols[4].push_back(static_cast<double>(fit.samples));
        ctx.rep.checks.push_back(make_row(
            std::string("decay_slope_") + n.label, fit.slope, "in", theory - tol, theory + tol,
            "log-log fit over the configured window against the scaling exponent, 5% slack"));
    }
    ctx.add_table("decay_fit.csv", table);

    CsvTable series;
    series.header = {"t", "linf", "l2"};
    series.cols = {tr.series.t, tr.series.linf, tr.series.l2};
    ctx.add_table("decay_series.csv", series);
}

void eval_selfsim_collapse(EvalContext& ctx) {
    const Trajectory tr = load_trajectory(ctx.runs() / "run");
    const RunConfig& cfg = tr.config;
    const Exponents e = exponents(cfg.grid.dim(), cfg.flux.q);

    CsvTable table;
    table.header = {"t1", "t2", "distance"};
    table.cols.assign(3, {});
    std::vector<double> dist;
    for (double t : ctx.spec.times) {
        const double d = collapse_distance(tr, e, t, 4.0 * t);
        dist.push_back(d);
        table.cols[0].push_back(t);
        table.cols[1].push_back(4.0 * t);
        table.cols[2].push_back(d);
        ctx.rep.checks.push_back(make_row("collapse/t" + g6(t), d, "report", 0, 0,
                                          "L1 distance between rescaled profiles at t and 4t"));
    }
    ctx.add_table("collapse.csv", table);

    if (dist.size() >= 2) {
        double worst_step = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < dist.size(); ++i)
            worst_step = std::max(worst_step, dist[i + 1] - dist[i]);
        ctx.rep.checks.push_back(make_row("collapse_decreasing", worst_step, "<", 0, 0.0,
                                          "profile distances must shrink along the run"));
        ctx.rep.checks.push_back(make_row(
            "collapse_final_ratio", dist.back() / dist.front(), "<=", 0,
            ctx.spec.collapse_final_rel, "late-time collapse relative to the first probe"));
    }

    const bool marginal_applies = cfg.grid.dim() == 2 &&
                                  cfg.op.kind == OperatorKind::reduced_laplacian &&
                                  cfg.init.kind == InitialRecipe::Kind::heat_kernel;
    if (marginal_applies) {
        CsvTable marg;
        marg.header = {"t", "l1_error"};
        marg.cols.assign(2, {});
        for (const auto& [t, u] : tr.snapshots) {
            const Field m = marginal_xprime(u);
            const double kernel_time = cfg.init.param + (t - cfg.t_start);
            const Field ref = marginal_reference(m.grid(), cfg.grid.dim(), cfg.mass, kernel_time);
            const double err = l1_distance(m, ref) / cfg.mass;
            marg.cols[0].push_back(t);
            marg.cols[1].push_back(err);
            ctx.rep.checks.push_back(make_row(
                "marginal/t" + g6(t), err, "<=", 0, ctx.spec.marginal_tol_rel,
                "transverse marginal must follow the exact heat kernel, relative to mass"));
        }
        ctx.add_table("marginal.csv", marg);
    }
}

void eval_uniqueness(EvalContext& ctx, const std::vector<Variant>& variants) {
    CsvTable table;
    table.header = {"width", "initial_distance", "final_distance"};
    table.cols.assign(3, {});
    std::vector<double> finals;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        CsvTable pair = read_csv(ctx.runs() / variants[i].name / "pair.csv");
        const auto& d = pair.col("l1_dist");
        table.cols[0].push_back(ctx.spec.widths[i]);
        table.cols[1].push_back(d.front());
        table.cols[2].push_back(d.back());
        finals.push_back(d.back());
        ctx.rep.checks.push_back(make_row("distance_final/" + variants[i].name, d.back(),
                                          "report", 0, 0,
                                          "L1 distance of the two mollifications at the end"));
    }
    ctx.add_table("uniqueness.csv", table);

    if (finals.size() >= 2) {
        double worst_step = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < finals.size(); ++i)
            worst_step = std::max(worst_step, finals[i + 1] - finals[i]);
        ctx.rep.checks.push_back(make_row("distance_decreasing", worst_step, "<", 0, 0.0,
                                          "distances must shrink as the mollifier width does"));
    }
    if (finals.size() >= 3)
        ctx.rep.checks.push_back(make_row("limit_estimate", aitken_limit(finals), "report", 0, 0,
                                          "Aitken extrapolation of the distance table"));
    if (ctx.spec.distance_floor > 0.0)
        ctx.rep.checks.push_back(make_row(
            "distance_floor", finals.back(), "<=", 0, 2.0 * ctx.spec.distance_floor,
            "finest-width distance against twice the configured discretization floor"));
}

void eval_sign(EvalContext& ctx, const std::vector<Variant>& variants) {
    CsvTable table;
    table.header = {"width", "initial_neg_mass", "final_neg_mass"};
    table.cols.assign(3, {});
    std::vector<double> finals, initials;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const Trajectory tr = load_trajectory(ctx.runs() / variants[i].name);
        const auto& neg = tr.series.neg_mass;
        initials.push_back(neg.front());
        finals.push_back(neg.back());
        table.cols[0].push_back(ctx.spec.widths[i]);
        table.cols[1].push_back(neg.front());
        table.cols[2].push_back(neg.back());
        ctx.rep.checks.push_back(make_row("neg_mass_final/" + variants[i].name, neg.back(),
                                          "report", 0, 0,
                                          "negative-part mass at the end of the run"));
    }
    ctx.add_table("sign.csv", table);

    if (finals.size() >= 2) {
        double worst_step = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < finals.size(); ++i)
            worst_step = std::max(worst_step, finals[i + 1] - finals[i]);
        ctx.rep.checks.push_back(make_row(
            "neg_final_decreasing", worst_step, "<", 0, 0.0,
            "final negative mass must shrink as the perturbation support does"));
    }
    ctx.rep.checks.push_back(make_row(
        "neg_final_ratio", finals.back() / initials.back(), "<=", 0, ctx.spec.sign_final_rel,
        "finest perturbation: surviving negative mass relative to the initial amount"));
}

void eval_pairs(EvalContext& ctx, const std::vector<Variant>& variants, bool comparison) {
    CsvTable table;
    table.header = {"pair", "steps", "measured", "tolerance"};
    table.cols.assign(4, {});
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const fs::path dir = ctx.runs() / variants[i].name;
        CsvTable pair = read_csv(dir / "pair.csv");
        const long steps = load_steps(dir);
        const double lin_tol = variants[i].cfg.lin_tol;
        const double scale =
            std::max(1.0, pair.col("mass_u").front() + pair.col("mass_v").front());
        const double tol = (comparison ? 1.0 : 2.0) * static_cast<double>(steps) * lin_tol * scale;

        double measured;
        if (comparison) {
            measured = 0.0;
            for (double o : pair.col("overtake")) measured = std::max(measured, o);
        } else {
            const auto& d = pair.col("l1_dist");
            measured = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j + 1 < d.size(); ++j)
                measured = std::max(measured, d[j + 1] - d[j]);
        }
        table.cols[0].push_back(static_cast<double>(i));
        table.cols[1].push_back(static_cast<double>(steps));
        table.cols[2].push_back(measured);
        table.cols[3].push_back(tol);
        ctx.rep.checks.push_back(make_row(
            (comparison ? "overtake/" : "contraction_increase/") + variants[i].name, measured,
            "<=", 0, tol,
            comparison ? "largest mass of (u - v)^+; bound is steps x solver tolerance x scale"
                       : "largest step increase of ||u - v||_1; bound is 2 x steps x solver "
                         "tolerance x scale"));

        // Mass-difference conservation holds pairwise at the same resolution.
        const auto& mu = pair.col("mass_u");
        const auto& mv = pair.col("mass_v");
        double drift = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j)
            drift = std::max(drift, std::abs((mu[j] - mv[j]) - (mu.front() - mv.front())));
        ctx.rep.checks.push_back(make_row(
            "mass_difference_drift/" + variants[i].name, drift, "<=", 0,
            static_cast<double>(steps) * lin_tol * scale,
            "integral of u - v is conserved up to the accumulated solver tolerance"));
    }
    ctx.add_table(comparison ? "comparison.csv" : "contraction.csv", table);
}

void eval_entropy(EvalContext& ctx) {
    const Trajectory tr = load_trajectory(ctx.runs() / "run");
    if (tr.window.t.size() < 2)
        throw std::runtime_error("entropy audit: the stored window has fewer than two states");
    const double mass_scale = std::max(tr.config.mass, 1e-300);
    const std::vector<TestBump> bumps = default_test_bumps(
        tr.config.grid, tr.window.t.front(), tr.window.t.back(), ctx.spec.bumps);
    const EntropyAuditSummary fwd = audit_entropy(tr, bumps, ctx.spec.levels);

    Trajectory rev = tr;
    rev.window = reverse_window(tr.window);
    const std::vector<TestBump> rev_bumps = default_test_bumps(
        rev.config.grid, rev.window.t.front(), rev.window.t.back(), ctx.spec.bumps);
    const EntropyAuditSummary bwd = audit_entropy(rev, rev_bumps, ctx.spec.levels);

    ctx.rep.checks.push_back(make_row(
        "entropy_cell_min", fwd.min_cell_check, ">=", -ctx.spec.cell_tol_rel * mass_scale, 0,
        "worst per-cell production over all levels, relative tolerance times mass"));
    ctx.rep.checks.push_back(make_row(
        "kruzhkov_min", fwd.min_residual, ">=", -ctx.spec.residual_tol_rel * mass_scale, 0,
        "worst weighted residual over levels x test functions"));
    ctx.rep.checks.push_back(make_row(
        "dual_route_gap", fwd.dual_route_gap, "<=", 0, 1e-8 * mass_scale,
        "summed-by-parts and per-cell evaluations agree to rounding"));
    ctx.rep.checks.push_back(make_row("theta_spread_ok", fwd.theta_spread_ok ? 1.0 : 0.0, ">=",
                                      1.0, 0,
                                      "explicit diffusion share respected its stability bound"));
    ctx.rep.checks.push_back(make_row("flux_gap", fwd.flux_gap, "report", 0, 0,
                                      "regularization gap: eta^(q/2) times the support measure"));
    ctx.rep.checks.push_back(make_row(
        "reversed_run_fails", bwd.min_residual, "<", 0, -ctx.spec.residual_tol_rel * mass_scale,
        "time-reversed states must violate the inequality beyond its tolerance"));

    CsvTable table;
    table.header = {"cell_min", "residual_min", "dual_route_gap", "flux_gap", "pairs",
                    "reversed_residual_min"};
    table.cols = {{fwd.min_cell_check},
                  {fwd.min_residual},
                  {fwd.dual_route_gap},
                  {fwd.flux_gap},
                  {static_cast<double>(fwd.pairs)},
                  {bwd.min_residual}};
    ctx.add_table("entropy.csv", table);

    CsvTable levels;
    levels.header = {"level"};
    levels.cols = {fwd.levels};
    ctx.add_table("entropy_levels.csv", levels);
}

void eval_tail(EvalContext& ctx) {
    const char* names[] = {"base", "refined", "enlarged"};
    std::map<std::string, std::vector<TailRow>> rows;
    for (const char* n : names) {
        const Trajectory tr = load_trajectory(ctx.runs() / n);
        rows[n] = tail_report(tr, ctx.spec.radii);
    }
    CsvTable table;
    table.header = {"radius", "c_base", "c_refined", "c_enlarged"};
    table.cols.assign(4, {});
    for (std::size_t i = 0; i < ctx.spec.radii.size(); ++i) {
        table.cols[0].push_back(ctx.spec.radii[i]);
        table.cols[1].push_back(rows["base"][i].fitted_c);
        table.cols[2].push_back(rows["refined"][i].fitted_c);
        table.cols[3].push_back(rows["enlarged"][i].fitted_c);
        ctx.rep.checks.push_back(make_row("tail_c/base/r" + g6(ctx.spec.radii[i]),
                                          rows["base"][i].fitted_c, "report", 0, 0,
                                          "worst measured tail over the scaling bound"));
        for (const char* other : {"refined", "enlarged"}) {
            const double c0 = rows["base"][i].fitted_c;
            const double c1 = rows[other][i].fitted_c;
            const double ratio = c0 == 0.0 && c1 == 0.0
                                     ? 1.0
                                     : c1 / std::max(c0, 1e-300);
            ctx.rep.checks.push_back(make_row(
                "tail_c_stability/" + std::string(other) + "/r" + g6(ctx.spec.radii[i]), ratio,
                "in", 1.0 / ctx.spec.stability_factor, ctx.spec.stability_factor,
                "fitted constant must be stable under refinement and domain enlargement"));
        }
    }
    ctx.add_table("tail.csv", table);
}

void eval_sandwich(EvalContext& ctx) {
    const RunPair pr = load_pair(ctx.runs() / "pair");
    const double violation = primitive_sandwich(pr, ctx.spec.slab_r);
    ctx.rep.checks.push_back(make_row(
        "sandwich_violation", violation, "<=", 0, ctx.spec.sandwich_tol_rel * pr.u.config.mass,
        "largest breach of the shifted-primitive ordering, relative tolerance times mass"));
    CsvTable table;
    table.header = {"t", "l1_dist"};
    table.cols = {pr.t, pr.l1_dist};
    ctx.add_table("sandwich.csv", table);
}

void eval_energy(EvalContext& ctx) {
    const Trajectory tr = load_trajectory(ctx.runs() / "run");
    const double tau = ctx.spec.tau > tr.config.t_start ? ctx.spec.tau : tr.config.t_start;
    const EnergyCheck ec = energy_check(tr, tau);
    ctx.rep.checks.push_back(make_row(
        "energy_integral", ec.integral, "<=", 0, ec.budget * (1.0 + ctx.spec.energy_slack),
        "time-integrated squared gradient against half the squared L2 norm at tau"));
    ctx.rep.checks.push_back(make_row("energy_fitted_const", ec.fitted_const, "report", 0, 0,
                                      "integral over the scaling prediction"));
    CsvTable table;
    table.header = {"tau", "integral", "budget", "fitted_const"};
    table.cols = {{tau}, {ec.integral}, {ec.budget}, {ec.fitted_const}};
    ctx.add_table("energy_integral.csv", table);
}

Report evaluate_from_dir(const ExperimentSpec& spec, const fs::path& dir) {
    Report rep;
    rep.run_id = spec.base.run_id;
    rep.preset = spec.preset;
    rep.version = code_version();
    rep.config_hash = config_hash(spec);

    const std::vector<Variant> variants = plan(spec);
    EvalContext ctx{spec, dir, rep};

    bool complete = true;
    for (const Variant& v : variants) {
        const fs::path vdir = ctx.runs() / v.name;
        if (!run_complete(vdir)) {
            rep.failures.push_back(v.name + ": missing or incomplete artifacts");
            complete = false;
            continue;
        }
        try {
            if (v.is_pair) {
                generic_run_rows(ctx, v.name + "/u", vdir / "u");
                generic_run_rows(ctx, v.name + "/v", vdir / "v");
            } else {
                generic_run_rows(ctx, v.name, vdir);
            }
        } catch (const std::exception& e) {
            rep.failures.push_back(v.name + ": " + e.what());
            complete = false;
        }
    }

    if (complete) {
        try {
            switch (spec.preset) {
                case Preset::heat_baseline: eval_heat_baseline(ctx, variants); break;
                case Preset::decay_fit: eval_decay_fit(ctx); break;
                case Preset::selfsim_collapse: eval_selfsim_collapse(ctx); break;
                case Preset::uniqueness: eval_uniqueness(ctx, variants); break;
                case Preset::sign_preservation: eval_sign(ctx, variants); break;
                case Preset::contraction: eval_pairs(ctx, variants, false); break;
                case Preset::comparison: eval_pairs(ctx, variants, true); break;
                case Preset::entropy_audit: eval_entropy(ctx); break;
                case Preset::tail_report: eval_tail(ctx); break;
                case Preset::sandwich: eval_sandwich(ctx); break;
                case Preset::energy_report: eval_energy(ctx); break;
            }
        } catch (const std::exception& e) {
            rep.failures.push_back(std::string("check evaluation: ") + e.what());
        }
    }
    return rep;
}

}  // namespace

// ---- report text -----------------------------------------------------------------

std::string Report::to_text() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "fastconv report\n";
    os << "id = " << run_id << "\n";
    os << "preset = " << preset_name(preset) << "\n";
    os << "version = " << version << "\n";
    os << "config = " << config_hash << "\n";
    os << "wall_seconds = " << wall_seconds << "\n";
    os << "pass = " << (all_pass() ? "true" : "false") << "\n";
    os << "\n[checks]\n";
    for (const auto& c : checks) {
        os << c.name << " | measured= " << c.measured << " | " << c.relation;
        if (c.relation == ">=" || c.relation == ">")
            os << " " << c.lo;
        else if (c.relation == "<=" || c.relation == "<")
            os << " " << c.hi;
        else if (c.relation == "in")
            os << " [" << c.lo << ", " << c.hi << "]";
        os << " | " << (c.pass ? "pass" : "FAIL") << " | " << c.note << "\n";
    }
    os << "\n[tables]\n";
    for (const auto& t : tables) os << t << "\n";
    os << "\n[snapshots]\n";
    for (const auto& s : snapshots) os << s.run << " | t= " << s.t << " | " << s.file << "\n";
    if (!failures.empty()) {
        os << "\n[failures]\n";
        for (const auto& f : failures) os << f << "\n";
    }
    return os.str();
}

// ---- execute / audit / resume ------------------------------------------------------

namespace {

fs::path locate_run_dir(const fs::path& path) {
    if (fs::exists(path / "config.txt")) return path;
    // Accept a checkpoint directory inside a run: runs/<name>/checkpoint.
    fs::path p = fs::absolute(path);
    for (int up = 0; up < 4 && p.has_parent_path(); ++up) {
        p = p.parent_path();
        if (fs::exists(p / "config.txt") && fs::exists(p / "runs")) return p;
    }
    throw std::invalid_argument("no experiment found at " + path.string() +
                                " (expected a run directory containing config.txt)");
}

Report finalize_report(const ExperimentSpec& spec, const fs::path& dir, double wall) {
    Report rep = evaluate_from_dir(spec, dir);
    rep.wall_seconds = wall;
    write_text_atomic(dir / "report.txt", rep.to_text());
    return rep;
}

// Key/value view of a dumped run config, for deciding whether a stored run
// can be continued rather than redone.
std::map<std::string, std::string> config_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

enum class StoredState { missing, stale, complete, extendable };

StoredState classify_stored_run(const fs::path& dir, const RunConfig& want) {
    if (!run_complete(dir)) return StoredState::missing;
    std::map<std::string, std::string> have, target;
    try {
        have = config_kv(read_text_file(dir / "config.txt"));
    } catch (const std::exception&) {
        return StoredState::missing;
    }
    target = config_kv(run_config_text(want));
    for (const auto& [k, v] : target) {
        if (k == "time.end" || k == "output.snapshots") continue;
        auto it = have.find(k);
        if (it == have.end() || it->second != v) return StoredState::stale;
    }
    for (const auto& [k, v] : have)
        if (!target.count(k)) return StoredState::stale;

    if (!fs::exists(dir / "checkpoint" / "state.f64")) return StoredState::missing;
    const LoadedSnapshot ck = read_snapshot(dir / "checkpoint" / "state.f64");
    if (ck.meta.time >= want.t_end - time_eps * std::max(1.0, want.t_end))
        return have.at("time.end") == target.at("time.end") &&
                       have.at("output.snapshots") == target.at("output.snapshots")
                   ? StoredState::complete
                   : StoredState::stale;

    // A continued run replays the same series sampling only if it restarts at
    // a snapshot event of the new schedule; otherwise redo from scratch.
    bool at_event = false;
    for (double t : want.snapshot_times)
        if (std::abs(t - ck.meta.time) <= time_eps * std::max(1.0, std::abs(t))) at_event = true;
    return at_event ? StoredState::extendable : StoredState::stale;
}

Trajectory merge_continuation(Trajectory old, Trajectory fresh, double seam) {
    Trajectory merged;
    merged.config = fresh.config;
    merged.run_id = fresh.run_id;
    merged.steps_taken = old.steps_taken + fresh.steps_taken;
    const double eps = time_eps * std::max(1.0, seam);

    merged.snapshots = std::move(old.snapshots);
    for (auto& [t, f] : fresh.snapshots)
        if (t > seam + eps) merged.snapshots.emplace_back(t, std::move(f));

    const StepSeries& a = old.series;
    const StepSeries& b = fresh.series;
    auto append_tail = [&](auto& dst, const auto& src_old, const auto& src_new) {
        dst = src_old;
        for (std::size_t i = 0; i < b.t.size(); ++i)
            if (b.t[i] > seam + eps) dst.push_back(src_new[i]);
    };
    StepSeries& s = merged.series;
    append_tail(s.t, a.t, b.t);
    append_tail(s.dt, a.dt, b.dt);
    append_tail(s.mass, a.mass, b.mass);
    append_tail(s.l1, a.l1, b.l1);
    append_tail(s.l2, a.l2, b.l2);
    append_tail(s.linf, a.linf, b.linf);
    append_tail(s.min_v, a.min_v, b.min_v);
    append_tail(s.max_v, a.max_v, b.max_v);
    append_tail(s.neg_mass, a.neg_mass, b.neg_mass);
    append_tail(s.boundary_mass, a.boundary_mass, b.boundary_mass);
    s.tail.resize(a.tail.size());
    for (std::size_t j = 0; j < a.tail.size(); ++j)
        append_tail(s.tail[j], a.tail[j], b.tail[j]);

    merged.energy = std::move(old.energy);
    for (std::size_t i = 0; i < fresh.energy.t_after.size(); ++i) {
        merged.energy.t_after.push_back(fresh.energy.t_after[i]);
        merged.energy.dt.push_back(fresh.energy.dt[i]);
        merged.energy.grad_energy.push_back(fresh.energy.grad_energy[i]);
    }

    merged.window = std::move(old.window);
    const double last_window_t =
        merged.window.t.empty() ? -std::numeric_limits<double>::infinity()
                                : merged.window.t.back();
    for (std::size_t i = 0; i < fresh.window.t.size(); ++i) {
        if (fresh.window.t[i] <= last_window_t + eps) continue;
        merged.window.t.push_back(fresh.window.t[i]);
        merged.window.dt_used.push_back(fresh.window.dt_used[i]);
        merged.window.state.push_back(std::move(fresh.window.state[i]));
    }
    return merged;
}

void continue_variant(const Variant& v, const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    Trajectory old = load_trajectory(dir);
    const double old_wall = load_wall(dir);
    const LoadedSnapshot ck = read_snapshot(dir / "checkpoint" / "state.f64");
    Trajectory fresh = run_from(v.cfg, ck.field, ck.meta.time);
    Trajectory merged = merge_continuation(std::move(old), std::move(fresh), ck.meta.time);

    const fs::path tmp = dir.parent_path() / (dir.filename().string() + ".new");
    fs::remove_all(tmp);
    const double wall =
        old_wall + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_trajectory(tmp, merged, wall);
    const fs::path retired = dir.parent_path() / (dir.filename().string() + ".old");
    fs::remove_all(retired);
    fs::rename(dir, retired);
    fs::rename(tmp, dir);
    fs::remove_all(retired);
}

}  // namespace

Report execute(const ExperimentSpec& spec, int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    if (workers <= 0) workers = default_workers();

    const std::vector<Variant> variants = plan(spec);
    const fs::path final_dir = spec.out_root / spec.base.run_id;
    const fs::path tmp_dir = spec.out_root / (".partial-" + spec.base.run_id);
    fs::remove_all(tmp_dir);
    fs::create_directories(tmp_dir / "runs");
    write_text_atomic(tmp_dir / "config.txt", dump_config(spec));

    std::vector<std::string> errors(variants.size());
    run_jobs(variants.size(), workers, [&](std::size_t i) {
        try {
            execute_variant(variants[i], tmp_dir / "runs" / variants[i].name);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Report rep = finalize_report(spec, tmp_dir, wall);
    for (std::size_t i = 0; i < variants.size(); ++i)
        if (!errors[i].empty())
            rep.failures.push_back(variants[i].name + ": " + errors[i]);
    if (!rep.failures.empty()) write_text_atomic(tmp_dir / "report.txt", rep.to_text());

    fs::remove_all(final_dir);
    fs::rename(tmp_dir, final_dir);
    return rep;
}

Report audit(const fs::path& run_dir) {
    const fs::path dir = locate_run_dir(run_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentSpec spec = parse_config(dir / "config.txt");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return finalize_report(spec, dir, wall);
}

Report resume(const fs::path& path, int workers) {
    const fs::path dir = locate_run_dir(path);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec = parse_config(dir / "config.txt");
    if (workers <= 0) workers = default_workers();

    const std::vector<Variant> variants = plan(spec);
    std::vector<std::string> errors(variants.size());
    run_jobs(variants.size(), workers, [&](std::size_t i) {
        const Variant& v = variants[i];
        const fs::path vdir = dir / "runs" / v.name;
        try {
            if (v.is_pair) {
                // Coupled runs have no continuation point; redo unless intact
                // and matching.
                const bool ok = run_complete(vdir) &&
                                classify_stored_run(vdir / "u", v.cfg) == StoredState::complete;
                if (!ok) {
                    fs::remove_all(vdir);
                    execute_variant(v, vdir);
                }
                return;
            }
            switch (classify_stored_run(vdir, v.cfg)) {
                case StoredState::complete: return;
                case StoredState::extendable: continue_variant(v, vdir); return;
                case StoredState::missing:
                case StoredState::stale:
                    fs::remove_all(vdir);
                    execute_variant(v, vdir);
                    return;
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Report rep = finalize_report(spec, dir, wall);
    for (std::size_t i = 0; i < variants.size(); ++i)
        if (!errors[i].empty())
            rep.failures.push_back(variants[i].name + ": " + errors[i]);
    if (!rep.failures.empty()) write_text_atomic(dir / "report.txt", rep.to_text());
    return rep;
}

// ---- plot data -------------------------------------------------------------------

void emit_plotdata(const fs::path& run_dir) {
    const fs::path dir = locate_run_dir(run_dir);
    const ExperimentSpec spec = parse_config(dir / "config.txt");
    const fs::path out = dir / "plotdata";
    fs::create_directories(out);

    // Every report table doubles as plot input.
    std::vector<fs::path> tables;
    if (fs::exists(dir / "tables"))
        for (const auto& e : fs::directory_iterator(dir / "tables"))
            if (e.path().extension() == ".csv") tables.push_back(e.path());
    std::sort(tables.begin(), tables.end());
    for (const auto& t : tables) write_text_atomic(out / t.filename(), read_text_file(t));

    if (spec.preset == Preset::decay_fit) {
        const CsvTable series = read_csv(dir / "runs" / "run" / "series.csv");
        for (const char* norm : {"linf", "l2"}) {
            CsvTable ll;
            ll.header = {"log10_t", std::string("log10_") + norm};
            ll.cols.assign(2, {});
            const auto& t = series.col("t");
            const auto& v = series.col(norm);
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (!(t[i] > 0.0) || !(v[i] > 0.0)) continue;
                ll.cols[0].push_back(std::log10(t[i]));
                ll.cols[1].push_back(std::log10(v[i]));
            }
            write_csv(out / (std::string("loglog_") + norm + ".csv"), ll);
        }
    }

    if (spec.preset == Preset::selfsim_collapse) {
        const Trajectory tr = load_trajectory(dir / "runs" / "run");
        const Exponents e = exponents(tr.config.grid.dim(), tr.config.flux.q);
        std::size_t idx = 0;
        for (const auto& [t, u] : tr.snapshots) {
            ++idx;
            if (!(t > tr.config.t_start)) continue;
            const Grid pg = profile_grid_for(tr.config.grid, e, t);
            const Field v = rescale(u, t, e, pg);
            CsvTable slice;
            slice.header = {"xi_n", "v"};
            slice.cols.assign(2, {});
            const int axn = pg.axis_xn();
            const std::int64_t row = pg.dim() == 2 ? pg.cells(0) / 2 : 0;
            for (std::int64_t i = 0; i < pg.cells(axn); ++i) {
                slice.cols[0].push_back(pg.center(axn, i));
                slice.cols[1].push_back(pg.dim() == 2 ? v[v.index(row, i)] : v[i]);
            }
            std::ostringstream name;
            name << "profile_" << std::setw(2) << std::setfill('0') << idx << "_t" << g6(t)
                 << ".csv";
            write_csv(out / name.str(), slice);
        }
    }
}

}  // namespace fastconv
