#include "fastconv/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fastconv {

namespace {

std::string utc_now_iso8601() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// 17 significant digits round-trip an IEEE double exactly.
std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::filesystem::path meta_path_for(const std::filesystem::path& data_path) {
    std::filesystem::path p = data_path;
    p.replace_extension(".meta");
    return p;
}

void write_doubles_le(std::ostream& os, std::span<const double> v) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double d : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            char b[8];
            for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
            os.write(b, 8);
        }
    }
}

void read_doubles_le(std::istream& is, std::vector<double>& v) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double& d : v) {
            char b[8];
            is.read(b, 8);
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[k])) << (8 * k);
            std::memcpy(&d, &bits, 8);
        }
    }
}

}  // namespace

void write_snapshot(const std::filesystem::path& data_path, const Field& f, double time,
                    const std::string& run_id) {
    const Grid& g = f.grid();
    {
        std::ofstream os(data_path, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("snapshot: cannot open " + data_path.string());
        write_doubles_le(os, f.values());
        if (!os) throw std::runtime_error("snapshot: write failed for " + data_path.string());
    }
    std::ostringstream meta;
    meta << "format fastconv-field-1\n";
    meta << "dim " << g.dim() << "\n";
    meta << "cells";
    for (int a = 0; a < g.dim(); ++a) meta << ' ' << g.cells(a);
    meta << "\nspacing";
    for (int a = 0; a < g.dim(); ++a) meta << ' ' << fmt_double(g.spacing(a));
    meta << "\norigin";
    for (int a = 0; a < g.dim(); ++a) meta << ' ' << fmt_double(g.origin(a));
    meta << "\ntime " << fmt_double(time) << "\n";
    meta << "run_id " << (run_id.empty() ? "unnamed" : run_id) << "\n";
    meta << "written_at " << utc_now_iso8601() << "\n";
    std::ofstream ms(meta_path_for(data_path), std::ios::trunc);
    if (!ms) throw std::runtime_error("snapshot: cannot open " + meta_path_for(data_path).string());
    ms << meta.str();
    if (!ms) throw std::runtime_error("snapshot: write failed for " + meta_path_for(data_path).string());
}

LoadedSnapshot read_snapshot(const std::filesystem::path& data_path) {
    const std::filesystem::path mp = meta_path_for(data_path);
    std::ifstream ms(mp);
    if (!ms) throw std::runtime_error("snapshot: missing sidecar " + mp.string());

    int dim = 0;
    std::vector<std::int64_t> cells;
    std::vector<double> spacing, origin;
    double time = 0.0;
    std::string run_id = "unnamed";
    std::string written_at;
    bool saw_format = false;

    std::string line;
    int lineno = 0;
    while (std::getline(ms, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key.empty() || key[0] == '#') continue;
        auto fail = [&](const std::string& what) -> std::runtime_error {
            return std::runtime_error(mp.string() + ":" + std::to_string(lineno) + ": " + what);
        };
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "fastconv-field-1") throw fail("unsupported format '" + fmt + "'");
            saw_format = true;
        } else if (key == "dim") {
            if (!(ls >> dim)) throw fail("bad dim");
        } else if (key == "cells") {
            std::int64_t n;
            while (ls >> n) cells.push_back(n);
        } else if (key == "spacing") {
            double h;
            while (ls >> h) spacing.push_back(h);
        } else if (key == "origin") {
            double o;
            while (ls >> o) origin.push_back(o);
        } else if (key == "time") {
            if (!(ls >> time)) throw fail("bad time");
        } else if (key == "run_id") {
            ls >> run_id;
        } else if (key == "written_at") {
            ls >> written_at;
        } else {
            throw fail("unknown key '" + key + "'");
        }
    }
    if (!saw_format) throw std::runtime_error(mp.string() + ": missing format line");
    if (dim < 1 || dim > max_dim)
        throw std::runtime_error(mp.string() + ": dim " + std::to_string(dim) + " out of range");
    if (static_cast<int>(cells.size()) != dim || static_cast<int>(spacing.size()) != dim ||
        static_cast<int>(origin.size()) != dim)
        throw std::runtime_error(mp.string() + ": cells/spacing/origin arity does not match dim");

    std::array<std::int64_t, max_dim> c{1, 1};
    std::array<double, max_dim> h{1.0, 1.0};
    std::array<double, max_dim> o{0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        c[static_cast<std::size_t>(a)] = cells[static_cast<std::size_t>(a)];
        h[static_cast<std::size_t>(a)] = spacing[static_cast<std::size_t>(a)];
        o[static_cast<std::size_t>(a)] = origin[static_cast<std::size_t>(a)];
    }
    Grid grid(dim, c, h, o);

    std::ifstream is(data_path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + data_path.string());
    is.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(is.tellg());
    const auto expect = static_cast<std::uint64_t>(grid.cell_count()) * sizeof(double);
    if (bytes != expect)
        throw std::runtime_error("snapshot: " + data_path.string() + " holds " + std::to_string(bytes) +
                                 " bytes, expected " + std::to_string(expect));
    is.seekg(0, std::ios::beg);
    std::vector<double> values(static_cast<std::size_t>(grid.cell_count()));
    read_doubles_le(is, values);
    if (!is) throw std::runtime_error("snapshot: short read from " + data_path.string());

    LoadedSnapshot out{Field(grid, std::move(values)), SnapshotMeta{grid, time, run_id, written_at}};
    return out;
}

}  // namespace fastconv
