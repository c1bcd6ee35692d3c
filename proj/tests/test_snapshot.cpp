#include <doctest.h>

#include <fastconv/snapshot.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

using namespace fastconv;
namespace fs = std::filesystem;

TEST_CASE("snapshots round-trip bit for bit") {
    const double lo[] = {-1.0, -2.0}, hi[] = {1.0, 2.0}, s[] = {0.25, 0.5};
    Grid g = Grid::centered(2, lo, hi, s);
    Field f(g);
    // awkward values: signed zero, denormal, huge, irrational
    f[0] = -0.0;
    f[1] = 5e-324;
    f[2] = 1.7976931348623157e308;
    f[3] = std::acos(-1.0);
    f[4] = -1.0 / 3.0;
    for (std::int64_t i = 5; i < f.size(); ++i) f[i] = std::sin(static_cast<double>(i)) * 1e-7;

    fs::path dir = fs::temp_directory_path() / "fastconv_snapshot_test";
    fs::create_directories(dir);
    fs::path file = dir / "s000.f64";
    write_snapshot(file, f, 0.625, "trial");

    LoadedSnapshot back = read_snapshot(file);
    CHECK(back.meta.time == 0.625);
    CHECK(back.meta.run_id == "trial");
    CHECK(back.meta.grid == g);
    REQUIRE(back.field.size() == f.size());
    CHECK(std::memcmp(back.field.values().data(), f.values().data(),
                      sizeof(double) * static_cast<std::size_t>(f.size())) == 0);
    CHECK(std::signbit(back.field[0]));

    fs::remove_all(dir);
}

TEST_CASE("snapshot loading validates the sidecar") {
    fs::path dir = fs::temp_directory_path() / "fastconv_snapshot_test2";
    fs::create_directories(dir);

    CHECK_THROWS(read_snapshot(dir / "absent.f64"));

    const double lo[] = {-1.0}, hi[] = {1.0}, s[] = {0.25};
    Grid g = Grid::centered(1, lo, hi, s);
    Field f(g, 1.0);
    fs::path file = dir / "s000.f64";
    write_snapshot(file, f, 0.0, "x");
    // truncated payload must not load silently
    fs::resize_file(file, 3 * sizeof(double));
    CHECK_THROWS(read_snapshot(file));

    fs::remove_all(dir);
}
