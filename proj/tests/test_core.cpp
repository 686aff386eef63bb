#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "csp/archive.hpp"
#include "csp/csv.hpp"
#include "csp/rng.hpp"
#include "csp/sample.hpp"
#include "csp/units.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace csp;
using testutil::TempDir;
using testutil::random_tensor;
namespace fs = std::filesystem;

namespace {

Sample make_sample(Rng& rng, const std::string& id, const GridShape& gs, bool with_statics = false) {
    return testutil::random_sample(rng, id, gs, with_statics);
}

}  // namespace

TEST_CASE("downsample of constant tensor") {
    Tensor3 t(30, 4, 4, 0.4f);
    Series s = downsample_channel(t);
    REQUIRE(s.size() == 30);
    for (double v : s) CHECK(v == doctest::Approx(0.4).epsilon(1e-7));
}

TEST_CASE("downsample 1x2x2 example") {
    Tensor3 t(1, 2, 2);
    t.at(0, 0, 0) = 1.0f;
    t.at(0, 0, 1) = 2.0f;
    t.at(0, 1, 0) = 3.0f;
    t.at(0, 1, 1) = 4.0f;
    Series s = downsample_channel(t);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == doctest::Approx(2.5));
}

TEST_CASE("downsample matches naive double loop") {
    Rng rng(23);
    Tensor3 t = random_tensor(rng, 5, 8, 8, -3.0, 3.0);
    Series got = downsample_channel(t);
    Series expect = oracles::downsample_naive(t);
    REQUIRE(got.size() == expect.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - expect[k]) < 1e-12);
}

TEST_CASE("downsample rejects non-finite input") {
    Tensor3 t(2, 2, 2, 1.0f);
    t.at(1, 0, 1) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(downsample_channel(t), NonFiniteError);
}

TEST_CASE("unit conversion fixed points") {
    using namespace csp::units;
    CHECK(normalized_to_physical(0.1, PhysVar::Precipitation) == doctest::Approx(5.0));
    CHECK(normalized_to_physical(0.6, PhysVar::Pressure) == doctest::Approx(1020.0));
    CHECK(normalized_to_physical(0.5, PhysVar::Temperature) == doctest::Approx(0.0));
    CHECK(physical_to_normalized(5.0, PhysVar::Precipitation) == doctest::Approx(0.1));
}

TEST_CASE("delta conversion forms") {
    using namespace csp::units;
    CHECK(physical_delta_to_normalized(10.0, PhysVar::Temperature) == doctest::Approx(0.1));
    CHECK(physical_delta_to_normalized(4.0, PhysVar::Precipitation) == doctest::Approx(0.08));
    CHECK(physical_delta_to_normalized(20.0, PhysVar::Pressure) == doctest::Approx(0.1));
}

TEST_CASE("conversions are exact inverse pairs") {
    using namespace csp::units;
    Rng rng(31);
    for (PhysVar var : {PhysVar::Temperature, PhysVar::Pressure, PhysVar::Precipitation}) {
        for (int i = 0; i < 1000; ++i) {
            const double v = rng.uniform(-2.0, 2.0);
            CHECK(std::abs(physical_to_normalized(normalized_to_physical(v, var), var) - v) < 1e-12);
            const double dv = rng.uniform(-50.0, 50.0);
            CHECK(std::abs(normalized_delta_to_physical(physical_delta_to_normalized(dv, var), var) - dv) <
                  1e-12);
        }
    }
}

TEST_CASE("archive round-trips random data bitwise") {
    TempDir dir;
    Rng rng(47);
    Dataset ds;
    ds.name = "roundtrip";
    ds.shape = GridShape{6, 4, 5, 5};
    for (int i = 0; i < 3; ++i) ds.samples.push_back(make_sample(rng, "s" + std::to_string(i), ds.shape, true));
    write_archive(ds, dir.path);
    Dataset back = load_archive(dir.path);
    REQUIRE(back.samples.size() == 3);
    CHECK(back.shape == ds.shape);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.samples[i].id() == ds.samples[i].id());
        for (Channel c : kAllChannels)
            CHECK(back.samples[i].base_channel(c).raw() == ds.samples[i].base_channel(c).raw());
        CHECK(back.samples[i].statics().at("dem") == ds.samples[i].statics().at("dem"));
    }
}

TEST_CASE("archive with wrong blob length reports ShapeMismatch") {
    TempDir dir;
    Rng rng(53);
    Dataset ds;
    ds.shape = GridShape{30, 20, 2, 2};
    ds.samples.push_back(make_sample(rng, "bad", ds.shape));
    write_archive(ds, dir.path);
    // truncate one blob to t=29
    const fs::path blob = dir.path / "bad" / "p.f32";
    fs::resize_file(blob, 29 * 2 * 2 * sizeof(float));
    CHECK_THROWS_AS(load_archive(dir.path), ShapeMismatchError);
}

TEST_CASE("missing manifest reports ManifestMissing") {
    TempDir dir;
    CHECK_THROWS_AS(load_archive(dir.path / "nope"), ManifestMissingError);
}

TEST_CASE("NaN blob reports NonFinite with sample id") {
    TempDir dir;
    Rng rng(59);
    Dataset ds;
    ds.shape = GridShape{3, 2, 2, 2};
    ds.samples.push_back(make_sample(rng, "nanny", ds.shape));
    write_archive(ds, dir.path);
    const fs::path blob = dir.path / "nanny" / "r.f32";
    std::vector<float> vals = read_f32_blob(blob, 3 * 2 * 2);
    vals[5] = std::numeric_limits<float>::infinity();
    write_f32_blob(blob, vals.data(), vals.size());
    try {
        load_archive(dir.path);
        FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
        CHECK(std::string(e.what()).find("nanny") != std::string::npos);
    }
}

TEST_CASE("series CSV export format") {
    TempDir dir;
    const fs::path p = dir.path / "series.csv";
    write_series_csv(p, Series{0.5, 1.25, -3.0});
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "timestep,value");
    std::getline(in, line);
    CHECK(line == "0,0.5");
    std::getline(in, line);
    CHECK(line == "1,1.25");
    std::getline(in, line);
    CHECK(line == "2,-3");
}

TEST_CASE("format_double round-trips") {
    Rng rng(61);
    for (int i = 0; i < 200; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, static_cast<double>(rng.next_below(7)) - 3.0);
        CHECK(parse_double(format_double(v)) == v);
    }
}
