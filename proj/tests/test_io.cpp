#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <doctest.h>

#include "uvt/errors.hpp"
#include "uvt/io.hpp"
#include "uvt/keyvalue.hpp"

using namespace uvt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "uvt_io_test";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("key-value parsing") {
    const auto kv = KeyValues::parse("# header\nalpha = 0.5\n\n name=  disk  # trailing\nlist = 1, 2.5,3\nflag = true\n");
    CHECK(kv.get_double("alpha") == 0.5);
    CHECK(kv.get("name") == "disk");
    CHECK(kv.get_list("list") == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(kv.get_bool_or("flag", false));
    CHECK(kv.get_int_or("missing", 7) == 7);
    CHECK_FALSE(kv.find("missing"));
    CHECK_THROWS_AS((void)kv.get("missing"), InvalidInput);
    CHECK_THROWS_AS((void)KeyValues::parse("a = 1\na = 2\n"), InvalidInput);
    CHECK_THROWS_AS((void)KeyValues::parse("no equals sign\n"), InvalidInput);
    CHECK_THROWS_AS((void)KeyValues::parse("x = abc\n").get_double("x"), InvalidInput);
    CHECK(KeyValues::parse(kv.to_string()).entries() == kv.entries());
}

TEST_CASE("shortest round-trip doubles") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, std::numeric_limits<double>::max()})
        CHECK(io::parse_double(io::format_double(v)) == v);
    CHECK(io::format_double(0.1) == "0.1");
    CHECK_THROWS_AS((void)io::parse_double("1.5x"), InvalidInput);
}

TEST_CASE("PGM round trip") {
    const auto img = make_phantom(PhantomKind::SheppLogan, 32);
    const auto path = scratch("p.pgm");
    io::write_pgm(path, img);
    const auto back = io::read_pgm(path);
    CHECK(back.size() == 32);
    CHECK((back.pixels - img.pixels).cwiseAbs().maxCoeff() < 1.0 / 65535);

    io::write_pgm(path, img, 255);
    const auto eight = io::read_pgm(path);
    CHECK(eight.pixels.maxCoeff() == 1.0);
    CHECK((eight.pixels - img.pixels).cwiseAbs().maxCoeff() <= 0.5 / 255 + 1e-12);

    std::ofstream(scratch("rect.pgm"), std::ios::binary) << "P5\n4 3\n255\n" << std::string(12, '\x10');
    CHECK_THROWS_AS((void)io::read_pgm(scratch("rect.pgm")), IoError);
    CHECK_THROWS_AS((void)io::read_pgm(scratch("absent.pgm")), IoError);
}

TEST_CASE("sinogram and raster CSV round trips are exact") {
    Sinogram s(3, 4);
    s.samples << 0.1, 0.2, 1.0 / 3.0, -4, 5, 6, 7, 8, 9, 10, 11, 1e-17;
    s.angles[0] = 0.25;
    s.angles[2] = 6.0;
    const auto path = scratch("s.csv");
    io::write_sinogram_csv(path, s);
    const auto back = io::read_sinogram_csv(path);
    CHECK(back.samples == s.samples);
    CHECK(back.angles == s.angles);

    const auto img = make_phantom(PhantomKind::Ellipses, 24);
    io::write_raster_csv(scratch("r.csv"), img);
    CHECK(io::read_raster_csv(scratch("r.csv")).pixels == img.pixels);

    io::write_indexed_csv(scratch("i.csv"), "angle", {0.5, 1.0 / 7.0});
    CHECK(io::read_indexed_csv(scratch("i.csv")) == std::vector<double>{0.5, 1.0 / 7.0});
}
