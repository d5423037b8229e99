#include "edeg/datasets.hpp"
#include "edeg/error.hpp"
#include "edeg/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

using namespace edeg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "edeg-test-io";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("hex doubles round-trip bit-exactly") {
    for (double v : {0.0, -0.0, 1.0 / 3.0, -2.5e-310, 1e308, std::numeric_limits<double>::min(), 6.02214076e23}) {
        const double back = io::parse_hex_double(io::hex_double(v));
        CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
    CHECK_THROWS(io::parse_hex_double("zz"));
}

TEST_CASE("csv quoting") {
    CHECK(io::csv_field("plain") == "plain");
    CHECK(io::csv_field("a,b") == "\"a,b\"");
    CHECK(io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(io::csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("dataset csv round-trip") {
    const Dataset data = two_moons(40, 0.2, 5);
    const auto path = scratch("moons.csv");
    io::write_file_atomic(path, io::dataset_to_csv(data));
    const Dataset back = io::read_dataset_csv(path);
    CHECK(back.inputs == data.inputs);
    CHECK(back.labels == data.labels);

    Dataset reg;
    reg.inputs = Eigen::MatrixXd::Random(5, 3);
    reg.targets = Eigen::MatrixXd::Random(5, 2);
    io::write_file_atomic(path, io::dataset_to_csv(reg));
    const Dataset back2 = io::read_dataset_csv(path);
    CHECK(back2.inputs == reg.inputs);
    CHECK(back2.targets == reg.targets);
    CHECK_FALSE(back2.labeled());
}

TEST_CASE("dataset csv errors carry positions") {
    const auto path = scratch("bad.csv");
    io::write_file_atomic(path, "x0,x1,label\n1,2,0\n3,oops,1\n");
    try {
        io::read_dataset_csv(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 2);
    }
    io::write_file_atomic(path, "x0,x1\n1,2,3\n");
    CHECK_THROWS_AS(io::read_dataset_csv(path), ParseError);
    io::write_file_atomic(path, "x0,z\n1,2\n");
    CHECK_THROWS_AS(io::read_dataset_csv(path), ParseError);
    io::write_file_atomic(path, "x0,label\n1,0.5\n");
    CHECK_THROWS_AS(io::read_dataset_csv(path), ParseError);
    CHECK_THROWS_AS(io::read_dataset_csv(scratch("missing.csv")), IoError);
}

TEST_CASE("quoted fields and CRLF are accepted") {
    const auto path = scratch("quoted.csv");
    io::write_file_atomic(path, "\"x0\",x1,label\r\n\"1.5\",2,1\r\n-3,4e-1,0\r\n");
    const Dataset d = io::read_dataset_csv(path);
    CHECK(d.size() == 2);
    CHECK(d.inputs(0, 0) == 1.5);
    CHECK(d.inputs(1, 1) == 0.4);
    CHECK(d.labels == std::vector<int>{1, 0});
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    const auto net = FeedForwardNet::initialize({3, 7, 5, 2}, Activation::square, 42, 0.7);
    const nlohmann::json cfg = {{"lambda", 0.25}, {"seed", 42}};
    const auto path = scratch("ck.json");
    io::save_checkpoint(path, net, cfg);
    const auto ck = io::load_checkpoint(path);
    CHECK(ck.net == net);
    CHECK(ck.config == cfg);
    const auto a = net.parameters();
    const auto b = ck.net.parameters();
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

    auto doc = io::checkpoint_to_json(net, cfg);
    doc["version"] = 99;
    CHECK_THROWS(io::checkpoint_from_json(doc));
    doc = io::checkpoint_to_json(net, cfg);
    doc["layers"][0]["weight"].erase(0);
    CHECK_THROWS(io::checkpoint_from_json(doc));
}

TEST_CASE("atomic writes create directories and leave no temp files") {
    const fs::path dir = fs::temp_directory_path() / "edeg-test-io" / "nested" / "deeper";
    fs::remove_all(dir);
    io::write_file_atomic(dir / "out.txt", "hello");
    CHECK(io::read_file(dir / "out.txt") == "hello");
    io::write_file_atomic(dir / "out.txt", "again");
    CHECK(io::read_file(dir / "out.txt") == "again");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
}
