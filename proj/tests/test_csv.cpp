#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "psqr/csv.hpp"

using namespace psqr;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "psqr_csv_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::trunc);
    out << text;
}

}  // namespace

TEST_CASE("reads plain and headered two-column files") {
    const fs::path plain = temp_file("plain.csv");
    write_text(plain, "0.1,2.5\n0.2,-1\n0.3,4e-1\n");
    const Dataset a = read_xy_csv(plain.string());
    REQUIRE(a.size() == 3);
    CHECK(a.x[1] == 0.2);
    CHECK(a.y[2] == 0.4);

    const fs::path headered = temp_file("headered.csv");
    write_text(headered, "x,y\r\n0.5,1.5\n\n0.75,+2.5\n");
    const Dataset b = read_xy_csv(headered.string());
    REQUIRE(b.size() == 2);
    CHECK(b.x[0] == 0.5);
    CHECK(b.y[1] == 2.5);
}

TEST_CASE("malformed input reports the offending line") {
    const fs::path bad = temp_file("bad.csv");
    write_text(bad, "0.1,1\n0.2,oops\n");
    try {
        read_xy_csv(bad.string());
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 2);
    }

    const fs::path wide = temp_file("wide.csv");
    write_text(wide, "0.1,1,9\n");
    try {
        read_xy_csv(wide.string());
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 1);
    }

    const fs::path empty = temp_file("empty.csv");
    write_text(empty, "");
    CHECK_THROWS_AS(read_xy_csv(empty.string()), CsvError);

    const fs::path header_only = temp_file("header_only.csv");
    write_text(header_only, "x,y\n");
    CHECK_THROWS_AS(read_xy_csv(header_only.string()), CsvError);

    CHECK_THROWS_AS(read_xy_csv("/nonexistent/nowhere.csv"), CsvError);
}

TEST_CASE("format_double round-trips and shortens") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::nan("")) == "");
    const double v = 0.1234567890123456789;
    double back = 0.0;
    std::sscanf(format_double(v).c_str(), "%lf", &back);
    CHECK(back == v);
}

TEST_CASE("atomic write replaces content and survives failure") {
    const fs::path target = temp_file("atomic.txt");
    atomic_write_file(target.string(), "first");
    atomic_write_file(target.string(), "second");
    std::ifstream in(target);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "second");

    // writing into a missing directory fails without touching the target
    CHECK_THROWS(atomic_write_file("/nonexistent_dir_psqr/file.txt", "x"));
    std::ifstream again(target);
    std::string content2((std::istreambuf_iterator<char>(again)),
                         std::istreambuf_iterator<char>());
    CHECK(content2 == "second");
}
