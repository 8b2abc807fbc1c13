#include "psqr/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace psqr {

CsvError::CsvError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_number(const std::string& field, double& out) {
    const std::string t = trim(field);
    if (t.empty()) return false;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (*begin == '+') ++begin;  // from_chars rejects a leading plus
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

Dataset read_xy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(0, "cannot open '" + path + "'");

    std::vector<double> xs, ys;
    std::string line;
    int lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 2)
            throw CsvError(lineno, "expected 2 comma-separated columns, found " +
                                       std::to_string(fields.size()));
        double x, y;
        const bool ok = parse_number(fields[0], x) && parse_number(fields[1], y);
        if (!ok) {
            if (first_content) {  // a single header row is allowed
                first_content = false;
                continue;
            }
            throw CsvError(lineno, "non-numeric field");
        }
        first_content = false;
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.empty()) throw CsvError(0, "no data rows in '" + path + "'");

    Eigen::VectorXd x(static_cast<int>(xs.size())), y(static_cast<int>(ys.size()));
    for (size_t i = 0; i < xs.size(); ++i) {
        x[static_cast<int>(i)] = xs[i];
        y[static_cast<int>(i)] = ys[i];
    }
    return Dataset(std::move(x), std::move(y));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[32];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.good()) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("failed while writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot replace '" + path + "': " + ec.message());
    }
}

}  // namespace psqr
