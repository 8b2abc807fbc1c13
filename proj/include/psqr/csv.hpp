#pragma once

#include <string>

#include "psqr/types.hpp"

namespace psqr {

// Malformed input with the offending 1-based line number (0 = whole file).
class CsvError : public std::runtime_error {
public:
    CsvError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

// Two-column x,y file: comma separated, decimal point, an optional single
// header row is auto-detected.
Dataset read_xy_csv(const std::string& path);

// shortest round-trip-exact representation; NaN becomes an empty field
std::string format_double(double v);

// write-to-temp then atomic rename; existing files stay intact on failure
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace psqr
