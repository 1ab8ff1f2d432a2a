#pragma once

#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace qarrival::csv {

// %.17g, the shortest form that round-trips any double.
std::string format(double value);

// Writes one comma-separated row terminated by LF.
void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);
void write_row(std::ostream& out, std::initializer_list<double> values);

// Opens `path` for binary writing, throws on failure.
std::ofstream open(const std::string& path);

}  // namespace qarrival::csv
