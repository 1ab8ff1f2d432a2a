#include "qarrival/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qarrival::csv {

std::string format(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) out << ',';
    out << f;
    first = false;
  }
  out << '\n';
}

void write_row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << format(v);
    first = false;
  }
  out << '\n';
}

std::ofstream open(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

}  // namespace qarrival::csv
