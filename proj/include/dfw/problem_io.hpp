#pragma once

// Text format for problem instances:
//
//   dfwqp v1 n=<n> p=<p> seed=<seed>
//   t=<t>
//   w <n floats>
//   q <n floats>
//   P
//   <n lines of n floats>
//
// p is written as 1, a decimal, or inf. Floats use the shortest round-trip decimal form.

#include <dfw/probgen.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace dfw {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Shortest decimal that parses back to exactly v.
std::string format_double(double v);
std::string format_order(NormOrder<double> order);

/// "1", "inf" or a decimal >= 1. Throws std::invalid_argument otherwise.
NormOrder<double> parse_order(const std::string& text);

void write_problem(std::ostream& os, const ProblemInstance& inst);
ProblemInstance read_problem(std::istream& is);

ProblemInstance load_problem(const std::string& path);
void save_problem(const std::string& path, const ProblemInstance& inst);

}  // namespace dfw
