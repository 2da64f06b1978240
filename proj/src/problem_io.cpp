#include <dfw/problem_io.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace dfw {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_order(NormOrder<double> order) {
  return order.is_infinity() ? "inf" : format_double(order.p);
}

NormOrder<double> parse_order(const std::string& text) {
  if (text == "inf" || text == "infinity") return NormOrder<double>::infinity();
  double p = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), p);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !(p >= 1.0))
    throw std::invalid_argument("invalid norm order '" + text + "' (expected 1, inf or a number >= 1)");
  return {p};
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::string next(const char* what) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
    throw ParseError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
  }

  int line() const { return line_no_; }

 private:
  std::istream& is_;
  int line_no_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line) {
  if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "invalid number '" + tok + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& tok, int line) {
  Int v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(line, "invalid integer '" + tok + "'");
  return v;
}

std::string expect_key(const std::string& tok, const std::string& key, int line) {
  const std::string prefix = key + "=";
  if (tok.rfind(prefix, 0) != 0) throw ParseError(line, "expected '" + prefix + "...', got '" + tok + "'");
  return tok.substr(prefix.size());
}

Vector<double> parse_row(const std::vector<std::string>& toks, std::size_t offset, Eigen::Index n, int line) {
  if (toks.size() - offset != static_cast<std::size_t>(n))
    throw ParseError(line, "expected " + std::to_string(n) + " values, got " + std::to_string(toks.size() - offset));
  Vector<double> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = parse_double(toks[offset + static_cast<std::size_t>(i)], line);
  if (!v.allFinite()) throw ParseError(line, "non-finite value");
  return v;
}

void write_row(std::ostream& os, const auto& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
}

}  // namespace

void write_problem(std::ostream& os, const ProblemInstance& inst) {
  const auto& c = inst.constraint;
  os << "dfwqp v1 n=" << inst.dim() << " p=" << format_order(c.order()) << " seed=" << inst.seed << '\n';
  os << "t=" << format_double(c.radius()) << '\n';
  os << "w ";
  write_row(os, c.weights());
  os << "\nq ";
  write_row(os, inst.objective.q());
  os << "\nP\n";
  const auto& P = inst.objective.P();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    write_row(os, P.row(i));
    os << '\n';
  }
}

ProblemInstance read_problem(std::istream& is) {
  LineReader reader(is);
  const auto header = split(reader.next("header"));
  int line = reader.line();
  if (header.size() != 5 || header[0] != "dfwqp" || header[1] != "v1")
    throw ParseError(line, "expected header 'dfwqp v1 n=<n> p=<p> seed=<seed>'");
  const auto n = parse_int<long>(expect_key(header[2], "n", line), line);
  if (n < 1) throw ParseError(line, "n must be >= 1");
  const double p = parse_double(expect_key(header[3], "p", line), line);
  if (!(p >= 1.0)) throw ParseError(line, "p must be >= 1");
  const auto seed = parse_int<std::uint64_t>(expect_key(header[4], "seed", line), line);

  const auto t_line = split(reader.next("t=<radius>"));
  line = reader.line();
  if (t_line.size() != 1) throw ParseError(line, "expected 't=<radius>'");
  const double t = parse_double(expect_key(t_line[0], "t", line), line);
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParseError(line, "t must be finite and >= 0");

  auto labelled_row = [&](const char* label) {
    const auto toks = split(reader.next(label));
    const int ln = reader.line();
    if (toks.empty() || toks[0] != label) throw ParseError(ln, std::string("expected row '") + label + "'");
    return parse_row(toks, 1, n, ln);
  };
  Vector<double> w = labelled_row("w");
  if (!(w.array() > 0.0).all()) throw ParseError(reader.line(), "weights must be strictly positive");
  Vector<double> q = labelled_row("q");

  const auto p_label = split(reader.next("P"));
  if (p_label.size() != 1 || p_label[0] != "P") throw ParseError(reader.line(), "expected 'P'");
  Matrix<double> P(n, n);
  for (long i = 0; i < n; ++i) {
    const auto toks = split(reader.next("matrix row"));
    P.row(i) = parse_row(toks, 0, n, reader.line()).transpose();
  }
  const int p_end = reader.line();

  try {
    const auto order = std::isinf(p) ? NormOrder<double>::infinity() : NormOrder<double>{p};
    return ProblemInstance{QuadraticObjective<double>(std::move(P), std::move(q)),
                           NormConstraint<double>(std::move(w), t, order), seed};
  } catch (const std::invalid_argument& e) {
    throw ParseError(p_end, e.what());
  }
}

ProblemInstance load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  return read_problem(in);
}

void save_problem(const std::string& path, const ProblemInstance& inst) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_problem(out, inst);
}

}  // namespace dfw
