#include "ltr/text_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ltr {

namespace {

void write_matrix(std::ostream& os, std::string_view label, const RealMatrix& m) {
  os << "matrix " << label << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_number(m(i, j));
    os << '\n';
  }
}

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

RealMatrix read_matrix(std::istream& is, std::string_view label) {
  std::string word;
  std::string got;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(is >> word >> got >> rows >> cols) || word != "matrix" || got != label || rows < 0 || cols < 0) {
    parse_fail("expected matrix " + std::string(label));
  }
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string token;
      if (!(is >> token)) parse_fail("truncated matrix " + std::string(label));
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(token, &used);
        if (used != token.size()) parse_fail("bad number " + token);
      } catch (const std::logic_error&) {
        parse_fail("bad number " + token);
      }
    }
  }
  return m;
}

/// Positions the stream just after "begin <kind> <name>".
void seek_block(std::istream& is, std::string_view kind, std::string_view name) {
  const std::string want = "begin " + std::string(kind) + " " + std::string(name);
  std::string line;
  while (std::getline(is, line)) {
    if (line == want) return;
  }
  parse_fail("block '" + want + "' not found");
}

void expect_end(std::istream& is, std::string_view kind, std::string_view name) {
  std::string end;
  std::string k;
  std::string n;
  if (!(is >> end >> k >> n) || end != "end" || k != kind || n != name) {
    parse_fail("missing end of " + std::string(kind) + " " + std::string(name));
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_preamble(std::ostream& os, std::string_view kind, std::string_view config_hash) {
  os << "# " << kind << '\n' << "# config_hash " << config_hash << '\n';
}

void write_table(std::ostream& os, const std::vector<std::string>& columns, const RealMatrix& rows) {
  if (static_cast<Eigen::Index>(columns.size()) != rows.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "column names do not match the table width");
  }
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? " " : "") << columns[j];
  os << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) os << (j ? " " : "") << format_number(rows(i, j));
    os << '\n';
  }
}

void write_frequency_response(std::ostream& os, const FrequencyResponse& fr) {
  const Eigen::Index p = fr.values.empty() ? 0 : fr.values.front().rows();
  const Eigen::Index m = fr.values.empty() ? 0 : fr.values.front().cols();
  std::vector<std::string> columns{"frequency_hz"};
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::string e = std::to_string(i + 1) + std::to_string(j + 1);
      columns.push_back("re_" + e);
      columns.push_back("im_" + e);
    }
  }
  RealMatrix rows(static_cast<Eigen::Index>(fr.omega.size()), 1 + 2 * p * m);
  for (std::size_t k = 0; k < fr.omega.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    rows(r, 0) = fr.omega[k] / (2.0 * std::numbers::pi);
    Eigen::Index c = 1;
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        rows(r, c++) = fr.values[k](i, j).real();
        rows(r, c++) = fr.values[k](i, j).imag();
      }
    }
  }
  write_table(os, columns, rows);
}

void write_state_space(std::ostream& os, std::string_view name, const StateSpace& sys) {
  os << "begin statespace " << name << '\n';
  write_matrix(os, "A", sys.a);
  write_matrix(os, "B", sys.b);
  write_matrix(os, "C", sys.c);
  write_matrix(os, "D", sys.d);
  os << "end statespace " << name << '\n';
}

void write_discrete_state_space(std::ostream& os, std::string_view name,
                                const DiscreteStateSpace& sys) {
  os << "begin discrete " << name << '\n';
  os << "sample_period " << format_number(sys.sample_period) << '\n';
  write_matrix(os, "A", sys.a);
  write_matrix(os, "B", sys.b);
  write_matrix(os, "C", sys.c);
  write_matrix(os, "D", sys.d);
  os << "end discrete " << name << '\n';
}

StateSpace read_state_space(std::istream& is, std::string_view name) {
  seek_block(is, "statespace", name);
  RealMatrix a = read_matrix(is, "A");
  RealMatrix b = read_matrix(is, "B");
  RealMatrix c = read_matrix(is, "C");
  RealMatrix d = read_matrix(is, "D");
  expect_end(is, "statespace", name);
  try {
    return {a, b, c, d};
  } catch (const Error& e) {
    parse_fail(e.what());
  }
}

DiscreteStateSpace read_discrete_state_space(std::istream& is, std::string_view name) {
  seek_block(is, "discrete", name);
  std::string key;
  double ts = 0.0;
  if (!(is >> key >> ts) || key != "sample_period") parse_fail("expected sample_period");
  RealMatrix a = read_matrix(is, "A");
  RealMatrix b = read_matrix(is, "B");
  RealMatrix c = read_matrix(is, "C");
  RealMatrix d = read_matrix(is, "D");
  expect_end(is, "discrete", name);
  try {
    return {a, b, c, d, ts};
  } catch (const Error& e) {
    parse_fail(e.what());
  }
}

std::string read_config_hash(std::istream& is) {
  std::string line;
  const std::string prefix = "# config_hash ";
  while (std::getline(is, line)) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    if (line.empty() || line[0] != '#') break;
  }
  return {};
}

}  // namespace ltr
