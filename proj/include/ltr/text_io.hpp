#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ltr/dynamic_systems.hpp"

namespace ltr {

/// Shortest round-trip decimal form (%.17g).
std::string format_number(double v);

/// "# <kind>" and "# config_hash <hash>" comment lines that open every file.
void write_preamble(std::ostream& os, std::string_view kind, std::string_view config_hash);

/// Header line of column names followed by one whitespace-separated row per matrix row.
void write_table(std::ostream& os, const std::vector<std::string>& columns, const RealMatrix& rows);

/// frequency_hz, then re/im of every entry in row-major order.
void write_frequency_response(std::ostream& os, const FrequencyResponse& fr);

void write_state_space(std::ostream& os, std::string_view name, const StateSpace& sys);
void write_discrete_state_space(std::ostream& os, std::string_view name,
                                const DiscreteStateSpace& sys);

/// Reads the named block written by write_state_space; throws ParseError when absent or malformed.
StateSpace read_state_space(std::istream& is, std::string_view name);
DiscreteStateSpace read_discrete_state_space(std::istream& is, std::string_view name);

/// Value of the "# config_hash" line, empty when missing.
std::string read_config_hash(std::istream& is);

}  // namespace ltr
