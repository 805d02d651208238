#pragma once

#include "qtail/mdinf.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace qtail::cli {

inline constexpr const char* tool_version = "1.0.0";

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

// Doubles become JSON numbers except infinities, which JSON cannot carry;
// those are emitted as the strings "inf" / "-inf".
nlohmann::ordered_json json_number(double v);

struct manifest_info {
    std::string subcommand;
    nlohmann::ordered_json parameters;
    std::optional<std::string> timestamp;  // set only with --stamp
};

nlohmann::ordered_json manifest_json(const manifest_info& info);

// Derived-parameter echo: K, D, omega, N plus the window ends L, U.
nlohmann::ordered_json derived_json(const pab::inversion_spec& spec,
                                    const pab::derived_params& derived);

// CSV column layout: t,cdf,tau then bound_chebyshev,bound_atom when bounds
// were requested, then exact_exponential when the table carries it.
void write_table_csv(std::ostream& out, const mdinf::distribution_table& table,
                     bool with_bounds);
nlohmann::ordered_json table_rows_json(const mdinf::distribution_table& table,
                                       bool with_bounds);

// Two columns, whitespace-delimited, ready for generic plotting tools.
void write_plot(std::ostream& out, const mdinf::distribution_table& table);

void write_json(std::ostream& out, const nlohmann::ordered_json& doc);

std::string iso_utc_now();

} // namespace qtail::cli
