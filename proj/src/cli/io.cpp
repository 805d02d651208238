#include "cli/io.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <ostream>

namespace qtail::cli {

std::string format_double(double v) {
    if (v == 0.0) {
        v = 0.0;  // fold -0 into 0 so outputs never depend on its sign
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::ordered_json json_number(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

nlohmann::ordered_json manifest_json(const manifest_info& info) {
    nlohmann::ordered_json m;
    m["subcommand"] = info.subcommand;
    m["tool_version"] = tool_version;
    m["timestamp"] =
        info.timestamp ? nlohmann::ordered_json(*info.timestamp) : nullptr;
    m["parameters"] = info.parameters;
    return m;
}

nlohmann::ordered_json derived_json(const pab::inversion_spec& spec,
                                    const pab::derived_params& derived) {
    nlohmann::ordered_json d;
    d["K"] = derived.k;
    d["D"] = derived.d;
    d["omega"] = derived.omega;
    d["N"] = derived.n_terms;
    d["L"] = spec.lower;
    d["U"] = spec.upper;
    return d;
}

void write_table_csv(std::ostream& out, const mdinf::distribution_table& table,
                     bool with_bounds) {
    const bool exact_col =
        !table.rows.empty() && table.rows.front().exact_exponential.has_value();
    out << "t,cdf,tau";
    if (with_bounds) {
        out << ",bound_chebyshev,bound_atom";
    }
    if (exact_col) {
        out << ",exact_exponential";
    }
    out << "\n";
    for (const mdinf::table_row& row : table.rows) {
        out << format_double(row.t) << ',' << format_double(row.cdf) << ','
            << format_double(row.tau);
        if (with_bounds) {
            out << ',' << format_double(row.bound_chebyshev.value()) << ','
                << format_double(row.bound_atom.value());
        }
        if (exact_col) {
            out << ',' << format_double(row.exact_exponential.value());
        }
        out << "\n";
    }
}

nlohmann::ordered_json table_rows_json(const mdinf::distribution_table& table,
                                       bool with_bounds) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const mdinf::table_row& row : table.rows) {
        nlohmann::ordered_json r;
        r["t"] = row.t;
        r["cdf"] = row.cdf;
        r["tau"] = row.tau;
        if (with_bounds) {
            r["bound_chebyshev"] = json_number(row.bound_chebyshev.value());
            r["bound_atom"] = row.bound_atom.value();
        }
        if (row.exact_exponential) {
            r["exact_exponential"] = *row.exact_exponential;
        }
        r["clamped"] = row.clamped;
        r["atom_adjacent"] = row.atom_adjacent;
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_plot(std::ostream& out, const mdinf::distribution_table& table) {
    for (const mdinf::table_row& row : table.rows) {
        out << format_double(row.t) << ' ' << format_double(row.cdf) << "\n";
    }
}

void write_json(std::ostream& out, const nlohmann::ordered_json& doc) {
    out << doc.dump(2) << "\n";
}

std::string iso_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace qtail::cli
