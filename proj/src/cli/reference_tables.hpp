#pragma once

#include "qtail/mdinf.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace qtail::cli {

// One row of a published reference table, columns as printed. Missing
// optionals mean the printed table has no such column.
struct ref_row {
    double t;
    std::optional<double> bound_chebyshev;
    std::optional<double> bound_atom;
    std::optional<double> cdf;
    std::optional<double> exact_exponential;
};

// A printed cell known to disagree with the governing formula (sign slips,
// dropped digits, single-precision noise). Flagged cells are excluded from
// deviation gating; t = whole_column marks an entire column.
struct ref_misprint {
    double t;
    const char* column;
    const char* note;
};

inline constexpr double whole_column = -1.0;
// Marks a cell outside the t-indexed rows (a published moments line under
// the table); listed in reports but never matched against any row.
inline constexpr double no_row = -2.0;

struct reference_table {
    const char* id;
    mdinf::target_kind kind;
    double lambda;
    double service;
    double delta_t;
    double delta_p;
    double cdf_gate;  // reproduction tolerance for non-excluded cdf rows
    std::vector<ref_row> rows;
    std::vector<ref_misprint> misprints;
    // Published moment estimates recovered from the printed table
    // (busy-period tables only).
    std::optional<double> published_mean_estimate;
    std::optional<double> published_variance_estimate;
};

const std::vector<reference_table>& reference_tables();
const reference_table* find_reference_table(std::string_view id);
bool is_flagged(const reference_table& table, double t, std::string_view column);

} // namespace qtail::cli
