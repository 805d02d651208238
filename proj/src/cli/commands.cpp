#include "cli/commands.hpp"
#include "cli/io.hpp"
#include "cli/reference_tables.hpp"

#include "qtail/errors.hpp"
#include "qtail/mdinf.hpp"
#include "qtail/simulate.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace qtail::cli {
namespace {

using nlohmann::ordered_json;

// Library errors carry bare parameter names; translate to flag spellings
// so diagnostics point at what the user actually typed.
std::string flag_for(const std::string& parameter) {
    static const std::map<std::string, std::string> names = {
        {"lambda", "--lambda"},   {"service", "--service"},
        {"delta_t", "--dt"},      {"delta_p", "--dp"},
        {"l_exponent", "--l-exponent"}, {"order", "--order"},
        {"samples", "--samples"}, {"t", "--t"},
        {"seed", "--seed"},       {"kind", "--kind"},
        {"output", "--output"},   {"table", "table id"},
    };
    const auto it = names.find(parameter);
    return it != names.end() ? it->second : parameter;
}

std::vector<double> expand_range(const std::string& text) {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
        !(in >> std::ws).eof()) {
        throw domain_error("t", "--t-range must look like start:stop:step");
    }
    if (!(std::isfinite(start) && std::isfinite(stop) && std::isfinite(step)) ||
        step <= 0.0 || stop < start) {
        throw domain_error("t", "--t-range needs stop >= start and step > 0");
    }
    const double count_d = std::floor((stop - start) / step + 1e-9) + 1.0;
    if (count_d > 1e6) {
        throw domain_error("t", "--t-range expands to more than 1e6 points");
    }
    std::vector<double> ts;
    const std::size_t count = static_cast<std::size_t>(count_d);
    ts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ts.push_back(start + static_cast<double>(i) * step);
    }
    return ts;
}

// Writes to --output when given, stdout otherwise.
void deliver(const std::string& path, std::ostream& out,
             const std::function<void(std::ostream&)>& writer) {
    if (path.empty()) {
        writer(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw domain_error("output", "cannot open output file: " + path);
    }
    writer(file);
}

struct table_options {
    double lambda = 0.0;
    double service = 0.0;
    double delta_t = 0.0;
    double delta_p = 0.0;
    int l_exponent = 3;
    std::vector<double> ts;
    std::string t_range;
    std::string format = "csv";
    std::string output;
    std::string plot;
    bool with_bounds = false;
    bool stamp = false;
};

int run_table_command(mdinf::target_kind kind, const table_options& opt,
                      std::ostream& out) {
    std::vector<double> ts = opt.ts;
    if (!opt.t_range.empty()) {
        ts = expand_range(opt.t_range);
    }
    if (ts.empty()) {
        throw domain_error("t", "one of --t or --t-range is required");
    }

    const mdinf::queue_params q(opt.lambda, opt.service);
    const mdinf::distribution_table table =
        mdinf::compute_table(q, kind, opt.delta_t, opt.delta_p, opt.l_exponent,
                             ts, opt.with_bounds);

    if (opt.format == "json") {
        ordered_json params;
        params["lambda"] = opt.lambda;
        params["service"] = opt.service;
        params["dt"] = opt.delta_t;
        params["dp"] = opt.delta_p;
        params["l_exponent"] = opt.l_exponent;
        if (!opt.t_range.empty()) {
            params["t_range"] = opt.t_range;
        }
        params["t"] = ts;
        params["with_bounds"] = opt.with_bounds;

        manifest_info info;
        info.subcommand = kind == mdinf::target_kind::busy_period
                              ? "busy-period"
                              : "busy-cycle";
        info.parameters = std::move(params);
        if (opt.stamp) {
            info.timestamp = iso_utc_now();
        }

        ordered_json doc;
        doc["manifest"] = manifest_json(info);
        doc["rows"] = table_rows_json(table, opt.with_bounds);
        doc["derived"] = derived_json(table.spec, table.derived);
        deliver(opt.output, out, [&](std::ostream& o) { write_json(o, doc); });
    } else {
        deliver(opt.output, out, [&](std::ostream& o) {
            write_table_csv(o, table, opt.with_bounds);
        });
    }

    if (!opt.plot.empty()) {
        std::ofstream plot_file(opt.plot, std::ios::binary);
        if (!plot_file) {
            throw domain_error("output", "cannot open plot file: " + opt.plot);
        }
        write_plot(plot_file, table);
    }
    return 0;
}

struct moments_options {
    double lambda = 0.0;
    double service = 0.0;
    int order = 2;
    bool recursion = false;
    std::string output;
    bool stamp = false;
};

int run_moments(const moments_options& opt, std::ostream& out) {
    if (opt.order < 1 || opt.order > 10) {
        throw domain_error("order", "--order must lie in [1, 10]");
    }
    const mdinf::queue_params q(opt.lambda, opt.service);
    const mdinf::moment_set bp = mdinf::busy_period_moments(q);
    const mdinf::moment_set bc = mdinf::busy_cycle_moments(q);

    ordered_json params;
    params["lambda"] = opt.lambda;
    params["service"] = opt.service;
    params["order"] = opt.order;
    params["recursion"] = opt.recursion;

    manifest_info info;
    info.subcommand = "moments";
    info.parameters = std::move(params);
    if (opt.stamp) {
        info.timestamp = iso_utc_now();
    }

    ordered_json doc;
    doc["manifest"] = manifest_json(info);
    doc["busy_period"] = {{"mean", bp.mean}, {"variance", bp.variance}};
    doc["busy_cycle"] = {{"mean", bc.mean}, {"variance", bc.variance}};

    if (opt.recursion) {
        const mdinf::moment_set rec =
            mdinf::busy_period_moment_recursion(q, opt.order);
        std::vector<double> cycle_raw;
        cycle_raw.reserve(rec.raw.size());
        for (int n = 1; n <= opt.order; ++n) {
            cycle_raw.push_back(
                mdinf::busy_cycle_moment_from_busy_period(q, rec, n));
        }
        // The recursion has closed-form anchors only at orders 1 and 2.
        double gap = 0.0;
        const auto track = [&gap](double got, double want) {
            gap = std::max(gap, std::abs(got - want) / std::abs(want));
        };
        track(rec.raw[0], bp.mean);
        track(cycle_raw[0], bc.mean);
        if (opt.order >= 2) {
            track(rec.raw[1], bp.raw[1]);
            track(cycle_raw[1], bc.raw[1]);
        }

        ordered_json orders = ordered_json::array();
        for (int n = 1; n <= opt.order; ++n) {
            orders.push_back(n);
        }
        ordered_json r;
        r["orders"] = orders;
        r["busy_period_raw"] = rec.raw;
        r["busy_cycle_raw"] = cycle_raw;
        r["max_relative_gap"] = gap;
        doc["recursion"] = std::move(r);
    }

    deliver(opt.output, out, [&](std::ostream& o) { write_json(o, doc); });
    return 0;
}

struct simulate_options {
    double lambda = 0.0;
    double service = 0.0;
    std::string kind;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::vector<double> ts;
    std::string format = "json";
    std::string output;
    bool stamp = false;
};

int run_simulate(const simulate_options& opt, std::ostream& out) {
    const mdinf::queue_params q(opt.lambda, opt.service);
    const mdinf::target_kind kind = opt.kind == "busy-period"
                                        ? mdinf::target_kind::busy_period
                                        : mdinf::target_kind::busy_cycle;
    const sim::sim_config config{q, opt.samples, opt.seed};
    const sim::empirical_cdf cdf = sim::run_simulation(config, kind);

    const bool report_atom = kind == mdinf::target_kind::busy_period;
    const double atom_fraction = report_atom ? cdf.mass_at(q.service) : 0.0;
    const double mean = cdf.mean();
    const double variance = opt.samples >= 2 ? cdf.variance() : 0.0;

    if (opt.format == "json") {
        ordered_json params;
        params["lambda"] = opt.lambda;
        params["service"] = opt.service;
        params["kind"] = opt.kind;
        params["samples"] = opt.samples;
        params["seed"] = opt.seed;
        params["t"] = opt.ts;

        manifest_info info;
        info.subcommand = "simulate";
        info.parameters = std::move(params);
        if (opt.stamp) {
            info.timestamp = iso_utc_now();
        }

        ordered_json summary;
        summary["kind"] = opt.kind;
        summary["samples"] = opt.samples;
        summary["seed"] = opt.seed;
        summary["mean"] = mean;
        summary["variance"] = variance;
        if (report_atom) {
            summary["atom_fraction"] = atom_fraction;
        }

        ordered_json rows = ordered_json::array();
        for (const double t : opt.ts) {
            rows.push_back({{"t", t}, {"ecdf", cdf.evaluate(t)}});
        }

        ordered_json doc;
        doc["manifest"] = manifest_json(info);
        doc["summary"] = std::move(summary);
        doc["rows"] = std::move(rows);
        deliver(opt.output, out, [&](std::ostream& o) { write_json(o, doc); });
    } else {
        deliver(opt.output, out, [&](std::ostream& o) {
            o << "key,value\n";
            o << "kind," << opt.kind << "\n";
            o << "samples," << opt.samples << "\n";
            o << "seed," << opt.seed << "\n";
            o << "mean," << format_double(mean) << "\n";
            o << "variance," << format_double(variance) << "\n";
            if (report_atom) {
                o << "atom_fraction," << format_double(atom_fraction) << "\n";
            }
            for (const double t : opt.ts) {
                o << "ecdf:" << format_double(t) << ','
                  << format_double(cdf.evaluate(t)) << "\n";
            }
        });
    }
    return 0;
}

struct reproduce_options {
    std::string table_id;
    std::string output_dir;
    bool stamp = false;
};

std::string underscored(std::string id) {
    for (char& c : id) {
        if (c == '.') {
            c = '_';
        }
    }
    return id;
}

int run_reproduce(const reproduce_options& opt, std::ostream& out) {
    const reference_table* ref = find_reference_table(opt.table_id);
    if (ref == nullptr) {
        throw domain_error("table",
                           "unknown table id '" + opt.table_id +
                               "'; expected one of 3.1, 3.2, 3.3, 4.1, 4.2, 4.3, 4.4");
    }
    if (opt.output_dir.empty()) {
        throw domain_error("output", "--output directory is required");
    }
    std::filesystem::create_directories(opt.output_dir);

    const bool is_busy_period = ref->kind == mdinf::target_kind::busy_period;
    const mdinf::queue_params q(ref->lambda, ref->service);
    std::vector<double> ts;
    ts.reserve(ref->rows.size());
    for (const ref_row& row : ref->rows) {
        ts.push_back(row.t);
    }
    const mdinf::distribution_table table = mdinf::compute_table(
        q, ref->kind, ref->delta_t, ref->delta_p, 3, ts, is_busy_period);

    // Gate bookkeeping: cdf deviations skip edge rows (t <= a + dt, where
    // the atom makes pointwise inversion unreliable) and flagged cells.
    const double edge = ref->service + ref->delta_t * (1.0 + 1e-12);
    double max_dev_cdf = 0.0;
    double max_dev_b1 = 0.0;
    double max_dev_b2 = 0.0;
    std::vector<double> excluded_edge;
    std::vector<double> excluded_misprint;
    std::vector<double> excluded_b1;

    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const mdinf::table_row& row = table.rows[i];
        const ref_row& printed = ref->rows[i];
        if (printed.cdf) {
            if (is_flagged(*ref, row.t, "cdf")) {
                excluded_misprint.push_back(row.t);
            } else if (row.t <= edge) {
                excluded_edge.push_back(row.t);
            } else {
                max_dev_cdf = std::max(max_dev_cdf, std::abs(row.cdf - *printed.cdf));
            }
        }
        if (printed.bound_chebyshev && row.bound_chebyshev) {
            if (is_flagged(*ref, row.t, "bound_chebyshev")) {
                excluded_b1.push_back(row.t);
            } else {
                max_dev_b1 = std::max(
                    max_dev_b1, std::abs(*row.bound_chebyshev - *printed.bound_chebyshev));
            }
        }
        if (printed.bound_atom && row.bound_atom) {
            max_dev_b2 =
                std::max(max_dev_b2, std::abs(*row.bound_atom - *printed.bound_atom));
        }
    }

    const std::string base = underscored(opt.table_id);
    const std::string csv_path =
        (std::filesystem::path(opt.output_dir) / ("table_" + base + ".csv")).string();
    const std::string report_path =
        (std::filesystem::path(opt.output_dir) / ("report_" + base + ".json")).string();

    {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) {
            throw domain_error("output", "cannot open output file: " + csv_path);
        }
        csv << "t,cdf,tau";
        if (is_busy_period) {
            csv << ",bound_chebyshev,bound_atom";
        }
        csv << ",ref_cdf";
        if (is_busy_period) {
            csv << ",ref_bound_chebyshev,ref_bound_atom";
        }
        if (ref->id == std::string("4.1")) {
            csv << ",exact_exponential,ref_poisson";
        }
        csv << ",dev_cdf,atom_adjacent,known_misprint\n";
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const mdinf::table_row& row = table.rows[i];
            const ref_row& printed = ref->rows[i];
            csv << format_double(row.t) << ',' << format_double(row.cdf) << ','
                << format_double(row.tau);
            if (is_busy_period) {
                csv << ',' << format_double(row.bound_chebyshev.value()) << ','
                    << format_double(row.bound_atom.value());
            }
            csv << ',' << format_double(printed.cdf.value());
            if (is_busy_period) {
                csv << ',' << format_double(printed.bound_chebyshev.value()) << ','
                    << format_double(printed.bound_atom.value());
            }
            if (ref->id == std::string("4.1")) {
                csv << ',' << format_double(row.exact_exponential.value()) << ','
                    << format_double(printed.exact_exponential.value());
            }
            const bool flagged = is_flagged(*ref, row.t, "cdf") ||
                                 is_flagged(*ref, row.t, "bound_chebyshev");
            csv << ',' << format_double(row.cdf - printed.cdf.value()) << ','
                << (row.atom_adjacent ? 1 : 0) << ',' << (flagged ? 1 : 0) << "\n";
        }
    }

    ordered_json gates;
    {
        ordered_json g;
        g["tolerance"] = ref->cdf_gate;
        g["max_abs_deviation"] = max_dev_cdf;
        g["rows_gated"] =
            ref->rows.size() - excluded_edge.size() - excluded_misprint.size();
        g["excluded_edge"] = excluded_edge;
        g["excluded_misprint"] = excluded_misprint;
        g["pass"] = max_dev_cdf <= ref->cdf_gate;
        gates["cdf"] = std::move(g);
    }
    if (is_busy_period) {
        const bool column_flagged =
            is_flagged(*ref, whole_column, "bound_chebyshev");
        ordered_json g1;
        g1["tolerance"] = 1e-5;
        g1["max_abs_deviation"] = column_flagged ? ordered_json(nullptr)
                                                 : ordered_json(max_dev_b1);
        g1["excluded_misprint"] = excluded_b1;
        g1["pass"] = column_flagged ? true : max_dev_b1 <= 1e-5;
        gates["bound_chebyshev"] = std::move(g1);

        ordered_json g2;
        g2["tolerance"] = 1e-6;
        g2["max_abs_deviation"] = max_dev_b2;
        g2["pass"] = max_dev_b2 <= 1e-6;
        gates["bound_atom"] = std::move(g2);
    }

    ordered_json doc;
    ordered_json params;
    params["id"] = ref->id;
    params["lambda"] = ref->lambda;
    params["service"] = ref->service;
    params["dt"] = ref->delta_t;
    params["dp"] = ref->delta_p;
    params["output"] = opt.output_dir;

    manifest_info info;
    info.subcommand = "reproduce-table";
    info.parameters = std::move(params);
    if (opt.stamp) {
        info.timestamp = iso_utc_now();
    }
    doc["manifest"] = manifest_json(info);
    doc["kind"] = is_busy_period ? "busy-period" : "busy-cycle";
    doc["derived"] = derived_json(table.spec, table.derived);
    doc["gates"] = std::move(gates);

    if (is_busy_period) {
        const mdinf::moment_set exact = mdinf::busy_period_moments(q);
        const mdinf::moment_set recovered =
            mdinf::moments_from_table(table, q.service, std::exp(-q.rho));
        ordered_json mr;
        mr["mean"] = {{"estimate", recovered.mean},
                      {"exact", exact.mean},
                      {"relative_error",
                       (recovered.mean - exact.mean) / exact.mean},
                      {"published_estimate", ref->published_mean_estimate.value()}};
        mr["variance"] = {
            {"estimate", recovered.variance},
            {"exact", exact.variance},
            {"relative_error",
             (recovered.variance - exact.variance) / exact.variance},
            {"published_estimate", ref->published_variance_estimate.value()}};
        doc["moment_recovery"] = std::move(mr);
    }

    ordered_json mis = ordered_json::array();
    for (const ref_misprint& m : ref->misprints) {
        ordered_json entry;
        entry["column"] = m.column;
        if (m.t == whole_column) {
            entry["t"] = "all";
        } else if (m.t == no_row) {
            entry["t"] = nullptr;
        } else {
            entry["t"] = m.t;
        }
        entry["note"] = m.note;
        mis.push_back(std::move(entry));
    }
    doc["known_misprints"] = std::move(mis);

    {
        std::ofstream report(report_path, std::ios::binary);
        if (!report) {
            throw domain_error("output", "cannot open output file: " + report_path);
        }
        write_json(report, doc);
    }

    out << "table " << ref->id << ": rows=" << ref->rows.size()
        << " max|dev(cdf)|=" << format_double(max_dev_cdf)
        << " gate=" << format_double(ref->cdf_gate)
        << (max_dev_cdf <= ref->cdf_gate ? " pass" : " FAIL") << "\n";
    out << "wrote " << csv_path << "\n";
    out << "wrote " << report_path << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"M/D/infinity busy-period and busy-cycle analytics via "
                 "transform inversion"};
    app.require_subcommand(1);

    table_options bp_opt;
    table_options bc_opt;
    moments_options mo_opt;
    simulate_options si_opt;
    reproduce_options re_opt;

    const auto add_table_flags = [](CLI::App* cmd, table_options& opt) {
        cmd->add_option("--lambda", opt.lambda, "arrival rate")->required();
        cmd->add_option("--service", opt.service, "deterministic service time")
            ->required();
        cmd->add_option("--dt", opt.delta_t, "accuracy: tolerated blur of t")
            ->required();
        cmd->add_option("--dp", opt.delta_p,
                        "precision: tolerated probability error")
            ->required();
        cmd->add_option("--l-exponent", opt.l_exponent,
                        "truncation-window safety exponent")
            ->capture_default_str();
        auto* t_opt = cmd->add_option("--t", opt.ts,
                                      "comma-separated evaluation times");
        t_opt->delimiter(',');
        auto* range_opt =
            cmd->add_option("--t-range", opt.t_range, "grid as start:stop:step");
        t_opt->excludes(range_opt);
        range_opt->excludes(t_opt);
        cmd->add_option("--format", opt.format, "output format")
            ->capture_default_str()
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--output", opt.output, "write to this file, not stdout");
        cmd->add_flag("--with-bounds", opt.with_bounds,
                      "add analytic lower-bound columns");
        cmd->add_option("--plot", opt.plot,
                        "also write two-column plot data to this file");
        cmd->add_flag("--stamp", opt.stamp,
                      "record a wall-clock timestamp in the manifest");
    };

    CLI::App* bp = app.add_subcommand(
        "busy-period", "busy-period distribution function table");
    add_table_flags(bp, bp_opt);

    CLI::App* bc = app.add_subcommand(
        "busy-cycle", "busy-cycle distribution function table");
    add_table_flags(bc, bc_opt);

    CLI::App* mo =
        app.add_subcommand("moments", "closed-form and recursion moments");
    mo->add_option("--lambda", mo_opt.lambda, "arrival rate")->required();
    mo->add_option("--service", mo_opt.service, "deterministic service time")
        ->required();
    mo->add_option("--order", mo_opt.order, "highest raw-moment order")
        ->capture_default_str();
    mo->add_flag("--recursion", mo_opt.recursion,
                 "also run the quadrature-seeded recursion");
    mo->add_option("--output", mo_opt.output, "write to this file, not stdout");
    mo->add_flag("--stamp", mo_opt.stamp,
                 "record a wall-clock timestamp in the manifest");

    CLI::App* si = app.add_subcommand("simulate", "seeded Monte Carlo oracle");
    si->add_option("--lambda", si_opt.lambda, "arrival rate")->required();
    si->add_option("--service", si_opt.service, "deterministic service time")
        ->required();
    si->add_option("--kind", si_opt.kind, "what to sample")
        ->required()
        ->check(CLI::IsMember({"busy-period", "busy-cycle"}));
    si->add_option("--samples", si_opt.samples, "sample count")
        ->capture_default_str();
    si->add_option("--seed", si_opt.seed, "base RNG seed")
        ->capture_default_str();
    si->add_option("--t", si_opt.ts, "evaluate the empirical CDF here")
        ->delimiter(',');
    si->add_option("--format", si_opt.format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    si->add_option("--output", si_opt.output, "write to this file, not stdout");
    si->add_flag("--stamp", si_opt.stamp,
                 "record a wall-clock timestamp in the manifest");

    CLI::App* re = app.add_subcommand(
        "reproduce-table",
        "recompute a published reference table and report deviations");
    re->add_option("id", re_opt.table_id, "table id (3.1 .. 4.4)")->required();
    re->add_option("--output", re_opt.output_dir, "output directory")->required();
    re->add_flag("--stamp", re_opt.stamp,
                 "record a wall-clock timestamp in the manifest");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("qtail");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (bp->parsed()) {
            return run_table_command(mdinf::target_kind::busy_period, bp_opt, out);
        }
        if (bc->parsed()) {
            return run_table_command(mdinf::target_kind::busy_cycle, bc_opt, out);
        }
        if (mo->parsed()) {
            return run_moments(mo_opt, out);
        }
        if (si->parsed()) {
            return run_simulate(si_opt, out);
        }
        if (re->parsed()) {
            return run_reproduce(re_opt, out);
        }
        err << "error: no subcommand selected\n";
        return 2;
    } catch (const domain_error& e) {
        err << "error: " << flag_for(e.parameter()) << ": " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace qtail::cli
