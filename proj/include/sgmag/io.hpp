#pragma once

// Field-spec text format, run configuration, flat config files, CSV emission,
// and self-contained SVG scatter rendering for the command-line tools.
//
// All floating-point output is fixed at 12 significant digits so that repeated
// runs with identical configuration produce byte-identical files.

#include "sgmag/decimation.hpp"
#include "sgmag/ladder.hpp"
#include "sgmag/magnetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sgmag {

inline std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Field specs as text: `word:beta(,word:beta)*` with "." for the empty word.

inline std::string serialize_field_spec(const FieldSpec& spec) {
    std::string out;
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        if (i) out.push_back(',');
        out += word_to_string(spec.terms[i].first);
        out.push_back(':');
        out += format_g12(spec.terms[i].second);
    }
    return out;
}

namespace detail {

[[noreturn]] inline void spec_error(std::size_t pos, const std::string& what) {
    fail("field spec parse error at position " + std::to_string(pos) + ": " + what);
}

}  // namespace detail

inline FieldSpec parse_field_spec(const std::string& text) {
    FieldSpec spec;
    std::set<CellWord> seen;
    std::size_t pos = 0;
    const std::size_t n = text.size();
    if (n == 0) detail::spec_error(0, "expected hole word");

    while (true) {
        std::size_t term_start = pos;
        CellWord word;
        if (pos < n && text[pos] == '.') {
            ++pos;
        } else {
            while (pos < n && text[pos] >= '0' && text[pos] <= '2') word.push_back(text[pos++]);
            if (pos == term_start) {
                if (pos < n && text[pos] != ':' && text[pos] != ',')
                    detail::spec_error(pos, std::string("invalid word character '") + text[pos] + "'");
                detail::spec_error(pos, "expected hole word");
            }
        }
        if (pos >= n || text[pos] != ':') {
            if (pos < n && text[pos] != ',')
                detail::spec_error(pos, std::string("invalid word character '") + text[pos] + "'");
            detail::spec_error(pos, "expected ':' after hole word");
        }
        ++pos;

        const char* start = text.c_str() + pos;
        char* end = nullptr;
        double beta = std::strtod(start, &end);
        if (end == start) detail::spec_error(pos, "expected a number");
        if (!std::isfinite(beta)) detail::spec_error(pos, "number out of range");
        pos += static_cast<std::size_t>(end - start);

        if (!seen.insert(word).second) detail::spec_error(term_start, "duplicate hole");
        spec.terms.emplace_back(std::move(word), beta);

        if (pos == n) break;
        if (text[pos] != ',')
            detail::spec_error(pos, std::string("unexpected character '") + text[pos] + "'");
        ++pos;
        if (pos == n) detail::spec_error(pos, "expected hole word");
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Run configuration

inline Boundary parse_boundary(const std::string& name) {
    if (name == "dirichlet") return Boundary::dirichlet;
    if (name == "neumann") return Boundary::neumann;
    fail("boundary must be dirichlet or neumann");
}

/// Everything a command needs, collected from the config file (if any) with
/// command-line flags layered on top.
struct RunConfig {
    std::string command;
    int level = 4;
    Boundary boundary = Boundary::dirichlet;
    std::string field = ".:0";
    double beta_start = 0.0;
    double beta_end = 2.0;
    int beta_steps = 81;
    double cutoff = 160.0;
    double tol = 1e-2;
    int jobs = 1;
    int max_level = 8;
    std::string out_path;
    std::string svg_path;
    bool perturb_b = false;  // check-mode negative control
};

inline void validate_config(const RunConfig& cfg) {
    if (cfg.level < 1) fail("level must be at least 1");
    if (cfg.level > cfg.max_level) fail("level exceeds configured maximum");
    if (cfg.beta_steps < 1) fail("beta steps must be at least 1");
    if (!(cfg.cutoff > 0.0)) fail("cutoff must be positive");
    if (cfg.jobs < 1) fail("jobs must be at least 1");
    parse_field_spec(cfg.field);
}

inline std::vector<double> beta_grid_of(const RunConfig& cfg) {
    std::vector<double> grid;
    if (cfg.beta_steps == 1) {
        grid.push_back(cfg.beta_start);
        return grid;
    }
    for (int i = 0; i < cfg.beta_steps; ++i)
        grid.push_back(cfg.beta_start +
                       (cfg.beta_end - cfg.beta_start) * i / (cfg.beta_steps - 1));
    return grid;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline int parse_int_value(const std::string& key, const std::string& value) {
    char* end = nullptr;
    long v = std::strtol(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || value.empty())
        fail("config value for '" + key + "' is not an integer");
    return static_cast<int>(v);
}

inline double parse_double_value(const std::string& key, const std::string& value) {
    char* end = nullptr;
    double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty())
        fail("config value for '" + key + "' is not a number");
    return v;
}

}  // namespace detail

/// Apply one `key = value` pair; keys mirror the command-line flag names.
inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
    if (key == "level") cfg.level = detail::parse_int_value(key, value);
    else if (key == "boundary") cfg.boundary = parse_boundary(value);
    else if (key == "field") cfg.field = value;
    else if (key == "beta-start") cfg.beta_start = detail::parse_double_value(key, value);
    else if (key == "beta-end") cfg.beta_end = detail::parse_double_value(key, value);
    else if (key == "beta-steps") cfg.beta_steps = detail::parse_int_value(key, value);
    else if (key == "cutoff") cfg.cutoff = detail::parse_double_value(key, value);
    else if (key == "tol") cfg.tol = detail::parse_double_value(key, value);
    else if (key == "jobs") cfg.jobs = detail::parse_int_value(key, value);
    else if (key == "max-level") cfg.max_level = detail::parse_int_value(key, value);
    else if (key == "out") cfg.out_path = value;
    else if (key == "svg") cfg.svg_path = value;
    else fail("unknown config key '" + key + "'");
}

/// Flat `key = value` config text: one pair per line, '#' starts a comment,
/// blank lines ignored.
inline void parse_config_text(RunConfig& cfg, const std::string& text) {
    std::size_t line_start = 0;
    int line_no = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string::npos) line_end = text.size();
        std::string line = text.substr(line_start, line_end - line_start);
        ++line_no;
        line_start = line_end + 1;

        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail("config line " + std::to_string(line_no) + " has no '='");
        apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                           detail::trim(line.substr(eq + 1)));
        if (line_end == text.size()) break;
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write " + path);
    out << content;
    if (!out) fail("cannot write " + path);
}

// ---------------------------------------------------------------------------
// CSV emitters

/// Sweep table as `beta,index,lambda_raw,lambda_renormalized`, beta-major in
/// grid order.
inline std::string csv_from_sweep(const SpectrumTable& table) {
    std::string out = "beta,index,lambda_raw,lambda_renormalized\n";
    for (const SpectrumRow& row : table.rows)
        for (std::size_t i = 0; i < row.raw.size(); ++i) {
            out += format_g12(row.beta);
            out.push_back(',');
            out += std::to_string(i);
            out.push_back(',');
            out += format_g12(row.raw[i]);
            out.push_back(',');
            out += format_g12(row.renormalized[i]);
            out.push_back('\n');
        }
    return out;
}

/// Limit-spectrum table as `lambda,multiplicity,series,record`; the record
/// column is quoted because the record serialization contains commas.
inline std::string csv_from_decimation(std::vector<SeriesEntry> entries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const SeriesEntry& a, const SeriesEntry& b) {
                         if (a.lambda != b.lambda) return a.lambda < b.lambda;
                         return a.series < b.series;
                     });
    std::string out = "lambda,multiplicity,series,record\n";
    for (const SeriesEntry& e : entries) {
        out += format_g12(e.lambda);
        out.push_back(',');
        out += std::to_string(e.multiplicity);
        out.push_back(',');
        out += std::to_string(e.series);
        out += ",\"";
        out += serialize_record(e.record);
        out += "\"\n";
    }
    return out;
}

/// Ladder report as `beta,k_or_sigma,formula_value,matched_graph_value,
/// rel_error`. Matched rows come first in report order; unclaimed finite-level
/// eigenvalues follow with the label "unmatched".
inline std::string csv_from_ladder(const LadderReport& rep) {
    std::string out = "beta,k_or_sigma,formula_value,matched_graph_value,rel_error\n";
    for (const LadderMatchRow& r : rep.rows) {
        out += format_g12(r.beta);
        out.push_back(',');
        out += r.label;
        out.push_back(',');
        out += format_g12(r.formula_value);
        out.push_back(',');
        out += format_g12(r.matched_value);
        out.push_back(',');
        out += format_g12(r.rel_error);
        out.push_back('\n');
    }
    for (const auto& [beta, value] : rep.unmatched) {
        out += format_g12(beta);
        out += ",unmatched,nan,";
        out += format_g12(value);
        out += ",nan\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG scatter rendering

/// Fixed-size-marker scatter plot; no interpolation between beta points since
/// eigenvalue branches may cross.
struct SvgScatter {
    int width = 800;
    int height = 600;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    std::string x_label = "beta";
    std::string y_label = "eigenvalue";
    std::vector<std::pair<double, double>> points;
};

/// Scatter of (beta, renormalized eigenvalue) over the sweep, y-axis clamped
/// to [0, cutoff].
inline SvgScatter scatter_from_sweep(const SpectrumTable& table) {
    SvgScatter s;
    s.y_min = 0.0;
    s.y_max = table.cutoff;
    s.y_label = "renormalized eigenvalue";
    if (!table.rows.empty()) {
        s.x_min = table.rows.front().beta;
        s.x_max = table.rows.back().beta;
    }
    if (s.x_max <= s.x_min) s.x_max = s.x_min + 1.0;
    for (const SpectrumRow& row : table.rows)
        for (double v : row.renormalized) s.points.emplace_back(row.beta, v);
    return s;
}

inline std::string svg_from_scatter(const SvgScatter& s) {
    if (!(s.x_max > s.x_min) || !(s.y_max > s.y_min)) fail("svg axis range is empty");
    for (const auto& [x, y] : s.points)
        if (x < s.x_min || x > s.x_max || y < s.y_min || y > s.y_max)
            fail("svg point outside axis range");

    const double ml = 60.0, mr = 20.0, mt = 20.0, mb = 45.0;
    const double pw = s.width - ml - mr;
    const double ph = s.height - mt - mb;
    auto px = [&](double x) { return ml + (x - s.x_min) / (s.x_max - s.x_min) * pw; };
    auto py = [&](double y) { return mt + ph - (y - s.y_min) / (s.y_max - s.y_min) * ph; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(s.width) + "\" height=\"" + std::to_string(s.height) +
           "\" viewBox=\"0 0 " + std::to_string(s.width) + " " +
           std::to_string(s.height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(s.width) + "\" height=\"" +
           std::to_string(s.height) + "\" fill=\"white\"/>\n";

    // Axes with five ticks each.
    out += "<g stroke=\"black\" stroke-width=\"1\">\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
           num(ml + pw) + "\" y2=\"" + num(mt + ph) + "\"/>\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
           "\" y2=\"" + num(mt + ph) + "\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double xv = s.x_min + (s.x_max - s.x_min) * t / 4.0;
        double yv = s.y_min + (s.y_max - s.y_min) * t / 4.0;
        out += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
               num(px(xv)) + "\" y2=\"" + num(mt + ph + 5) + "\"/>\n";
        out += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" +
               num(ml) + "\" y2=\"" + num(py(yv)) + "\"/>\n";
    }
    out += "</g>\n";
    out += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int t = 0; t <= 4; ++t) {
        double xv = s.x_min + (s.x_max - s.x_min) * t / 4.0;
        double yv = s.y_min + (s.y_max - s.y_min) * t / 4.0;
        out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(mt + ph + 18) +
               "\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
        out += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(py(yv) + 4) +
               "\" text-anchor=\"end\">" + num(yv) + "</text>\n";
    }
    out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(s.height - 8) +
           "\" text-anchor=\"middle\">" + s.x_label + "</text>\n";
    out += "<text x=\"14\" y=\"" + num(mt + ph / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " + num(mt + ph / 2) +
           ")\">" + s.y_label + "</text>\n";
    out += "</g>\n";

    out += "<g fill=\"#1f6feb\">\n";
    for (const auto& [x, y] : s.points)
        out += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"2\"/>\n";
    out += "</g>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace sgmag
