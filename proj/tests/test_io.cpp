#include <catch2/catch_amalgamated.hpp>

#include "sgmag/check.hpp"
#include "sgmag/io.hpp"

#include <cmath>

using namespace sgmag;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("field spec parsing and round trips") {
    FieldSpec one = parse_field_spec(".:1.0");
    REQUIRE(one.terms.size() == 1);
    CHECK(one.terms[0].first.empty());
    CHECK(one.terms[0].second == 1.0);

    FieldSpec two = parse_field_spec(".:6.2831853072,01:3.14159");
    REQUIRE(two.terms.size() == 2);
    CHECK(two.terms[0].first.empty());
    CHECK_THAT(two.terms[0].second, WithinAbs(6.2831853072, 1e-12));
    CHECK(two.terms[1].first == "01");
    CHECK_THAT(two.terms[1].second, WithinAbs(3.14159, 1e-12));

    // Negative strengths and exponents pass through strtod.
    FieldSpec neg = parse_field_spec("2:-1.5e-2");
    CHECK(neg.terms[0].first == "2");
    CHECK_THAT(neg.terms[0].second, WithinAbs(-0.015, 1e-15));

    // serialize . parse is the identity on valid specs.
    for (const std::string& text :
         {std::string(".:1"), std::string("0:0.25,12:2"), std::string(".:6.2831853072,01:3.14159")}) {
        FieldSpec spec = parse_field_spec(text);
        FieldSpec again = parse_field_spec(serialize_field_spec(spec));
        REQUIRE(again.terms.size() == spec.terms.size());
        for (std::size_t i = 0; i < spec.terms.size(); ++i) {
            CHECK(again.terms[i].first == spec.terms[i].first);
            CHECK(again.terms[i].second == spec.terms[i].second);
        }
    }
    CHECK(serialize_field_spec(parse_field_spec(".:1")) == ".:1");

    CHECK_THROWS_WITH(parse_field_spec(".:1,.:2"),
                      "field spec parse error at position 4: duplicate hole");
    CHECK_THROWS_WITH(parse_field_spec(""), ContainsSubstring("expected hole word"));
    CHECK_THROWS_WITH(parse_field_spec("3:1"), ContainsSubstring("invalid word character '3'"));
    CHECK_THROWS_WITH(parse_field_spec("0a:1"), ContainsSubstring("invalid word character 'a'"));
    CHECK_THROWS_WITH(parse_field_spec("0:"), ContainsSubstring("expected a number"));
    CHECK_THROWS_WITH(parse_field_spec("0:x"), ContainsSubstring("expected a number"));
    CHECK_THROWS_WITH(parse_field_spec("0"), ContainsSubstring("expected ':' after hole word"));
    CHECK_THROWS_WITH(parse_field_spec(".:1,"), ContainsSubstring("expected hole word"));
    CHECK_THROWS_WITH(parse_field_spec(".:1x"), ContainsSubstring("unexpected character 'x'"));
    CHECK_THROWS_WITH(parse_field_spec(".:1;0:2"), ContainsSubstring("position 3"));
}

TEST_CASE("run config: files, overrides, validation") {
    RunConfig cfg;
    parse_config_text(cfg, "level = 5\n"
                           "boundary = neumann   # switch ensembles\n"
                           "\n"
                           "field = 0:1.5\n"
                           "beta-steps = 11\n"
                           "cutoff = 320\n"
                           "jobs = 2\n");
    CHECK(cfg.level == 5);
    CHECK(cfg.boundary == Boundary::neumann);
    CHECK(cfg.field == "0:1.5");
    CHECK(cfg.beta_steps == 11);
    CHECK(cfg.cutoff == 320.0);
    CHECK(cfg.jobs == 2);
    CHECK(cfg.max_level == 8);  // untouched default
    validate_config(cfg);

    RunConfig bad;
    CHECK_THROWS_WITH(parse_config_text(bad, "wat = 3\n"), "unknown config key 'wat'");
    CHECK_THROWS_WITH(parse_config_text(bad, "level\n"), ContainsSubstring("has no '='"));
    CHECK_THROWS_WITH(parse_config_text(bad, "level = soon\n"),
                      "config value for 'level' is not an integer");
    CHECK_THROWS_WITH(parse_config_text(bad, "cutoff = tall\n"),
                      "config value for 'cutoff' is not a number");
    CHECK_THROWS_WITH(parse_config_text(bad, "boundary = open\n"),
                      "boundary must be dirichlet or neumann");

    RunConfig v;
    v.level = 0;
    CHECK_THROWS_WITH(validate_config(v), "level must be at least 1");
    v.level = 9;
    CHECK_THROWS_WITH(validate_config(v), "level exceeds configured maximum");
    v.level = 9;
    v.max_level = 10;
    validate_config(v);
    v = RunConfig{};
    v.beta_steps = 0;
    CHECK_THROWS_WITH(validate_config(v), "beta steps must be at least 1");
    v = RunConfig{};
    v.cutoff = 0.0;
    CHECK_THROWS_WITH(validate_config(v), "cutoff must be positive");
    v = RunConfig{};
    v.jobs = 0;
    CHECK_THROWS_WITH(validate_config(v), "jobs must be at least 1");
    v = RunConfig{};
    v.field = "junk";
    CHECK_THROWS_WITH(validate_config(v), ContainsSubstring("field spec parse error"));

    RunConfig grid;
    grid.beta_start = 0.0;
    grid.beta_end = 2.0;
    grid.beta_steps = 5;
    auto g = beta_grid_of(grid);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2.0);
    CHECK_THAT(g[1], WithinAbs(0.5, 1e-15));
    grid.beta_steps = 1;
    grid.beta_start = 0.75;
    auto single = beta_grid_of(grid);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == 0.75);
}

TEST_CASE("csv emitters") {
    SpectrumTable table;
    table.level = 1;
    table.boundary = Boundary::dirichlet;
    table.cutoff = 200.0;
    SpectrumRow r0;
    r0.beta = 0.0;
    r0.raw = {2.0, 5.0};
    r0.renormalized = {15.0, 37.5};
    SpectrumRow r1;
    r1.beta = 0.5;
    r1.raw = {2.25};
    r1.renormalized = {16.875};
    table.rows = {r0, r1};
    CHECK(csv_from_sweep(table) == "beta,index,lambda_raw,lambda_renormalized\n"
                                   "0,0,2,15\n"
                                   "0,1,5,37.5\n"
                                   "0.5,0,2.25,16.875\n");

    // Identical inputs produce identical bytes.
    CHECK(csv_from_sweep(table) == csv_from_sweep(table));

    auto entries = dirichlet_spectrum_decimation(2, 300.0);
    std::string dec = csv_from_decimation(entries);
    CHECK_THAT(dec, ContainsSubstring("lambda,multiplicity,series,record\n"
                                      "16.8159988893,1,2,\"1,2,,16.8159988893\"\n"));
    CHECK_THAT(dec, ContainsSubstring("55.8858274542,2,5,\"1,5,,55.8858274542\"\n"));
    CHECK(count_occurrences(dec, "\n") == static_cast<int>(entries.size()) + 1);

    // Multiplicity column of the limit table counts the level-5 spectrum
    // below the cutoff.
    auto deep = dirichlet_spectrum_decimation(5, 160.0);
    int total = 0;
    for (const auto& e : deep) total += e.multiplicity;
    auto row = detail::sweep_point(5, CellWord{}, 0.0, Boundary::dirichlet, 160.0);
    CHECK(total == static_cast<int>(row.renormalized.size()));

    LadderReport rep;
    rep.level = 4;
    rep.cutoff = 100.0;
    rep.tol = 1e-2;
    rep.scale = 7.0;
    LadderMatchRow m0;
    m0.beta = 0.0;
    m0.label = "k1";
    m0.formula_value = 25.0;
    m0.matched_value = 25.5;
    m0.rel_error = 0.5 / 25.5;
    rep.rows = {m0};
    rep.unmatched = {{0.0, 88.25}};
    std::string lad = csv_from_ladder(rep);
    CHECK_THAT(lad, ContainsSubstring("beta,k_or_sigma,formula_value,matched_graph_value,rel_error\n"));
    CHECK_THAT(lad, ContainsSubstring("0,k1,25,25.5,0.019"));
    CHECK_THAT(lad, ContainsSubstring("0,unmatched,nan,88.25,nan\n"));
}

TEST_CASE("svg scatter rendering") {
    SvgScatter s;
    s.width = 400;
    s.height = 300;
    s.x_min = 0.0;
    s.x_max = 2.0;
    s.y_min = 0.0;
    s.y_max = 160.0;
    s.points = {{0.0, 10.0}, {1.0, 80.0}, {2.0, 160.0}};
    std::string svg = svg_from_scatter(s);

    CHECK_THAT(svg, ContainsSubstring("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\""));
    CHECK_THAT(svg, ContainsSubstring("width=\"400\""));
    CHECK(count_occurrences(svg, "<svg") == 1);
    CHECK(count_occurrences(svg, "</svg>") == 1);
    CHECK(count_occurrences(svg, "<g ") == count_occurrences(svg, "</g>"));
    CHECK(count_occurrences(svg, "<circle") == 3);
    CHECK_THAT(svg, ContainsSubstring(">beta</text>"));
    CHECK_THAT(svg, ContainsSubstring(">eigenvalue</text>"));

    // Deterministic output.
    CHECK(svg == svg_from_scatter(s));

    SvgScatter outside = s;
    outside.points.push_back({3.0, 10.0});
    CHECK_THROWS_WITH(svg_from_scatter(outside), "svg point outside axis range");
    SvgScatter empty = s;
    empty.x_max = empty.x_min;
    CHECK_THROWS_WITH(svg_from_scatter(empty), "svg axis range is empty");

    // Built from a sweep: one marker per table value, axes spanning the grid.
    SpectrumTable table;
    table.cutoff = 50.0;
    SpectrumRow r0;
    r0.beta = 0.25;
    r0.renormalized = {1.0, 2.0};
    SpectrumRow r1;
    r1.beta = 0.75;
    r1.renormalized = {3.0};
    table.rows = {r0, r1};
    SvgScatter from = scatter_from_sweep(table);
    CHECK(from.x_min == 0.25);
    CHECK(from.x_max == 0.75);
    CHECK(from.y_max == 50.0);
    REQUIRE(from.points.size() == 3);
    std::string rendered = svg_from_scatter(from);
    CHECK(count_occurrences(rendered, "<circle") == 3);
}

TEST_CASE("check suites and the negative control") {
    CheckOptions opt;
    opt.level = 2;
    auto results = run_checks(opt);
    REQUIRE(results.size() == 6);
    CHECK(all_passed(results));
    for (const auto& r : results) {
        INFO(r.suite << ": " << r.detail);
        CHECK(r.passed);
    }
    CHECK(results[0].suite == "h-norm");

    CheckOptions broken = opt;
    broken.perturb_b = true;
    auto perturbed = run_checks(broken);
    CHECK_FALSE(all_passed(perturbed));
    CHECK_FALSE(perturbed[0].passed);  // h-norm must flag the injected error
    for (std::size_t i = 1; i < perturbed.size(); ++i) CHECK(perturbed[i].passed);
}
