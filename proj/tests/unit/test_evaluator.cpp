// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "lexstyle/error.hpp"
#include "lexstyle/evaluator.hpp"

using namespace lexstyle;

namespace {

LexicalVector vec(std::array<double, kNumCategories> v) { return {v, VectorRole::sequence}; }

}  // namespace

TEST_SUITE("evaluator") {
  TEST_CASE("absolute errors") {
    const auto target = vec({0.3, 0.1, 0.2, 0.2, 0.1, 0.0});
    const std::vector<LexicalVector> one = {vec({0.4, 0.1, 0.2, 0.2, 0.1, 0.0})};
    const auto e = abs_errors(one, target);
    CHECK(e.overall == doctest::Approx(0.1 / std::sqrt(6.0)).epsilon(1e-12));
    CHECK(e.per_category[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(e.per_category[1] == 0.0);

    const std::vector<LexicalVector> two = {vec({0.5, 0.1, 0.2, 0.2, 0.1, 0.0}),
                                            vec({0.3, 0.1, 0.2, 0.2, 0.1, 0.0})};
    const auto e2 = abs_errors(two, target);
    CHECK(e2.per_category[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(e2.overall == doctest::Approx(0.1 / std::sqrt(6.0)).epsilon(1e-12));
    CHECK_THROWS_AS(abs_errors(std::span<const LexicalVector>{}, target), InputError);
  }

  TEST_CASE("component ranks") {
    CHECK(rank_components(vec({0.6, 0.5, 0.4, 0.3, 0.2, 0.1})) ==
          std::array<int, 6>{1, 2, 3, 4, 5, 6});
    CHECK(rank_components(vec({0.1, 0.3, 0.3, 0, 0, 0})) == std::array<int, 6>{3, 1, 2, 4, 5, 6});
  }

  TEST_CASE("relative order errors") {
    const auto target = vec({0.6, 0.5, 0.4, 0.3, 0.2, 0.1});
    const std::vector<LexicalVector> same = {vec({0.9, 0.8, 0.7, 0.3, 0.2, 0.1})};
    CHECK(relative_order_errors(same, target).overall == 0.0);

    const std::vector<LexicalVector> reversed = {vec({0.1, 0.2, 0.3, 0.4, 0.5, 0.6})};
    const auto r = relative_order_errors(reversed, target);
    double sum = 0.0;
    for (double x : r.per_category) sum += x;
    CHECK(sum == 18.0);
    CHECK(r.overall == 1.0);
    CHECK(r.per_category == CategoryValues{5, 3, 1, 1, 3, 5});

    const std::vector<LexicalVector> swapped = {vec({0.5, 0.6, 0.4, 0.3, 0.2, 0.1})};
    CHECK(relative_order_errors(swapped, target).overall == 2.0 / 18.0);
  }

  TEST_CASE("report build, format and parse") {
    const auto target = vec({0.3, 0.1, 0.2, 0.2, 0.1, 0.0});
    const std::vector<LexicalVector> seqs = {vec({0.4, 0.1, 0.2, 0.2, 0.1, 0.0}),
                                             vec({0.1, 0.2, 0.2, 0.2, 0.1, 0.05})};
    EvalReport rep = build_report(seqs, target, 12.5);
    CHECK(rep.paragraphs == 2);
    rep.generation_hash = "00ff00ff00ff00ff";
    const std::string text = format_report(rep);
    CHECK(text.rfind(kReportMagic, 0) == 0);
    const EvalReport back = parse_report(text);
    CHECK(format_report(back) == text);
    CHECK(back.paragraphs == 2);
    CHECK(back.perplexity == doctest::Approx(12.5));
    CHECK_THROWS_AS(parse_report("junk"), InputError);

    const std::vector<EvalReport> both = {rep, back};
    const EvalReport avg = average_reports(both);
    CHECK(avg.abs.overall == doctest::Approx(rep.abs.overall).epsilon(1e-6));

    const std::string header = format_table_header();
    const std::string row = format_table_row("pre", rep);
    CHECK(header.find("literary") != std::string::npos);
    CHECK(row.rfind("pre", 0) == 0);
  }
}
