// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_corpus.hpp"
#include "tagscope/tag_mapping.hpp"

using namespace tagscope;
using Catch::Approx;

namespace {

NormalizedTag nt(std::string_view s) { return *normalize_tag(s); }

std::vector<NormalizedTag> tag_list(std::initializer_list<std::string_view> raw) {
  std::vector<NormalizedTag> out;
  for (auto r : raw) out.push_back(nt(r));
  return out;
}

Bookmark bm(const std::string& line) { return std::get<Bookmark>(parse_bookmark_line(line)); }

TemporalTagIndex fixture_index() {
  return TemporalTagIndex::build(load_corpus(tagscope::testing::fixture("bookmarks.tsv"), 1).bookmarks);
}

}  // namespace

TEST_CASE("reference tags") {
  CHECK(reference_tag("Barack Obama")->text() == "barackobama");
  CHECK(reference_tag("American Apparel")->text() == "americanapparel");
  CHECK_FALSE(reference_tag("???"));
  CHECK(canonical_query("  American Apparel ") == "american apparel");
}

TEST_CASE("candidate filter thresholds") {
  // One seed URL posted by `posters` users, `users` of whom used tag t.
  const auto filtered = [](int users, int posters) {
    std::vector<Bookmark> bs;
    for (int i = 0; i < posters; ++i)
      bs.push_back(bm("2006-05-03T00:00:00Z\tu" + std::to_string(i) + "\tseed.org\t" + (i < users ? "t" : "other")));
    const auto idx = TemporalTagIndex::build(bs);
    SeedSet s{"q", {*normalize_url("seed.org")}};
    const auto kept = filter_candidates(idx, s);
    return std::find(kept.begin(), kept.end(), nt("t")) != kept.end();
  };
  CHECK(filtered(11, 12));
  CHECK_FALSE(filtered(9, 100));
  CHECK_FALSE(filtered(10, 200));
  CHECK(filtered(10, 100));
  CHECK(filtered(30, 300));

  const auto idx = TemporalTagIndex::build({});
  CHECK(filter_candidates(idx, SeedSet{"q", {*normalize_url("seed.org")}}).empty());
}

TEST_CASE("idf and rel_idf") {
  MappingCorpus mc;
  for (int q = 0; q < 100; ++q) {
    std::vector<NormalizedTag> ts{nt("all")};
    if (q < 10) ts.push_back(nt("ten"));
    if (q < 5) ts.push_back(nt("five"));
    mc.add_query("query " + std::to_string(q), ts);
  }
  CHECK(mc.query_count() == 100);
  CHECK(mc.idf(nt("ten")) == Approx(0.4605).margin(1e-4));
  CHECK(mc.idf(nt("ten")) == std::log(100.0) / 10.0);
  CHECK(mc.idf(nt("all")) == std::log(100.0) / 100.0);
  CHECK(mc.idf(nt("never")) == std::log(100.0));
  CHECK(mc.rel_idf(nt("ten"), nt("ten")) == 1.0);
  CHECK(mc.rel_idf(nt("five"), nt("ten")) == 2.0);
  CHECK(mc.rel_idf(nt("five"), nt("ten")) == Approx(mc.idf(nt("five")) / mc.idf(nt("ten"))).epsilon(1e-12));

  mc.add_query("QUERY 0 ", {nt("all")});
  CHECK(mc.query_count() == 100);
  CHECK(mc.query_frequency(nt("ten")) == 9);

  MappingCorpus single;
  single.add_query("only", {nt("x")});
  CHECK_THROWS_AS(single.idf(nt("x")), std::domain_error);
}

TEST_CASE("exclusiveness") {
  const std::vector<Bookmark> bs{bm("2006-05-03T00:00:00Z\tu1\tx.org\tref,w"), bm("2006-05-03T00:00:00Z\tu2\tx.org\tref"),
                                 bm("2006-05-03T00:00:00Z\tu3\ty.org\tw"), bm("2006-05-03T00:00:00Z\tu4\tz.org\tlonely"),
                                 bm("2006-07-03T00:00:00Z\tu5\tz.org\tref,lonely")};
  const auto idx = TemporalTagIndex::build(bs);
  CHECK(exclusiveness(idx, nt("ref"), nt("ref")) == 0.0);
  CHECK(exclusiveness(idx, nt("w"), nt("ref")) == 0.5);
  CHECK(exclusiveness(idx, nt("lonely"), nt("w")) == 1.0);
  CHECK(exclusiveness(idx, nt("missing"), nt("ref")) == 1.0);
  CHECK(exclusiveness(idx, nt("lonely"), nt("ref")) == 0.5);
  CHECK(exclusiveness(idx, nt("lonely"), nt("ref"), TimeWindow::single(Month(2006, 5))) == 1.0);
}

TEST_CASE("combined score and acceptance") {
  CHECK(combined_score(0.9, 0.6) == Approx(0.75));
  const NormalizedTag ref = nt("ref");
  std::vector<ScoredTag> scored{{nt("good"), 0, 0.9, 0.6, combined_score(0.9, 0.6)},
                                {ref, 0, 1.0, 0.0, combined_score(1.0, 0.0)},
                                {nt("edge"), 0, 0.7, 0.7, 0.7},
                                {nt("bad"), 0, 0.2, 0.3, combined_score(0.2, 0.3)}};
  const auto accepted = accept_tags(ref, scored, kDefaultThreshold);
  CHECK(accepted == tag_list({"edge", "good", "ref"}));
  CHECK(accept_tags(ref, {}, 0.7) == tag_list({"ref"}));
}

TEST_CASE("acceptance is antitone in the threshold") {
  tagscope::testing::RandomCorpus gen(21);
  for (int i = 0; i < 200; ++i) {
    const auto scored = gen.scored_tags(12);
    const NormalizedTag ref = nt("ref");
    std::vector<NormalizedTag> prev;
    for (double th = 1.0; th >= 0.05; th -= 0.05) {
      const auto acc = accept_tags(ref, scored, th);
      CHECK(std::binary_search(acc.begin(), acc.end(), ref));
      CHECK(std::includes(acc.begin(), acc.end(), prev.begin(), prev.end()));
      prev = acc;
    }
  }
}

TEST_CASE("map_query on the fixture corpus") {
  const auto idx = fixture_index();
  const auto seeds = load_seeds(tagscope::testing::fixture("seeds.tsv"));
  const auto run = map_queries(idx, seeds.sets, {}, 2);
  REQUIRE(run.mappings.size() == 6);
  REQUIRE(run.failures.size() == 1);
  CHECK(run.failures[0].first == "!!!");

  const auto find = [&](std::string_view q) -> const TagMapping& {
    for (const auto& m : run.mappings)
      if (m.query == q) return m;
    FAIL("no mapping for " << q);
    throw 0;
  };
  CHECK(find("Wikipedia").accepted_tags == tag_list({"encyclopedia", "wiki", "wikipedia"}));
  CHECK(find("American Apparel").accepted_tags == tag_list({"americanapparel", "apparel", "tshirts"}));
  CHECK(find("Gmail").accepted_tags == tag_list({"gmail"}));
  CHECK(find("YouTube").accepted_tags == tag_list({"converter", "flv", "youtube"}));
  CHECK(find("ESPN").accepted_tags == tag_list({"espn"}));

  // Rejected candidates stay visible with their scores.
  const auto& aa = find("American Apparel");
  CHECK(aa.ref_tag == nt("americanapparel"));
  const auto clothing = std::find_if(aa.expansions.begin(), aa.expansions.end(),
                                     [](const ScoredTag& s) { return s.tag.text() == "clothing"; });
  REQUIRE(clothing != aa.expansions.end());
  CHECK(clothing->score == 0.5);
  CHECK_FALSE(aa.is_accepted(nt("clothing")));
  CHECK_FALSE(aa.is_accepted(nt("fashion")));
  for (std::size_t i = 1; i < aa.expansions.size(); ++i) CHECK(aa.expansions[i - 1].score >= aa.expansions[i].score);

  const auto single = map_queries(idx, std::span(seeds.sets).first(1), {}, 1);
  REQUIRE(single.failures.size() == 1);
  CHECK(single.mappings.empty());
}

TEST_CASE("map_queries output does not depend on thread count") {
  tagscope::testing::RandomCorpus gen(9);
  const auto idx = TemporalTagIndex::build(gen.bookmarks());
  const auto seeds = gen.seed_sets(15);
  MappingOptions o;
  o.filter.min_users = 2;
  const auto a = map_queries(idx, seeds, o, 1);
  const auto b = map_queries(idx, seeds, o, 3);
  CHECK(a.mappings == b.mappings);
  CHECK(a.failures == b.failures);
}

TEST_CASE("mapping pipeline matches set-based recomputation") {
  for (std::uint64_t seed = 300; seed < 320; ++seed) {
    tagscope::testing::RandomCorpus gen(seed);
    const auto bs = gen.bookmarks();
    const auto idx = TemporalTagIndex::build(bs);
    const auto seeds = gen.seed_sets(10);
    MappingOptions o;
    o.filter.min_users = 3;
    o.filter.min_fraction = 0.2;
    const auto u = oracle::universe(bs, seeds, 3, 20);
    const auto run = map_queries(idx, seeds, o, 1);
    for (const auto& m : run.mappings) {
      const auto& expected_tags = u.tags_by_query.at(canonical_query(m.query));
      std::set<std::string> got;
      for (const auto& s : m.expansions) {
        got.insert(s.tag.text());
        CHECK(s.idf == Approx(u.idf(s.tag.text())).epsilon(1e-12));
        CHECK(s.rel_idf == Approx(u.idf(s.tag.text()) / u.idf(m.ref_tag.text())).epsilon(1e-12));
        CHECK(s.excl == Approx(oracle::exclusiveness(bs, s.tag, m.ref_tag)).margin(1e-12));
        const bool accept = s.tag == m.ref_tag || s.score >= o.threshold;
        CHECK(m.is_accepted(s.tag) == accept);
      }
      CHECK(got == expected_tags);
    }
  }
}
