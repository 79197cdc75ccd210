// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "fixtures.hpp"
#include "random_corpus.hpp"
#include "tagscope/config.hpp"
#include "tagscope/io.hpp"

using namespace tagscope;

TEST_CASE("snapshot round-trip preserves records and stats") {
  tagscope::testing::RandomCorpus gen(77, {.bookmarks = 400});
  const auto bs = gen.bookmarks();
  const auto idx = TemporalTagIndex::build(bs);
  IngestStats stats;
  stats.lines = 402;
  stats.bookmarks = 400;
  stats.rejects = 2;
  stats.rejects_by_reason = {{"bad_url", 2}};
  stats.first_month = Month(2005, 1);

  std::stringstream ss;
  write_snapshot(ss, idx, stats);
  const std::string first = ss.str();
  const auto snap = read_snapshot(ss);
  CHECK(snap.stats == stats);
  CHECK(snap.index.records() == idx.records());

  std::stringstream again;
  write_snapshot(again, snap.index, snap.stats);
  CHECK(again.str() == first);
}

TEST_CASE("snapshot rejects damaged input") {
  const auto idx = TemporalTagIndex::build({});
  std::stringstream ss;
  write_snapshot(ss, idx, {});
  const std::string good = ss.str();

  const auto fails = [](std::string text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_snapshot(in), FormatError);
  };
  fails("");
  fails("tagscope-index\t2\n");
  fails(good.substr(0, good.size() - 4));
  fails("tagscope-index\t1\nstats\t{oops\nrecords\t0\nend\n");
  fails("tagscope-index\t1\nstats\t" + stats_json({}).dump() + "\nrecords\t1\nnot a record\nend\n");
}

TEST_CASE("mapping files round-trip") {
  const auto idx = TemporalTagIndex::build(load_corpus(tagscope::testing::fixture("bookmarks.tsv"), 1).bookmarks);
  const auto run = map_queries(idx, load_seeds(tagscope::testing::fixture("seeds.tsv")).sets, {}, 1);
  std::stringstream ss;
  write_mappings(ss, run.mappings);
  const auto first = ss.str();
  const auto back = read_mappings(ss);
  CHECK(back == run.mappings);
  std::stringstream again;
  write_mappings(again, back);
  CHECK(again.str() == first);

  const auto j = json::parse(first.substr(0, first.find('\n')));
  CHECK(j.at("query") == "American Apparel");
  CHECK(j.at("expansions").size() == run.mappings[0].expansions.size());
  CHECK(j.at("expansions")[0].contains("accepted"));

  std::istringstream bad(R"({"query":"q","ref_tag":"Q","threshold":0.7,"accepted_tags":["q"],"expansions":[]})");
  CHECK_THROWS_AS(read_mappings(bad), FormatError);
  std::istringstream noref(R"({"query":"q","ref_tag":"q","threshold":0.7,"accepted_tags":["x"],"expansions":[]})");
  CHECK_THROWS_AS(read_mappings(noref), FormatError);
  std::istringstream garbage("{not json}\n");
  CHECK_THROWS_AS(read_mappings(garbage), FormatError);
}

TEST_CASE("csv reports") {
  RecallReport r;
  QueryRecall q;
  q.query = "a, \"quoted\" query";
  q.recall = 2.0 / 3;
  q.retrieved_count = 5;
  q.query_count = 9;
  q.unmapped_recall = 1.0;
  r.per_query.push_back(q);
  r.buckets = popularity_buckets(r);
  r.top_x_curve = full_top_x_curve(r);
  CHECK(per_query_csv(r) == "query,recall,retrieved_count,query_count\n\"a, \"\"quoted\"\" query\",0.666667,5,9\n");
  CHECK(unmapped_csv(r) == "query,recall,unmapped_recall\n\"a, \"\"quoted\"\" query\",0.666667,1.000000\n");
  CHECK(top_x_csv(r.top_x_curve) == "x,avg_recall\n1,0.666667\n");
  CHECK(buckets_csv(r.buckets).starts_with(
      "bucket,min_query_count,max_query_count,num_queries,avg_recall,avg_unmapped_recall\n1-10,1,10,1,0.666667,1.000000\n"));
  CHECK(buckets_csv(r.buckets).ends_with(">1000,1001,,0,,\n"));

  SweepMatrix m;
  m.max_past = 1;
  m.max_future = 2;
  for (int p = 0; p <= 1; ++p)
    for (int f = 0; f <= 2; ++f) m.cells.push_back({p, f, 0.25 * (p + f)});
  CHECK(sweep_csv(m) == "past\\future,0,1,2\n0,0.000000,0.250000,0.500000\n1,0.250000,0.500000,0.750000\n");
}

TEST_CASE("config file and validation") {
  tagscope::testing::TempDir dir;
  const auto path = dir.write("c.json", R"({"corpus":"b.tsv","logs":["m.tsv","a.tsv"],"threshold":0.8,"min_users":5,
                                            "min_fraction":0.2,"granularity":"full","listen":":9000"})");
  const auto c = load_config(path);
  CHECK(c.corpus_path == "b.tsv");
  CHECK(c.log_paths.size() == 2);
  CHECK(c.threshold == 0.8);
  CHECK(c.granularity == UrlGranularity::kFull);
  CHECK(c.mapping_options().filter.min_users == 5);
  CHECK(c.listen == ":9000");

  CHECK_THROWS_AS(config_from_json(json::parse(R"({"threshold":0})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"threshold":1.5})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"min_users":0})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"min_fraction":-0.1})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"granularity":"path"})")), std::invalid_argument);
  CHECK(config_from_json(json::parse(R"({"threshold":1.0})")).threshold == 1.0);
  CHECK_THROWS_AS(load_config(dir.write("bad.json", "{")), std::invalid_argument);
}
