// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "random_corpus.hpp"
#include "fixtures.hpp"
#include "tagscope/corpus.hpp"

using namespace tagscope;

namespace {

std::string tag(std::string_view raw) {
  auto t = normalize_tag(raw);
  return t ? t->text() : std::string("<empty>");
}

std::string url(std::string_view raw) {
  auto u = normalize_url(raw);
  return u ? u->full() : std::string("<invalid>");
}

}  // namespace

TEST_CASE("tag normalization keeps lowercase alphanumerics") {
  CHECK(tag("Barack Obama") == "barackobama");
  CHECK(tag("T-Shirts") == "tshirts");
  CHECK(tag("  Web2.0 ") == "web20");
  CHECK(tag("!!!") == "<empty>");
  CHECK(tag("") == "<empty>");
  CHECK(tag("caf\xc3\xa9") == "caf");
}

TEST_CASE("url normalization") {
  const auto u = normalize_url("HTTP://www.Example.com/Path/");
  REQUIRE(u);
  CHECK(u->full() == "example.com/Path");
  CHECK(u->host() == "example.com");
  CHECK(u->path() == "/Path");
  CHECK(u->host_only().full() == "example.com");

  CHECK(url("americanapparel.net") == "americanapparel.net");
  CHECK(url("https://usawear.org?x=1#top") == "usawear.org");
  CHECK(url("http://user:pw@Example.com:8080/a/b//") == "example.com/a/b");
  CHECK(url("http://www.www.example.com/") == "example.com");
  CHECK(url("http://example.com./") == "example.com");
  CHECK(url("http://example.com/%7Euser/a%2fb") == "example.com/~user/a%2Fb");
  CHECK(url("ftp://files.example.com/x") == "files.example.com/x");
  CHECK(url("") == "<invalid>");
  CHECK(url("http:///nohost") == "<invalid>");
  CHECK(url("http://exa mple.com/") == "<invalid>");
}

TEST_CASE("url normalization is idempotent") {
  tagscope::testing::RandomCorpus gen(7);
  const char* samples[] = {"HTTP://WWW.www.Ex.com:80/A/%7e/%41%2F/?q#f", "www.example.com", "http://a.b/c/../d/",
                           "https://x.org//", "x.org/%zz%4", "http://[::1]:8080/p"};
  for (const char* s : samples) {
    const auto once = normalize_url(s);
    if (!once) continue;
    const auto twice = normalize_url(once->full());
    REQUIRE(twice);
    CHECK(twice->full() == once->full());
    CHECK(twice->host() == once->host());
  }
}

TEST_CASE("timestamps map to UTC months") {
  CHECK(parse_timestamp_month("2006-05-03T10:00:00Z") == Month(2006, 5));
  CHECK(parse_timestamp_month("2006-04-30T23:30:00-02:00") == Month(2006, 5));
  CHECK(parse_timestamp_month("2006-06-01T00:30:00+02:00") == Month(2006, 5));
  CHECK(parse_timestamp_month("2006-12-31T23:59:59-00:30") == Month(2007, 1));
  CHECK(parse_timestamp_month("2006-05-03") == Month(2006, 5));
  CHECK_FALSE(parse_timestamp_month("2006-02-30T00:00:00Z"));
  CHECK_FALSE(parse_timestamp_month("yesterday"));
  CHECK_FALSE(parse_timestamp_month("2006-05-03T25:00:00Z"));
}

TEST_CASE("bookmark lines parse or report a reason") {
  auto r = parse_bookmark_line("2006-05-03T10:00:00Z\tu1\thttp://www.AmericanApparel.net/\tapparel, T-Shirts");
  REQUIRE(std::holds_alternative<Bookmark>(r));
  const auto& b = std::get<Bookmark>(r);
  CHECK(b.user == "u1");
  CHECK(b.url.full() == "americanapparel.net");
  CHECK(b.month == Month(2006, 5));
  REQUIRE(b.tags.size() == 2);
  CHECK(b.tags[0].text() == "apparel");
  CHECK(b.tags[1].text() == "tshirts");

  const auto reason = [](std::string_view line) { return std::get<RejectReason>(parse_bookmark_line(line)); };
  CHECK(reason("2006-05-03T10:00:00Z\tu1\texample.com\t!!!,  ") == RejectReason::kNoTags);
  CHECK(reason("2006-05-03T10:00:00Z\tu1\texample.com") == RejectReason::kFieldCount);
  CHECK(reason("soon\tu1\texample.com\ta") == RejectReason::kBadTimestamp);
  CHECK(reason("2006-05-03T10:00:00Z\t \texample.com\ta") == RejectReason::kEmptyUser);
  CHECK(reason("2006-05-03T10:00:00Z\tu1\thttp://\ta") == RejectReason::kBadUrl);
}

TEST_CASE("duplicate and multi-form tags collapse") {
  auto r = parse_bookmark_line("2006-05-03T10:00:00Z\tu1\tx.org\tT-Shirts,tshirts,TSHIRTS,,a");
  const auto& b = std::get<Bookmark>(r);
  REQUIRE(b.tags.size() == 2);
  CHECK(b.tags[0].text() == "a");
}

TEST_CASE("load_corpus counts rejects and skips blank lines") {
  tagscope::testing::TempDir dir;
  std::string content;
  for (int i = 0; i < 10; ++i) content += "2006-0" + std::to_string(1 + i % 9) + "-03T10:00:00Z\tu" + std::to_string(i) + "\tx.org/" + std::to_string(i) + "\ttag\n";
  content += "\n";
  content += "not a line\n";
  content += "2006-05-03T10:00:00Z\tu1\texample.com\t!!!\r\n";
  const auto c = load_corpus(dir.write("c.tsv", content), 1);
  CHECK(c.bookmarks.size() == 10);
  CHECK(c.stats.bookmarks == 10);
  CHECK(c.stats.rejects == 2);
  CHECK(c.stats.rejects_by_reason.at("field_count") == 1);
  CHECK(c.stats.rejects_by_reason.at("no_tags") == 1);
  CHECK(c.stats.lines == 12);
  CHECK(c.stats.first_month == Month(2006, 1));
  CHECK(c.stats.last_month == Month(2006, 9));

  const auto empty = load_corpus(dir.write("e.tsv", ""), 1);
  CHECK(empty.bookmarks.empty());
  CHECK(empty.stats.rejects == 0);
  CHECK_FALSE(empty.stats.first_month);

  CHECK_THROWS_AS(load_corpus(dir.file("missing.tsv")), std::runtime_error);
}

TEST_CASE("format_bookmark_line round-trips through the parser") {
  tagscope::testing::RandomCorpus gen(11, {.bookmarks = 1000});
  for (const auto& b : gen.bookmarks()) {
    auto again = parse_bookmark_line(format_bookmark_line(b));
    REQUIRE(std::holds_alternative<Bookmark>(again));
    CHECK(std::get<Bookmark>(again) == b);
  }
}

TEST_CASE("ingest stats match a direct recount and ignore thread count") {
  tagscope::testing::RandomCorpus gen(3, {.bookmarks = 500});
  auto lines = gen.lines();
  lines.push_back("junk");
  lines.push_back("2006-01-01T00:00:00Z\tu\thttp://\tx");
  tagscope::testing::TempDir dir;
  std::string content;
  for (const auto& l : lines) content += l + "\n";
  const auto path = dir.write("c.tsv", content);

  const auto one = load_corpus(path, 1);
  const auto four = load_corpus(path, 4);
  CHECK(one.stats == four.stats);
  CHECK(one.bookmarks == four.bookmarks);

  std::set<std::string> users, urls, tags;
  for (const auto& b : one.bookmarks) {
    users.insert(b.user);
    urls.insert(b.url.full());
    for (const auto& t : b.tags) tags.insert(t.text());
  }
  CHECK(one.stats.bookmarks == 500);
  CHECK(one.stats.rejects == 2);
  CHECK(one.stats.unique_users == users.size());
  CHECK(one.stats.unique_urls == urls.size());
  CHECK(one.stats.unique_tags == tags.size());
}

TEST_CASE("accumulator merge is order independent") {
  tagscope::testing::RandomCorpus gen(5, {.bookmarks = 300});
  const auto lines = gen.lines();
  std::vector<std::string> a(lines.begin(), lines.begin() + 100), b(lines.begin() + 100, lines.begin() + 200),
      c(lines.begin() + 200, lines.end());
  const auto pa = parse_bookmark_chunk(a), pb = parse_bookmark_chunk(b), pc = parse_bookmark_chunk(c);

  IngestAccumulator left = pa.stats;
  left.merge(pb.stats);
  left.merge(pc.stats);
  IngestAccumulator right = pc.stats;
  IngestAccumulator bc = pb.stats;
  bc.merge(pa.stats);
  right.merge(bc);
  CHECK(left.stats() == right.stats());
  CHECK(left.stats() == parse_bookmark_chunk(lines).stats.stats());
}

TEST_CASE("query log lines") {
  auto r = parse_query_log_line("2006-05-02T12:00:00Z\ts1\t American Apparel \thttp://www.americanapparel.net/");
  REQUIRE(std::holds_alternative<QueryLogRecord>(r));
  const auto& q = std::get<QueryLogRecord>(r);
  CHECK(q.query == "American Apparel");
  CHECK(q.clicked.full() == "americanapparel.net");
  CHECK(std::get<RejectReason>(parse_query_log_line("2006-05-02T12:00:00Z\ts1\t  \tx.org")) == RejectReason::kEmptyQuery);

  const auto log = load_query_log(tagscope::testing::fixture("aol_log.tsv"));
  CHECK(log.records.size() == 9);
  CHECK(log.rejects == 0);
  CHECK(log.span() == TimeWindow::parse("2006-03", "2006-05"));
}

TEST_CASE("seed lines drop bad URLs and repeated queries") {
  auto r = parse_seed_line("Gmail\thttp://gmail.com/,http:// bad,gmail.com,mail.google.com");
  REQUIRE(std::holds_alternative<SeedSet>(r));
  const auto& s = std::get<SeedSet>(r);
  CHECK(s.query == "Gmail");
  CHECK(s.seeds.size() == 2);

  tagscope::testing::TempDir dir;
  const auto seeds = load_seeds(dir.write("s.tsv", "Gmail\tgmail.com\ngmail \tx.org\nNoSeeds\t\nYouTube\tyoutube.com\n"));
  // A query without seed URLs is kept: it still maps to its reference tag.
  REQUIRE(seeds.sets.size() == 3);
  CHECK(seeds.sets[1].seeds.empty());
  CHECK(seeds.sets[2].query == "YouTube");
  CHECK(seeds.rejects == 1);

  std::string many = "Big\t";
  for (int i = 0; i < 150; ++i) many += (i ? "," : "") + std::string("h") + std::to_string(i) + ".org";
  CHECK(std::get<SeedSet>(parse_seed_line(many)).seeds.size() == SeedSet::kMaxSeeds);
}
