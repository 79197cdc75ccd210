// SPDX-License-Identifier: Apache-2.0
#pragma once
// Seeded generators for property tests. Everything goes through the public line parsers,
// so generated data carries the same normalization as real input.

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tagscope/corpus.hpp"
#include "tagscope/tag_mapping.hpp"

namespace tagscope::testing {

struct CorpusShape {
  std::size_t bookmarks = 300;
  int users = 40;
  int hosts = 8;
  int paths_per_host = 3;
  int tags = 12;
  int max_tags_per_post = 4;
  Month first{2005, 1};
  int months = 24;
};

class RandomCorpus {
 public:
  explicit RandomCorpus(std::uint64_t seed, CorpusShape shape = {}) : rng_(seed), shape_(shape) {}

  std::mt19937_64& rng() { return rng_; }
  const CorpusShape& shape() const { return shape_; }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string tag_word(int i) const { return "t" + std::to_string(i); }

  std::string raw_url(int host, int path) const {
    std::string u = "http://h" + std::to_string(host) + ".example";
    if (path > 0) u += "/p" + std::to_string(path);
    return u;
  }

  NormalizedUrl random_url() { return url(uniform(0, shape_.hosts - 1), uniform(0, shape_.paths_per_host - 1)); }

  NormalizedUrl url(int host, int path) const { return *normalize_url(raw_url(host, path)); }

  Month random_month() { return shape_.first.plus(uniform(0, shape_.months - 1)); }

  /// Tag index skewed towards small ids so that some tags are common and co-occur.
  int skewed_tag() {
    const int a = uniform(0, shape_.tags - 1);
    const int b = uniform(0, shape_.tags - 1);
    return std::min(a, b);
  }

  std::string line(const std::string& user, const std::string& url, Month m, const std::vector<std::string>& tags) {
    const int day = uniform(1, 28);
    std::string out = m.str() + (day < 10 ? "-0" : "-") + std::to_string(day) + "T12:00:00Z\t";
    out += user + "\t" + url + "\t";
    for (std::size_t i = 0; i < tags.size(); ++i) out += (i ? "," : "") + tags[i];
    return out;
  }

  /// Raw TSV lines; roughly 5 % repeat an earlier line verbatim.
  std::vector<std::string> lines() {
    std::vector<std::string> out;
    out.reserve(shape_.bookmarks);
    while (out.size() < shape_.bookmarks) {
      if (!out.empty() && coin(0.05)) {
        out.push_back(out[static_cast<std::size_t>(uniform(0, static_cast<int>(out.size()) - 1))]);
        continue;
      }
      std::vector<std::string> tags;
      const int k = uniform(1, shape_.max_tags_per_post);
      for (int i = 0; i < k; ++i) tags.push_back(tag_word(skewed_tag()));
      out.push_back(line("u" + std::to_string(uniform(1, shape_.users)),
                         raw_url(uniform(0, shape_.hosts - 1), uniform(0, shape_.paths_per_host - 1)),
                         random_month(), tags));
    }
    return out;
  }

  std::vector<Bookmark> bookmarks() {
    std::vector<Bookmark> out;
    for (const auto& l : lines()) out.push_back(std::get<Bookmark>(parse_bookmark_line(l)));
    return out;
  }

  /// Queries named after corpus tags (so reference tags exist) plus one that never occurs.
  std::vector<SeedSet> seed_sets(int count) {
    std::vector<SeedSet> out;
    for (int q = 0; q < count; ++q) {
      SeedSet s;
      s.query = q + 1 == count ? "Absent Query" : "T" + std::to_string(q % shape_.tags);
      if (q >= shape_.tags) s.query += " " + std::to_string(q);
      const int k = uniform(1, 5);
      for (int i = 0; i < k; ++i) s.seeds.push_back(random_url());
      if (coin(0.3)) s.seeds.push_back(*normalize_url("http://never-posted.example/x"));
      std::sort(s.seeds.begin(), s.seeds.end());
      s.seeds.erase(std::unique(s.seeds.begin(), s.seeds.end()), s.seeds.end());
      out.push_back(std::move(s));
    }
    return out;
  }

  /// Click records over `span` for the given queries; some clicks hit unindexed hosts.
  QueryLog query_log(const std::vector<std::string>& queries, const TimeWindow& span, int records) {
    QueryLog log;
    for (int i = 0; i < records; ++i) {
      QueryLogRecord r;
      r.month = span.from().plus(uniform(0, span.months() - 1));
      r.session = "s" + std::to_string(i);
      r.query = queries[static_cast<std::size_t>(uniform(0, static_cast<int>(queries.size()) - 1))];
      r.clicked = coin(0.15) ? *normalize_url("http://offline" + std::to_string(uniform(0, 3)) + ".example/")
                             : url(uniform(0, shape_.hosts - 1), uniform(0, shape_.paths_per_host));
      log.records.push_back(std::move(r));
    }
    return log;
  }

  /// Random scored tags drawn from a small vocabulary; scores are not tied to any corpus.
  std::vector<ScoredTag> scored_tags(int max_size) {
    std::vector<ScoredTag> out;
    const int n = uniform(0, max_size);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      ScoredTag s;
      s.tag = *normalize_tag(tag_word(uniform(0, 3 * max_size)));
      s.rel_idf = coin(0.2) ? 1.0 : unit(rng_) * 2.0;
      s.excl = unit(rng_);
      s.score = combined_score(s.rel_idf, s.excl);
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
  CorpusShape shape_;
};

}  // namespace tagscope::testing
