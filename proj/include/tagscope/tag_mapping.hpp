// SPDX-License-Identifier: Apache-2.0
#pragma once

// Query -> tag mapping.
//
// A query gets a reference tag (the query itself, normalized) plus every candidate
// tag from its seed URLs whose combined score
//
//     score(w) = 0.5 * (rel_idf(w) + excl(w))
//
// reaches the threshold, where
//
//     idf(w)     = ln|queries| / |{q : w in tags(q)}|
//     rel_idf(w) = idf(w) / idf(w_ref)
//     excl(w)    = 1 - posts(w, w_ref) / min(posts(w), posts(w_ref))
//
// and posts(...) counts distinct (user, url) pairs carrying all given tags on one post.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tagscope/corpus.hpp"
#include "tagscope/temporal_index.hpp"

namespace tagscope {

inline constexpr double kDefaultThreshold = 0.7;
inline constexpr std::uint64_t kDefaultMinUsers = 10;
inline constexpr double kDefaultMinFraction = 0.10;

/// Case-folded, trimmed query text used to match queries across files.
inline std::string canonical_query(std::string_view query) { return detail::to_lower(detail::trim(query)); }

/// The query normalized like a tag; nullopt when nothing survives normalization.
inline std::optional<NormalizedTag> reference_tag(std::string_view query) { return normalize_tag(query); }

struct CandidateFilter {
  std::uint64_t min_users = kDefaultMinUsers;
  double min_fraction = kDefaultMinFraction;
  /// Count a tag's users over the whole corpus instead of over the seed URLs' posters.
  bool global_usage = false;
};

/// Candidate tags of the seed URLs that pass both user-count filters, sorted.
inline std::vector<NormalizedTag> filter_candidates(const TemporalTagIndex& index, const SeedSet& seeds,
                                                    const CandidateFilter& filter = {}) {
  std::vector<NormalizedTag> kept;
  for (const auto& [tag, counts] : index.candidate_tags_for_urls(seeds.seeds)) {
    const std::uint64_t users = filter.global_usage ? index.tag_user_count(tag) : counts.user_count;
    // Small slack so that e.g. 3 users pass 10% of 30 despite 0.1 * 30 > 3 in binary.
    const double needed = filter.min_fraction * static_cast<double>(counts.poster_count);
    if (users >= filter.min_users && static_cast<double>(users) >= needed - 1e-9) kept.push_back(tag);
  }
  return kept;
}

/// The query universe for idf: every mapped query and its candidate tag set tags(q).
class MappingCorpus {
 public:
  /// Registers a query with its tag set; a repeated query replaces its earlier set.
  void add_query(std::string_view query, std::vector<NormalizedTag> tags) {
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    auto [it, inserted] = tags_by_query_.try_emplace(canonical_query(query));
    if (!inserted)
      for (const auto& t : it->second) --query_frequency_[t];
    for (const auto& t : tags) ++query_frequency_[t];
    it->second = std::move(tags);
  }

  /// tags(q) for every query with a reference tag is its filtered candidates plus the reference tag.
  static MappingCorpus build(const TemporalTagIndex& index, std::span<const SeedSet> seed_sets,
                             const CandidateFilter& filter = {}) {
    MappingCorpus mc;
    for (const auto& s : seed_sets) {
      auto ref = reference_tag(s.query);
      if (!ref) continue;
      auto tags = filter_candidates(index, s, filter);
      tags.push_back(*ref);
      mc.add_query(s.query, std::move(tags));
    }
    return mc;
  }

  std::size_t query_count() const { return tags_by_query_.size(); }

  bool contains(std::string_view query) const { return tags_by_query_.contains(canonical_query(query)); }

  const std::vector<NormalizedTag>* tags_of(std::string_view query) const {
    auto it = tags_by_query_.find(canonical_query(query));
    return it == tags_by_query_.end() ? nullptr : &it->second;
  }

  /// |{q : tag in tags(q)}|
  std::uint64_t query_frequency(const NormalizedTag& tag) const {
    auto it = query_frequency_.find(tag);
    return it == query_frequency_.end() ? 0 : it->second;
  }

  /// Natural-log adapted idf; the denominator is clamped to at least 1.
  double idf(const NormalizedTag& tag) const {
    if (query_count() < 2) throw std::domain_error("idf needs at least 2 queries, have " + std::to_string(query_count()));
    return std::log(static_cast<double>(query_count())) / static_cast<double>(clamped_frequency(tag));
  }

  /// idf(tag) / idf(ref). The log factor cancels, leaving the frequency ratio, so the
  /// result does not depend on the logarithm base.
  double rel_idf(const NormalizedTag& tag, const NormalizedTag& ref) const {
    return static_cast<double>(clamped_frequency(ref)) / static_cast<double>(clamped_frequency(tag));
  }

 private:
  std::uint64_t clamped_frequency(const NormalizedTag& tag) const { return std::max<std::uint64_t>(1, query_frequency(tag)); }

  std::map<std::string, std::vector<NormalizedTag>> tags_by_query_;
  std::map<NormalizedTag, std::uint64_t> query_frequency_;
};

/// 1 - posts(tag, ref) / min(posts(tag), posts(ref)); 1.0 when either side has no posts.
inline double exclusiveness(const TemporalTagIndex& index, const NormalizedTag& tag, const NormalizedTag& ref,
                            std::optional<TimeWindow> window = std::nullopt) {
  const std::uint64_t tag_posts = index.posts_count(std::span(&tag, 1), window);
  const std::uint64_t ref_posts = index.posts_count(std::span(&ref, 1), window);
  const std::uint64_t smaller = std::min(tag_posts, ref_posts);
  if (smaller == 0) return 1.0;
  const NormalizedTag both[] = {tag, ref};
  const std::uint64_t joint = index.posts_count(both, window);
  return 1.0 - static_cast<double>(joint) / static_cast<double>(smaller);
}

struct ScoredTag {
  NormalizedTag tag;
  double idf = 0.0;
  double rel_idf = 0.0;
  double excl = 0.0;
  double score = 0.0;

  bool operator==(const ScoredTag&) const = default;
};

inline double combined_score(double rel_idf, double excl) { return 0.5 * (rel_idf + excl); }

struct TagMapping {
  std::string query;
  NormalizedTag ref_tag;
  /// Every scored candidate, accepted or not, ordered by score descending then tag.
  std::vector<ScoredTag> expansions;
  /// Sorted; always contains ref_tag.
  std::vector<NormalizedTag> accepted_tags;
  double threshold = kDefaultThreshold;

  bool is_accepted(const NormalizedTag& t) const {
    return std::binary_search(accepted_tags.begin(), accepted_tags.end(), t);
  }

  bool operator==(const TagMapping&) const = default;
};

/// {ref} plus every scored tag with score >= threshold, sorted.
inline std::vector<NormalizedTag> accept_tags(const NormalizedTag& ref, std::span<const ScoredTag> scored, double threshold) {
  std::vector<NormalizedTag> out{ref};
  for (const auto& s : scored)
    if (s.score >= threshold) out.push_back(s.tag);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

class MappingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MappingOptions {
  double threshold = kDefaultThreshold;
  CandidateFilter filter;
  /// Restrict the exclusiveness post counts to a window; corpus-wide when unset.
  std::optional<TimeWindow> exclusiveness_window;
};

namespace detail {

inline TagMapping score_candidates(std::string_view query, const NormalizedTag& ref, std::vector<NormalizedTag> candidates,
                                   const TemporalTagIndex& index, const MappingCorpus& mc, const MappingOptions& options) {
  candidates.push_back(ref);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  TagMapping m;
  m.query = std::string(detail::trim(query));
  m.ref_tag = ref;
  m.threshold = options.threshold;
  m.expansions.reserve(candidates.size());
  for (auto& w : candidates) {
    ScoredTag s;
    s.idf = mc.idf(w);
    s.rel_idf = mc.rel_idf(w, ref);
    s.excl = exclusiveness(index, w, ref, options.exclusiveness_window);
    s.score = combined_score(s.rel_idf, s.excl);
    s.tag = std::move(w);
    m.expansions.push_back(std::move(s));
  }
  std::sort(m.expansions.begin(), m.expansions.end(), [](const ScoredTag& a, const ScoredTag& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tag < b.tag;
  });
  m.accepted_tags = accept_tags(ref, m.expansions, options.threshold);
  return m;
}

}  // namespace detail

/// Maps one query. Throws MappingFailure when the query has no reference tag or the
/// mapping corpus is too small for idf.
inline TagMapping map_query(std::string_view query, const SeedSet& seeds, const TemporalTagIndex& index,
                            const MappingCorpus& mc, const MappingOptions& options = {}) {
  auto ref = reference_tag(query);
  if (!ref) throw MappingFailure("query '" + std::string(query) + "' normalizes to an empty reference tag");
  if (mc.query_count() < 2)
    throw MappingFailure("mapping corpus has " + std::to_string(mc.query_count()) + " queries; idf needs at least 2");
  return detail::score_candidates(query, *ref, filter_candidates(index, seeds, options.filter), index, mc, options);
}

struct MappingRun {
  std::vector<TagMapping> mappings;
  std::vector<std::pair<std::string, std::string>> failures;  ///< (query, reason)
};

/// Maps every seed set. Workers fill fixed slots, so output order follows the input
/// order whatever the thread count.
inline MappingRun map_queries(const TemporalTagIndex& index, std::span<const SeedSet> seed_sets,
                              const MappingOptions& options = {},
                              unsigned threads = std::thread::hardware_concurrency()) {
  const MappingCorpus mc = MappingCorpus::build(index, seed_sets, options.filter);
  std::vector<std::optional<TagMapping>> slots(seed_sets.size());
  std::vector<std::string> errors(seed_sets.size());

  const auto work = [&](std::size_t i) {
    try {
      slots[i] = map_query(seed_sets[i].query, seed_sets[i], index, mc, options);
    } catch (const MappingFailure& e) {
      errors[i] = e.what();
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seed_sets.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < seed_sets.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < seed_sets.size(); i += threads) work(i);
      });
  }

  MappingRun run;
  for (std::size_t i = 0; i < seed_sets.size(); ++i) {
    if (slots[i]) {
      run.mappings.push_back(std::move(*slots[i]));
    } else {
      run.failures.emplace_back(seed_sets[i].query, errors[i]);
    }
  }
  return run;
}

}  // namespace tagscope
