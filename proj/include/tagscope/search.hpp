// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagscope/tag_mapping.hpp"
#include "tagscope/temporal_index.hpp"

namespace tagscope {

struct SearchResult {
  NormalizedUrl url;
  std::uint64_t post_count = 0;  ///< distinct (user, month) postings in the window
  std::vector<NormalizedTag> matched_tags;
  Month first_month;
  Month last_month;

  bool operator==(const SearchResult&) const = default;
};

struct SearchResponse {
  std::string query;
  TimeWindow window{Month{}, Month{}};
  std::vector<NormalizedTag> tags;
  std::vector<SearchResult> results;
  std::uint64_t total_urls = 0;  ///< result count before `limit` truncation

  bool operator==(const SearchResponse&) const = default;
};

/// URLs tagged with any of `tags` inside `window`, most-posted first, ties by URL.
inline SearchResponse search_tags(const TemporalTagIndex& index, std::string_view query_echo,
                                  std::span<const NormalizedTag> tags, const TimeWindow& window,
                                  std::optional<std::size_t> limit = std::nullopt) {
  if (tags.empty()) throw std::invalid_argument("search needs at least one tag");

  SearchResponse resp;
  resp.query = std::string(query_echo);
  resp.window = window;
  resp.tags.assign(tags.begin(), tags.end());
  std::sort(resp.tags.begin(), resp.tags.end());
  resp.tags.erase(std::unique(resp.tags.begin(), resp.tags.end()), resp.tags.end());

  struct Hit {
    UrlId url;
    UserId user;
    Month month;
    TagId tag;
    auto operator<=>(const Hit&) const = default;
  };
  std::vector<Hit> hits;
  for (TagId t : index.resolve_tags(resp.tags))
    for (const auto& p : index.postings(t, window)) hits.push_back({p.url, p.user, p.month, t});
  std::sort(hits.begin(), hits.end());

  struct Group {
    std::size_t begin, end;
    std::uint64_t posts = 0;
    Month first, last;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < hits.size();) {
    Group g{i, i, 0, hits[i].month, hits[i].month};
    for (; g.end < hits.size() && hits[g.end].url == hits[i].url; ++g.end) {
      const auto& h = hits[g.end];
      if (g.end == i || h.user != hits[g.end - 1].user || h.month != hits[g.end - 1].month) ++g.posts;
      g.first = std::min(g.first, h.month);
      g.last = std::max(g.last, h.month);
    }
    groups.push_back(g);
    i = g.end;
  }

  // Groups are in URL id order; ties on post_count keep that order.
  const auto by_posts = [&](const Group& a, const Group& b) {
    return a.posts != b.posts ? a.posts > b.posts : hits[a.begin].url < hits[b.begin].url;
  };
  resp.total_urls = groups.size();
  const std::size_t keep = limit ? std::min(*limit, groups.size()) : groups.size();
  std::partial_sort(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(keep), groups.end(), by_posts);

  std::vector<TagId> tag_ids;
  resp.results.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    const Group& g = groups[k];
    SearchResult r;
    r.url = index.url(hits[g.begin].url);
    r.post_count = g.posts;
    r.first_month = g.first;
    r.last_month = g.last;
    tag_ids.clear();
    for (std::size_t j = g.begin; j < g.end; ++j) tag_ids.push_back(hits[j].tag);
    std::sort(tag_ids.begin(), tag_ids.end());
    tag_ids.erase(std::unique(tag_ids.begin(), tag_ids.end()), tag_ids.end());
    for (TagId t : tag_ids) r.matched_tags.push_back(index.tag(t));
    resp.results.push_back(std::move(r));
  }
  return resp;
}

/// Searches with a mapping's accepted tags.
inline SearchResponse search(const TemporalTagIndex& index, const TagMapping& mapping, const TimeWindow& window,
                             std::optional<std::size_t> limit = std::nullopt) {
  if (mapping.accepted_tags.empty())
    throw std::invalid_argument("mapping for '" + mapping.query + "' has no accepted tags");
  return search_tags(index, mapping.query, mapping.accepted_tags, window, limit);
}

enum class HistogramMode {
  kAllTags,  ///< posts carrying every tag (posts_count semantics)
  kAnyTag,   ///< posts carrying at least one of the tags
};

struct HistogramBin {
  Month month;
  std::uint64_t posts = 0;
  bool operator==(const HistogramBin&) const = default;
};

/// One zero-filled bin per month of `span` with the distinct (user, url) post count.
inline std::vector<HistogramBin> monthly_histogram(const TemporalTagIndex& index, std::span<const NormalizedTag> tags,
                                                   const TimeWindow& span, HistogramMode mode = HistogramMode::kAllTags) {
  std::vector<HistogramBin> bins;
  bins.reserve(static_cast<std::size_t>(span.months()));
  for (Month m = span.from(); m <= span.to(); m = m.plus(1)) bins.push_back({m, 0});
  if (tags.empty()) return bins;

  if (mode == HistogramMode::kAllTags) {
    for (auto& b : bins) b.posts = index.posts_count(tags, TimeWindow::single(b.month));
    return bins;
  }
  std::vector<std::pair<Month, std::uint64_t>> keys;
  for (TagId t : index.resolve_tags(tags))
    for (const auto& p : index.postings(t, span)) keys.emplace_back(p.month, (std::uint64_t{p.user} << 32) | p.url);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const auto& [m, key] : keys) ++bins[static_cast<std::size_t>(m.index() - span.from().index())].posts;
  return bins;
}

}  // namespace tagscope
