// SPDX-License-Identifier: Apache-2.0
#pragma once

// Immutable temporal inverted index over bookmarks.
//
// Strings are interned with ids assigned in lexicographic order, so sorting ids is
// the same as sorting the strings they name. All lookups are const and touch no
// mutable state; a built index can be shared across threads freely.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tagscope/corpus.hpp"
#include "tagscope/month.hpp"

namespace tagscope {

using TagId = std::uint32_t;
using UrlId = std::uint32_t;
using UserId = std::uint32_t;
using PostId = std::uint32_t;

/// One tag occurrence: `user` attached the tag to `url` in `month` as part of post `post`.
struct Posting {
  Month month;
  UrlId url;
  UserId user;
  PostId post;

  auto operator<=>(const Posting&) const = default;
};

/// Distinct-user counts for a candidate tag over a set of URLs.
struct CandidateCounts {
  std::uint64_t user_count = 0;    ///< users who posted one of the URLs with this tag
  std::uint64_t poster_count = 0;  ///< users who posted one of the URLs at all

  bool operator==(const CandidateCounts&) const = default;
};

class TemporalTagIndex {
 public:
  TemporalTagIndex() = default;

  /// Builds from any bookmark multiset. Identical (user, url, month, tags) records collapse.
  static TemporalTagIndex build(std::span<const Bookmark> bookmarks) {
    TemporalTagIndex idx;
    idx.build_impl(bookmarks);
    return idx;
  }

  // ---- dictionary ----------------------------------------------------------------

  std::size_t tag_count() const { return tags_.size(); }
  std::size_t url_count() const { return urls_.size(); }
  std::size_t user_count() const { return users_.size(); }
  std::size_t post_count() const { return posts_.size(); }

  const NormalizedTag& tag(TagId id) const { return tags_[id]; }
  const NormalizedUrl& url(UrlId id) const { return urls_[id]; }
  const std::string& user(UserId id) const { return users_[id]; }

  std::optional<TagId> find_tag(const NormalizedTag& t) const { return find_sorted(tags_, t); }
  std::optional<UrlId> find_url(const NormalizedUrl& u) const { return find_sorted(urls_, u); }

  /// Earliest and latest posting month; nullopt for an empty index.
  std::optional<TimeWindow> month_bounds() const { return bounds_; }

  // ---- retrieval -----------------------------------------------------------------

  /// Postings of one tag whose month lies in `window`, sorted by (month, url, user, post).
  std::span<const Posting> postings(TagId tag, std::optional<TimeWindow> window = std::nullopt) const {
    const auto all = std::span<const Posting>(postings_).subspan(posting_offsets_[tag],
                                                                  posting_offsets_[tag + 1] - posting_offsets_[tag]);
    if (!window) return all;
    const auto lo = std::lower_bound(all.begin(), all.end(), window->from(),
                                     [](const Posting& p, Month m) { return p.month < m; });
    const auto hi = std::upper_bound(lo, all.end(), window->to(),
                                     [](Month m, const Posting& p) { return m < p.month; });
    return {lo, hi};
  }

  /// Sorted ids of URLs tagged with ANY of `tags` within `window`. Unknown tags contribute nothing.
  std::vector<UrlId> url_ids_for_tags(std::span<const NormalizedTag> tags, const TimeWindow& window) const {
    std::vector<UrlId> out;
    for (TagId t : resolve_tags(tags))
      for (const auto& p : postings(t, window)) out.push_back(p.url);
    sort_unique(out);
    return out;
  }

  /// URLs tagged with ANY of `tags` within `window`, sorted by full().
  std::vector<NormalizedUrl> urls_for_tags(std::span<const NormalizedTag> tags, const TimeWindow& window) const {
    return to_urls(url_ids_for_tags(tags, window));
  }

  /// Distinct (user, url) pairs with one post carrying ALL of `tags`, optionally restricted
  /// to posts inside `window`. Repeated tags are ignored; any unknown tag yields zero.
  std::uint64_t posts_count(std::span<const NormalizedTag> tags, std::optional<TimeWindow> window = std::nullopt) const {
    std::vector<TagId> ids;
    ids.reserve(tags.size());
    for (const auto& t : tags) {
      auto id = find_tag(t);
      if (!id) return 0;
      ids.push_back(*id);
    }
    sort_unique(ids);
    if (ids.empty()) return 0;

    // Drive from the rarest tag and probe the others in each post's sorted tag list.
    std::span<const Posting> driver = postings(ids[0], window);
    for (TagId t : ids) {
      auto range = postings(t, window);
      if (range.size() < driver.size()) driver = range;
    }
    std::vector<std::uint64_t> pairs;
    pairs.reserve(driver.size());
    for (const auto& p : driver) {
      const auto post_tags = tags_of_post(p.post);
      const bool all = std::all_of(ids.begin(), ids.end(), [&](TagId t) {
        return std::binary_search(post_tags.begin(), post_tags.end(), t);
      });
      if (all) pairs.push_back((std::uint64_t{p.user} << 32) | p.url);
    }
    sort_unique(pairs);
    return pairs.size();
  }

  /// Per-tag distinct user counts over posts of `urls`; poster_count is shared by all entries.
  std::map<NormalizedTag, CandidateCounts> candidate_tags_for_urls(std::span<const NormalizedUrl> urls) const {
    std::vector<UrlId> ids;
    for (const auto& u : urls)
      if (auto id = find_url(u)) ids.push_back(*id);
    sort_unique(ids);

    std::vector<std::pair<TagId, UserId>> pairs;
    std::vector<UserId> posters;
    for (UrlId u : ids) {
      for (const auto& tu : tag_users_of_url(u)) pairs.push_back(tu);
      for (const auto& [m, user] : activity_of_url(u)) posters.push_back(user);
    }
    sort_unique(pairs);
    sort_unique(posters);

    std::map<NormalizedTag, CandidateCounts> out;
    for (std::size_t i = 0; i < pairs.size();) {
      std::size_t j = i;
      while (j < pairs.size() && pairs[j].first == pairs[i].first) ++j;
      out.emplace(tags_[pairs[i].first], CandidateCounts{j - i, posters.size()});
      i = j;
    }
    return out;
  }

  /// Distinct users who ever used `tag` anywhere in the corpus.
  std::uint64_t tag_user_count(const NormalizedTag& tag) const {
    auto id = find_tag(tag);
    return id ? tag_users_[*id] : 0;
  }

  /// Sorted ids of every URL posted within `window`, regardless of tags.
  std::vector<UrlId> url_ids_in_window(const TimeWindow& window) const {
    const auto lo = std::lower_bound(month_urls_.begin(), month_urls_.end(), std::pair{window.from(), UrlId{0}});
    std::vector<UrlId> out;
    for (auto it = lo; it != month_urls_.end() && it->first <= window.to(); ++it) out.push_back(it->second);
    sort_unique(out);
    return out;
  }

  std::vector<NormalizedUrl> urls_in_window(const TimeWindow& window) const { return to_urls(url_ids_in_window(window)); }

  /// (month, user) activity of a URL, sorted and unique.
  std::span<const std::pair<Month, UserId>> activity_of_url(UrlId url) const {
    return std::span(url_activity_).subspan(url_activity_offsets_[url],
                                            url_activity_offsets_[url + 1] - url_activity_offsets_[url]);
  }

  /// (tag, user) pairs seen on a URL, sorted and unique.
  std::span<const std::pair<TagId, UserId>> tag_users_of_url(UrlId url) const {
    return std::span(url_tags_).subspan(url_tag_offsets_[url], url_tag_offsets_[url + 1] - url_tag_offsets_[url]);
  }

  /// The de-duplicated post records, in canonical (user, url, month, tags) order.
  std::vector<Bookmark> records() const {
    std::vector<Bookmark> out;
    out.reserve(posts_.size());
    for (PostId p = 0; p < posts_.size(); ++p) {
      Bookmark b{users_[posts_[p].user], urls_[posts_[p].url], posts_[p].month, {}};
      for (TagId t : tags_of_post(p)) b.tags.push_back(tags_[t]);
      out.push_back(std::move(b));
    }
    return out;
  }

  std::vector<NormalizedTag> tags_of_record(PostId p) const {
    std::vector<NormalizedTag> out;
    for (TagId t : tags_of_post(p)) out.push_back(tags_[t]);
    return out;
  }

  std::vector<NormalizedUrl> to_urls(std::span<const UrlId> ids) const {
    std::vector<NormalizedUrl> out;
    out.reserve(ids.size());
    for (UrlId id : ids) out.push_back(urls_[id]);
    return out;
  }

  /// Ids of the known tags among `tags`, sorted and unique.
  std::vector<TagId> resolve_tags(std::span<const NormalizedTag> tags) const {
    std::vector<TagId> ids;
    for (const auto& t : tags)
      if (auto id = find_tag(t)) ids.push_back(*id);
    sort_unique(ids);
    return ids;
  }

 private:
  struct PostRecord {
    UserId user;
    UrlId url;
    Month month;
    std::uint32_t tag_begin;
    std::uint32_t tag_end;
  };

  template <typename T>
  static void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }

  template <typename T>
  static std::optional<std::uint32_t> find_sorted(const std::vector<T>& v, const T& key) {
    auto it = std::lower_bound(v.begin(), v.end(), key);
    if (it == v.end() || !(*it == key)) return std::nullopt;
    return static_cast<std::uint32_t>(it - v.begin());
  }

  std::span<const TagId> tags_of_post(PostId p) const {
    return std::span(post_tags_).subspan(posts_[p].tag_begin, posts_[p].tag_end - posts_[p].tag_begin);
  }

  // Interns the strings produced by `key(i)` for i in [0, n). Returns the id of each
  // element; `dict` receives the sorted unique values.
  template <typename Value, typename KeyFn, typename ValueFn>
  static std::vector<std::uint32_t> intern(std::size_t n, KeyFn key, ValueFn value, std::vector<Value>& dict) {
    std::unordered_map<std::string_view, std::uint32_t> provisional;
    std::vector<std::size_t> first_seen;
    std::vector<std::uint32_t> ids(n);
    provisional.reserve(n / 2 + 1);
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = provisional.try_emplace(key(i), static_cast<std::uint32_t>(first_seen.size()));
      if (inserted) first_seen.push_back(i);
      ids[i] = it->second;
    }
    std::vector<std::uint32_t> order(first_seen.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return key(first_seen[a]) < key(first_seen[b]); });
    std::vector<std::uint32_t> remap(order.size());
    dict.clear();
    dict.reserve(order.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[order[rank]] = rank;
      dict.push_back(value(first_seen[order[rank]]));
    }
    for (auto& id : ids) id = remap[id];
    return ids;
  }

  void build_impl(std::span<const Bookmark> bookmarks) {
    const std::size_t n = bookmarks.size();
    const auto user_ids = intern(
        n, [&](std::size_t i) -> std::string_view { return bookmarks[i].user; },
        [&](std::size_t i) { return bookmarks[i].user; }, users_);
    const auto url_ids = intern(
        n, [&](std::size_t i) -> std::string_view { return bookmarks[i].url.full(); },
        [&](std::size_t i) { return bookmarks[i].url; }, urls_);

    std::vector<const NormalizedTag*> flat_tags;
    std::vector<std::uint32_t> tag_start(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      tag_start[i] = static_cast<std::uint32_t>(flat_tags.size());
      for (const auto& t : bookmarks[i].tags) flat_tags.push_back(&t);
    }
    tag_start[n] = static_cast<std::uint32_t>(flat_tags.size());
    const auto flat_tag_ids = intern(
        flat_tags.size(), [&](std::size_t i) -> std::string_view { return flat_tags[i]->text(); },
        [&](std::size_t i) { return *flat_tags[i]; }, tags_);

    // Each bookmark's tags are already sorted and unique, and ids follow string order.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const auto tag_span = [&](std::uint32_t i) {
      return std::span(flat_tag_ids).subspan(tag_start[i], tag_start[i + 1] - tag_start[i]);
    };
    const auto less = [&](std::uint32_t a, std::uint32_t b) {
      if (user_ids[a] != user_ids[b]) return user_ids[a] < user_ids[b];
      if (url_ids[a] != url_ids[b]) return url_ids[a] < url_ids[b];
      if (bookmarks[a].month != bookmarks[b].month) return bookmarks[a].month < bookmarks[b].month;
      auto ta = tag_span(a), tb = tag_span(b);
      return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
    };
    const auto same = [&](std::uint32_t a, std::uint32_t b) { return !less(a, b) && !less(b, a); };
    std::sort(order.begin(), order.end(), less);
    order.erase(std::unique(order.begin(), order.end(), same), order.end());

    posts_.clear();
    post_tags_.clear();
    posts_.reserve(order.size());
    for (std::uint32_t i : order) {
      const auto begin = static_cast<std::uint32_t>(post_tags_.size());
      for (TagId t : tag_span(i)) post_tags_.push_back(t);
      posts_.push_back({user_ids[i], url_ids[i], bookmarks[i].month, begin, static_cast<std::uint32_t>(post_tags_.size())});
    }

    build_postings();
    build_url_tables();

    if (!posts_.empty()) {
      auto [lo, hi] = std::minmax_element(posts_.begin(), posts_.end(),
                                          [](const PostRecord& a, const PostRecord& b) { return a.month < b.month; });
      bounds_ = TimeWindow(lo->month, hi->month);
    } else {
      bounds_.reset();
    }
  }

  void build_postings() {
    posting_offsets_.assign(tags_.size() + 1, 0);
    for (TagId t : post_tags_) ++posting_offsets_[t + 1];
    std::partial_sum(posting_offsets_.begin(), posting_offsets_.end(), posting_offsets_.begin());
    postings_.assign(post_tags_.size(), Posting{});
    std::vector<std::size_t> cursor(posting_offsets_.begin(), posting_offsets_.end() - 1);
    for (PostId p = 0; p < posts_.size(); ++p)
      for (TagId t : tags_of_post(p)) postings_[cursor[t]++] = {posts_[p].month, posts_[p].url, posts_[p].user, p};

    tag_users_.assign(tags_.size(), 0);
    std::vector<UserId> users;
    for (TagId t = 0; t < tags_.size(); ++t) {
      auto first = postings_.begin() + static_cast<std::ptrdiff_t>(posting_offsets_[t]);
      auto last = postings_.begin() + static_cast<std::ptrdiff_t>(posting_offsets_[t + 1]);
      std::sort(first, last);
      users.clear();
      for (auto it = first; it != last; ++it) users.push_back(it->user);
      sort_unique(users);
      tag_users_[t] = users.size();
    }
  }

  void build_url_tables() {
    std::vector<std::pair<UrlId, std::pair<TagId, UserId>>> tu;
    std::vector<std::pair<UrlId, std::pair<Month, UserId>>> act;
    tu.reserve(post_tags_.size());
    act.reserve(posts_.size());
    month_urls_.clear();
    month_urls_.reserve(posts_.size());
    for (PostId p = 0; p < posts_.size(); ++p) {
      const auto& rec = posts_[p];
      for (TagId t : tags_of_post(p)) tu.push_back({rec.url, {t, rec.user}});
      act.push_back({rec.url, {rec.month, rec.user}});
      month_urls_.push_back({rec.month, rec.url});
    }
    sort_unique(tu);
    sort_unique(act);
    sort_unique(month_urls_);

    const auto fill = [&](const auto& src, auto& dst, std::vector<std::size_t>& offsets) {
      offsets.assign(urls_.size() + 1, 0);
      dst.clear();
      dst.reserve(src.size());
      for (const auto& [u, v] : src) {
        ++offsets[u + 1];
        dst.push_back(v);
      }
      std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    };
    fill(tu, url_tags_, url_tag_offsets_);
    fill(act, url_activity_, url_activity_offsets_);
  }

  std::vector<std::string> users_;
  std::vector<NormalizedUrl> urls_;
  std::vector<NormalizedTag> tags_;

  std::vector<PostRecord> posts_;
  std::vector<TagId> post_tags_;

  std::vector<Posting> postings_;
  std::vector<std::size_t> posting_offsets_{0};
  std::vector<std::uint64_t> tag_users_;

  std::vector<std::pair<TagId, UserId>> url_tags_;
  std::vector<std::size_t> url_tag_offsets_{0};
  std::vector<std::pair<Month, UserId>> url_activity_;
  std::vector<std::size_t> url_activity_offsets_{0};
  std::vector<std::pair<Month, UrlId>> month_urls_;

  std::optional<TimeWindow> bounds_;
};

}  // namespace tagscope
