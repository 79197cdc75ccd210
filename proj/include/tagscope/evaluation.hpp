// SPDX-License-Identifier: Apache-2.0
#pragma once

// Recall of bookmark retrieval against search-engine click logs.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tagscope/corpus.hpp"
#include "tagscope/tag_mapping.hpp"
#include "tagscope/temporal_index.hpp"

namespace tagscope {

enum class UrlGranularity {
  kFull,  ///< host + path must match
  kHost,  ///< a clicked URL counts as found when any retrieved URL shares its host
};

inline std::optional<UrlGranularity> parse_granularity(std::string_view s) {
  if (s == "full") return UrlGranularity::kFull;
  if (s == "host") return UrlGranularity::kHost;
  return std::nullopt;
}

inline const char* granularity_name(UrlGranularity g) { return g == UrlGranularity::kFull ? "full" : "host"; }

struct GroundTruth {
  std::string query;
  std::vector<NormalizedUrl> clicked_urls;  ///< sorted, unique
  std::uint64_t query_count = 0;            ///< matching log records (#Q)
  std::optional<TimeWindow> log_anchor;     ///< time span of the whole log

  bool evaluable() const { return !clicked_urls.empty(); }
  bool operator==(const GroundTruth&) const = default;
};

/// Click records whose query equals `query` ignoring case and surrounding whitespace.
inline GroundTruth extract_ground_truth(const QueryLog& log, std::string_view query) {
  GroundTruth gt;
  gt.query = std::string(detail::trim(query));
  gt.log_anchor = log.span();
  const std::string key = canonical_query(query);
  for (const auto& r : log.records) {
    if (canonical_query(r.query) != key) continue;
    ++gt.query_count;
    gt.clicked_urls.push_back(r.clicked);
  }
  std::sort(gt.clicked_urls.begin(), gt.clicked_urls.end());
  gt.clicked_urls.erase(std::unique(gt.clicked_urls.begin(), gt.clicked_urls.end()), gt.clicked_urls.end());
  return gt;
}

/// Ground truth for every query of a log, built in one pass.
class GroundTruthTable {
 public:
  explicit GroundTruthTable(const QueryLog& log) {
    const auto anchor = log.span();
    for (const auto& r : log.records) {
      auto& gt = by_query_[canonical_query(r.query)];
      if (gt.query_count++ == 0) {
        gt.query = std::string(detail::trim(r.query));
        gt.log_anchor = anchor;
      }
      gt.clicked_urls.push_back(r.clicked);
    }
    for (auto& [k, gt] : by_query_) {
      std::sort(gt.clicked_urls.begin(), gt.clicked_urls.end());
      gt.clicked_urls.erase(std::unique(gt.clicked_urls.begin(), gt.clicked_urls.end()), gt.clicked_urls.end());
    }
    anchor_ = anchor;
  }

  /// The truth for `query`; a non-evaluable empty truth when the log never saw it.
  GroundTruth lookup(std::string_view query) const {
    auto it = by_query_.find(canonical_query(query));
    if (it != by_query_.end()) {
      GroundTruth gt = it->second;
      gt.query = std::string(detail::trim(query));
      return gt;
    }
    GroundTruth empty;
    empty.query = std::string(detail::trim(query));
    empty.log_anchor = anchor_;
    return empty;
  }

  std::optional<TimeWindow> anchor() const { return anchor_; }
  std::size_t size() const { return by_query_.size(); }

 private:
  std::map<std::string, GroundTruth> by_query_;
  std::optional<TimeWindow> anchor_;
};

namespace detail {

inline std::string_view match_key(const NormalizedUrl& u, UrlGranularity g) {
  return g == UrlGranularity::kHost ? u.host() : std::string_view(u.full());
}

/// Sorted retrieval keys for membership probes at a given granularity.
class RetrievedKeys {
 public:
  RetrievedKeys(std::span<const NormalizedUrl> retrieved, UrlGranularity g) : granularity_(g) {
    keys_.reserve(retrieved.size());
    for (const auto& u : retrieved) keys_.emplace_back(match_key(u, g));
    std::sort(keys_.begin(), keys_.end());
    keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  }
  bool found(const NormalizedUrl& clicked) const {
    return std::binary_search(keys_.begin(), keys_.end(), std::string(match_key(clicked, granularity_)));
  }

 private:
  UrlGranularity granularity_;
  std::vector<std::string> keys_;
};

inline double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

/// Left-to-right mean; the fixed order keeps aggregates reproducible.
inline double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
}

}  // namespace detail

struct QueryRecall {
  std::string query;
  double recall = 0.0;
  std::uint64_t retrieved_count = 0;
  std::uint64_t query_count = 0;
  std::vector<NormalizedUrl> matched_urls;
  std::vector<NormalizedUrl> missed_urls;
  std::optional<double> unmapped_recall;

  bool operator==(const QueryRecall&) const = default;
};

/// Splits the clicked URLs into found / missed against `retrieved`.
inline QueryRecall score_query(std::span<const NormalizedUrl> retrieved, const GroundTruth& truth, UrlGranularity g) {
  if (!truth.evaluable()) throw std::invalid_argument("ground truth for '" + truth.query + "' has no clicked URLs");
  const detail::RetrievedKeys keys(retrieved, g);
  QueryRecall qr;
  qr.query = truth.query;
  qr.retrieved_count = retrieved.size();
  qr.query_count = truth.query_count;
  for (const auto& c : truth.clicked_urls) (keys.found(c) ? qr.matched_urls : qr.missed_urls).push_back(c);
  qr.recall = detail::ratio(qr.matched_urls.size(), truth.clicked_urls.size());
  return qr;
}

/// |found clicked| / |clicked|. Throws when the truth has no clicks.
inline double recall(std::span<const NormalizedUrl> retrieved, const GroundTruth& truth,
                     UrlGranularity g = UrlGranularity::kHost) {
  return score_query(retrieved, truth, g).recall;
}

namespace detail {

/// Index URLs that a clicked URL would match under `g`.
inline std::vector<UrlId> matching_url_ids(const TemporalTagIndex& index, const NormalizedUrl& clicked, UrlGranularity g) {
  std::vector<UrlId> out;
  if (g == UrlGranularity::kFull) {
    if (auto id = index.find_url(clicked)) out.push_back(*id);
    return out;
  }
  // URLs on a host are the exact host plus the contiguous "host/..." range.
  const std::string host(clicked.host());
  const std::size_t n = index.url_count();
  const auto lower = [&](const std::string& key) {
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (index.url(static_cast<UrlId>(mid)).full() < key) lo = mid + 1; else hi = mid;
    }
    return lo;
  };
  const std::size_t exact = lower(host);
  if (exact < n && index.url(static_cast<UrlId>(exact)).full() == host) out.push_back(static_cast<UrlId>(exact));
  for (std::size_t i = lower(host + "/"); i < n && index.url(static_cast<UrlId>(i)).host() == host; ++i)
    out.push_back(static_cast<UrlId>(i));
  return out;
}

inline bool active_in(const TemporalTagIndex& index, UrlId url, const TimeWindow& w) {
  const auto act = index.activity_of_url(url);
  auto it = std::lower_bound(act.begin(), act.end(), std::pair{w.from(), UserId{0}});
  return it != act.end() && it->first <= w.to();
}

}  // namespace detail

/// Recall when every URL posted in `window` counts as retrieved, whatever its tags.
inline double unmapped_recall(const TemporalTagIndex& index, const GroundTruth& truth, const TimeWindow& window,
                              UrlGranularity g = UrlGranularity::kHost) {
  if (!truth.evaluable()) throw std::invalid_argument("ground truth for '" + truth.query + "' has no clicked URLs");
  std::size_t found = 0;
  for (const auto& c : truth.clicked_urls) {
    const auto ids = detail::matching_url_ids(index, c, g);
    if (std::any_of(ids.begin(), ids.end(), [&](UrlId u) { return detail::active_in(index, u, window); })) ++found;
  }
  return detail::ratio(found, truth.clicked_urls.size());
}

struct PopularityBucket {
  std::uint64_t min_count = 0;
  std::optional<std::uint64_t> max_count;  ///< inclusive; unset for the open top bucket
  std::uint64_t num_queries = 0;
  std::optional<double> avg_recall;
  std::optional<double> avg_unmapped_recall;

  std::string label() const {
    return max_count ? std::to_string(min_count) + "-" + std::to_string(*max_count) : ">" + std::to_string(min_count - 1);
  }
  bool operator==(const PopularityBucket&) const = default;
};

struct TopXPoint {
  std::uint64_t x = 0;
  double avg_recall = 0.0;
  bool operator==(const TopXPoint&) const = default;
};

struct RecallReport {
  std::vector<QueryRecall> per_query;       ///< evaluable queries, in mapping order
  std::vector<std::string> non_evaluable;   ///< mapped queries without clicks in the log
  std::optional<double> average;            ///< unset when nothing was evaluable
  std::vector<PopularityBucket> buckets;
  std::vector<TopXPoint> top_x_curve;

  std::size_t evaluable() const { return per_query.size(); }
  bool operator==(const RecallReport&) const = default;
};

/// Upper bounds of the closed buckets; the last bucket is everything above the final bound.
inline const std::vector<std::uint64_t>& default_bucket_bounds() {
  static const std::vector<std::uint64_t> bounds{10, 100, 1000};
  return bounds;
}

/// Groups evaluable queries by #Q: [1, b0], [b0+1, b1], ..., (b_last, inf).
inline std::vector<PopularityBucket> popularity_buckets(const RecallReport& report,
                                                        std::span<const std::uint64_t> bounds = default_bucket_bounds()) {
  std::vector<PopularityBucket> buckets;
  std::uint64_t lo = 1;
  for (auto b : bounds) {
    buckets.push_back({lo, b, 0, std::nullopt, std::nullopt});
    lo = b + 1;
  }
  buckets.push_back({lo, std::nullopt, 0, std::nullopt, std::nullopt});

  std::vector<std::vector<double>> recalls(buckets.size()), unmapped(buckets.size());
  for (const auto& q : report.per_query) {
    std::size_t i = 0;
    while (buckets[i].max_count && q.query_count > *buckets[i].max_count) ++i;
    recalls[i].push_back(q.recall);
    if (q.unmapped_recall) unmapped[i].push_back(*q.unmapped_recall);
  }
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    buckets[i].num_queries = recalls[i].size();
    if (!recalls[i].empty()) buckets[i].avg_recall = detail::mean(recalls[i]);
    if (!unmapped[i].empty()) buckets[i].avg_unmapped_recall = detail::mean(unmapped[i]);
  }
  return buckets;
}

/// Evaluable queries ordered best first: recall desc, #Q desc, query asc.
inline std::vector<const QueryRecall*> rank_by_recall(const RecallReport& report) {
  std::vector<const QueryRecall*> ranked;
  for (const auto& q : report.per_query) ranked.push_back(&q);
  std::sort(ranked.begin(), ranked.end(), [](const QueryRecall* a, const QueryRecall* b) {
    if (a->recall != b->recall) return a->recall > b->recall;
    if (a->query_count != b->query_count) return a->query_count > b->query_count;
    return a->query < b->query;
  });
  return ranked;
}

/// Mean recall of the X best queries for each X. `xs` must be ascending and within [1, evaluable].
inline std::vector<TopXPoint> top_x_curve(const RecallReport& report, std::span<const std::uint64_t> xs) {
  const auto ranked = rank_by_recall(report);
  std::uint64_t prev = 0;
  for (auto x : xs) {
    if (x == 0 || x > ranked.size())
      throw std::invalid_argument("top-X value " + std::to_string(x) + " outside [1, " + std::to_string(ranked.size()) + "]");
    if (x <= prev) throw std::invalid_argument("top-X values must be strictly ascending");
    prev = x;
  }
  std::vector<TopXPoint> curve;
  double sum = 0.0;
  std::size_t taken = 0;
  for (auto x : xs) {
    for (; taken < x; ++taken) sum += ranked[taken]->recall;
    curve.push_back({x, sum / static_cast<double>(x)});
  }
  return curve;
}

/// Every X from 1 to the number of evaluable queries.
inline std::vector<TopXPoint> full_top_x_curve(const RecallReport& report) {
  std::vector<std::uint64_t> xs(report.per_query.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = i + 1;
  return top_x_curve(report, xs);
}

struct EvaluationOptions {
  UrlGranularity granularity = UrlGranularity::kHost;
  bool with_unmapped = true;
  std::vector<std::uint64_t> bucket_bounds = default_bucket_bounds();
  unsigned threads = std::thread::hardware_concurrency();
};

/// Per-query recall of each mapping's accepted tags inside `window`, plus aggregates.
inline RecallReport evaluate_all(const TemporalTagIndex& index, std::span<const TagMapping> mappings,
                                 const GroundTruthTable& truths, const TimeWindow& window,
                                 const EvaluationOptions& options = {}) {
  std::vector<std::optional<QueryRecall>> slots(mappings.size());
  detail::parallel_for(mappings.size(), options.threads, [&](std::size_t i) {
    const auto truth = truths.lookup(mappings[i].query);
    if (!truth.evaluable()) return;
    const auto retrieved = index.urls_for_tags(mappings[i].accepted_tags, window);
    auto qr = score_query(retrieved, truth, options.granularity);
    if (options.with_unmapped) qr.unmapped_recall = unmapped_recall(index, truth, window, options.granularity);
    slots[i] = std::move(qr);
  });

  RecallReport report;
  std::vector<double> recalls;
  for (std::size_t i = 0; i < mappings.size(); ++i) {
    if (!slots[i]) {
      report.non_evaluable.push_back(mappings[i].query);
      continue;
    }
    recalls.push_back(slots[i]->recall);
    report.per_query.push_back(std::move(*slots[i]));
  }
  if (!recalls.empty()) report.average = detail::mean(recalls);
  report.buckets = popularity_buckets(report, options.bucket_bounds);
  report.top_x_curve = full_top_x_curve(report);
  return report;
}

inline RecallReport evaluate_all(const TemporalTagIndex& index, std::span<const TagMapping> mappings, const QueryLog& log,
                                 const TimeWindow& window, const EvaluationOptions& options = {}) {
  return evaluate_all(index, mappings, GroundTruthTable(log), window, options);
}

struct SweepCell {
  int past_months = 0;
  int future_months = 0;
  std::optional<double> average_recall;  ///< unset when no query is evaluable
  bool operator==(const SweepCell&) const = default;
};

struct SweepMatrix {
  TimeWindow anchor{Month{}, Month{}};
  int max_past = 0;
  int max_future = 0;
  std::size_t evaluable = 0;
  std::vector<SweepCell> cells;  ///< row-major: past offset is the row

  const SweepCell& at(int past, int future) const {
    return cells[static_cast<std::size_t>(past * (max_future + 1) + future)];
  }
  bool operator==(const SweepMatrix&) const = default;
};

/// Average recall for every window [anchor.from - p, anchor.to + f], 0 <= p <= max_past,
/// 0 <= f <= max_future.
///
/// Each clicked URL is reduced to the distance (in months) of its nearest tag-matched
/// posting before and after the anchor, so the whole matrix costs one retrieval per
/// query over the widest window.
inline SweepMatrix temporal_sweep(const TemporalTagIndex& index, std::span<const TagMapping> mappings,
                                  const GroundTruthTable& truths, const TimeWindow& anchor, int max_past, int max_future,
                                  const EvaluationOptions& options = {}) {
  if (max_past < 0 || max_future < 0) throw std::invalid_argument("sweep offsets must be non-negative");
  constexpr int kNever = std::numeric_limits<int>::max();
  struct ClickReach {
    int past = kNever;    // 0 when matched inside the anchor
    int future = kNever;
  };
  struct QueryReach {
    std::vector<ClickReach> clicks;
  };

  const TimeWindow widest = anchor.extended(max_past, max_future);
  std::vector<std::optional<QueryReach>> reach(mappings.size());
  detail::parallel_for(mappings.size(), options.threads, [&](std::size_t i) {
    const auto truth = truths.lookup(mappings[i].query);
    if (!truth.evaluable()) return;
    // Several clicked URLs share a key only at host granularity; they then match together.
    std::map<std::string, std::size_t> key_slot;
    for (const auto& c : truth.clicked_urls)
      key_slot.emplace(std::string(detail::match_key(c, options.granularity)), key_slot.size());
    std::vector<ClickReach> by_key(key_slot.size());
    QueryReach qr;
    qr.clicks.resize(truth.clicked_urls.size());

    for (TagId t : index.resolve_tags(mappings[i].accepted_tags)) {
      for (const auto& p : index.postings(t, widest)) {
        auto it = key_slot.find(std::string(detail::match_key(index.url(p.url), options.granularity)));
        if (it == key_slot.end()) continue;
        auto& r = by_key[it->second];
        if (anchor.contains(p.month)) {
          r.past = 0;
          r.future = 0;
        } else if (p.month < anchor.from()) {
          r.past = std::min(r.past, anchor.from().index() - p.month.index());
        } else {
          r.future = std::min(r.future, p.month.index() - anchor.to().index());
        }
      }
    }
    for (std::size_t c = 0; c < truth.clicked_urls.size(); ++c)
      qr.clicks[c] = by_key[key_slot.at(std::string(detail::match_key(truth.clicked_urls[c], options.granularity)))];
    reach[i] = std::move(qr);
  });

  SweepMatrix m;
  m.anchor = anchor;
  m.max_past = max_past;
  m.max_future = max_future;
  std::vector<const QueryReach*> evaluable;
  for (const auto& r : reach)
    if (r) evaluable.push_back(&*r);
  m.evaluable = evaluable.size();

  std::vector<double> recalls(evaluable.size());
  for (int p = 0; p <= max_past; ++p) {
    for (int f = 0; f <= max_future; ++f) {
      SweepCell cell{p, f, std::nullopt};
      for (std::size_t q = 0; q < evaluable.size(); ++q) {
        const auto& clicks = evaluable[q]->clicks;
        const auto found = std::count_if(clicks.begin(), clicks.end(), [&](const ClickReach& c) {
          return c.past <= p || c.future <= f;
        });
        recalls[q] = detail::ratio(static_cast<std::size_t>(found), clicks.size());
      }
      if (!evaluable.empty()) cell.average_recall = detail::mean(recalls);
      m.cells.push_back(cell);
    }
  }
  return m;
}

}  // namespace tagscope
