// SPDX-License-Identifier: Apache-2.0
#pragma once

// Transport-independent request handling for the HTTP service. Every handler is a
// pure function of the immutable ServiceState and the request parameters.

#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tagscope/io.hpp"
#include "tagscope/search.hpp"
#include "tagscope/tag_mapping.hpp"
#include "tagscope/temporal_index.hpp"

namespace tagscope::api {

struct Response {
  int status = 200;
  std::string body;  ///< JSON
};

using Params = std::multimap<std::string, std::string>;

/// Shared read-only state; loaded once at startup.
class ServiceState {
 public:
  ServiceState(TemporalTagIndex index, IngestStats stats, std::vector<TagMapping> mappings)
      : index_(std::move(index)), stats_(std::move(stats)), mappings_(std::move(mappings)) {
    for (std::size_t i = 0; i < mappings_.size(); ++i) by_query_.emplace(canonical_query(mappings_[i].query), i);
  }

  const TemporalTagIndex& index() const { return index_; }
  const IngestStats& stats() const { return stats_; }
  const std::vector<TagMapping>& mappings() const { return mappings_; }

  const TagMapping* mapping(std::string_view query) const {
    auto it = by_query_.find(canonical_query(query));
    return it == by_query_.end() ? nullptr : &mappings_[it->second];
  }

 private:
  TemporalTagIndex index_;
  IngestStats stats_;
  std::vector<TagMapping> mappings_;
  std::map<std::string, std::size_t> by_query_;
};

inline Response error(int status, std::string_view code, std::string_view message) {
  json j;
  j["error"] = {{"status", status}, {"code", code}, {"message", message}};
  return {status, j.dump()};
}

namespace detail {

inline std::optional<std::string> param(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  return it->second;
}

struct BadRequest {
  Response response;
};

inline std::vector<NormalizedTag> parse_tag_list(std::string_view raw) {
  std::vector<std::string_view> parts;
  for (auto piece : tagscope::detail::split(raw, ',')) parts.push_back(piece);
  return normalize_tags(parts);
}

/// from/to request parameters; missing ends default to the index month bounds.
inline TimeWindow window_param(const ServiceState& s, const Params& p) {
  const auto bounds = s.index().month_bounds();
  const auto month_of = [&](const char* key, std::optional<Month> fallback) -> Month {
    auto raw = param(p, key);
    if (!raw) {
      if (!fallback) throw BadRequest{error(400, "missing_window", std::string("parameter '") + key + "' is required for an empty index")};
      return *fallback;
    }
    auto m = Month::parse(*raw);
    if (!m) throw BadRequest{error(400, "malformed_month", std::string("parameter '") + key + "' must be YYYY-MM, got '" + *raw + "'")};
    return *m;
  };
  const Month from = month_of("from", bounds ? std::optional(bounds->from()) : std::nullopt);
  const Month to = month_of("to", bounds ? std::optional(bounds->to()) : std::nullopt);
  if (to < from) throw BadRequest{error(400, "invalid_window", "'from' " + from.str() + " is after 'to' " + to.str())};
  return {from, to};
}

inline std::optional<std::size_t> limit_param(const Params& p) {
  auto raw = param(p, "limit");
  if (!raw) return std::nullopt;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), v);
  if (ec != std::errc() || ptr != raw->data() + raw->size())
    throw BadRequest{error(400, "malformed_limit", "parameter 'limit' must be a non-negative integer")};
  return v;
}

/// Tags from `tags=` if present, otherwise the accepted tags of the mapping for `q`.
inline std::pair<std::string, std::vector<NormalizedTag>> tags_for(const ServiceState& s, const Params& p) {
  const auto q = param(p, "q");
  if (auto raw = param(p, "tags")) {
    auto tags = parse_tag_list(*raw);
    if (tags.empty()) throw BadRequest{error(400, "empty_tags", "parameter 'tags' has no usable tag")};
    return {q.value_or(""), std::move(tags)};
  }
  if (!q || tagscope::detail::trim(*q).empty()) throw BadRequest{error(400, "missing_query", "parameter 'q' or 'tags' is required")};
  const TagMapping* m = s.mapping(*q);
  if (!m) throw BadRequest{error(404, "unmapped_query", "no tag mapping for query '" + *q + "'")};
  return {m->query, m->accepted_tags};
}

}  // namespace detail

/// GET /api/search?q=&tags=&from=&to=&limit=
inline Response handle_search(const ServiceState& s, const Params& p) {
  try {
    auto [query, tags] = detail::tags_for(s, p);
    const auto window = detail::window_param(s, p);
    const auto limit = detail::limit_param(p);
    return {200, search_json(search_tags(s.index(), query, tags, window, limit)).dump()};
  } catch (const detail::BadRequest& e) {
    return e.response;
  }
}

/// GET /api/map?q=
inline Response handle_map(const ServiceState& s, const Params& p) {
  const auto q = detail::param(p, "q");
  if (!q || tagscope::detail::trim(*q).empty()) return error(400, "missing_query", "parameter 'q' is required");
  const TagMapping* m = s.mapping(*q);
  if (!m) return error(404, "unmapped_query", "no tag mapping for query '" + *q + "'");
  return {200, mapping_json(*m).dump()};
}

/// GET /api/histogram?tags=|q=&from=&to=&mode=all|any
inline Response handle_histogram(const ServiceState& s, const Params& p) {
  try {
    auto [query, tags] = detail::tags_for(s, p);
    const auto window = detail::window_param(s, p);
    HistogramMode mode = HistogramMode::kAllTags;
    if (auto raw = detail::param(p, "mode")) {
      if (*raw == "any") {
        mode = HistogramMode::kAnyTag;
      } else if (*raw != "all") {
        return error(400, "malformed_mode", "parameter 'mode' must be 'all' or 'any'");
      }
    }
    const auto bins = monthly_histogram(s.index(), tags, window, mode);
    return {200, histogram_json(tags, window, mode, bins).dump()};
  } catch (const detail::BadRequest& e) {
    return e.response;
  }
}

/// GET /api/stats: the ingest statistics plus index counts.
inline Response handle_stats(const ServiceState& s) {
  json j = stats_json(s.stats());
  j["index"] = {{"posts", s.index().post_count()},
                {"urls", s.index().url_count()},
                {"tags", s.index().tag_count()},
                {"users", s.index().user_count()}};
  const auto bounds = s.index().month_bounds();
  j["month_bounds"] = bounds ? window_json(*bounds) : json(nullptr);
  j["mappings"] = s.mappings().size();
  return {200, j.dump()};
}

/// Routes a GET request by path.
inline Response handle(const ServiceState& s, std::string_view path, const Params& p) {
  if (path == "/api/search") return handle_search(s, p);
  if (path == "/api/map") return handle_map(s, p);
  if (path == "/api/histogram") return handle_histogram(s, p);
  if (path == "/api/stats") return handle_stats(s);
  return error(404, "not_found", "no endpoint '" + std::string(path) + "'");
}

}  // namespace tagscope::api
