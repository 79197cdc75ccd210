// SPDX-License-Identifier: Apache-2.0
#pragma once

// On-disk formats: index snapshots, mapping files, CSV reports, and the JSON
// payloads shared by the CLI and the HTTP service.

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tagscope/corpus.hpp"
#include "tagscope/evaluation.hpp"
#include "tagscope/search.hpp"
#include "tagscope/tag_mapping.hpp"
#include "tagscope/temporal_index.hpp"

namespace tagscope {

using json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- JSON ------------------------------------------------------------------------

inline json tags_json(std::span<const NormalizedTag> tags) {
  json arr = json::array();
  for (const auto& t : tags) arr.push_back(t.text());
  return arr;
}

inline json stats_json(const IngestStats& s) {
  json j;
  j["lines"] = s.lines;
  j["bookmarks"] = s.bookmarks;
  j["unique_urls"] = s.unique_urls;
  j["unique_tags"] = s.unique_tags;
  j["unique_users"] = s.unique_users;
  j["rejects"] = s.rejects;
  j["rejects_by_reason"] = json::object();
  for (const auto& [k, v] : s.rejects_by_reason) j["rejects_by_reason"][k] = v;
  j["first_month"] = s.first_month ? json(s.first_month->str()) : json(nullptr);
  j["last_month"] = s.last_month ? json(s.last_month->str()) : json(nullptr);
  return j;
}

inline IngestStats stats_from_json(const json& j) {
  IngestStats s;
  s.lines = j.at("lines").get<std::uint64_t>();
  s.bookmarks = j.at("bookmarks").get<std::uint64_t>();
  s.unique_urls = j.at("unique_urls").get<std::uint64_t>();
  s.unique_tags = j.at("unique_tags").get<std::uint64_t>();
  s.unique_users = j.at("unique_users").get<std::uint64_t>();
  s.rejects = j.at("rejects").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("rejects_by_reason").items()) s.rejects_by_reason[k] = v.get<std::uint64_t>();
  if (!j.at("first_month").is_null()) s.first_month = Month::parse_or_throw(j["first_month"].get<std::string>());
  if (!j.at("last_month").is_null()) s.last_month = Month::parse_or_throw(j["last_month"].get<std::string>());
  return s;
}

inline json window_json(const TimeWindow& w) { return {{"from", w.from().str()}, {"to", w.to().str()}}; }

inline json mapping_json(const TagMapping& m) {
  json j;
  j["query"] = m.query;
  j["ref_tag"] = m.ref_tag.text();
  j["threshold"] = m.threshold;
  j["accepted_tags"] = tags_json(m.accepted_tags);
  json exp = json::array();
  for (const auto& s : m.expansions) {
    exp.push_back({{"tag", s.tag.text()},
                   {"idf", s.idf},
                   {"rel_idf", s.rel_idf},
                   {"excl", s.excl},
                   {"score", s.score},
                   {"accepted", m.is_accepted(s.tag)},
                   {"is_ref", s.tag == m.ref_tag}});
  }
  j["expansions"] = std::move(exp);
  return j;
}

namespace detail {

inline NormalizedTag tag_from_json(const json& j) {
  const auto text = j.get<std::string>();
  auto tag = normalize_tag(text);
  if (!tag || tag->text() != text) throw FormatError("'" + text + "' is not a normalized tag");
  return *tag;
}

}  // namespace detail

inline TagMapping mapping_from_json(const json& j) {
  TagMapping m;
  m.query = j.at("query").get<std::string>();
  m.ref_tag = detail::tag_from_json(j.at("ref_tag"));
  m.threshold = j.at("threshold").get<double>();
  for (const auto& t : j.at("accepted_tags")) m.accepted_tags.push_back(detail::tag_from_json(t));
  for (const auto& e : j.at("expansions")) {
    ScoredTag s;
    s.tag = detail::tag_from_json(e.at("tag"));
    s.idf = e.at("idf").get<double>();
    s.rel_idf = e.at("rel_idf").get<double>();
    s.excl = e.at("excl").get<double>();
    s.score = e.at("score").get<double>();
    m.expansions.push_back(std::move(s));
  }
  if (!std::is_sorted(m.accepted_tags.begin(), m.accepted_tags.end()) || !m.is_accepted(m.ref_tag))
    throw FormatError("mapping for '" + m.query + "' has unsorted accepted tags or lacks its reference tag");
  return m;
}

inline json search_json(const SearchResponse& r) {
  json j;
  j["query"] = r.query;
  j["window"] = window_json(r.window);
  j["tags"] = tags_json(r.tags);
  j["total_urls"] = r.total_urls;
  json rows = json::array();
  for (const auto& res : r.results) {
    rows.push_back({{"url", res.url.full()},
                    {"host", std::string(res.url.host())},
                    {"post_count", res.post_count},
                    {"matched_tags", tags_json(res.matched_tags)},
                    {"first_month", res.first_month.str()},
                    {"last_month", res.last_month.str()}});
  }
  j["results"] = std::move(rows);
  return j;
}

inline json histogram_json(std::span<const NormalizedTag> tags, const TimeWindow& span, HistogramMode mode,
                           std::span<const HistogramBin> bins) {
  json j;
  j["tags"] = tags_json(tags);
  j["mode"] = mode == HistogramMode::kAllTags ? "all" : "any";
  j["window"] = window_json(span);
  json arr = json::array();
  for (const auto& b : bins) arr.push_back({{"month", b.month.str()}, {"posts", b.posts}});
  j["bins"] = std::move(arr);
  return j;
}

// ---- mapping files (JSON Lines, one mapping per line) ------------------------------

inline void write_mappings(std::ostream& out, std::span<const TagMapping> mappings) {
  for (const auto& m : mappings) out << mapping_json(m).dump() << '\n';
}

inline void save_mappings(const std::string& path, std::span<const TagMapping> mappings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mapping file '" + path + "'");
  write_mappings(out, mappings);
}

inline std::vector<TagMapping> read_mappings(std::istream& in) {
  std::vector<TagMapping> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(mapping_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError("mapping file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<TagMapping> load_mappings(const std::string& path) {
  auto in = detail::open_input(path);
  return read_mappings(in);
}

// ---- index snapshots ------------------------------------------------------------------
//
//   tagscope-index<TAB>1
//   stats<TAB>{...ingest stats json...}
//   records<TAB>N
//   N bookmark lines (first instant of the month as timestamp)
//   end

inline constexpr int kSnapshotVersion = 1;

inline void write_snapshot(std::ostream& out, const TemporalTagIndex& index, const IngestStats& stats) {
  out << "tagscope-index\t" << kSnapshotVersion << '\n';
  out << "stats\t" << stats_json(stats).dump() << '\n';
  out << "records\t" << index.post_count() << '\n';
  for (const auto& b : index.records()) out << format_bookmark_line(b) << '\n';
  out << "end\n";
}

inline void save_snapshot(const std::string& path, const TemporalTagIndex& index, const IngestStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot '" + path + "'");
  write_snapshot(out, index, stats);
}

struct Snapshot {
  TemporalTagIndex index;
  IngestStats stats;
};

inline Snapshot read_snapshot(std::istream& in) {
  std::string line;
  const auto expect = [&](std::string_view key) -> std::string {
    if (!std::getline(in, line)) throw FormatError("snapshot truncated before '" + std::string(key) + "'");
    const auto fields = detail::split(detail::strip_cr(line), '\t');
    if (fields.size() != 2 || fields[0] != key) throw FormatError("snapshot: expected '" + std::string(key) + "' header");
    return std::string(fields[1]);
  };
  if (expect("tagscope-index") != std::to_string(kSnapshotVersion)) throw FormatError("unsupported snapshot version");
  Snapshot snap;
  try {
    snap.stats = stats_from_json(json::parse(expect("stats")));
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot stats: ") + e.what());
  }
  const std::size_t n = std::stoull(expect("records"));
  std::vector<Bookmark> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw FormatError("snapshot truncated at record " + std::to_string(i));
    auto parsed = parse_bookmark_line(line);
    if (!std::holds_alternative<Bookmark>(parsed)) throw FormatError("snapshot record " + std::to_string(i) + " is malformed");
    records.push_back(std::move(std::get<Bookmark>(parsed)));
  }
  if (!std::getline(in, line) || detail::strip_cr(line) != "end") throw FormatError("snapshot missing 'end' marker");
  snap.index = TemporalTagIndex::build(records);
  return snap;
}

inline Snapshot load_snapshot(const std::string& path) {
  auto in = detail::open_input(path);
  return read_snapshot(in);
}

// ---- CSV ----------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fixed6(const std::optional<double>& v) { return v ? fixed6(*v) : std::string(); }

}  // namespace detail

inline std::string per_query_csv(const RecallReport& r) {
  std::string out = "query,recall,retrieved_count,query_count\n";
  for (const auto& q : r.per_query)
    out += detail::csv_field(q.query) + ',' + detail::fixed6(q.recall) + ',' + std::to_string(q.retrieved_count) + ',' +
           std::to_string(q.query_count) + '\n';
  return out;
}

inline std::string unmapped_csv(const RecallReport& r) {
  std::string out = "query,recall,unmapped_recall\n";
  for (const auto& q : r.per_query)
    out += detail::csv_field(q.query) + ',' + detail::fixed6(q.recall) + ',' + detail::fixed6(q.unmapped_recall) + '\n';
  return out;
}

inline std::string buckets_csv(std::span<const PopularityBucket> buckets) {
  std::string out = "bucket,min_query_count,max_query_count,num_queries,avg_recall,avg_unmapped_recall\n";
  for (const auto& b : buckets)
    out += b.label() + ',' + std::to_string(b.min_count) + ',' + (b.max_count ? std::to_string(*b.max_count) : "") + ',' +
           std::to_string(b.num_queries) + ',' + detail::fixed6(b.avg_recall) + ',' + detail::fixed6(b.avg_unmapped_recall) +
           '\n';
  return out;
}

inline std::string top_x_csv(std::span<const TopXPoint> curve) {
  std::string out = "x,avg_recall\n";
  for (const auto& p : curve) out += std::to_string(p.x) + ',' + detail::fixed6(p.avg_recall) + '\n';
  return out;
}

/// Header row of future offsets, then one row per past offset.
inline std::string sweep_csv(const SweepMatrix& m) {
  std::string out = "past\\future";
  for (int f = 0; f <= m.max_future; ++f) out += ',' + std::to_string(f);
  out += '\n';
  for (int p = 0; p <= m.max_past; ++p) {
    out += std::to_string(p);
    for (int f = 0; f <= m.max_future; ++f) out += ',' + detail::fixed6(m.at(p, f).average_recall);
    out += '\n';
  }
  return out;
}

inline std::string search_csv(const SearchResponse& r) {
  std::string out = "url,post_count,first_month,last_month,matched_tags\n";
  for (const auto& res : r.results) {
    std::vector<std::string> tags;
    for (const auto& t : res.matched_tags) tags.push_back(t.text());
    out += detail::csv_field(res.url.full()) + ',' + std::to_string(res.post_count) + ',' + res.first_month.str() + ',' +
           res.last_month.str() + ',' + detail::csv_field(detail::join(tags, " ")) + '\n';
  }
  return out;
}

}  // namespace tagscope
