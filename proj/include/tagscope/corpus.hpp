// SPDX-License-Identifier: Apache-2.0
#pragma once

// Canonical records for bookmark corpora, query logs and seed lists, plus the
// line parsers and file loaders that produce them.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <variant>
#include <vector>

#include "tagscope/detail/strings.hpp"
#include "tagscope/month.hpp"

namespace tagscope {

/// Lowercase tag restricted to [a-z0-9]. Never empty.
class NormalizedTag {
 public:
  NormalizedTag() = default;
  const std::string& text() const { return text_; }
  auto operator<=>(const NormalizedTag&) const = default;

 private:
  explicit NormalizedTag(std::string text) : text_(std::move(text)) {}
  friend std::optional<NormalizedTag> normalize_tag(std::string_view raw);

  std::string text_;
};

/// Lowercases and drops everything outside [a-z0-9]; nullopt means "drop this tag".
inline std::optional<NormalizedTag> normalize_tag(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    c = detail::ascii_lower(c);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out.push_back(c);
  }
  if (out.empty()) return std::nullopt;
  return NormalizedTag(std::move(out));
}

/// Canonical URL: lowercase host without scheme, port or leading "www.", followed by
/// the path without trailing slashes. Query strings and fragments are dropped.
class NormalizedUrl {
 public:
  NormalizedUrl() = default;

  const std::string& full() const { return full_; }
  std::string_view host() const { return std::string_view(full_).substr(0, host_len_); }
  std::string_view path() const { return std::string_view(full_).substr(host_len_); }

  /// The same URL reduced to its host (empty path).
  NormalizedUrl host_only() const { return NormalizedUrl(full_.substr(0, host_len_), host_len_); }

  bool operator==(const NormalizedUrl& o) const { return full_ == o.full_; }
  auto operator<=>(const NormalizedUrl& o) const { return full_ <=> o.full_; }

 private:
  NormalizedUrl(std::string full, std::size_t host_len) : full_(std::move(full)), host_len_(host_len) {}
  friend std::optional<NormalizedUrl> normalize_url(std::string_view raw);

  std::string full_;
  std::size_t host_len_ = 0;
};

namespace detail {

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline bool is_unreserved(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
         c == '_' || c == '~';
}

// Decodes escapes of unreserved characters only; other escapes get uppercase hex.
// Decoding reserved characters would make normalization non-idempotent ("%2541").
inline std::string normalize_path_escapes(std::string_view path) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] == '%' && i + 2 < path.size()) {
      const int hi = hex_value(path[i + 1]);
      const int lo = hex_value(path[i + 2]);
      if (hi >= 0 && lo >= 0) {
        const char decoded = static_cast<char>(hi * 16 + lo);
        if (is_unreserved(decoded)) {
          out.push_back(decoded);
        } else {
          out.push_back('%');
          out.push_back(kHex[hi]);
          out.push_back(kHex[lo]);
        }
        i += 2;
        continue;
      }
    }
    out.push_back(path[i]);
  }
  return out;
}

inline bool is_scheme(std::string_view s) {
  if (s.empty()) return false;
  const char first = ascii_lower(s[0]);
  if (first < 'a' || first > 'z') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    c = ascii_lower(c);
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
  });
}

inline bool is_host_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' || u >= 0x80;
}

}  // namespace detail

/// Canonicalizes a raw URL; nullopt when no usable host can be extracted.
inline std::optional<NormalizedUrl> normalize_url(std::string_view raw) {
  std::string_view s = detail::trim(raw);
  if (s.empty()) return std::nullopt;
  for (char c : s)
    if (static_cast<unsigned char>(c) <= 0x20 || c == 0x7f) return std::nullopt;

  if (auto pos = s.find_first_of("?#"); pos != std::string_view::npos) s = s.substr(0, pos);
  if (auto pos = s.find("://"); pos != std::string_view::npos && detail::is_scheme(s.substr(0, pos))) {
    s = s.substr(pos + 3);
  } else if (s.starts_with("//")) {
    s = s.substr(2);
  }

  const auto slash = s.find('/');
  std::string_view authority = s.substr(0, slash);
  const std::string_view raw_path = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  std::string host;
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = detail::to_lower(authority.substr(0, close + 1));
    for (char c : std::string_view(host).substr(1, host.size() - 2))
      if (detail::hex_value(c) < 0 && c != ':' && c != '.') return std::nullopt;
  } else {
    if (auto colon = authority.find(':'); colon != std::string_view::npos) {
      const auto port = authority.substr(colon + 1);
      if (!std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
      authority = authority.substr(0, colon);
    }
    host = detail::to_lower(authority);
    while (!host.empty() && host.back() == '.') host.pop_back();
    // Repeated removal keeps normalization idempotent ("www.www.x.com").
    while (host.size() > 4 && host.starts_with("www.")) host.erase(0, 4);
    if (host.empty() || host.front() == '.') return std::nullopt;
    if (!std::all_of(host.begin(), host.end(), detail::is_host_char)) return std::nullopt;
  }

  std::string path = detail::normalize_path_escapes(raw_path);
  while (!path.empty() && path.back() == '/') path.pop_back();

  const std::size_t host_len = host.size();
  return NormalizedUrl(host + path, host_len);
}

namespace detail {

// Howard Hinnant's days_from_civil / civil_from_days.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr Month month_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Month(static_cast<int>(y + (m <= 2)), static_cast<int>(m));
}

constexpr bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr int days_in_month(int y, int m) {
  constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

class DigitReader {
 public:
  explicit DigitReader(std::string_view s) : s_(s) {}
  std::optional<int> digits(std::size_t n) {
    if (pos_ + n > s_.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const char c = s_[pos_ + i];
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + (c - '0');
    }
    pos_ += n;
    return v;
  }
  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::optional<char> peek() const { return pos_ < s_.size() ? std::optional<char>(s_[pos_]) : std::nullopt; }
  bool done() const { return pos_ == s_.size(); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an ISO-8601 timestamp and returns its UTC month. Accepts a bare date,
/// `T` or space separated times with optional seconds and fraction, and a `Z`,
/// `±HH`, `±HHMM` or `±HH:MM` zone suffix. A missing zone is read as UTC.
inline std::optional<Month> parse_timestamp_month(std::string_view text) {
  detail::DigitReader r(detail::trim(text));
  const auto year = r.digits(4);
  if (!year || !r.accept('-')) return std::nullopt;
  const auto month = r.digits(2);
  if (!month || *month < 1 || *month > 12 || !r.accept('-')) return std::nullopt;
  const auto day = r.digits(2);
  if (!day || *day < 1 || *day > detail::days_in_month(*year, *month)) return std::nullopt;
  if (r.done()) return Month(*year, *month);

  if (!r.accept('T') && !r.accept('t') && !r.accept(' ')) return std::nullopt;
  const auto hour = r.digits(2);
  if (!hour || *hour > 23 || !r.accept(':')) return std::nullopt;
  const auto minute = r.digits(2);
  if (!minute || *minute > 59) return std::nullopt;
  if (r.accept(':')) {
    const auto second = r.digits(2);
    if (!second || *second > 60) return std::nullopt;
    if (r.accept('.') || r.accept(',')) {
      if (!r.digits(1)) return std::nullopt;
      while (r.digits(1)) {
      }
    }
  }

  int offset_minutes = 0;
  if (r.accept('Z') || r.accept('z')) {
  } else if (auto sign = r.peek(); sign && (*sign == '+' || *sign == '-')) {
    r.accept(*sign);
    const auto oh = r.digits(2);
    if (!oh || *oh > 23) return std::nullopt;
    int om = 0;
    if (!r.done()) {
      r.accept(':');
      const auto m = r.digits(2);
      if (!m || *m > 59) return std::nullopt;
      om = *m;
    }
    offset_minutes = (*sign == '+' ? 1 : -1) * (*oh * 60 + om);
  }
  if (!r.done()) return std::nullopt;
  if (offset_minutes == 0) return Month(*year, *month);

  const std::int64_t local_minutes =
      detail::days_from_civil(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day)) * 1440 +
      *hour * 60 + *minute;
  const std::int64_t utc_minutes = local_minutes - offset_minutes;
  const std::int64_t days = utc_minutes >= 0 ? utc_minutes / 1440 : -((-utc_minutes + 1439) / 1440);
  return detail::month_from_days(days);
}

/// One user's tagged posting of a URL in a month. `tags` is sorted and unique.
struct Bookmark {
  std::string user;
  NormalizedUrl url;
  Month month;
  std::vector<NormalizedTag> tags;

  auto operator<=>(const Bookmark&) const = default;
};

enum class RejectReason : std::uint8_t { kFieldCount, kBadTimestamp, kEmptyUser, kBadUrl, kNoTags, kEmptyQuery, kDuplicate };

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::kFieldCount: return "field_count";
    case RejectReason::kBadTimestamp: return "bad_timestamp";
    case RejectReason::kEmptyUser: return "empty_user";
    case RejectReason::kBadUrl: return "bad_url";
    case RejectReason::kNoTags: return "no_tags";
    case RejectReason::kEmptyQuery: return "empty_query";
    case RejectReason::kDuplicate: return "duplicate";
  }
  return "unknown";
}

template <typename T>
using LineResult = std::variant<T, RejectReason>;

/// Normalizes, sorts and de-duplicates a list of raw tags.
inline std::vector<NormalizedTag> normalize_tags(std::span<const std::string_view> raw) {
  std::vector<NormalizedTag> tags;
  tags.reserve(raw.size());
  for (auto t : raw)
    if (auto n = normalize_tag(t)) tags.push_back(std::move(*n));
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

/// `timestamp<TAB>user<TAB>url<TAB>tag1,tag2,...`
inline LineResult<Bookmark> parse_bookmark_line(std::string_view line) {
  const auto fields = detail::split(detail::strip_cr(line), '\t');
  if (fields.size() != 4) return RejectReason::kFieldCount;
  const auto month = parse_timestamp_month(fields[0]);
  if (!month) return RejectReason::kBadTimestamp;
  const auto user = detail::trim(fields[1]);
  if (user.empty()) return RejectReason::kEmptyUser;
  auto url = normalize_url(fields[2]);
  if (!url) return RejectReason::kBadUrl;
  const auto raw_tags = detail::split(fields[3], ',');
  auto tags = normalize_tags(raw_tags);
  if (tags.empty()) return RejectReason::kNoTags;
  return Bookmark{std::string(user), std::move(*url), *month, std::move(tags)};
}

/// Inverse of parse_bookmark_line up to timestamp precision (first instant of the month, UTC).
inline std::string format_bookmark_line(const Bookmark& b) {
  std::string out = b.month.str();
  out += "-01T00:00:00Z\t";
  out += b.user;
  out += '\t';
  out += b.url.full();
  out += '\t';
  for (std::size_t i = 0; i < b.tags.size(); ++i) {
    if (i) out += ',';
    out += b.tags[i].text();
  }
  return out;
}

struct IngestStats {
  std::uint64_t lines = 0;
  std::uint64_t bookmarks = 0;
  std::uint64_t unique_urls = 0;
  std::uint64_t unique_tags = 0;
  std::uint64_t unique_users = 0;
  std::uint64_t rejects = 0;
  std::map<std::string, std::uint64_t> rejects_by_reason;
  std::optional<Month> first_month;
  std::optional<Month> last_month;

  bool operator==(const IngestStats&) const = default;
};

/// Mergeable ingest bookkeeping. merge() is associative and commutative because the
/// unique counts are derived from set unions, never from summed counts.
class IngestAccumulator {
 public:
  void add(const Bookmark& b) {
    ++lines_;
    ++bookmarks_;
    urls_.insert(b.url.full());
    users_.insert(b.user);
    for (const auto& t : b.tags) tags_.insert(t.text());
    if (!first_ || b.month < *first_) first_ = b.month;
    if (!last_ || *last_ < b.month) last_ = b.month;
  }

  void reject(RejectReason reason) {
    ++lines_;
    ++rejects_[reject_reason_name(reason)];
  }

  void merge(const IngestAccumulator& other) {
    lines_ += other.lines_;
    bookmarks_ += other.bookmarks_;
    urls_.insert(other.urls_.begin(), other.urls_.end());
    users_.insert(other.users_.begin(), other.users_.end());
    tags_.insert(other.tags_.begin(), other.tags_.end());
    for (const auto& [k, v] : other.rejects_) rejects_[k] += v;
    if (other.first_ && (!first_ || *other.first_ < *first_)) first_ = other.first_;
    if (other.last_ && (!last_ || *last_ < *other.last_)) last_ = other.last_;
  }

  IngestStats stats() const {
    IngestStats s;
    s.lines = lines_;
    s.bookmarks = bookmarks_;
    s.unique_urls = urls_.size();
    s.unique_tags = tags_.size();
    s.unique_users = users_.size();
    for (const auto& [k, v] : rejects_) s.rejects += v;
    s.rejects_by_reason = rejects_;
    s.first_month = first_;
    s.last_month = last_;
    return s;
  }

 private:
  std::uint64_t lines_ = 0;
  std::uint64_t bookmarks_ = 0;
  std::unordered_set<std::string> urls_;
  std::unordered_set<std::string> users_;
  std::unordered_set<std::string> tags_;
  std::map<std::string, std::uint64_t> rejects_;
  std::optional<Month> first_;
  std::optional<Month> last_;
};

struct ParsedChunk {
  std::vector<Bookmark> bookmarks;
  IngestAccumulator stats;
};

/// Parses a chunk of bookmark lines. Stateless, so disjoint chunks may be parsed concurrently.
inline ParsedChunk parse_bookmark_chunk(std::span<const std::string> lines) {
  ParsedChunk chunk;
  chunk.bookmarks.reserve(lines.size());
  for (const auto& line : lines) {
    if (detail::trim(line).empty()) continue;
    auto result = parse_bookmark_line(line);
    if (auto* b = std::get_if<Bookmark>(&result)) {
      chunk.stats.add(*b);
      chunk.bookmarks.push_back(std::move(*b));
    } else {
      chunk.stats.reject(std::get<RejectReason>(result));
    }
  }
  return chunk;
}

struct Corpus {
  std::vector<Bookmark> bookmarks;
  IngestStats stats;
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
  return in;
}

}  // namespace detail

/// Streams a bookmark file in batches; each batch is split across `threads` workers
/// and merged in chunk order, so the result does not depend on the thread count.
inline Corpus load_corpus(const std::string& path, unsigned threads = std::thread::hardware_concurrency()) {
  auto in = detail::open_input(path);
  threads = std::max(1u, threads);
  constexpr std::size_t kBatch = 1 << 18;

  Corpus corpus;
  IngestAccumulator total;
  std::vector<std::string> batch;
  batch.reserve(kBatch);

  const auto flush = [&] {
    if (batch.empty()) return;
    const std::size_t n = std::min<std::size_t>(threads, batch.size());
    std::vector<ParsedChunk> chunks(n);
    const std::size_t per = (batch.size() + n - 1) / n;
    const auto span_of = [&](std::size_t i) {
      const std::size_t begin = std::min(batch.size(), i * per);
      const std::size_t end = std::min(batch.size(), begin + per);
      return std::span<const std::string>(batch.data() + begin, end - begin);
    };
    if (n == 1) {
      chunks[0] = parse_bookmark_chunk(batch);
    } else {
      std::vector<std::jthread> workers;
      for (std::size_t i = 0; i < n; ++i)
        workers.emplace_back([&, i] { chunks[i] = parse_bookmark_chunk(span_of(i)); });
    }
    for (auto& c : chunks) {
      total.merge(c.stats);
      std::move(c.bookmarks.begin(), c.bookmarks.end(), std::back_inserter(corpus.bookmarks));
    }
    batch.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    batch.push_back(std::move(line));
    if (batch.size() == kBatch) flush();
  }
  flush();
  corpus.stats = total.stats();
  return corpus;
}

/// One click record of a search-engine log.
struct QueryLogRecord {
  Month month;
  std::string session;
  std::string query;
  NormalizedUrl clicked;

  auto operator<=>(const QueryLogRecord&) const = default;
};

/// `timestamp<TAB>session<TAB>query<TAB>clicked_url`
inline LineResult<QueryLogRecord> parse_query_log_line(std::string_view line) {
  const auto fields = detail::split(detail::strip_cr(line), '\t');
  if (fields.size() != 4) return RejectReason::kFieldCount;
  const auto month = parse_timestamp_month(fields[0]);
  if (!month) return RejectReason::kBadTimestamp;
  const auto query = detail::trim(fields[2]);
  if (query.empty()) return RejectReason::kEmptyQuery;
  auto url = normalize_url(fields[3]);
  if (!url) return RejectReason::kBadUrl;
  return QueryLogRecord{*month, std::string(detail::trim(fields[1])), std::string(query), std::move(*url)};
}

struct QueryLog {
  std::vector<QueryLogRecord> records;
  std::uint64_t rejects = 0;

  /// Earliest to latest record month; nullopt for an empty log.
  std::optional<TimeWindow> span() const {
    if (records.empty()) return std::nullopt;
    auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.month < b.month; });
    return TimeWindow(lo->month, hi->month);
  }
};

inline QueryLog load_query_log(const std::string& path) {
  auto in = detail::open_input(path);
  QueryLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto result = parse_query_log_line(line);
    if (auto* r = std::get_if<QueryLogRecord>(&result)) {
      log.records.push_back(std::move(*r));
    } else {
      ++log.rejects;
    }
  }
  return log;
}

/// Proxy search results for a query: ordered, unique, at most kMaxSeeds.
struct SeedSet {
  static constexpr std::size_t kMaxSeeds = 100;

  std::string query;
  std::vector<NormalizedUrl> seeds;

  bool operator==(const SeedSet&) const = default;
};

/// `query<TAB>url1,url2,...`. Unparseable URLs are skipped; duplicates keep the first position.
inline LineResult<SeedSet> parse_seed_line(std::string_view line) {
  const auto fields = detail::split(detail::strip_cr(line), '\t');
  if (fields.size() != 2) return RejectReason::kFieldCount;
  const auto query = detail::trim(fields[0]);
  if (query.empty()) return RejectReason::kEmptyQuery;
  SeedSet set{std::string(query), {}};
  for (auto raw : detail::split(fields[1], ',')) {
    if (set.seeds.size() == SeedSet::kMaxSeeds) break;
    auto url = normalize_url(raw);
    if (!url) continue;
    if (std::find(set.seeds.begin(), set.seeds.end(), *url) == set.seeds.end()) set.seeds.push_back(std::move(*url));
  }
  return set;
}

struct SeedFile {
  std::vector<SeedSet> sets;
  std::uint64_t rejects = 0;
};

/// Loads a seed file; a repeated query keeps its first line and counts the rest as rejects.
inline SeedFile load_seeds(const std::string& path) {
  auto in = detail::open_input(path);
  SeedFile file;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto result = parse_seed_line(line);
    auto* set = std::get_if<SeedSet>(&result);
    if (!set || !seen.insert(detail::to_lower(set->query)).second) {
      ++file.rejects;
      continue;
    }
    file.sets.push_back(std::move(*set));
  }
  return file;
}

}  // namespace tagscope
