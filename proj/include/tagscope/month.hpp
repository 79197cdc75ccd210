// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tagscope {

/// A calendar month (UTC), stored as a linear month count `year * 12 + (month - 1)`.
class Month {
 public:
  constexpr Month() = default;
  constexpr Month(int year, int month) : index_(year * 12 + (month - 1)) {}

  static constexpr Month from_index(std::int32_t index) {
    Month m;
    m.index_ = index;
    return m;
  }

  /// Parses "YYYY-MM". Returns nullopt on anything else.
  static std::optional<Month> parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    int year = 0;
    for (int i = 0; i < 4; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      year = year * 10 + (text[i] - '0');
    }
    if (text[5] < '0' || text[5] > '9' || text[6] < '0' || text[6] > '9') return std::nullopt;
    const int month = (text[5] - '0') * 10 + (text[6] - '0');
    if (month < 1 || month > 12) return std::nullopt;
    return Month(year, month);
  }

  static Month parse_or_throw(std::string_view text) {
    auto m = parse(text);
    if (!m) throw std::invalid_argument("malformed month '" + std::string(text) + "', expected YYYY-MM");
    return *m;
  }

  constexpr std::int32_t index() const { return index_; }
  constexpr int year() const { return floor_div(index_, 12); }
  constexpr int month() const { return index_ - floor_div(index_, 12) * 12 + 1; }

  constexpr Month plus(int months) const { return from_index(index_ + months); }

  std::string str() const {
    std::string out(7, '0');
    int y = year();
    for (int i = 3; i >= 0; --i) {
      out[i] = static_cast<char>('0' + y % 10);
      y /= 10;
    }
    out[4] = '-';
    out[5] = static_cast<char>('0' + month() / 10);
    out[6] = static_cast<char>('0' + month() % 10);
    return out;
  }

  constexpr auto operator<=>(const Month&) const = default;

 private:
  static constexpr int floor_div(int a, int b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

  std::int32_t index_ = 0;
};

/// Inclusive month range `[from, to]`.
class TimeWindow {
 public:
  TimeWindow(Month from, Month to) : from_(from), to_(to) {
    if (to < from) throw std::invalid_argument("time window 'from' " + from.str() + " is after 'to' " + to.str());
  }

  static TimeWindow single(Month m) { return {m, m}; }

  static TimeWindow parse(std::string_view from, std::string_view to) {
    return {Month::parse_or_throw(from), Month::parse_or_throw(to)};
  }

  Month from() const { return from_; }
  Month to() const { return to_; }
  bool contains(Month m) const { return from_ <= m && m <= to_; }
  int months() const { return to_.index() - from_.index() + 1; }

  /// Extends the window `past` months backwards and `future` months forwards.
  TimeWindow extended(int past, int future) const { return {from_.plus(-past), to_.plus(future)}; }

  std::string str() const { return from_.str() + ".." + to_.str(); }

  bool operator==(const TimeWindow&) const = default;

 private:
  Month from_;
  Month to_;
};

}  // namespace tagscope
