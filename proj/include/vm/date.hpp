#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vm {

// Calendar date with day resolution. Thin value wrapper over std::chrono::sys_days.
class Date {
 public:
  Date() = default;

  // Throws DomainError on an invalid calendar date.
  static Date from_ymd(int year, unsigned month, unsigned day);
  // Strict YYYY-MM-DD.
  static std::optional<Date> parse(std::string_view iso);
  static Date today();

  int year() const;
  unsigned month() const;
  unsigned day() const;

  std::string to_string() const;

  Date plus_days(int days) const { return Date(days_ + std::chrono::days{days}); }

  friend int operator-(Date a, Date b) { return static_cast<int>((a.days_ - b.days_).count()); }
  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  explicit Date(std::chrono::sys_days d) : days_(d) {}
  std::chrono::sys_days days_{};
};

// Origin of the round-date feature: days are counted relative to 1926-01-01.
Date feature_epoch();
int days_since_feature_epoch(Date d);

struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  static Quarter of(Date d);
  static Quarter from_index(int index);
  // "2015Q3"
  static std::optional<Quarter> parse(std::string_view text);

  // Monotone integer key, contiguous across year boundaries.
  int index() const { return year * 4 + (q - 1); }
  Date first_day() const;
  Date last_day() const;
  Quarter next() const { return from_index(index() + 1); }
  Quarter prev() const { return from_index(index() - 1); }
  std::string to_string() const;

  friend auto operator<=>(const Quarter& a, const Quarter& b) { return a.index() <=> b.index(); }
  friend bool operator==(const Quarter& a, const Quarter& b) { return a.index() == b.index(); }
};

// Inclusive date range.
struct DateWindow {
  Date start;
  Date end;

  bool contains(Date d) const { return start <= d && d <= end; }
  // "2010-01-01:2022-05-31"
  static DateWindow parse(std::string_view text);
  std::string to_string() const;
};

// Contiguous run of calendar quarters.
class QuarterGrid {
 public:
  QuarterGrid(Quarter first, Quarter last);
  static QuarterGrid covering(const DateWindow& window);

  std::size_t size() const { return static_cast<std::size_t>(last_.index() - first_.index() + 1); }
  Quarter first() const { return first_; }
  Quarter last() const { return last_; }
  Quarter at(std::size_t i) const { return Quarter::from_index(first_.index() + static_cast<int>(i)); }
  bool contains(Quarter q) const { return first_ <= q && q <= last_; }
  // Position of `q`; caller must check contains().
  std::size_t position(Quarter q) const { return static_cast<std::size_t>(q.index() - first_.index()); }
  std::vector<Quarter> quarters() const;

 private:
  Quarter first_;
  Quarter last_;
};

}  // namespace vm
