#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace arxtrend {

/// Calendar day in UTC. Ordered, hashable through days_since_epoch().
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days day) : day_(day) {}
  constexpr Date(int year, unsigned month, unsigned day)
      : day_(std::chrono::year_month_day{std::chrono::year{year},
                                         std::chrono::month{month},
                                         std::chrono::day{day}}) {}

  /// Strict "YYYY-MM-DD". Returns nullopt for anything else, including
  /// dates that do not exist on the calendar ("2019-13-40", "2018-02-29").
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
      int value = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
        value = value * 10 + (text[i] - '0');
      }
      return value;
    };
    auto y = digits(0, 4);
    auto m = digits(5, 2);
    auto d = digits(8, 2);
    if (!y || !m || !d) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{*y},
                                    std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{ymd}};
  }

  static Date today() {
    return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
  }

  [[nodiscard]] std::string to_string() const {
    std::chrono::year_month_day ymd{day_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }

  [[nodiscard]] constexpr long days_since_epoch() const {
    return day_.time_since_epoch().count();
  }

  [[nodiscard]] constexpr Date plus_days(long n) const {
    return Date{day_ + std::chrono::days{n}};
  }

  [[nodiscard]] constexpr std::chrono::sys_days sys_days() const { return day_; }

  friend constexpr long operator-(Date a, Date b) {
    return (a.day_ - b.day_).count();
  }
  friend constexpr auto operator<=>(const Date&, const Date&) = default;
  friend constexpr bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days day_{};
};

}  // namespace arxtrend
