#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace condex {

enum class Season { djf, mam, jja, son };
enum class Variable { precip, wind };
enum class Calendar { gregorian, noleap };

[[nodiscard]] std::string to_string(Season s);
[[nodiscard]] std::string to_string(Variable v);
[[nodiscard]] Season parse_season(std::string_view name);  // case-insensitive
[[nodiscard]] Variable parse_variable(std::string_view name);
[[nodiscard]] Calendar parse_calendar(std::string_view name);

struct DailyRecord {
  std::chrono::year_month_day date;
  int member = 0;
  double precip = 0.0;  // mm/day
  double wind = 0.0;    // m/s

  [[nodiscard]] double value(Variable v) const noexcept { return v == Variable::precip ? precip : wind; }
};

/// Column names of the daily CSV; columns may appear in any order.
struct DailySchema {
  std::string date = "date";
  std::string member = "member";
  std::string precip = "precip_mm";
  std::string wind = "wind_ms";
  Calendar calendar = Calendar::gregorian;
};

/// Thrown for malformed input; line() is 1-based and 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[nodiscard]] std::vector<DailyRecord> read_daily_csv(std::istream& in, const DailySchema& schema = {},
                                                      const std::string& source = "<stream>");
[[nodiscard]] std::vector<DailyRecord> load_daily_csv(const std::string& path, const DailySchema& schema = {});
void write_daily_csv(std::ostream& out, std::span<const DailyRecord> records);

[[nodiscard]] std::chrono::year_month_day parse_iso_date(std::string_view text);
[[nodiscard]] std::string format_iso_date(const std::chrono::year_month_day& d);

/// Season of a calendar month and the block label: December of year y
/// belongs to the DJF block labeled y + 1.
[[nodiscard]] Season season_of(std::chrono::month m);
[[nodiscard]] int season_year(const std::chrono::year_month_day& d);
[[nodiscard]] int expected_days(Season s, int season_year, Calendar calendar);

struct BlockMaxPair {
  Season season = Season::djf;
  int year = 0;
  int member = 0;
  double max_value = 0.0;
  double concomitant = 0.0;
  std::chrono::year_month_day day_of_max;
};

struct Extraction {
  std::vector<BlockMaxPair> pairs;  // ordered by (member, year)
  std::vector<std::string> warnings;
};

/// One pair per (member, season-year) block holding at least 80% of its
/// expected days. Ties in the maximum go to the earliest day. The leading
/// DJF block of a member with no preceding December is dropped.
[[nodiscard]] Extraction extract_block_maxima(std::span<const DailyRecord> records, Season season,
                                              Variable conditioning, Calendar calendar = Calendar::gregorian);

void write_block_maxima_csv(std::ostream& out, std::span<const BlockMaxPair> pairs);
[[nodiscard]] std::vector<BlockMaxPair> read_block_maxima_csv(std::istream& in, const std::string& source = "<stream>");

/// Type-7 quantiles of every daily value in the season, members pooled.
[[nodiscard]] std::vector<double> unconditional_quantiles(std::span<const DailyRecord> records, Season season,
                                                          Variable variable, std::span<const double> taus);

/// Synthetic daily weather: intermittent Weibull precipitation and Weibull
/// wind, linked day by day through a Gaussian copula.
struct DailySynthConfig {
  int members = 5;
  int start_year = 1950;
  int years = 50;
  Calendar calendar = Calendar::noleap;
  double wet_probability = 0.45;
  double precip_shape = 0.8;
  double precip_scale = 8.0;
  double wind_shape = 2.2;
  double wind_scale = 5.0;
  double correlation = 0.4;  // latent normal correlation between precip and wind
  std::uint64_t seed = 1;
};

[[nodiscard]] std::vector<DailyRecord> synthesize_daily(const DailySynthConfig& config);

}  // namespace condex
