#include "condex/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "condex/distributions.hpp"
#include "condex/empirical.hpp"
#include "condex/rng.hpp"
#include "condex/text.hpp"

namespace condex {

using namespace std::chrono;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool in_season(const year_month_day& d, Season s) { return season_of(d.month()) == s; }

}  // namespace

std::string to_string(Season s) {
  switch (s) {
    case Season::djf: return "DJF";
    case Season::mam: return "MAM";
    case Season::jja: return "JJA";
    case Season::son: return "SON";
  }
  return "?";
}

std::string to_string(Variable v) { return v == Variable::precip ? "precip" : "wind"; }

Season parse_season(std::string_view name) {
  const std::string s = lower(name);
  if (s == "djf") return Season::djf;
  if (s == "mam") return Season::mam;
  if (s == "jja") return Season::jja;
  if (s == "son") return Season::son;
  throw std::invalid_argument("unknown season '" + std::string(name) + "' (DJF, MAM, JJA, SON)");
}

Variable parse_variable(std::string_view name) {
  const std::string s = lower(name);
  if (s == "precip" || s == "precip_mm") return Variable::precip;
  if (s == "wind" || s == "wind_ms") return Variable::wind;
  throw std::invalid_argument("unknown variable '" + std::string(name) + "' (precip, wind)");
}

Calendar parse_calendar(std::string_view name) {
  const std::string s = lower(name);
  if (s == "gregorian" || s == "standard") return Calendar::gregorian;
  if (s == "noleap" || s == "365_day") return Calendar::noleap;
  throw std::invalid_argument("unknown calendar '" + std::string(name) + "' (gregorian, noleap)");
}

year_month_day parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("date '" + std::string(text) + "' is not YYYY-MM-DD");
  }
  const auto y = static_cast<int>(parse_integer(text.substr(0, 4)));
  const auto m = static_cast<unsigned>(parse_integer(text.substr(5, 2)));
  const auto d = static_cast<unsigned>(parse_integer(text.substr(8, 2)));
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("date '" + std::string(text) + "' does not exist");
  return ymd;
}

std::string format_iso_date(const year_month_day& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::vector<DailyRecord> read_daily_csv(std::istream& in, const DailySchema& schema, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source + ": empty input, expected a header", 0);
  ++line_no;
  const auto header = split_csv(line);
  int col_date = -1, col_member = -1, col_precip = -1, col_wind = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = header[i];
    const int idx = static_cast<int>(i);
    if (h == schema.date) col_date = idx;
    else if (h == schema.member) col_member = idx;
    else if (h == schema.precip) col_precip = idx;
    else if (h == schema.wind) col_wind = idx;
  }
  if (col_date < 0 || col_member < 0 || col_precip < 0 || col_wind < 0) {
    throw ParseError(source + ": header must contain " + schema.date + "," + schema.member + "," + schema.precip +
                         "," + schema.wind,
                     1);
  }

  std::vector<DailyRecord> out;
  std::set<std::pair<int, int>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    const auto fail = [&](const std::string& why) {
      return ParseError(source + ":" + std::to_string(line_no) + ": " + why, line_no);
    };
    if (fields.size() != header.size()) {
      throw fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    DailyRecord r;
    try {
      r.date = parse_iso_date(fields[static_cast<std::size_t>(col_date)]);
      r.member = static_cast<int>(parse_integer(fields[static_cast<std::size_t>(col_member)]));
      r.precip = parse_double(fields[static_cast<std::size_t>(col_precip)]);
      r.wind = parse_double(fields[static_cast<std::size_t>(col_wind)]);
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    if (schema.calendar == Calendar::noleap && r.date.month() == February && r.date.day() == day{29}) {
      throw fail("February 29 is not valid in the noleap calendar");
    }
    if (!std::isfinite(r.precip) || !std::isfinite(r.wind)) throw fail("values must be finite");
    if (r.precip < 0.0) throw fail("negative " + schema.precip + " value " + format_number(r.precip));
    if (r.wind < 0.0) throw fail("negative " + schema.wind + " value " + format_number(r.wind));
    const int day_index = sys_days{r.date}.time_since_epoch().count();
    if (!seen.emplace(r.member, day_index).second) {
      throw fail("duplicate record for member " + std::to_string(r.member) + " on " + format_iso_date(r.date));
    }
    out.push_back(r);
  }
  return out;
}

std::vector<DailyRecord> load_daily_csv(const std::string& path, const DailySchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return read_daily_csv(in, schema, path);
}

void write_daily_csv(std::ostream& out, std::span<const DailyRecord> records) {
  out << "date,member,precip_mm,wind_ms\n";
  for (const auto& r : records) {
    out << format_iso_date(r.date) << ',' << r.member << ',' << format_number(r.precip) << ','
        << format_number(r.wind) << '\n';
  }
}

Season season_of(month m) {
  const auto k = static_cast<unsigned>(m);
  if (k == 12 || k <= 2) return Season::djf;
  if (k <= 5) return Season::mam;
  if (k <= 8) return Season::jja;
  return Season::son;
}

int season_year(const year_month_day& d) {
  const int y = static_cast<int>(d.year());
  return d.month() == December ? y + 1 : y;
}

int expected_days(Season s, int season_year, Calendar calendar) {
  switch (s) {
    case Season::djf: {
      const bool leap = calendar == Calendar::gregorian && year{season_year}.is_leap();
      return 31 + 31 + (leap ? 29 : 28);
    }
    case Season::mam: return 92;
    case Season::jja: return 92;
    case Season::son: return 91;
  }
  return 0;
}

Extraction extract_block_maxima(std::span<const DailyRecord> records, Season season, Variable conditioning,
                                Calendar calendar) {
  struct Block {
    int days = 0;
    bool has_december = false;
    std::size_t best = 0;
  };
  std::map<std::pair<int, int>, Block> blocks;  // (member, season year)
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!in_season(r.date, season)) continue;
    auto [it, fresh] = blocks.try_emplace({r.member, season_year(r.date)});
    Block& b = it->second;
    ++b.days;
    b.has_december = b.has_december || r.date.month() == December;
    if (fresh) {
      b.best = i;
      continue;
    }
    const auto& cur = records[b.best];
    const double v = r.value(conditioning), c = cur.value(conditioning);
    if (v > c || (v == c && sys_days{r.date} < sys_days{cur.date})) b.best = i;
  }
  if (blocks.empty()) throw std::invalid_argument("extract_block_maxima: no records in season " + to_string(season));

  Extraction out;
  const Variable other = conditioning == Variable::precip ? Variable::wind : Variable::precip;
  int previous_member = 0;
  bool first_of_member = true;
  for (const auto& [key, b] : blocks) {
    const auto [member, year_label] = key;
    const bool leading = first_of_member || member != previous_member;
    previous_member = member;
    first_of_member = false;
    if (season == Season::djf && leading && !b.has_december) continue;  // no preceding December
    const int expected = expected_days(season, year_label, calendar);
    if (10 * b.days < 8 * expected) {
      out.warnings.push_back("member " + std::to_string(member) + " " + to_string(season) + " " +
                             std::to_string(year_label) + ": " + std::to_string(b.days) + " of " +
                             std::to_string(expected) + " days, block dropped");
      continue;
    }
    const auto& r = records[b.best];
    out.pairs.push_back({season, year_label, member, r.value(conditioning), r.value(other), r.date});
  }
  return out;
}

void write_block_maxima_csv(std::ostream& out, std::span<const BlockMaxPair> pairs) {
  out << "season,year,member,max,concomitant,day_of_max\n";
  for (const auto& p : pairs) {
    out << to_string(p.season) << ',' << p.year << ',' << p.member << ',' << format_number(p.max_value) << ','
        << format_number(p.concomitant) << ',' << format_iso_date(p.day_of_max) << '\n';
  }
}

std::vector<BlockMaxPair> read_block_maxima_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty input", 0);
  const auto header = split_csv(line);
  const std::vector<std::string_view> expected{"season", "year", "member", "max", "concomitant", "day_of_max"};
  if (header != expected) throw ParseError(source + ": header must be season,year,member,max,concomitant,day_of_max", 1);
  std::vector<BlockMaxPair> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    try {
      if (f.size() != 6) throw std::invalid_argument("expected 6 fields");
      BlockMaxPair p;
      p.season = parse_season(f[0]);
      p.year = static_cast<int>(parse_integer(f[1]));
      p.member = static_cast<int>(parse_integer(f[2]));
      p.max_value = parse_double(f[3]);
      p.concomitant = parse_double(f[4]);
      p.day_of_max = parse_iso_date(f[5]);
      out.push_back(p);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return out;
}

std::vector<double> unconditional_quantiles(std::span<const DailyRecord> records, Season season, Variable variable,
                                            std::span<const double> taus) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (in_season(r.date, season)) values.push_back(r.value(variable));
  }
  if (values.empty()) throw std::invalid_argument("unconditional_quantiles: no records in season " + to_string(season));
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(taus.size());
  for (double t : taus) out.push_back(sorted_quantile_type7(values, t));
  return out;
}

std::vector<DailyRecord> synthesize_daily(const DailySynthConfig& c) {
  if (c.members < 1 || c.years < 1) throw std::invalid_argument("synthesize_daily: members and years must be >= 1");
  if (!(c.wet_probability > 0.0 && c.wet_probability <= 1.0)) {
    throw std::domain_error("synthesize_daily: wet probability must lie in (0, 1]");
  }
  if (!(std::abs(c.correlation) < 1.0)) throw std::domain_error("synthesize_daily: |correlation| must be < 1");
  const WeibullParams precip{c.precip_shape, c.precip_scale};
  const WeibullParams wind{c.wind_shape, c.wind_scale};
  precip.validate();
  wind.validate();
  const double dry = 1.0 - c.wet_probability;
  const double rho_c = std::sqrt(1.0 - c.correlation * c.correlation);
  const sys_days first{year{c.start_year} / January / 1};
  const sys_days end{year{c.start_year + c.years} / January / 1};

  std::vector<DailyRecord> out;
  for (int m = 1; m <= c.members; ++m) {
    UniformStream s(derive_seed(c.seed, 0x6461696c79ULL, static_cast<std::uint64_t>(m)));
    for (sys_days d = first; d < end; d += days{1}) {
      const year_month_day ymd{d};
      if (c.calendar == Calendar::noleap && ymd.month() == February && ymd.day() == day{29}) continue;
      const double p = s.next();
      const double n1 = normal_quantile(p);
      const double n2 = c.correlation * n1 + rho_c * normal_quantile(s.next());
      DailyRecord r;
      r.date = ymd;
      r.member = m;
      r.precip = p <= dry ? 0.0 : weibull_quantile((p - dry) / c.wet_probability, precip);
      r.wind = weibull_quantile(std::clamp(normal_cdf(n2), 0x1p-60, 1.0 - 0x1p-53), wind);
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace condex
