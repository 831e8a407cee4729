// Copyright 2026 The sitabench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// UTC timestamps at second resolution and their canonical 14-digit text form
// `YYYYMMDDhhmmss`.

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "sitabench/error.hpp"

namespace sitabench {

using Timestamp = std::chrono::sys_seconds;

struct CivilTime {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;
};

inline CivilTime to_civil(Timestamp ts) {
  using namespace std::chrono;
  const sys_days day = floor<days>(ts);
  const year_month_day ymd{day};
  const hh_mm_ss hms{ts - day};
  return CivilTime{static_cast<int>(ymd.year()),
                   static_cast<unsigned>(ymd.month()),
                   static_cast<unsigned>(ymd.day()),
                   static_cast<unsigned>(hms.hours().count()),
                   static_cast<unsigned>(hms.minutes().count()),
                   static_cast<unsigned>(hms.seconds().count())};
}

inline Timestamp make_timestamp(int year, unsigned month, unsigned day,
                                unsigned hour = 0, unsigned minute = 0,
                                unsigned second = 0) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw ParseError("invalid calendar time");
  }
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

namespace detail {

inline void put_digits(std::string& out, unsigned value, int width) {
  std::string digits(static_cast<std::size_t>(width), '0');
  for (int i = width - 1; i >= 0 && value > 0; --i) {
    digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + value % 10);
    value /= 10;
  }
  out += digits;
}

inline unsigned read_digits(std::string_view text, std::size_t pos,
                            std::size_t width) {
  unsigned value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    value = value * 10 + static_cast<unsigned>(text[i] - '0');
  }
  return value;
}

}  // namespace detail

/// `YYYYMMDD`
inline std::string format_date(const CivilTime& c) {
  std::string out;
  detail::put_digits(out, static_cast<unsigned>(c.year), 4);
  detail::put_digits(out, c.month, 2);
  detail::put_digits(out, c.day, 2);
  return out;
}

/// `hhmmss`
inline std::string format_time(const CivilTime& c) {
  std::string out;
  detail::put_digits(out, c.hour, 2);
  detail::put_digits(out, c.minute, 2);
  detail::put_digits(out, c.second, 2);
  return out;
}

inline std::string format_timestamp(Timestamp ts) {
  const CivilTime c = to_civil(ts);
  return format_date(c) + format_time(c);
}

inline Timestamp parse_timestamp(std::string_view text) {
  if (text.size() != 14) {
    throw ParseError("timestamp must have 14 digits: '" + std::string(text) +
                     "'");
  }
  for (char ch : text) {
    if (ch < '0' || ch > '9') {
      throw ParseError("timestamp must be numeric: '" + std::string(text) +
                       "'");
    }
  }
  try {
    return make_timestamp(static_cast<int>(detail::read_digits(text, 0, 4)),
                          detail::read_digits(text, 4, 2),
                          detail::read_digits(text, 6, 2),
                          detail::read_digits(text, 8, 2),
                          detail::read_digits(text, 10, 2),
                          detail::read_digits(text, 12, 2));
  } catch (const ParseError&) {
    throw ParseError("timestamp out of range: '" + std::string(text) + "'");
  }
}

/// ISO weekday, Monday = 0 ... Sunday = 6.
inline unsigned weekday_index(Timestamp ts) {
  const std::chrono::weekday wd{std::chrono::floor<std::chrono::days>(ts)};
  return (wd.c_encoding() + 6) % 7;
}

}  // namespace sitabench
