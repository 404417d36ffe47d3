/*
 * Copyright 2026 The walnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "walnet/util/keyed_text.hpp"

#include <charconv>
#include <fmt/format.h>

#include "walnet/util/error.hpp"
#include "walnet/util/io.hpp"

namespace walnet {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string format_double(double value) { return fmt::format("{}", value); }

KeyedText KeyedText::parse(std::string_view text, std::string_view origin) {
  KeyedText doc;
  doc.origin_ = origin;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw FormatError(fmt::format("{}:{}: empty key", origin, line_no));
    doc.set(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return doc;
}

KeyedText KeyedText::read(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

std::string KeyedText::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += fmt::format("{} = {}\n", k, v);
  return out;
}

void KeyedText::write(const std::filesystem::path& path) const { write_file(path, to_string()); }

void KeyedText::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyedText::set(std::string key, double value) { set(std::move(key), format_double(value)); }
void KeyedText::set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
void KeyedText::set(std::string key, std::uint64_t value) { set(std::move(key), std::to_string(value)); }

bool KeyedText::contains(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyedText::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view key, std::string_view origin) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(fmt::format("{}: key '{}' has malformed value '{}'", origin, key, text));
  }
  return value;
}

}  // namespace

std::string KeyedText::get_string(std::string_view key) const {
  auto v = find(key);
  if (!v) throw FormatError(fmt::format("{}: missing key '{}'", origin_, key));
  return *v;
}

double KeyedText::get_double(std::string_view key) const {
  return parse_number<double>(get_string(key), key, origin_);
}
std::int64_t KeyedText::get_int(std::string_view key) const {
  return parse_number<std::int64_t>(get_string(key), key, origin_);
}
std::uint64_t KeyedText::get_uint(std::string_view key) const {
  return parse_number<std::uint64_t>(get_string(key), key, origin_);
}

std::string KeyedText::get_string(std::string_view key, std::string fallback) const {
  auto v = find(key);
  return v ? *v : fallback;
}
double KeyedText::get_double(std::string_view key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}
std::int64_t KeyedText::get_int(std::string_view key, std::int64_t fallback) const {
  return contains(key) ? get_int(key) : fallback;
}
std::uint64_t KeyedText::get_uint(std::string_view key, std::uint64_t fallback) const {
  return contains(key) ? get_uint(key) : fallback;
}

}  // namespace walnet
