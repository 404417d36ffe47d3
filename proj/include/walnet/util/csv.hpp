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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace walnet::csv {

using Row = std::vector<std::string>;

// Minimal RFC 4180 reader: comma separator, double-quote quoting, "" escapes,
// LF or CRLF line endings. Each returned row remembers its 1-based line.
struct Record {
  Row fields;
  std::size_t line = 0;
};

std::vector<Record> parse(std::string_view text);
std::vector<Record> read(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

void write(const std::filesystem::path& path, const Row& header, const std::vector<Row>& rows);

}  // namespace walnet::csv
