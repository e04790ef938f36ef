// Copyright 2026 The omniqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OMNIQA_CSV_H_
#define OMNIQA_CSV_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace omniqa {

// RFC 4180 style table with a mandatory header row.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Index of `name` in the header; throws FormatError if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  void add_row(std::vector<std::string> row);

  static CsvTable parse(std::istream& in, const std::string& source = "csv");
  static CsvTable read(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Round-trippable decimal formatting (shortest representation that parses
// back to the same double).
std::string format_double(double v);

double parse_double(std::string_view text, std::string_view what);
long parse_int(std::string_view text, std::string_view what);

}  // namespace omniqa

#endif  // OMNIQA_CSV_H_
