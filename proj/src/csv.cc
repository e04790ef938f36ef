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

#include "omniqa/csv.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "omniqa/error.h"

namespace omniqa {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw FormatError("missing CSV column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw FormatError("CSV row has " + std::to_string(row.size()) +
                      " fields, header has " + std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

CsvTable CsvTable::parse(std::istream& in, const std::string& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  char c;
  auto end_record = [&] {
    if (field_started || !record.empty()) {
      record.push_back(field);
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) {
    throw FormatError(source + ": unterminated quoted field near line " +
                      std::to_string(line));
  }
  end_record();
  if (records.empty()) throw FormatError(source + ": missing CSV header");
  // Strip a UTF-8 byte order mark.
  auto& first = records.front().front();
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);

  CsvTable table(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header_.size()) {
      throw FormatError(source + ": record " + std::to_string(r) + " has " +
                        std::to_string(records[r].size()) + " fields, expected " +
                        std::to_string(table.header_.size()));
    }
    table.rows_.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse(in, path.string());
}

namespace {

void write_field(std::ostream& out, const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) {
    out << f;
    return;
  }
  out << '"';
  for (char c : f) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& rec) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i) out << ',';
    write_field(out, rec[i]);
  }
  out << '\n';
}

}  // namespace

void CsvTable::write(std::ostream& out) const {
  write_record(out, header_);
  for (const auto& r : rows_) write_record(out, r);
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot create " + path.string());
  write(out);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  if (s.empty() || pos != s.size()) {
    throw FormatError("cannot parse " + std::string(what) + " '" + s +
                      "' as a number");
  }
  return v;
}

long parse_int(std::string_view text, std::string_view what) {
  long v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || b == e) {
    throw FormatError("cannot parse " + std::string(what) + " '" +
                      std::string(text) + "' as an integer");
  }
  return v;
}

}  // namespace omniqa
