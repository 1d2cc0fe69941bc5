#include "ordibound/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ordibound/error.hpp"

namespace ordibound {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  if (s.starts_with('+')) s.remove_prefix(1);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InputUnreadable, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset parse_unit_csv_text(std::string_view text, std::optional<std::size_t> categories) {
  const auto lines = lines_of(text);
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw Error(ErrorKind::MissingColumn, "empty file; a header row is required");

  const auto header = split(lines[header_line], ',');
  std::optional<std::size_t> zcol, ycol;
  Dataset data;
  std::vector<std::size_t> covariate_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "z") zcol = c;
    else if (header[c] == "y") ycol = c;
    else {
      if (header[c].empty()) throw Error(ErrorKind::MalformedRow, at_line(header_line + 1) + "empty column name");
      covariate_cols.push_back(c);
      data.covariate_names.emplace_back(header[c]);
    }
  }
  if (!zcol) throw Error(ErrorKind::MissingColumn, "header lacks a 'z' column");
  if (!ycol) throw Error(ErrorKind::MissingColumn, "header lacks a 'y' column");

  int max_y = -1;
  for (std::size_t li = header_line + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::size_t line = li + 1;
    const auto fields = split(lines[li], ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::MalformedRow, at_line(line) + "expected " + std::to_string(header.size()) +
                                               " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (fields[c].empty())
        throw Error(ErrorKind::MalformedRow, at_line(line) + "missing value in column '" + std::string(header[c]) + "'");

    UnitRecord r;
    const auto z = parse_number<int>(fields[*zcol]);
    if (!z || (*z != 0 && *z != 1)) throw Error(ErrorKind::MalformedRow, at_line(line) + "z must be 0 or 1");
    r.z = *z;
    const auto y = parse_number<int>(fields[*ycol]);
    if (!y) {
      if (parse_number<double>(fields[*ycol]))
        throw Error(ErrorKind::NonIntegerCategory, at_line(line) + "category '" + std::string(fields[*ycol]) +
                                                       "' is not an integer");
      throw Error(ErrorKind::MalformedRow, at_line(line) + "category '" + std::string(fields[*ycol]) +
                                               "' is not a number");
    }
    if (*y < 0) throw Error(ErrorKind::MalformedRow, at_line(line) + "categories start at 0");
    if (categories && static_cast<std::size_t>(*y) >= *categories)
      throw Error(ErrorKind::MalformedRow, at_line(line) + "category " + std::to_string(*y) + " exceeds --categories");
    r.y = *y;
    max_y = std::max(max_y, *y);
    for (std::size_t c : covariate_cols) {
      const auto v = parse_number<double>(fields[c]);
      if (!v || !std::isfinite(*v))
        throw Error(ErrorKind::MalformedRow, at_line(line) + "covariate '" + std::string(header[c]) +
                                                 "' is not a finite number");
      r.x.push_back(*v);
    }
    data.records.push_back(std::move(r));
  }
  if (data.records.empty()) throw Error(ErrorKind::EmptyArm, "no data rows");
  data.J = categories ? *categories : static_cast<std::size_t>(max_y + 1);
  return data;
}

Dataset parse_unit_csv(const std::string& path, std::optional<std::size_t> categories) {
  return parse_unit_csv_text(read_file(path), categories);
}

std::vector<long long> parse_count_list(std::string_view text) {
  std::vector<long long> out;
  for (auto f : split(text, ',')) {
    const auto v = parse_number<long long>(f);
    if (!v) throw Error(ErrorKind::MalformedRow, "count '" + std::string(f) + "' is not an integer");
    if (*v < 0) throw Error(ErrorKind::NegativeCount, "count " + std::to_string(*v) + " is negative");
    out.push_back(*v);
  }
  return out;
}

CountTable make_count_table(std::vector<long long> treated, std::vector<long long> control) {
  if (treated.size() != control.size()) {
    throw Error(ErrorKind::LengthMismatch, "treated has " + std::to_string(treated.size()) +
                                               " categories but control has " + std::to_string(control.size()));
  }
  for (const auto* arm : {&treated, &control})
    for (long long c : *arm)
      if (c < 0) throw Error(ErrorKind::NegativeCount, "count " + std::to_string(c) + " is negative");
  if (treated.size() < 2) throw Error(ErrorKind::TooFewCategories, "at least two categories are required");
  const auto total = [](const std::vector<long long>& v) { return std::accumulate(v.begin(), v.end(), 0LL); };
  if (total(treated) == 0) throw Error(ErrorKind::EmptyArm, "treated counts sum to zero");
  if (total(control) == 0) throw Error(ErrorKind::EmptyArm, "control counts sum to zero");
  return {std::move(treated), std::move(control)};
}

CountTable parse_count_lists(std::string_view treated, std::string_view control) {
  return make_count_table(parse_count_list(treated), parse_count_list(control));
}

CountTable parse_count_text(std::string_view text) {
  std::optional<std::vector<long long>> treated, control;
  const auto lines = lines_of(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    auto line = lines[li];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw Error(ErrorKind::MalformedRow, at_line(li + 1) + "expected 'treated:' or 'control:'");
    const auto key = trim(line.substr(0, colon));
    auto& slot = key == "treated" ? treated : control;
    if (key != "treated" && key != "control")
      throw Error(ErrorKind::MalformedRow, at_line(li + 1) + "unknown key '" + std::string(key) + "'");
    if (slot) throw Error(ErrorKind::MalformedRow, at_line(li + 1) + "duplicate '" + std::string(key) + "' line");
    slot = parse_count_list(trim(line.substr(colon + 1)));
  }
  if (!treated) throw Error(ErrorKind::MissingColumn, "count file lacks a 'treated:' line");
  if (!control) throw Error(ErrorKind::MissingColumn, "count file lacks a 'control:' line");
  return make_count_table(std::move(*treated), std::move(*control));
}

CountTable parse_count_table(const std::string& path) { return parse_count_text(read_file(path)); }

bool looks_like_count_file(std::string_view text) {
  for (auto line : lines_of(text)) {
    line = trim(line);
    if (line.starts_with("treated:") || line.starts_with("control:") || line.starts_with("treated :") ||
        line.starts_with("control :"))
      return true;
  }
  return false;
}

MarginalDistribution parse_probability_list(std::string_view text) {
  std::vector<double> p;
  for (auto f : split(text, ',')) {
    const auto v = parse_number<double>(f);
    if (!v) throw Error(ErrorKind::MalformedRow, "probability '" + std::string(f) + "' is not a number");
    p.push_back(*v);
  }
  return validate_marginal(p);
}

MarginalPair count_marginals(const CountTable& table) {
  const auto proportions = [](const std::vector<long long>& v) {
    const double n = static_cast<double>(std::accumulate(v.begin(), v.end(), 0LL));
    std::vector<double> p;
    for (long long c : v) p.push_back(static_cast<double>(c) / n);
    return MarginalDistribution(std::move(p));
  };
  return {proportions(table.treated), proportions(table.control)};
}

}  // namespace ordibound
