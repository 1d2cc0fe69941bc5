#pragma once

// Input parsing: unit-level CSV files and per-arm count tables.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ordibound/estimators.hpp"

namespace ordibound {

struct CountTable {
  std::vector<long long> treated;
  std::vector<long long> control;

  std::size_t categories() const { return treated.size(); }
};

// Whole file as bytes; InputUnreadable when it cannot be opened.
std::string read_file(const std::string& path);

// Header row with columns z and y in any position; every other column is a
// covariate. J is max(y) + 1 unless `categories` is given. Line numbers in
// errors are 1-based and count the header.
Dataset parse_unit_csv_text(std::string_view text, std::optional<std::size_t> categories = std::nullopt);
Dataset parse_unit_csv(const std::string& path, std::optional<std::size_t> categories = std::nullopt);

// Comma-separated nonnegative integers.
std::vector<long long> parse_count_list(std::string_view text);
CountTable make_count_table(std::vector<long long> treated, std::vector<long long> control);
CountTable parse_count_lists(std::string_view treated, std::string_view control);

// Lines "treated: a,b,..." and "control: a,b,..."; '#' starts a comment.
CountTable parse_count_text(std::string_view text);
CountTable parse_count_table(const std::string& path);

// True when the text has a "treated:" or "control:" line.
bool looks_like_count_file(std::string_view text);

// Comma-separated probabilities, validated and renormalized.
MarginalDistribution parse_probability_list(std::string_view text);

MarginalPair count_marginals(const CountTable& table);

}  // namespace ordibound
