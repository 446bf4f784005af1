#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace closedqa {

struct StemRule {
  std::string suffix;
  std::string replacement;

  bool operator==(const StemRule&) const = default;
};

struct CleaningConfig {
  bool lowercase = true;
  bool strip_markup = true;
  bool strip_non_alphabetic_symbols = true;
  std::set<std::string> stopwords;
  // Kept sorted longest suffix first; see set_stem_rules().
  std::vector<StemRule> stem_rules;

  void set_stem_rules(std::vector<StemRule> rules);

  bool operator==(const CleaningConfig&) const = default;
};

// One token per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

// One rule per line: "<suffix> [replacement]". A missing replacement strips
// the suffix.
std::vector<StemRule> load_stem_rules(const std::filesystem::path& path);

// Markup spans removed, non-alphabetic symbols blanked, whitespace collapsed,
// lowercased. Lowercasing covers ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic; other letters pass through untouched. Unicode punctuation and
// invalid UTF-8 are treated as symbols. Idempotent.
std::string clean_text(std::string_view text, const CleaningConfig& config);

std::vector<std::string> tokenize_normalize(std::string_view cleaned,
                                            const CleaningConfig& config);

std::string stem_token(std::string_view token, const std::vector<StemRule>& rules);

// Display form: markup removed, whitespace collapsed, case and punctuation kept.
// Inline tags (b, i, span, ...) vanish, other tags leave a space.
std::string strip_markup(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);

std::size_t word_count(std::string_view text);

void to_json(nlohmann::json& j, const CleaningConfig& config);
void from_json(const nlohmann::json& j, CleaningConfig& config);

}  // namespace closedqa
