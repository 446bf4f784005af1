#include "closedqa/text.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>

#include "closedqa/error.hpp"

namespace closedqa {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_alpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Non-ASCII code points that count as symbols rather than letters.
bool is_unicode_symbol(char32_t cp) {
  if (cp < 0xC0) return true;  // C1 controls, NBSP, Latin-1 punctuation
  if (cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2000 && cp <= 0x2BFF) return true;  // punctuation, arrows, math
  if (cp >= 0x3000 && cp <= 0x303F) return true;  // CJK punctuation
  if (cp >= 0xFF00 && cp <= 0xFF20) return true;  // fullwidth punctuation, digits
  if (cp == 0xFEFF) return true;
  if (cp == 0x060C || cp == 0x061B || cp == 0x061F || cp == 0x06D4) return true;
  if (cp >= 0x0660 && cp <= 0x0669) return true;  // Arabic-Indic digits
  if (cp >= 0x06F0 && cp <= 0x06F9) return true;
  return false;
}

// Simple case mapping for Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t lower_code_point(char32_t cp) {
  if ((cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130 || cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    const bool odd_is_upper = (cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E);
    if (cp == 0x178) return 0xFF;
    if (odd_is_upper) return cp % 2 == 1 ? cp + 1 : cp;
    return cp % 2 == 0 ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one UTF-8 sequence at text[i]. Returns its byte length, or 0 when the
// bytes are not valid UTF-8.
std::size_t decode_utf8(std::string_view text, std::size_t i, char32_t& cp) {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t len;
  if (lead < 0x80) {
    cp = lead;
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    return 0;
  }
  if (i + len > text.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto c = static_cast<unsigned char>(text[i + k]);
    if ((c & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (c & 0x3F);
  }
  // Reject overlong forms and surrogates so that re-cleaning sees the same bytes.
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
      cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return 0;
  }
  return len;
}

// Inline tags sit inside words or before punctuation, so they vanish; every
// other tag becomes a space.
bool is_inline_tag(std::string_view tag) {
  static const std::set<std::string_view> kInline{"a",    "abbr", "b",   "code", "em",
                                                  "font", "i",    "small", "span", "strong",
                                                  "sub",  "sup",  "u"};
  std::size_t b = tag.starts_with('/') ? 1 : 0;
  std::size_t e = b;
  while (e < tag.size() && is_ascii_alpha(static_cast<unsigned char>(tag[e]))) ++e;
  std::string name(tag.substr(b, e - b));
  for (auto& ch : name) ch = static_cast<char>(ch | 0x20);
  return kInline.contains(name);
}

std::string remove_markup_spans(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      const auto close = text.find('>', i + 1);
      if (close != std::string_view::npos) {
        if (!is_inline_tag(text.substr(i + 1, close - i - 1))) out.push_back(' ');
        i = close + 1;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char ch : text) {
    if (is_ascii_space(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_ascii_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

void CleaningConfig::set_stem_rules(std::vector<StemRule> rules) {
  std::stable_sort(rules.begin(), rules.end(), [](const StemRule& a, const StemRule& b) {
    return a.suffix.size() > b.suffix.size();
  });
  stem_rules = std::move(rules);
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto token = trim(line);
    if (token.empty() || token.front() == '#') continue;
    words.insert(std::move(token));
  }
  return words;
}

std::vector<StemRule> load_stem_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stem rule file " + path.string());
  std::vector<StemRule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = split_whitespace(trimmed);
    if (fields.size() > 2) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": expected '<suffix> [replacement]'");
    }
    rules.push_back({fields[0], fields.size() == 2 ? fields[1] : std::string{}});
  }
  return rules;
}

std::string clean_text(std::string_view text, const CleaningConfig& config) {
  std::string stage = config.strip_markup ? remove_markup_spans(text) : std::string(text);

  std::string out;
  out.reserve(stage.size());
  std::size_t i = 0;
  while (i < stage.size()) {
    const auto c = static_cast<unsigned char>(stage[i]);
    if (c < 0x80) {
      if (is_ascii_space(c)) {
        out.push_back(' ');
      } else if (is_ascii_alpha(c)) {
        out.push_back(config.lowercase && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                                   : static_cast<char>(c));
      } else if (config.strip_non_alphabetic_symbols) {
        out.push_back(' ');
      } else {
        out.push_back(static_cast<char>(c));
      }
      ++i;
      continue;
    }
    char32_t cp = 0;
    const std::size_t len = decode_utf8(stage, i, cp);
    if (config.strip_non_alphabetic_symbols && (len == 0 || is_unicode_symbol(cp))) {
      out.push_back(' ');
      i += len == 0 ? 1 : len;
      continue;
    }
    if (len != 0 && config.lowercase) {
      append_utf8(out, lower_code_point(cp));
      i += len;
      continue;
    }
    const std::size_t n = len == 0 ? 1 : len;
    out.append(stage, i, n);
    i += n;
  }
  return collapse_whitespace(out);
}

std::string stem_token(std::string_view token, const std::vector<StemRule>& rules) {
  for (const auto& rule : rules) {
    if (token.size() > rule.suffix.size() && token.ends_with(rule.suffix)) {
      std::string stem(token.substr(0, token.size() - rule.suffix.size()));
      stem += rule.replacement;
      return stem;
    }
  }
  return std::string(token);
}

std::vector<std::string> tokenize_normalize(std::string_view cleaned,
                                            const CleaningConfig& config) {
  std::vector<std::string> tokens;
  for (auto& word : split_whitespace(cleaned)) {
    if (config.stopwords.contains(word)) continue;
    auto stem = stem_token(word, config.stem_rules);
    if (!stem.empty()) tokens.push_back(std::move(stem));
  }
  return tokens;
}

std::string strip_markup(std::string_view text) {
  return collapse_whitespace(remove_markup_spans(text));
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::size_t word_count(std::string_view text) { return split_whitespace(text).size(); }

void to_json(nlohmann::json& j, const CleaningConfig& config) {
  auto rules = nlohmann::json::array();
  for (const auto& r : config.stem_rules) rules.push_back({r.suffix, r.replacement});
  j = nlohmann::json{
      {"lowercase", config.lowercase},
      {"strip_markup", config.strip_markup},
      {"strip_non_alphabetic_symbols", config.strip_non_alphabetic_symbols},
      {"stopwords", config.stopwords},
      {"stem_rules", std::move(rules)},
  };
}

void from_json(const nlohmann::json& j, CleaningConfig& config) {
  config.lowercase = j.at("lowercase").get<bool>();
  config.strip_markup = j.at("strip_markup").get<bool>();
  config.strip_non_alphabetic_symbols = j.at("strip_non_alphabetic_symbols").get<bool>();
  config.stopwords = j.at("stopwords").get<std::set<std::string>>();
  if (config.stopwords.contains("")) throw SchemaError("stopword list contains an empty token");
  std::vector<StemRule> rules;
  for (const auto& r : j.at("stem_rules")) {
    rules.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>()});
  }
  config.set_stem_rules(std::move(rules));
}

}  // namespace closedqa
