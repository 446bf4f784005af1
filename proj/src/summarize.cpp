#include "closedqa/summarize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace closedqa {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminal(char c) { return c == '.' || c == '?' || c == '!'; }

void push_trimmed(std::vector<Sentence>& out, std::string_view text, std::size_t begin,
                  std::size_t end) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  if (end > begin) out.push_back({begin, end, text.substr(begin, end - begin)});
}

}  // namespace

std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_terminal(text[i]) && (i + 1 == text.size() || is_space(text[i + 1]))) {
      push_trimmed(sentences, text, start, i + 1);
      start = i + 1;
    }
  }
  push_trimmed(sentences, text, start, text.size());
  return sentences;
}

std::vector<double> score_sentences(std::span<const Sentence> sentences,
                                    const CleaningConfig& cleaning) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(sentences.size());
  std::map<std::string, std::size_t> term_count;
  std::map<std::string, std::size_t> sentence_freq;
  for (const auto& s : sentences) {
    auto toks = tokenize_normalize(clean_text(s.text, cleaning), cleaning);
    for (const auto& t : toks) ++term_count[t];
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++sentence_freq[t];
    tokens.push_back(std::move(toks));
  }

  const auto n_sentences = static_cast<double>(sentences.size());
  std::vector<double> scores;
  scores.reserve(sentences.size());
  for (const auto& toks : tokens) {
    if (toks.empty()) {
      scores.push_back(0.0);
      continue;
    }
    double sum = 0.0;
    for (const auto& t : toks) {
      const double idf = std::log(n_sentences / static_cast<double>(sentence_freq[t]));
      sum += static_cast<double>(term_count[t]) * idf;
    }
    scores.push_back(sum / static_cast<double>(toks.size()));
  }
  return scores;
}

std::string summarize_answer(std::string_view answer, std::size_t max_sentences,
                             const CleaningConfig& cleaning) {
  if (max_sentences == 0) max_sentences = 1;
  const auto sentences = split_sentences(answer);
  if (sentences.size() <= max_sentences) return std::string(answer);

  const auto scores = score_sentences(sentences, cleaning);
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(max_sentences);
  std::sort(order.begin(), order.end());

  std::string out;
  for (const auto idx : order) {
    if (!out.empty()) out.push_back(' ');
    out.append(sentences[idx].text);
  }
  return out;
}

}  // namespace closedqa
