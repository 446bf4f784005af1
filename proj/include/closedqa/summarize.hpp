#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "closedqa/text.hpp"

namespace closedqa {

struct Sentence {
  std::size_t begin;  // byte offsets into the source text
  std::size_t end;
  std::string_view text;
};

// Boundaries are '.', '?' or '!' followed by whitespace or end of text.
// Sentences are trimmed of surrounding whitespace; a trailing fragment with no
// terminal punctuation counts as a sentence.
std::vector<Sentence> split_sentences(std::string_view text);

// Mean tf-idf weight of each sentence's tokens. tf is the token's count in
// the whole text, idf = ln(S / s_t) where S is the sentence count and s_t the
// number of sentences containing the token. A sentence without tokens scores 0.
std::vector<double> score_sentences(std::span<const Sentence> sentences,
                                    const CleaningConfig& cleaning);

// Keeps the max_sentences highest scoring sentences (ties to the earlier one),
// re-emitted in their original order joined by single spaces. Text with at
// most max_sentences sentences comes back unchanged.
std::string summarize_answer(std::string_view answer, std::size_t max_sentences = 3,
                             const CleaningConfig& cleaning = {});

}  // namespace closedqa
