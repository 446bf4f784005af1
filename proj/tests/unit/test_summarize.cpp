#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "closedqa/summarize.hpp"
#include "closedqa/text.hpp"
#include "doctest.h"

using namespace closedqa;

namespace {

const char* kAnswer =
    "Zakat purifies wealth. Prayer is performed daily. Fasting happens in Ramadan. "
    "Zakat purifies wealth of the giver. Charity helps the poor.";

// Independent scorer: tokens are the lowercase alphabetic runs.
std::vector<std::vector<std::string>> oracle_tokens(const std::vector<std::string>& sentences) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : sentences) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : s + " ") {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      } else if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
    }
    out.push_back(toks);
  }
  return out;
}

std::vector<double> oracle_scores(const std::vector<std::string>& sentences) {
  const auto toks = oracle_tokens(sentences);
  std::map<std::string, int> tf, sf;
  for (const auto& ts : toks) {
    for (const auto& t : ts) ++tf[t];
    for (const auto& t : std::set<std::string>(ts.begin(), ts.end())) ++sf[t];
  }
  const double n = static_cast<double>(sentences.size());
  std::vector<double> scores;
  for (const auto& ts : toks) {
    double sum = 0;
    for (const auto& t : ts) sum += tf[t] * std::log(n / sf[t]);
    scores.push_back(ts.empty() ? 0.0 : sum / static_cast<double>(ts.size()));
  }
  return scores;
}

}  // namespace

TEST_CASE("split_sentences boundaries") {
  const auto s = split_sentences("One. Two? Three! 3.5 is a number. Tail");
  REQUIRE(s.size() == 5);
  CHECK(s[0].text == "One.");
  CHECK(s[1].text == "Two?");
  CHECK(s[2].text == "Three!");
  CHECK(s[3].text == "3.5 is a number.");
  CHECK(s[4].text == "Tail");
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   ").empty());
}

TEST_CASE("sentence scores match a hand computed tf-idf table") {
  const auto sentences = split_sentences(kAnswer);
  REQUIRE(sentences.size() == 5);
  const auto scores = score_sentences(sentences, {});

  // hand table: S = 5, idf(shared term) = ln 5/2, idf(unique term) = ln 5
  const double shared = std::log(5.0 / 2.0), unique = std::log(5.0);
  const std::vector<double> hand{
      2 * shared,                                // zakat purifies wealth
      unique,                                    // prayer is performed daily
      unique,                                    // fasting happens in ramadan
      (4 * 2 * shared + 2 * unique) / 6,         // zakat purifies wealth of the giver
      (3 * unique + 2 * shared) / 4,             // charity helps the poor
  };
  std::vector<std::string> texts;
  for (const auto& s : sentences) texts.emplace_back(s.text);
  const auto oracle = oracle_scores(texts);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(scores[i] == doctest::Approx(hand[i]).epsilon(1e-12));
    CHECK(scores[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
  CHECK(scores[0] == doctest::Approx(1.8325814637483102).epsilon(1e-12));
}

TEST_CASE("summarize_answer keeps the top sentences in original order") {
  CHECK(summarize_answer(kAnswer, 3) ==
        "Zakat purifies wealth. Zakat purifies wealth of the giver. Charity helps the poor.");
  const std::string two = "First sentence here. Second one!";
  CHECK(summarize_answer(two, 3) == two);
  const auto one = summarize_answer(kAnswer, 1);
  CHECK(one == "Zakat purifies wealth.");
}

TEST_CASE("score ties go to the earlier sentence") {
  const std::string text = "Alpha beta. Gamma delta. Epsilon zeta. Eta theta.";
  CHECK(summarize_answer(text, 2) == "Alpha beta. Gamma delta.");
}

TEST_CASE("property: summaries are verbatim subsets in order") {
  std::mt19937_64 gen(23);
  const std::vector<std::string> words{"zakat", "wealth", "prayer", "fast", "hajj", "the", "is",
                                       "mercy", "quran", "sunnah", "duty", "ease"};
  std::uniform_int_distribution<std::size_t> nsent(1, 9), nword(1, 8), w(0, words.size() - 1),
      punct(0, 2), maxs(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    std::ostringstream text;
    const auto n = nsent(gen);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) text << ' ';
      const auto k = nword(gen);
      for (std::size_t j = 0; j < k; ++j) text << (j ? " " : "") << words[w(gen)];
      text << ".?!"[punct(gen)];
    }
    const auto input = text.str();
    const auto m = maxs(gen);
    const auto out = summarize_answer(input, m);
    const auto in_s = split_sentences(input);
    const auto out_s = split_sentences(out);
    CHECK(out_s.size() == std::min(m, in_s.size()));
    std::size_t cursor = 0;
    for (const auto& s : out_s) {
      const auto at = input.find(s.text, cursor);
      REQUIRE(at != std::string::npos);
      cursor = at + s.text.size();
    }
  }
}
