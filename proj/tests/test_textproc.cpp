#include <doctest.h>

#include <map>
#include <sstream>

#include "support.hpp"
#include "triage/synth.hpp"
#include "triage/textproc.hpp"
#include "triage/util.hpp"

using namespace triage;

namespace {

std::vector<Token> toks(std::initializer_list<const char*> words) {
  std::vector<Token> out;
  for (const char* w : words) out.push_back({w, false});
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& w : v) s += (s.empty() ? "" : " ") + w;
  return s;
}

// Scans every entry for every token: exact hits win, otherwise the longest prefix.
std::vector<double> brute_force_rates(const std::vector<std::string>& tokens,
                                      const std::vector<std::pair<std::string, std::vector<int>>>& entries,
                                      int n_categories) {
  std::vector<double> rates(n_categories, 0.0);
  if (tokens.empty()) return rates;
  for (const auto& t : tokens) {
    const std::vector<int>* hit = nullptr;
    std::size_t best = 0;
    for (const auto& [word, cats] : entries)
      if (word.back() != '*' && word == t) hit = &cats;
    if (!hit) {
      for (const auto& [word, cats] : entries) {
        if (word.back() != '*') continue;
        const std::string stem = word.substr(0, word.size() - 1);
        if (t.compare(0, stem.size(), stem) == 0 && t.size() >= stem.size() && stem.size() + 1 > best) {
          best = stem.size() + 1;
          hit = &cats;
        }
      }
    }
    if (hit) {
      std::set<int> uniq(hit->begin(), hit->end());
      for (int c : uniq) rates[c - 1] += 1.0;
    }
  }
  for (auto& r : rates) r /= tokens.size();
  return rates;
}

}  // namespace

TEST_SUITE("textproc") {
  TEST_CASE("tokenizer grammar") {
    auto t = tokenize("I'm SCARED, anymore!!");
    CHECK(token_texts(t) == std::vector<std::string>{"i'm", "scared", "anymore"});
    CHECK(tokenize("").empty());
    t = tokenize("in 2016.");
    REQUIRE(t.size() == 2);
    CHECK(t[0] == Token{"in", false});
    CHECK(t[1] == Token{"2016", true});
  }

  TEST_CASE("apostrophes survive only inside words") {
    CHECK(token_texts(tokenize("'quoted' rock'n'roll '' o'")) ==
          std::vector<std::string>{"quoted", "rock'n'roll", "o"});
    CHECK(token_texts(tokenize("don\xe2\x80\x99t")) == std::vector<std::string>{"don't"});
    CHECK(token_texts(tokenize("caf\xc3\xa9-au-lait")) == std::vector<std::string>{"caf\xc3\xa9", "au", "lait"});
    auto mixed = tokenize("b4 42x");
    CHECK_FALSE(mixed[0].numeric);
    CHECK_FALSE(mixed[1].numeric);
  }

  TEST_CASE("property: tokenize is idempotent on its joined output") {
    Rng rng(3);
    const std::string alphabet = "aZ9' ,.!?-\n'\xc3\xa9";
    for (int i = 0; i < 500; ++i) {
      std::string s;
      const int n = static_cast<int>(rng.below(40));
      for (int j = 0; j < n; ++j) s.push_back(alphabet[rng.below(alphabet.size())]);
      auto once = token_texts(tokenize(s));
      CHECK(token_texts(tokenize(join(once))) == once);
    }
  }

  TEST_CASE(".dic parsing") {
    auto lex = test::small_lexicon();
    CHECK(lex.size() == 2);
    CHECK(lex.prefix_count() == 1);
    CHECK(lex.exact_count() == 2);

    std::istringstream undeclared("%\n1 family\n%\nxyz 9\n");
    CHECK_THROWS_AS(load_dic(undeclared), DataError);
    std::istringstream duplicate("%\n1 family\n1 swear\n%\n");
    CHECK_THROWS_AS(load_dic(duplicate), DataError);
    std::istringstream no_header("1 family\n%\n%\n");
    CHECK_THROWS_AS(load_dic(no_header), DataError);
    std::istringstream unclosed("%\n1 family\n");
    CHECK_THROWS_AS(load_dic(unclosed), DataError);
    std::istringstream bad_id("%\nx family\n%\n");
    CHECK_THROWS_AS(load_dic(bad_id), DataError);

    std::istringstream empty_entries("%\n1 family\n2 swear\n%\n");
    auto bare = load_dic(empty_entries);
    CHECK(category_rates(toks({"family", "damn"}), bare) == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("category rates with prefix matching and exact precedence") {
    auto lex = test::small_lexicon();
    auto rates = category_rates(toks({"my", "mother's", "family", "damn"}), lex);
    CHECK(rates[0] == doctest::Approx(0.5));
    CHECK(rates[1] == doctest::Approx(0.25));
    CHECK(category_rates({}, lex) == std::vector<double>{0.0, 0.0});

    CategoryLexicon p;
    p.add_category(1, "one");
    p.add_category(2, "two");
    std::vector<int> c1 = {1}, c2 = {2};
    p.add_entry("mother*", c1);
    p.add_entry("motherland", c2);
    CHECK(category_rates(toks({"motherland"}), p) == std::vector<double>{0.0, 1.0});
    CHECK(category_rates(toks({"mothers"}), p) == std::vector<double>{1.0, 0.0});
  }

  TEST_CASE("longest prefix wins") {
    CategoryLexicon p;
    p.add_category(1, "one");
    p.add_category(2, "two");
    std::vector<int> c1 = {1}, c2 = {2};
    p.add_entry("sad*", c1);
    p.add_entry("sadn*", c2);
    CHECK(category_rates(toks({"sadness"}), p) == std::vector<double>{0.0, 1.0});
    CHECK(category_rates(toks({"sadly"}), p) == std::vector<double>{1.0, 0.0});
  }

  TEST_CASE("property: rates match a brute-force matcher") {
    Rng rng(17);
    const std::string letters = "abc";
    auto word = [&](std::size_t max_len) {
      std::string w;
      const std::size_t n = 1 + rng.below(max_len);
      for (std::size_t i = 0; i < n; ++i) w.push_back(letters[rng.below(letters.size())]);
      return w;
    };
    for (int trial = 0; trial < 300; ++trial) {
      const int n_cat = 1 + static_cast<int>(rng.below(4));
      CategoryLexicon lex;
      for (int c = 1; c <= n_cat; ++c) lex.add_category(c, "c" + std::to_string(c));
      std::vector<std::pair<std::string, std::vector<int>>> entries;
      std::set<std::string> used;
      const int n_entries = static_cast<int>(rng.below(8));
      for (int e = 0; e < n_entries; ++e) {
        std::string w = word(3);
        if (rng.bernoulli(0.5)) w += '*';
        if (!used.insert(w).second) continue;
        std::vector<int> cats;
        const int k = 1 + static_cast<int>(rng.below(n_cat));
        for (int i = 0; i < k; ++i) cats.push_back(1 + static_cast<int>(rng.below(n_cat)));
        lex.add_entry(w, cats);
        entries.emplace_back(w, cats);
      }
      std::vector<std::string> tokens;
      const int n_tok = static_cast<int>(rng.below(10));
      for (int i = 0; i < n_tok; ++i) tokens.push_back(word(5));
      std::vector<Token> tk;
      for (const auto& t : tokens) tk.push_back({t, false});
      auto got = category_rates(tk, lex);
      auto want = brute_force_rates(tokens, entries, n_cat);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]));
        CHECK(got[i] >= 0.0);
        CHECK(got[i] <= 1.0);
      }
    }
  }

  TEST_CASE("sentiment means over matched tokens") {
    SentimentLexicon lex = {{"great", {0.8, 0.75}}, {"scared", {-0.6, 1.0}}};
    auto s = sentiment_score(toks({"great", "scared"}), lex);
    CHECK(s.polarity == doctest::Approx(0.1));
    CHECK(s.subjectivity == doctest::Approx(0.875));
    s = sentiment_score(toks({"nothing", "here"}), lex);
    CHECK(s.polarity == 0.0);
    CHECK(s.subjectivity == 0.0);
    s = sentiment_score(toks({"great", "great", "other"}), lex);
    CHECK(s.polarity == doctest::Approx(0.8));
    CHECK(s.subjectivity == doctest::Approx(0.75));
  }

  TEST_CASE("sentiment csv validation") {
    std::istringstream good("token,polarity,subjectivity\nok,0.1,0.2\n");
    CHECK(load_sentiment(good).at("ok").subjectivity == doctest::Approx(0.2));
    std::istringstream bad("bad,1.5,0.2\n");
    CHECK_THROWS_AS(load_sentiment(bad), DataError);
    std::istringstream bad_subj("bad,0.5,-0.2\n");
    CHECK_THROWS_AS(load_sentiment(bad_subj), DataError);
  }

  TEST_CASE("bundled lexicons load and stay in range") {
    auto dic = load_dic_file(test::data_path("standin.dic"));
    CHECK(dic.size() == 12);
    auto sent = load_sentiment_file(test::data_path("sentiment.csv"));
    CHECK(sent.size() > 20);
    for (const auto& [w, e] : sent) {
      CHECK(e.polarity >= -1.0);
      CHECK(e.polarity <= 1.0);
      CHECK(e.subjectivity >= 0.0);
      CHECK(e.subjectivity <= 1.0);
    }
  }

  TEST_CASE("synthetic pseudo-words never hit the bundled lexicons") {
    auto dic = load_dic_file(test::data_path("standin.dic"));
    auto sent = load_sentiment_file(test::data_path("sentiment.csv"));
    for (std::size_t i = 0; i < 2000; ++i) {
      const auto w = pseudo_word(i);
      CHECK(dic.match(w).empty());
      CHECK_FALSE(sent.contains(w));
    }
  }
}
