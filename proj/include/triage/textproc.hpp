#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace triage {

struct Token {
  std::string text;
  bool numeric = false;

  bool operator==(const Token&) const = default;
};

/// Lowercases ASCII, splits on anything that is not alphanumeric or an apostrophe,
/// and keeps apostrophes only inside words. Non-ASCII code points count as letters;
/// U+2019 is folded to an ASCII apostrophe.
std::vector<Token> tokenize(std::string_view text);

std::vector<std::string> token_texts(std::span<const Token> tokens);

/// LIWC-style category dictionary with exact and trailing-asterisk prefix entries.
class CategoryLexicon {
 public:
  struct Category {
    int id;
    std::string name;
  };

  void add_category(int id, std::string name);
  /// `word` ending in '*' becomes a prefix entry.
  void add_entry(std::string_view word, std::span<const int> category_ids);

  const std::vector<Category>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }
  std::size_t exact_count() const { return exact_.size(); }
  std::size_t prefix_count() const { return prefix_.size(); }

  /// Category slots matched by one token: exact entry first, else the longest prefix.
  /// Empty when nothing matches.
  const std::vector<std::size_t>& match(std::string_view token) const;

 private:
  std::size_t slot_of(int id) const;

  std::vector<Category> categories_;
  std::unordered_map<int, std::size_t> slot_;
  std::unordered_map<std::string, std::vector<std::size_t>> exact_;
  std::unordered_map<std::string, std::vector<std::size_t>> prefix_;
  std::size_t max_prefix_ = 0;
};

CategoryLexicon load_dic(std::istream& in);
CategoryLexicon load_dic_file(const std::string& path);

/// Fraction of tokens matching each category, in category declaration order.
std::vector<double> category_rates(std::span<const Token> tokens, const CategoryLexicon& lexicon);

struct SentimentEntry {
  double polarity = 0.0;      // [-1, 1]
  double subjectivity = 0.0;  // [0, 1]
};

using SentimentLexicon = std::unordered_map<std::string, SentimentEntry>;

/// CSV `token,polarity,subjectivity`, optional header row.
SentimentLexicon load_sentiment(std::istream& in);
SentimentLexicon load_sentiment_file(const std::string& path);

struct Sentiment {
  double polarity = 0.0;
  double subjectivity = 0.0;
};

/// Mean over lexicon hits; (0, 0) when nothing matches.
Sentiment sentiment_score(std::span<const Token> tokens, const SentimentLexicon& lexicon);

}  // namespace triage
