#include "triage/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "triage/util.hpp"

namespace triage {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '\'' || c >= 0x80; }

void flush_word(std::string& word, std::vector<Token>& out) {
  auto b = word.find_first_not_of('\'');
  if (b != std::string::npos) {
    auto e = word.find_last_not_of('\'');
    Token t{word.substr(b, e - b + 1), false};
    t.numeric = std::all_of(t.text.begin(), t.text.end(),
                            [](unsigned char c) { return std::isdigit(c) != 0; });
    out.push_back(std::move(t));
  }
  word.clear();
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::string word;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    // U+2019 RIGHT SINGLE QUOTATION MARK, E2 80 99
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      word.push_back('\'');
      i += 2;
      continue;
    }
    if (is_word_byte(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (!word.empty()) {
      flush_word(word, out);
    }
  }
  if (!word.empty()) flush_word(word, out);
  return out;
}

std::vector<std::string> token_texts(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

void CategoryLexicon::add_category(int id, std::string name) {
  if (slot_.contains(id)) throw DataError("duplicate category id " + std::to_string(id));
  for (const auto& c : categories_)
    if (c.name == name) throw DataError("duplicate category name '" + name + "'");
  slot_[id] = categories_.size();
  categories_.push_back({id, std::move(name)});
}

std::size_t CategoryLexicon::slot_of(int id) const {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw DataError("entry references undeclared category " + std::to_string(id));
  return it->second;
}

void CategoryLexicon::add_entry(std::string_view word, std::span<const int> category_ids) {
  std::string w;
  for (char c : word) w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  bool is_prefix = !w.empty() && w.back() == '*';
  if (is_prefix) w.pop_back();
  if (w.empty()) throw DataError("empty dictionary entry");
  auto& slots = is_prefix ? prefix_[w] : exact_[w];
  for (int id : category_ids) {
    std::size_t s = slot_of(id);
    if (std::find(slots.begin(), slots.end(), s) == slots.end()) slots.push_back(s);
  }
  std::sort(slots.begin(), slots.end());
  if (is_prefix) max_prefix_ = std::max(max_prefix_, w.size());
}

const std::vector<std::size_t>& CategoryLexicon::match(std::string_view token) const {
  static const std::vector<std::size_t> kNone;
  if (auto it = exact_.find(std::string(token)); it != exact_.end()) return it->second;
  for (std::size_t len = std::min(token.size(), max_prefix_); len > 0; --len) {
    if (auto it = prefix_.find(std::string(token.substr(0, len))); it != prefix_.end()) return it->second;
  }
  return kNone;
}

CategoryLexicon load_dic(std::istream& in) {
  CategoryLexicon lex;
  std::string raw;
  int section = 0;  // 0 before header, 1 categories, 2 entries
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DataError("dictionary line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#' && section != 2) continue;
    if (line == "%") {
      if (section == 2) fail("unexpected third '%' delimiter");
      ++section;
      continue;
    }
    std::istringstream fields(line);
    if (section == 0) fail("expected '%' before category declarations");
    if (section == 1) {
      int id;
      if (!(fields >> id)) fail("malformed category line '" + line + "'");
      std::string name;
      std::getline(fields, name);
      name = trim(name);
      if (name.empty()) fail("category " + std::to_string(id) + " has no name");
      try {
        lex.add_category(id, name);
      } catch (const DataError& e) {
        fail(e.what());
      }
      continue;
    }
    std::string word;
    fields >> word;
    std::vector<int> ids;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        int id = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        ids.push_back(id);
      } catch (const std::logic_error&) {
        fail("non-integer category id '" + tok + "'");
      }
    }
    if (ids.empty()) fail("entry '" + word + "' lists no categories");
    try {
      lex.add_entry(word, ids);
    } catch (const DataError& e) {
      fail(e.what());
    }
  }
  if (section < 2) throw DataError("dictionary header is not closed by a second '%' line");
  return lex;
}

CategoryLexicon load_dic_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dictionary " + path);
  return load_dic(in);
}

std::vector<double> category_rates(std::span<const Token> tokens, const CategoryLexicon& lexicon) {
  std::vector<double> rates(lexicon.size(), 0.0);
  if (tokens.empty()) return rates;
  for (const auto& t : tokens)
    for (std::size_t slot : lexicon.match(t.text)) rates[slot] += 1.0;
  for (double& r : rates) r /= static_cast<double>(tokens.size());
  return rates;
}

SentimentLexicon load_sentiment(std::istream& in) {
  SentimentLexicon lex;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, ',');
    auto fail = [&](const std::string& msg) {
      throw DataError("sentiment lexicon line " + std::to_string(lineno) + ": " + msg);
    };
    if (cols.size() != 3) fail("expected token,polarity,subjectivity");
    if (lineno == 1 && trim(cols[0]) == "token") continue;
    SentimentEntry e;
    try {
      e.polarity = std::stod(cols[1]);
      e.subjectivity = std::stod(cols[2]);
    } catch (const std::logic_error&) {
      fail("non-numeric score");
    }
    if (!(e.polarity >= -1.0 && e.polarity <= 1.0)) fail("polarity outside [-1, 1]");
    if (!(e.subjectivity >= 0.0 && e.subjectivity <= 1.0)) fail("subjectivity outside [0, 1]");
    std::string token = trim(cols[0]);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    lex[token] = e;
  }
  return lex;
}

SentimentLexicon load_sentiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sentiment lexicon " + path);
  return load_sentiment(in);
}

Sentiment sentiment_score(std::span<const Token> tokens, const SentimentLexicon& lexicon) {
  Sentiment s;
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    auto it = lexicon.find(t.text);
    if (it == lexicon.end()) continue;
    s.polarity += it->second.polarity;
    s.subjectivity += it->second.subjectivity;
    ++hits;
  }
  if (hits > 0) {
    s.polarity /= static_cast<double>(hits);
    s.subjectivity /= static_cast<double>(hits);
  }
  return s;
}

}  // namespace triage
