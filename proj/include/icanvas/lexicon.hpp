#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace icanvas {

// Word tables backing the mock language adapter. See data/lexicon.txt for
// the file format.
class Lexicon {
 public:
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  // The lexicon compiled into the library from data/lexicon.txt.
  static std::shared_ptr<const Lexicon> builtin();

  // Known types in canonical order.
  const std::vector<std::string>& types() const noexcept { return types_; }
  const std::vector<std::string>& values(std::string_view ftype) const;
  std::optional<std::string> type_of(std::string_view value) const;
  bool is_stopword(std::string_view token) const;
  const std::vector<std::string>* synonyms(std::string_view value) const;
  std::optional<std::string> keyword_type(std::string_view token) const;
  std::size_t max_phrase_tokens() const noexcept { return max_phrase_tokens_; }

 private:
  std::vector<std::string> types_;
  std::map<std::string, std::vector<std::string>, std::less<>> values_;
  std::map<std::string, std::string, std::less<>> value_type_;
  std::set<std::string, std::less<>> stopwords_;
  std::map<std::string, std::vector<std::string>, std::less<>> synonyms_;
  std::map<std::string, std::string, std::less<>> keywords_;
  std::size_t max_phrase_tokens_ = 1;
};

// Lowercased word tokens; punctuation other than '-' splits words, commas are
// kept as "," tokens so phrases never span them.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace icanvas
