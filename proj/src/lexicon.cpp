#include "icanvas/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "icanvas/error.hpp"
#include "icanvas/fragment.hpp"

namespace icanvas {

namespace detail {
extern const std::string_view kBuiltinLexicon;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_bar(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t bar = s.find('|', start);
    const std::string item =
        canonical_text(s.substr(start, bar == std::string_view::npos ? s.npos : bar - start));
    if (!item.empty()) out.push_back(item);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(canonical_text(w));
  return out;
}

[[noreturn]] void bad(std::size_t line, const std::string& why) {
  throw Error(Errc::malformed_payload, "lexicon line " + std::to_string(line) + ": " + why);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '-' || c == '\'') {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
      if (c == ',' || c == ';' || c == '.' || c == '\n') out.emplace_back(",");
    }
  }
  flush();
  return out;
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad(line_no, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    if (section == "stopwords") {
      for (auto& w : split_ws(line)) lex.stopwords_.insert(w);
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) bad(line_no, "expected 'key: values'");
    const std::string key = canonical_text(line.substr(0, colon));
    const std::string_view rest = std::string_view(line).substr(colon + 1);
    if (key.empty()) bad(line_no, "empty key");
    if (section == "types") {
      auto values = split_bar(rest);
      if (values.empty()) bad(line_no, "type without values");
      if (lex.values_.count(key)) bad(line_no, "duplicate type " + key);
      for (const auto& v : values) {
        if (!lex.value_type_.emplace(v, key).second) bad(line_no, "value listed twice: " + v);
        lex.max_phrase_tokens_ = std::max(lex.max_phrase_tokens_, split_ws(v).size());
      }
      lex.types_.push_back(key);
      lex.values_.emplace(key, std::move(values));
    } else if (section == "synonyms") {
      lex.synonyms_[key] = split_bar(rest);
    } else if (section == "keywords") {
      for (auto& w : split_ws(rest)) lex.keywords_[w] = key;
    } else {
      bad(line_no, "entry outside a known section");
    }
  }
  if (lex.types_.empty()) throw Error(Errc::malformed_payload, "lexicon defines no types");
  for (const auto& [word, alts] : lex.synonyms_) {
    if (lex.type_of(word) != "content") throw Error(Errc::malformed_payload, "synonym head not content: " + word);
    for (const auto& a : alts)
      if (lex.type_of(a) != "content")
        throw Error(Errc::malformed_payload, "synonym not a content value: " + a);
  }
  std::stable_sort(lex.types_.begin(), lex.types_.end(),
                   [](const std::string& a, const std::string& b) { return type_order_less(a, b); });
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::shared_ptr<const Lexicon> Lexicon::builtin() {
  static const auto lex = std::make_shared<const Lexicon>(parse(detail::kBuiltinLexicon));
  return lex;
}

const std::vector<std::string>& Lexicon::values(std::string_view ftype) const {
  static const std::vector<std::string> kEmpty;
  auto it = values_.find(ftype);
  return it == values_.end() ? kEmpty : it->second;
}

std::optional<std::string> Lexicon::type_of(std::string_view value) const {
  auto it = value_type_.find(value);
  if (it == value_type_.end()) return std::nullopt;
  return it->second;
}

bool Lexicon::is_stopword(std::string_view token) const { return stopwords_.count(token) != 0; }

const std::vector<std::string>* Lexicon::synonyms(std::string_view value) const {
  auto it = synonyms_.find(value);
  return it == synonyms_.end() ? nullptr : &it->second;
}

std::optional<std::string> Lexicon::keyword_type(std::string_view token) const {
  auto it = keywords_.find(token);
  if (it == keywords_.end()) return std::nullopt;
  return it->second;
}

}  // namespace icanvas
