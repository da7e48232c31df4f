#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"

#include "icanvas/adapters.hpp"
#include "icanvas/codec.hpp"
#include "icanvas/engine.hpp"

namespace icanvas::test {

// Small rasters keep the property tests fast.
inline constexpr std::int32_t kDim = 64;

inline Engine make_engine(EngineConfig config = {}, std::int32_t dim = kDim) {
  return Engine(make_mock_adapters(Lexicon::builtin(), dim, dim), config);
}

inline const MockLanguageAdapter& mock_language(const Engine& e) {
  return static_cast<const MockLanguageAdapter&>(*e.adapters().language);
}

// Runs fired work inline and jumps the clock to each deadline until nothing
// is pending. Returns the completions in order.
inline std::vector<Completion> drain(Engine& e) {
  std::vector<Completion> out;
  for (;;) {
    auto fired = e.take_ready();
    for (auto& d : fired) out.push_back(e.complete(d.job, d.work(e.adapters())));
    if (!fired.empty()) continue;
    const auto next = e.scheduler().next_deadline();
    if (!next) return out;
    e.set_now(std::max(e.now(), *next));
  }
}

inline ElementId add_image(Engine& e, const std::string& prompt, Rect rect = {0, 0, 100, 100},
                           std::uint64_t seed = 7) {
  ImageBody b;
  b.prompt = prompt;
  b.seed = seed;
  const ElementId id = e.create_element(rect, b);
  drain(e);
  return id;
}

inline ElementId add_lens(Engine& e, const std::string& prompt, Rect rect, std::uint64_t seed = 3) {
  LensBody b;
  b.prompt = prompt;
  b.seed = seed;
  return e.create_element(rect, b);
}

inline const ImageAsset& image_asset(const Engine& e, const ElementId& id) {
  return e.doc().asset(*e.doc().body<ImageBody>(id).asset);
}

inline std::vector<std::string> values_of(const std::vector<Fragment>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(f.value);
  return out;
}

inline std::vector<std::pair<std::string, std::string>> pairs_of(const std::vector<Fragment>& fs) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fs) out.emplace_back(f.ftype, f.value);
  return out;
}

#define CHECK_ERRC(expr, want)                                   \
  do {                                                           \
    bool thrown_ = false;                                        \
    try {                                                        \
      (void)(expr);                                              \
    } catch (const ::icanvas::Error& e_) {                       \
      thrown_ = true;                                            \
      CHECK_MESSAGE(e_.code() == (want), "got " << std::string(e_.what()));   \
    }                                                            \
    CHECK_MESSAGE(thrown_, "expected " << ::icanvas::to_string(want)); \
  } while (0)

}  // namespace icanvas::test
