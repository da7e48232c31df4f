#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icanvas/fragment.hpp"
#include "icanvas/generation.hpp"
#include "icanvas/geometry.hpp"
#include "icanvas/instruments.hpp"
#include "icanvas/lexicon.hpp"
#include "icanvas/scene.hpp"

namespace icanvas {

// Text-side model operations. Implementations must be safe to call from
// several worker threads and must not touch the document.
class LanguageAdapter {
 public:
  virtual ~LanguageAdapter() = default;

  virtual std::vector<Fragment> decompose(const std::string& prompt) const = 0;
  virtual std::vector<Fragment> vary_values(const Fragment& fragment, const std::string& context,
                                            std::size_t k) const = 0;
  virtual std::vector<Fragment> suggest_types(const std::string& prompt,
                                              const std::vector<Fragment>& existing) const = 0;
  virtual std::string compose(const std::string& base,
                              const std::vector<FragmentEdit>& edits) const = 0;
  virtual std::string describe(const ImageAsset& asset) const = 0;
  virtual std::string merge(const std::vector<std::string>& prompts) const = 0;
  // region is in asset pixel coordinates. Throws extraction_empty when the
  // region holds nothing of the requested kind.
  virtual std::string extract(const ImageAsset& asset, const std::optional<Rect>& region,
                              BrushMode mode) const = 0;
  // context describes a grounding asset; types it names that the prompt
  // lacks are carried into every variant except along the varied dimension.
  virtual std::vector<std::string> derive_variant_prompts(const std::string& prompt,
                                                          const Grounding& grounding,
                                                          const std::string& context,
                                                          std::size_t n) const = 0;
  // Combined inpaint prompt from the source prompt, the segmented content and
  // the brush prompt.
  virtual std::string craft_brush_prompt(const std::string& source_prompt,
                                         const std::string& segment_description,
                                         const std::string& brush_prompt, BrushMode mode,
                                         double emphasis) const = 0;
  // k distinct fragments along the dimension named by a task prompt.
  virtual std::vector<Fragment> propose_fragments(const std::string& task, std::size_t k) const = 0;
  // The fragment type a container varies along for this prompt and grounding.
  virtual std::string variation_dimension(const std::string& prompt,
                                          const Grounding& grounding) const = 0;
};

class ImageAdapter {
 public:
  virtual ~ImageAdapter() = default;

  // txt2img, img2img, and outpaint requests.
  virtual ImageAsset generate(const GenerationRequest& request) const = 0;
  virtual ImageAsset inpaint(const GenerationRequest& request) const = 0;
  virtual Mask segment(const ImageAsset& asset, const std::vector<Point>& control_points) const = 0;
};

struct Adapters {
  std::shared_ptr<const LanguageAdapter> language;
  std::shared_ptr<const ImageAdapter> image;
  std::string id;
};

// Deterministic lexicon-driven language model.
class MockLanguageAdapter final : public LanguageAdapter {
 public:
  explicit MockLanguageAdapter(std::shared_ptr<const Lexicon> lexicon);

  std::vector<Fragment> decompose(const std::string& prompt) const override;
  std::vector<Fragment> vary_values(const Fragment& fragment, const std::string& context,
                                    std::size_t k) const override;
  std::vector<Fragment> suggest_types(const std::string& prompt,
                                      const std::vector<Fragment>& existing) const override;
  std::string compose(const std::string& base,
                      const std::vector<FragmentEdit>& edits) const override;
  std::string describe(const ImageAsset& asset) const override;
  std::string merge(const std::vector<std::string>& prompts) const override;
  std::string extract(const ImageAsset& asset, const std::optional<Rect>& region,
                      BrushMode mode) const override;
  std::vector<std::string> derive_variant_prompts(const std::string& prompt,
                                                  const Grounding& grounding,
                                                  const std::string& context,
                                                  std::size_t n) const override;
  std::string craft_brush_prompt(const std::string& source_prompt,
                                 const std::string& segment_description,
                                 const std::string& brush_prompt, BrushMode mode,
                                 double emphasis) const override;
  std::vector<Fragment> propose_fragments(const std::string& task, std::size_t k) const override;
  std::string variation_dimension(const std::string& prompt,
                                  const Grounding& grounding) const override;

  // Dimension a free-text request points at: an explicit keyword wins, then
  // content if the text names content, else style.
  std::string dominant_dimension(const std::string& text) const;

  const Lexicon& lexicon() const noexcept { return *lexicon_; }

 private:
  std::vector<std::string> successors(const std::string& ftype, const std::string& value,
                                      std::size_t k) const;

  std::shared_ptr<const Lexicon> lexicon_;
};

// Scene-based image model: "pixels" are a deterministic rendering of a
// SceneSpec derived from the prompt.
class MockImageAdapter final : public ImageAdapter {
 public:
  MockImageAdapter(std::shared_ptr<const Lexicon> lexicon, std::int32_t default_width = 512,
                   std::int32_t default_height = 512);

  ImageAsset generate(const GenerationRequest& request) const override;
  ImageAsset inpaint(const GenerationRequest& request) const override;
  Mask segment(const ImageAsset& asset, const std::vector<Point>& control_points) const override;

  // Inpaint rewrites objects whose rasterized area is at least this fraction
  // inside the mask.
  static constexpr double kRewriteOverlap = 0.5;
  // Reference style tags are copied when style_weight reaches this value.
  static constexpr double kStyleCopyWeight = 0.5;

 private:
  MockLanguageAdapter language_;
  std::int32_t default_width_;
  std::int32_t default_height_;
};

Adapters make_mock_adapters(std::shared_ptr<const Lexicon> lexicon = Lexicon::builtin(),
                            std::int32_t default_width = 512, std::int32_t default_height = 512);

}  // namespace icanvas
