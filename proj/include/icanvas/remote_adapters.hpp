#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "icanvas/adapters.hpp"
#include "icanvas/codec.hpp"

namespace icanvas {

// System prompts for the remote language model, one per operation. Files are
// named "<operation>.v<N>.txt"; the highest version of each operation wins.
class PromptTemplates {
 public:
  static PromptTemplates load(const std::filesystem::path& dir);
  // Templates compiled in from data/prompts.
  static const PromptTemplates& builtin();

  void set(const std::string& operation, int version, std::string text);
  // Throws schema_error when the operation has no template.
  const std::string& text(std::string_view operation) const;
  int version(std::string_view operation) const;
  bool empty() const noexcept { return entries_.empty(); }

 private:
  struct Entry {
    int version = 0;
    std::string text;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

struct RemoteOptions {
  std::string language_url;
  std::string language_model = "gpt-4o";
  std::string image_url;
  std::string segment_url;
  std::string token;
  PromptTemplates prompts = PromptTemplates::builtin();
  std::int64_t timeout_ms = 120000;
  std::int32_t default_width = 512;
  std::int32_t default_height = 512;
  int steps = 25;
};

// Maps a non-2xx HTTP status onto the adapter error taxonomy.
Errc classify_status(int status) noexcept;

// POSTs JSON and returns the parsed body. Transport failures throw network,
// statuses go through classify_status, unparseable bodies throw
// malformed_response.
json post_json(const std::string& url, const json& body, const std::string& token, std::int64_t timeout_ms);

// Pulls the JSON object out of a chat-completions response, tolerating code
// fences around it and unknown fields beside it.
json chat_content_json(const json& response);

// Chat-completions language model. Each operation sends its template as the
// system message and its inputs as a JSON user message, and expects a JSON
// object back.
class RemoteLanguageAdapter final : public LanguageAdapter {
 public:
  explicit RemoteLanguageAdapter(RemoteOptions options);

  std::vector<Fragment> decompose(const std::string& prompt) const override;
  std::vector<Fragment> vary_values(const Fragment& fragment, const std::string& context,
                                    std::size_t k) const override;
  std::vector<Fragment> suggest_types(const std::string& prompt,
                                      const std::vector<Fragment>& existing) const override;
  std::string compose(const std::string& base, const std::vector<FragmentEdit>& edits) const override;
  std::string describe(const ImageAsset& asset) const override;
  std::string merge(const std::vector<std::string>& prompts) const override;
  std::string extract(const ImageAsset& asset, const std::optional<Rect>& region,
                      BrushMode mode) const override;
  std::vector<std::string> derive_variant_prompts(const std::string& prompt, const Grounding& grounding,
                                                  const std::string& context, std::size_t n) const override;
  std::string craft_brush_prompt(const std::string& source_prompt, const std::string& segment_description,
                                 const std::string& brush_prompt, BrushMode mode,
                                 double emphasis) const override;
  std::vector<Fragment> propose_fragments(const std::string& task, std::size_t k) const override;
  std::string variation_dimension(const std::string& prompt, const Grounding& grounding) const override;

  // One round trip: template for operation + input → parsed JSON object.
  json call(std::string_view operation, const json& input, const ImageAsset* image = nullptr) const;

 private:
  RemoteOptions options_;
};

// stable-diffusion-webui API: /sdapi/v1/txt2img and /sdapi/v1/img2img with
// ControlNet units, plus a segment-anything endpoint for masks.
class RemoteImageAdapter final : public ImageAdapter {
 public:
  explicit RemoteImageAdapter(RemoteOptions options);

  ImageAsset generate(const GenerationRequest& request) const override;
  ImageAsset inpaint(const GenerationRequest& request) const override;
  Mask segment(const ImageAsset& asset, const std::vector<Point>& control_points) const override;

  // Request bodies, exposed for tests.
  json txt2img_body(const GenerationRequest& request) const;
  json img2img_body(const GenerationRequest& request) const;

 private:
  ImageAsset decode_result(const json& response, std::int32_t width, std::int32_t height) const;

  RemoteOptions options_;
};

// Prompt-weight syntax for emphasis: "(text:1.5)"; weight 1 leaves text as is.
std::string weighted_prompt(const std::string& prompt, double emphasis);

// Mask as a black/white PNG, base64 encoded, and back. Any non-zero channel
// marks a set pixel.
std::string mask_to_png_b64(const Mask& mask);
Mask mask_from_png_b64(std::string_view b64);
std::string asset_to_png_b64(const ImageAsset& asset);

Adapters make_remote_adapters(RemoteOptions options);

}  // namespace icanvas
