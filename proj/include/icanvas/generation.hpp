#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icanvas/fragment.hpp"
#include "icanvas/geometry.hpp"

namespace icanvas {

struct ImageAsset;

enum class OpKind { txt2img, img2img, inpaint, outpaint };

std::string_view to_string(OpKind kind) noexcept;
OpKind op_kind_from(std::string_view text);

// Adapter-agnostic knobs. Ranges are enforced by make(); a default-constructed
// value is a valid txt2img request.
struct GenerationControls {
  double content_weight = 0.5;
  double style_weight = 0.5;
  double denoise_strength = 0.75;
  double guidance = 7.0;
  double emphasis_weight = 1.0;
  OpKind op_kind = OpKind::txt2img;

  static GenerationControls make(double content_weight, double style_weight,
                                 double denoise_strength, double guidance,
                                 double emphasis_weight, OpKind op_kind);
  void validate() const;

  friend bool operator==(const GenerationControls&, const GenerationControls&) = default;
};

// Brush mode weights: style leans on the reference model, content on structure.
GenerationControls style_controls(OpKind op);
GenerationControls content_controls(OpKind op);

struct Provenance {
  std::string prompt;
  std::vector<Fragment> fragments;
  std::vector<std::string> parents;
  std::uint64_t seed = 0;
  GenerationControls controls;
  std::string adapter_id;
  std::int64_t created_at = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct GenerationRequest {
  std::string prompt;
  // Resolved references; adapters never read the document.
  std::vector<std::shared_ptr<const ImageAsset>> references;
  std::optional<Mask> mask;
  GenerationControls controls;
  std::uint64_t seed = 0;
  // Output size for txt2img; 0 means the adapter default.
  std::int32_t width = 0;
  std::int32_t height = 0;

  std::vector<std::string> reference_ids() const;
  // Throws invalid_request on range or mask-dimension violations.
  void validate() const;
};

}  // namespace icanvas
