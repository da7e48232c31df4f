#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icanvas {

// Every failure the runtime reports maps onto one of these codes. The string
// form (kebab-case) is what appears on the wire in error events.
enum class Errc {
  invalid_rect,
  malformed_payload,
  unknown_id,
  unsupported_pair,
  dangling_asset,
  version_mismatch,
  corrupt_payload,
  empty_prompt,
  adapter_failure,
  no_more_types,
  remove_of_absent_fragment,
  replace_type_mismatch,
  scheduler_rejected,
  blank_lens_no_prompt,
  unresolvable_source,
  empty_container,
  empty_cell,
  bad_index,
  unfilled_brush,
  segmentation_empty,
  unknown_target,
  unknown_asset,
  extraction_empty,
  degenerate_stroke,
  unsupported_kind,
  shutdown,
  invalid_request,
  no_scene,
  mask_mismatch,
  network,
  auth,
  rate_limit,
  malformed_response,
  schema_error,
  unknown_command,
  script_parse_error,
  io_error,
};

std::string_view to_string(Errc code) noexcept;
// Inverse of to_string; unknown names map to adapter_failure.
Errc errc_from(std::string_view name) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  explicit Error(Errc code) : Error(code, std::string(to_string(code))) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace icanvas
