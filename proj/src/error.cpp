#include "icanvas/error.hpp"

namespace icanvas {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_rect: return "invalid-rect";
    case Errc::malformed_payload: return "malformed-payload";
    case Errc::unknown_id: return "unknown-id";
    case Errc::unsupported_pair: return "unsupported-pair";
    case Errc::dangling_asset: return "dangling-asset";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::corrupt_payload: return "corrupt-payload";
    case Errc::empty_prompt: return "empty-prompt";
    case Errc::adapter_failure: return "adapter-failure";
    case Errc::no_more_types: return "no-more-types";
    case Errc::remove_of_absent_fragment: return "remove-of-absent-fragment";
    case Errc::replace_type_mismatch: return "replace-type-mismatch";
    case Errc::scheduler_rejected: return "scheduler-rejected";
    case Errc::blank_lens_no_prompt: return "blank-lens-no-prompt";
    case Errc::unresolvable_source: return "unresolvable-source";
    case Errc::empty_container: return "empty-container";
    case Errc::empty_cell: return "empty-cell";
    case Errc::bad_index: return "bad-index";
    case Errc::unfilled_brush: return "unfilled-brush";
    case Errc::segmentation_empty: return "segmentation-empty";
    case Errc::unknown_target: return "unknown-target";
    case Errc::unknown_asset: return "unknown-asset";
    case Errc::extraction_empty: return "extraction-empty";
    case Errc::degenerate_stroke: return "degenerate-stroke";
    case Errc::unsupported_kind: return "unsupported-kind";
    case Errc::shutdown: return "shutdown";
    case Errc::invalid_request: return "invalid-request";
    case Errc::no_scene: return "no-scene";
    case Errc::mask_mismatch: return "mask-mismatch";
    case Errc::network: return "network";
    case Errc::auth: return "auth";
    case Errc::rate_limit: return "rate-limit";
    case Errc::malformed_response: return "malformed-response";
    case Errc::schema_error: return "schema-error";
    case Errc::unknown_command: return "unknown-command";
    case Errc::script_parse_error: return "script-parse-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

Errc errc_from(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::io_error); ++i)
    if (to_string(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
  return Errc::adapter_failure;
}

}  // namespace icanvas
