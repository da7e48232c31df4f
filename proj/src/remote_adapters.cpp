#include "icanvas/remote_adapters.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "httplib.h"

namespace icanvas {

struct BuiltinPrompt {
  const char* file;
  const char* text;
};
extern const BuiltinPrompt kBuiltinPrompts[];
extern const std::size_t kBuiltinPromptCount;

namespace {

// "<operation>.v<N>.txt" → (operation, N)
std::optional<std::pair<std::string, int>> parse_template_name(const std::string& file) {
  static const std::regex re(R"(^([a-z_]+)\.v([0-9]+)\.txt$)");
  std::smatch m;
  if (!std::regex_match(file, m, re)) return std::nullopt;
  return std::pair{m[1].str(), std::stoi(m[2].str())};
}

}  // namespace

void PromptTemplates::set(const std::string& operation, int version, std::string text) {
  auto it = entries_.find(operation);
  if (it != entries_.end() && it->second.version > version) return;
  entries_[operation] = {version, std::move(text)};
}

const std::string& PromptTemplates::text(std::string_view operation) const {
  auto it = entries_.find(operation);
  if (it == entries_.end()) throw Error(Errc::schema_error, "no prompt template for " + std::string(operation));
  return it->second.text;
}

int PromptTemplates::version(std::string_view operation) const {
  auto it = entries_.find(operation);
  return it == entries_.end() ? 0 : it->second.version;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates out = builtin();
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto parsed = parse_template_name(entry.path().filename().string());
    if (!parsed) continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    out.set(parsed->first, parsed->second, ss.str());
  }
  return out;
}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates templates = [] {
    PromptTemplates t;
    for (std::size_t i = 0; i < kBuiltinPromptCount; ++i)
      if (auto parsed = parse_template_name(kBuiltinPrompts[i].file))
        t.set(parsed->first, parsed->second, kBuiltinPrompts[i].text);
    return t;
  }();
  return templates;
}

Errc classify_status(int status) noexcept {
  if (status == 401 || status == 403) return Errc::auth;
  if (status == 429) return Errc::rate_limit;
  if (status == 502 || status == 503 || status == 504) return Errc::network;
  return Errc::adapter_failure;
}

namespace {

struct Url {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (url.empty() || scheme == std::string::npos)
    throw Error(Errc::network, "endpoint URL not configured or missing scheme: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string join_path(const std::string& base, const std::string& suffix) {
  if (!base.empty() && base.back() == '/') return base.substr(0, base.size() - 1) + suffix;
  return base + suffix;
}

}  // namespace

json post_json(const std::string& url, const json& body, const std::string& token, std::int64_t timeout_ms) {
  const Url u = split_url(url);
  httplib::Client client(u.base);
  if (!client.is_valid()) throw Error(Errc::network, "cannot create client for " + u.base);
  const auto secs = static_cast<time_t>(timeout_ms / 1000);
  const auto usecs = static_cast<time_t>((timeout_ms % 1000) * 1000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  auto res = client.Post(u.path, headers, body.dump(), "application/json");
  if (!res) throw Error(Errc::network, url + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    std::string snippet = res->body.substr(0, 200);
    throw Error(classify_status(res->status), url + " returned HTTP " + std::to_string(res->status) + ": " + snippet);
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_response, url + " returned non-JSON body: " + e.what());
  }
}

json chat_content_json(const json& response) {
  try {
    const json& choices = response.at("choices");
    if (!choices.is_array() || choices.empty()) throw Error(Errc::malformed_response, "response has no choices");
    const json& content = choices.at(0).at("message").at("content");
    if (content.is_object()) return content;
    std::string text = content.get<std::string>();
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw Error(Errc::malformed_response, "message content holds no JSON object");
    json out = json::parse(text.substr(open, close - open + 1));
    if (!out.is_object()) throw Error(Errc::malformed_response, "message content is not a JSON object");
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_response, std::string("chat response: ") + e.what());
  }
}

namespace {

std::string png_b64(std::int32_t w, std::int32_t h, const Raster& rgba) {
  const auto png = encode_png(w, h, rgba);
  return base64_encode(png);
}

// Webui images may come back prefixed as data URLs.
std::string strip_data_url(std::string_view s) {
  const auto comma = s.find(',');
  if (s.substr(0, 5) == "data:" && comma != std::string_view::npos) return std::string(s.substr(comma + 1));
  return std::string(s);
}

Raster resize_nearest(const Raster& src, std::int32_t sw, std::int32_t sh, std::int32_t dw, std::int32_t dh) {
  if (sw == dw && sh == dh) return src;
  Raster out(static_cast<std::size_t>(dw) * dh * 4);
  for (std::int32_t y = 0; y < dh; ++y) {
    const std::int32_t sy = static_cast<std::int32_t>(std::int64_t{y} * sh / dh);
    for (std::int32_t x = 0; x < dw; ++x) {
      const std::int32_t sx = static_cast<std::int32_t>(std::int64_t{x} * sw / dw);
      std::copy_n(&src[(static_cast<std::size_t>(sy) * sw + sx) * 4], 4, &out[(static_cast<std::size_t>(y) * dw + x) * 4]);
    }
  }
  return out;
}

std::string str_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw Error(Errc::malformed_response, std::string("missing string field \"") + key + "\"");
  return j.at(key).get<std::string>();
}

std::vector<Fragment> fragments_field(const json& j, FragmentOrigin origin, std::size_t cap) {
  if (!j.contains("fragments") || !j.at("fragments").is_array())
    throw Error(Errc::malformed_response, "missing array field \"fragments\"");
  std::vector<Fragment> out;
  for (const auto& f : j.at("fragments")) {
    if (!f.is_object()) continue;
    const json* type = f.contains("type") ? &f.at("type") : f.contains("ftype") ? &f.at("ftype") : nullptr;
    if (!type || !type->is_string() || !f.contains("value") || !f.at("value").is_string()) continue;
    if (canonical_text(type->get<std::string>()).empty() || canonical_text(f.at("value").get<std::string>()).empty())
      continue;
    Fragment frag(type->get<std::string>(), f.at("value").get<std::string>(), origin);
    if (std::none_of(out.begin(), out.end(), [&](const Fragment& o) { return o.same_pair(frag); }))
      out.push_back(std::move(frag));
  }
  sort_canonical(out);
  if (out.size() > cap) out.resize(cap);
  return out;
}

json fragments_json(const std::vector<Fragment>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back({{"type", f.ftype}, {"value", f.value}});
  return out;
}

json grounding_input(const Grounding& g) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GroundNone>) return nullptr;
        else if constexpr (std::is_same_v<T, GroundAsset>) return {{"kind", "image"}};
        else if constexpr (std::is_same_v<T, GroundFragment>)
          return {{"kind", "fragment"}, {"type", v.fragment.ftype}, {"value", v.fragment.value}};
        else return {{"kind", "text"}, {"prompt", v.prompt}};
      },
      g);
}

}  // namespace

std::string asset_to_png_b64(const ImageAsset& asset) { return png_b64(asset.width, asset.height, asset.pixels()); }

std::string mask_to_png_b64(const Mask& mask) {
  Raster rgba(static_cast<std::size_t>(mask.pixel_count()) * 4, 0);
  for (std::int32_t y = 0; y < mask.height(); ++y)
    for (std::int32_t x = 0; x < mask.width(); ++x) {
      auto* p = &rgba[(static_cast<std::size_t>(y) * mask.width() + x) * 4];
      const std::uint8_t v = mask.test(x, y) ? 255 : 0;
      p[0] = p[1] = p[2] = v;
      p[3] = 255;
    }
  return png_b64(mask.width(), mask.height(), rgba);
}

Mask mask_from_png_b64(std::string_view b64) {
  const auto bytes = base64_decode(strip_data_url(b64));
  const DecodedImage img = decode_png(bytes);
  Mask m(img.width, img.height);
  for (std::int32_t y = 0; y < img.height; ++y)
    for (std::int32_t x = 0; x < img.width; ++x) {
      const auto* p = &img.rgba[(static_cast<std::size_t>(y) * img.width + x) * 4];
      if (p[0] || p[1] || p[2]) m.set(x, y);
    }
  return m;
}

std::string weighted_prompt(const std::string& prompt, double emphasis) {
  if (std::abs(emphasis - 1.0) < 1e-9 || prompt.empty()) return prompt;
  std::ostringstream os;
  os.precision(3);
  os << '(' << prompt << ':' << emphasis << ')';
  return os.str();
}

// --- language -------------------------------------------------------------

RemoteLanguageAdapter::RemoteLanguageAdapter(RemoteOptions options) : options_(std::move(options)) {}

json RemoteLanguageAdapter::call(std::string_view operation, const json& input, const ImageAsset* image) const {
  json user;
  if (image) {
    user = json::array({{{"type", "text"}, {"text", input.dump()}},
                        {{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + asset_to_png_b64(*image)}}}}});
  } else {
    user = input.dump();
  }
  const json body = {{"model", options_.language_model},
                     {"temperature", 0},
                     {"response_format", {{"type", "json_object"}}},
                     {"messages", json::array({{{"role", "system"}, {"content", options_.prompts.text(operation)}},
                                               {{"role", "user"}, {"content", user}}})}};
  return chat_content_json(post_json(options_.language_url, body, options_.token, options_.timeout_ms));
}

std::vector<Fragment> RemoteLanguageAdapter::decompose(const std::string& prompt) const {
  return fragments_field(call("decompose", {{"prompt", prompt}}), FragmentOrigin::decomposed, 16);
}

std::vector<Fragment> RemoteLanguageAdapter::vary_values(const Fragment& fragment, const std::string& context,
                                                         std::size_t k) const {
  const json out = call("vary_values", {{"type", fragment.ftype}, {"value", fragment.value}, {"context", context}, {"k", k}});
  if (!out.contains("values") || !out.at("values").is_array())
    throw Error(Errc::malformed_response, "missing array field \"values\"");
  std::vector<Fragment> res;
  for (const auto& v : out.at("values")) {
    if (!v.is_string() || canonical_text(v.get<std::string>()).empty()) continue;
    Fragment f(fragment.ftype, v.get<std::string>(), FragmentOrigin::suggested);
    if (f.same_pair(fragment)) continue;
    if (std::any_of(res.begin(), res.end(), [&](const Fragment& o) { return o.same_pair(f); })) continue;
    res.push_back(std::move(f));
    if (res.size() == k) break;
  }
  return res;
}

std::vector<Fragment> RemoteLanguageAdapter::suggest_types(const std::string& prompt,
                                                           const std::vector<Fragment>& existing) const {
  auto res = fragments_field(call("suggest_types", {{"prompt", prompt}, {"existing", fragments_json(existing)}}),
                             FragmentOrigin::suggested, 16);
  std::erase_if(res, [&](const Fragment& f) {
    return std::any_of(existing.begin(), existing.end(), [&](const Fragment& e) { return e.ftype == f.ftype; });
  });
  return res;
}

std::string RemoteLanguageAdapter::compose(const std::string& base, const std::vector<FragmentEdit>& edits) const {
  json list = json::array();
  for (const auto& e : edits) list.push_back(to_json(e));
  return str_field(call("compose", {{"base", base}, {"edits", list}}), "prompt");
}

std::string RemoteLanguageAdapter::describe(const ImageAsset& asset) const {
  return str_field(call("describe", json::object(), &asset), "prompt");
}

std::string RemoteLanguageAdapter::merge(const std::vector<std::string>& prompts) const {
  return str_field(call("merge", {{"prompts", prompts}}), "prompt");
}

std::string RemoteLanguageAdapter::extract(const ImageAsset& asset, const std::optional<Rect>& region,
                                           BrushMode mode) const {
  json input = {{"mode", std::string(to_string(mode))}, {"region", nullptr}};
  if (region) input["region"] = to_json(*region);
  const std::string out = str_field(call("extract", input, &asset), "prompt");
  if (canonical_text(out).empty()) throw Error(Errc::extraction_empty, "model extracted nothing from the region");
  return out;
}

std::vector<std::string> RemoteLanguageAdapter::derive_variant_prompts(const std::string& prompt,
                                                                       const Grounding& grounding,
                                                                       const std::string& context,
                                                                       std::size_t n) const {
  const json out = call("derive_variant_prompts",
                        {{"prompt", prompt}, {"grounding", grounding_input(grounding)}, {"context", context}, {"n", n}});
  if (!out.contains("prompts") || !out.at("prompts").is_array())
    throw Error(Errc::malformed_response, "missing array field \"prompts\"");
  std::vector<std::string> res;
  for (const auto& p : out.at("prompts")) {
    if (!p.is_string()) continue;
    std::string s = canonical_text(p.get<std::string>());
    if (!s.empty() && std::find(res.begin(), res.end(), s) == res.end()) res.push_back(std::move(s));
    if (res.size() == n) break;
  }
  if (res.size() < n)
    throw Error(Errc::malformed_response,
                "expected " + std::to_string(n) + " distinct prompts, got " + std::to_string(res.size()));
  return res;
}

std::string RemoteLanguageAdapter::craft_brush_prompt(const std::string& source_prompt,
                                                      const std::string& segment_description,
                                                      const std::string& brush_prompt, BrushMode mode,
                                                      double emphasis) const {
  return str_field(call("craft_brush_prompt", {{"source_prompt", source_prompt},
                                               {"segment", segment_description},
                                               {"brush_prompt", brush_prompt},
                                               {"mode", std::string(to_string(mode))},
                                               {"emphasis", emphasis}}),
                   "prompt");
}

std::vector<Fragment> RemoteLanguageAdapter::propose_fragments(const std::string& task, std::size_t k) const {
  return fragments_field(call("propose_fragments", {{"task", task}, {"k", k}}), FragmentOrigin::suggested, k);
}

std::string RemoteLanguageAdapter::variation_dimension(const std::string& prompt, const Grounding& grounding) const {
  return canonical_text(
      str_field(call("variation_dimension", {{"prompt", prompt}, {"grounding", grounding_input(grounding)}}), "type"));
}

// --- image ----------------------------------------------------------------

namespace {

// Control models the webui ControlNet extension knows by these names.
struct ControlUnit {
  const char* module;
  const char* model;
  bool content;  // weight from content_weight, else style_weight
};
constexpr ControlUnit kUnits[] = {
    {"depth_midas", "control_v11f1p_sd15_depth", true},
    {"canny", "control_v11p_sd15_canny", true},
    {"scribble_pidinet", "control_v11p_sd15_scribble", true},
    {"reference_only", "None", false},
};

json controlnet_units(const GenerationRequest& r) {
  json args = json::array();
  if (r.references.empty()) return args;
  const std::string image = asset_to_png_b64(*r.references.front());
  for (const auto& u : kUnits) {
    const double w = u.content ? r.controls.content_weight : r.controls.style_weight;
    if (w <= 0) continue;
    args.push_back({{"enabled", true},
                    {"module", u.module},
                    {"model", u.model},
                    {"weight", w},
                    {"image", image},
                    {"pixel_perfect", true}});
  }
  return args;
}

std::int64_t webui_seed(std::uint64_t seed) { return static_cast<std::int64_t>(seed & 0x7fffffffULL); }

}  // namespace

RemoteImageAdapter::RemoteImageAdapter(RemoteOptions options) : options_(std::move(options)) {}

json RemoteImageAdapter::txt2img_body(const GenerationRequest& r) const {
  json body = {{"prompt", weighted_prompt(r.prompt, r.controls.emphasis_weight)},
               {"seed", webui_seed(r.seed)},
               {"width", r.width > 0 ? r.width : options_.default_width},
               {"height", r.height > 0 ? r.height : options_.default_height},
               {"cfg_scale", r.controls.guidance},
               {"steps", options_.steps},
               {"batch_size", 1}};
  json units = controlnet_units(r);
  if (!units.empty()) body["alwayson_scripts"] = {{"controlnet", {{"args", units}}}};
  return body;
}

json RemoteImageAdapter::img2img_body(const GenerationRequest& r) const {
  if (r.references.empty()) throw Error(Errc::invalid_request, "img2img needs a reference image");
  const ImageAsset& init = *r.references.front();
  json body = txt2img_body(r);
  body["width"] = init.width;
  body["height"] = init.height;
  body["init_images"] = json::array({asset_to_png_b64(init)});
  body["denoising_strength"] = r.controls.denoise_strength;
  if (r.mask) {
    body["mask"] = mask_to_png_b64(*r.mask);
    body["inpainting_fill"] = r.controls.op_kind == OpKind::outpaint ? 2 : 1;
    body["inpaint_full_res"] = false;
    body["inpainting_mask_invert"] = 0;
    body["mask_blur"] = 4;
  }
  return body;
}

ImageAsset RemoteImageAdapter::decode_result(const json& response, std::int32_t width, std::int32_t height) const {
  if (!response.contains("images") || !response.at("images").is_array() || response.at("images").empty() ||
      !response.at("images").at(0).is_string())
    throw Error(Errc::malformed_response, "response has no images");
  DecodedImage img;
  try {
    img = decode_png(base64_decode(strip_data_url(response.at("images").at(0).get<std::string>())));
  } catch (const Error& e) {
    throw Error(Errc::malformed_response, std::string("image payload: ") + e.what());
  }
  Raster raster = resize_nearest(img.rgba, img.width, img.height, width, height);
  return make_asset(width, height, std::move(raster), std::nullopt, std::nullopt);
}

ImageAsset RemoteImageAdapter::generate(const GenerationRequest& r) const {
  r.validate();
  if (r.controls.op_kind == OpKind::txt2img) {
    const json body = txt2img_body(r);
    const json res = post_json(join_path(options_.image_url, "/sdapi/v1/txt2img"), body, options_.token,
                               options_.timeout_ms);
    return decode_result(res, body.at("width").get<std::int32_t>(), body.at("height").get<std::int32_t>());
  }
  const json body = img2img_body(r);
  const json res =
      post_json(join_path(options_.image_url, "/sdapi/v1/img2img"), body, options_.token, options_.timeout_ms);
  return decode_result(res, body.at("width").get<std::int32_t>(), body.at("height").get<std::int32_t>());
}

ImageAsset RemoteImageAdapter::inpaint(const GenerationRequest& r) const {
  r.validate();
  if (!r.mask) throw Error(Errc::mask_mismatch, "inpaint needs a mask");
  return generate(r);
}

Mask RemoteImageAdapter::segment(const ImageAsset& asset, const std::vector<Point>& points) const {
  json pts = json::array();
  for (const auto& p : points) pts.push_back({p.x, p.y});
  const json body = {{"input_image", asset_to_png_b64(asset)},
                     {"sam_positive_points", pts},
                     {"sam_negative_points", json::array()},
                     {"sam_model_name", "sam_vit_h_4b8939.pth"}};
  const std::string url = options_.segment_url.empty() ? join_path(options_.image_url, "/sam/sam-predict")
                                                       : options_.segment_url;
  const json res = post_json(url, body, options_.token, options_.timeout_ms);
  if (!res.contains("masks") || !res.at("masks").is_array() || res.at("masks").empty() ||
      !res.at("masks").at(0).is_string())
    throw Error(Errc::malformed_response, "segmentation response has no masks");
  Mask m;
  try {
    m = mask_from_png_b64(res.at("masks").at(0).get<std::string>());
  } catch (const Error& e) {
    throw Error(Errc::malformed_response, std::string("mask payload: ") + e.what());
  }
  if (m.width() != asset.width || m.height() != asset.height) {
    Mask scaled(asset.width, asset.height);
    for (std::int32_t y = 0; y < asset.height; ++y)
      for (std::int32_t x = 0; x < asset.width; ++x)
        if (m.test(static_cast<std::int32_t>(std::int64_t{x} * m.width() / asset.width),
                   static_cast<std::int32_t>(std::int64_t{y} * m.height() / asset.height)))
          scaled.set(x, y);
    m = std::move(scaled);
  }
  if (m.count() == 0) throw Error(Errc::segmentation_empty, "segmentation returned an empty mask");
  return m;
}

Adapters make_remote_adapters(RemoteOptions options) {
  Adapters a;
  a.language = std::make_shared<RemoteLanguageAdapter>(options);
  a.image = std::make_shared<RemoteImageAdapter>(options);
  a.id = "remote:" + options.language_model + "+sd-webui";
  return a;
}

}  // namespace icanvas
