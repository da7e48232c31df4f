#include "icanvas/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "icanvas/remote_adapters.hpp"

namespace icanvas {

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error(Errc::schema_error, "unknown config key " + where + key);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::schema_error, std::string("config key ") + key + ": " + e.what());
  }
}

std::int64_t parse_int(const std::string& name, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::schema_error, name + " is not an integer: " + text);
  }
}

void check(const Config& c) {
  if (c.adapter != "mock" && c.adapter != "remote")
    throw Error(Errc::schema_error, "adapter must be mock or remote, got " + c.adapter);
  if (c.engine.idle_window_ms < 0 || c.engine.edit_window_ms < 0)
    throw Error(Errc::schema_error, "debounce windows must be non-negative");
  if (c.engine.max_inflight == 0) throw Error(Errc::schema_error, "max_inflight must be positive");
  if (c.default_width <= 0 || c.default_height <= 0)
    throw Error(Errc::schema_error, "default image size must be positive");
}

}  // namespace

Config config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::schema_error, "config must be a JSON object");
  reject_unknown(j,
                 {"adapter", "idle_window_ms", "edit_window_ms", "max_inflight", "base_seed", "max_fragments",
                  "default_width", "default_height", "lexicon", "host", "port", "http_port", "channel_token",
                  "remote"},
                 "");
  Config c;
  read(j, "adapter", c.adapter);
  read(j, "idle_window_ms", c.engine.idle_window_ms);
  read(j, "edit_window_ms", c.engine.edit_window_ms);
  read(j, "max_inflight", c.engine.max_inflight);
  read(j, "base_seed", c.engine.base_seed);
  read(j, "max_fragments", c.engine.max_fragments);
  read(j, "default_width", c.default_width);
  read(j, "default_height", c.default_height);
  std::string lexicon;
  read(j, "lexicon", lexicon);
  c.lexicon = lexicon;
  read(j, "host", c.host);
  read(j, "port", c.port);
  read(j, "http_port", c.http_port);
  read(j, "channel_token", c.channel_token);
  if (j.contains("remote")) {
    const json& r = j.at("remote");
    if (!r.is_object()) throw Error(Errc::schema_error, "remote must be an object");
    reject_unknown(r,
                   {"language_url", "language_model", "image_url", "segment_url", "token_env", "prompts_dir",
                    "timeout_ms"},
                   "remote.");
    read(r, "language_url", c.remote.language_url);
    read(r, "language_model", c.remote.language_model);
    read(r, "image_url", c.remote.image_url);
    read(r, "segment_url", c.remote.segment_url);
    read(r, "token_env", c.remote.token_env);
    std::string dir = c.remote.prompts_dir.string();
    read(r, "prompts_dir", dir);
    c.remote.prompts_dir = dir;
    read(r, "timeout_ms", c.remote.timeout_ms);
  }
  check(c);
  return c;
}

void apply_env(Config& c, const EnvLookup& env) {
  auto str = [&](const char* name, std::string& out) {
    if (auto v = env(name)) out = *v;
  };
  auto num = [&](const char* name, auto& out) {
    if (auto v = env(name)) out = static_cast<std::remove_reference_t<decltype(out)>>(parse_int(name, *v));
  };
  str("ICANVAS_ADAPTER", c.adapter);
  num("ICANVAS_IDLE_WINDOW_MS", c.engine.idle_window_ms);
  num("ICANVAS_EDIT_WINDOW_MS", c.engine.edit_window_ms);
  num("ICANVAS_MAX_INFLIGHT", c.engine.max_inflight);
  num("ICANVAS_BASE_SEED", c.engine.base_seed);
  num("ICANVAS_DEFAULT_WIDTH", c.default_width);
  num("ICANVAS_DEFAULT_HEIGHT", c.default_height);
  if (auto v = env("ICANVAS_LEXICON")) c.lexicon = *v;
  str("ICANVAS_HOST", c.host);
  num("ICANVAS_PORT", c.port);
  num("ICANVAS_HTTP_PORT", c.http_port);
  str("ICANVAS_CHANNEL_TOKEN", c.channel_token);
  str("ICANVAS_LANGUAGE_URL", c.remote.language_url);
  str("ICANVAS_LANGUAGE_MODEL", c.remote.language_model);
  str("ICANVAS_IMAGE_URL", c.remote.image_url);
  str("ICANVAS_SEGMENT_URL", c.remote.segment_url);
  if (auto v = env("ICANVAS_PROMPTS_DIR")) c.remote.prompts_dir = *v;
  check(c);
}

Config load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  Config c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(Errc::io_error, "cannot read config " + path->string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
      j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      throw Error(Errc::schema_error, "config " + path->string() + ": " + e.what());
    }
    c = config_from_json(j);
  }
  apply_env(c, env);
  return c;
}

Adapters make_adapters(const Config& c, const EnvLookup& env) {
  auto lexicon = c.lexicon.empty() ? Lexicon::builtin()
                                   : std::make_shared<const Lexicon>(Lexicon::load(c.lexicon));
  if (c.adapter == "mock") return make_mock_adapters(lexicon, c.default_width, c.default_height);
  RemoteOptions opts;
  opts.language_url = c.remote.language_url;
  opts.language_model = c.remote.language_model;
  opts.image_url = c.remote.image_url;
  opts.segment_url = c.remote.segment_url;
  opts.token = env(c.remote.token_env).value_or("");
  opts.prompts = PromptTemplates::load(c.remote.prompts_dir);
  opts.timeout_ms = c.remote.timeout_ms;
  opts.default_width = c.default_width;
  opts.default_height = c.default_height;
  return make_remote_adapters(opts);
}

Engine make_engine(const Config& c, const EnvLookup& env) { return Engine(make_adapters(c, env), c.engine); }

}  // namespace icanvas
