#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "icanvas/adapters.hpp"
#include "icanvas/codec.hpp"
#include "icanvas/engine.hpp"

namespace icanvas {

struct RemoteConfig {
  // Chat-completions endpoint, e.g. https://api.example.com/v1/chat/completions
  std::string language_url;
  std::string language_model = "gpt-4o";
  // stable-diffusion-webui base URL, e.g. http://127.0.0.1:7860
  std::string image_url;
  // Segmentation endpoint (segment-anything extension shape).
  std::string segment_url;
  // Name of the environment variable holding the bearer token.
  std::string token_env = "ICANVAS_API_TOKEN";
  std::filesystem::path prompts_dir = "data/prompts";
  std::int64_t timeout_ms = 120000;
};

struct Config {
  std::string adapter = "mock";  // mock | remote
  EngineConfig engine;
  std::int32_t default_width = 512;
  std::int32_t default_height = 512;
  // Empty means the built-in lexicon.
  std::filesystem::path lexicon;
  std::string host = "127.0.0.1";
  int port = 7411;       // command/event channel
  int http_port = 7412;  // asset route
  // Shared secret clients must send as {"cmd":"hello","token":...}; empty disables.
  std::string channel_token;
  RemoteConfig remote;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// Unknown keys are rejected so typos do not silently fall back to defaults.
Config config_from_json(const json& j);
// ICANVAS_<KEY> variables override file values.
void apply_env(Config& config, const EnvLookup& env = process_env);
// Reads path when given, then applies the environment.
Config load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env = process_env);

Adapters make_adapters(const Config& config, const EnvLookup& env = process_env);
Engine make_engine(const Config& config, const EnvLookup& env = process_env);

}  // namespace icanvas
