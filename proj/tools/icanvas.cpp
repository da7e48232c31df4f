#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "icanvas/codec.hpp"
#include "icanvas/config.hpp"
#include "icanvas/server.hpp"
#include "icanvas/session.hpp"

using namespace icanvas;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

int serve(const Config& config, const std::string& load) {
  Engine engine = make_engine(config);
  if (!load.empty()) engine.replace_document(load_document(load));
  SessionOptions so;
  so.clock = SessionOptions::Clock::real_time;
  so.execution = SessionOptions::Execution::threaded;
  so.workers = config.engine.max_inflight;
  Session session(std::move(engine), so);
  session.start();

  ServerOptions opts;
  opts.host = config.host;
  opts.port = config.port;
  opts.http_port = config.http_port;
  opts.token = config.channel_token;
  Server server(session, opts);
  server.start();
  std::cerr << "icanvas: adapter " << config.adapter << ", channel " << config.host << ":" << server.port()
            << ", assets http://" << config.host << ":" << server.http_port() << "/assets/<hash>\n";

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  std::cerr << "icanvas: shutting down\n";
  server.stop();
  session.stop();
  return 0;
}

int run(const Config& config, const std::string& script, const std::string& out, const std::string& save) {
  Transcript t = run_script_file(script, make_engine(config));
  if (!save.empty()) save_document(t.document, save);
  const std::string text = t.dump();
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!(f << text)) throw Error(Errc::io_error, "cannot write " + out);
  }
  return 0;
}

std::string body_summary(const Element& e) {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ImageBody>) return b.prompt + (b.asset ? "  [" + *b.asset + "]" : "");
        else if constexpr (std::is_same_v<T, FragmentBody>) return "[" + b.fragment.ftype + ", " + b.fragment.value + "]";
        else if constexpr (std::is_same_v<T, LensBody>)
          return b.prompt + (b.last_result ? "  [" + *b.last_result + "]" : "");
        else if constexpr (std::is_same_v<T, ContainerBody>)
          return b.prompt + (b.generated ? "  (generated)" : "");
        else if constexpr (std::is_same_v<T, BrushBody>) return b.prompt + "  (" + std::string(to_string(b.mode)) + ")";
        else return b.title + "  (" + std::to_string(b.items.size()) + " items)";
      },
      e.body);
}

int dump(const std::string& path, bool as_json) {
  const CanvasDocument doc = load_document(path);
  if (as_json) {
    std::cout << document_to_json(doc).dump(2) << "\n";
    return 0;
  }
  std::cout << "revision " << doc.revision() << ", " << doc.elements().size() << " elements, "
            << doc.assets().size() << " assets, " << doc.history().size() << " history entries\n";
  for (const auto& id : doc.z_order()) {
    const Element& e = doc.element(id);
    std::cout << "  " << e.id << "  " << to_string(e.kind()) << "  z=" << e.z << "  " << e.rect.x << "," << e.rect.y
              << " " << e.rect.w << "x" << e.rect.h << "  " << body_summary(e) << "\n";
  }
  for (const auto& h : doc.history())
    std::cout << "  #" << h.seq << "  " << h.element_id << "  " << h.cause << "  t=" << h.timestamp << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative canvas runtime: host a session, run scripts, inspect documents."};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "JSON config file (ICANVAS_* variables override it)");

  auto* serve_cmd = app.add_subcommand("serve", "Host a session over the line-delimited JSON channel");
  std::string load;
  serve_cmd->add_option("--load", load, "Document to open");

  auto* run_cmd = app.add_subcommand("run", "Run a command script headlessly on a virtual clock");
  std::string script, out, save;
  run_cmd->add_option("script", script, "Script file (JSON array or one command per line)")->required();
  run_cmd->add_option("-o,--out", out, "Write the transcript here instead of stdout");
  run_cmd->add_option("--save", save, "Also save the final document here");

  auto* dump_cmd = app.add_subcommand("dump", "Print a saved document");
  std::string doc_path;
  bool as_json = false;
  dump_cmd->add_option("doc", doc_path, "Document file")->required();
  dump_cmd->add_flag("--json", as_json, "Print the canonical JSON instead of a summary");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*dump_cmd) return dump(doc_path, as_json);
    const Config config = load_config(opt_path(config_path));
    if (*serve_cmd) return serve(config, load);
    return run(config, script, out, save);
  } catch (const Error& e) {
    std::cerr << "icanvas: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "icanvas: " << e.what() << "\n";
    return 1;
  }
}
