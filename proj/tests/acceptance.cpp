// Runs every acceptance criterion at its stated size and time limit and
// prints one PASS/FAIL line per criterion. Exit status is non-zero if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "icanvas/brush.hpp"
#include "icanvas/config.hpp"
#include "icanvas/container.hpp"
#include "icanvas/fragments.hpp"
#include "icanvas/lens.hpp"
#include "icanvas/session.hpp"
#include "random_doc.hpp"

using namespace icanvas;
namespace fs = std::filesystem;

namespace {

constexpr std::int32_t kDim = 64;

// Thrown by checks; the message becomes the FAIL detail.
struct Failed {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

Engine mock_engine(std::int32_t dim = kDim, EngineConfig cfg = {}) {
  return Engine(make_mock_adapters(Lexicon::builtin(), dim, dim), cfg);
}

const MockLanguageAdapter& mock_language(const Engine& e) {
  return static_cast<const MockLanguageAdapter&>(*e.adapters().language);
}

std::vector<Completion> drain(Engine& e) {
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

const std::vector<std::string> kTypes = {"content", "style", "tone", "color", "composition"};

// One lexicon value per chosen type, canonical order.
std::vector<Fragment> random_fragments(std::mt19937_64& rng, const Lexicon& lex, std::size_t min_types) {
  for (;;) {
    std::vector<Fragment> out;
    for (const auto& t : kTypes) {
      if (rng() % 2) continue;
      const auto& vals = lex.values(t);
      out.emplace_back(t, vals[rng() % vals.size()]);
    }
    if (out.size() >= min_types) return out;
  }
}

std::string join_values(const std::vector<Fragment>& fs) {
  std::string out;
  for (const auto& f : fs) out += (out.empty() ? "" : ", ") + f.value;
  return out;
}

// --- criteria -----------------------------------------------------------------

std::string fragment_example() {
  Engine e = mock_engine();
  const auto fs = fragments::decompose_prompt(*e.adapters().language, "an enchanting illustration of a castle", 5);
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& f : fs) got.emplace(f.ftype, f.value);
  const std::set<std::pair<std::string, std::string>> want = {
      {"content", "castle"}, {"style", "illustration"}, {"tone", "enchanting"}};
  expect(got == want && fs.size() == 3, "decomposition differs from the three expected pairs");
  return "3 pairs";
}

std::string idle_rule() {
  std::mt19937_64 rng(2000);
  std::size_t fired_total = 0;
  for (int round = 0; round < 1000; ++round) {
    Engine e = mock_engine(16);
    ImageBody img;
    img.prompt = "heron";
    img.seed = 1;
    const auto image = e.create_element({0, 0, 40, 40}, img);
    LensBody lb;
    lb.prompt = "forest backdrop";
    lb.seed = 2;
    const auto lens = e.create_element({0, 0, 40, 40}, lb);
    drain(e);
    e.set_now(e.now() + 10000);

    // Random burst: edits to the image (under the lens) or the lens itself.
    const int n = 1 + static_cast<int>(rng() % 8);
    std::int64_t t = e.now();
    std::vector<std::int64_t> fires;
    auto run_until = [&](std::int64_t until) {
      for (;;) {
        const auto d = e.scheduler().next_deadline();
        if (!d || *d > until) break;
        e.set_now(std::max(e.now(), *d));
        for (auto& job : e.take_ready()) {
          fires.push_back(e.now());
          e.complete(job.job, job.work(e.adapters()));
        }
      }
      e.set_now(std::max(e.now(), until));
    };
    for (int i = 0; i < n; ++i) {
      if (i) t += static_cast<std::int64_t>(rng() % 2000);  // gap < 2000
      run_until(t);
      const bool move_lens = rng() % 2;
      const Rect r{static_cast<std::int32_t>(rng() % 20), static_cast<std::int32_t>(rng() % 20), 40, 40};
      const bool changed = e.update_geometry(move_lens ? lens : image, r);
      if (!changed) e.update_geometry(move_lens ? lens : image, {r.x + 1, r.y, 40, 40});
    }
    run_until(t + 10000);
    expect(fires.size() == 1, "round " + std::to_string(round) + ": " + std::to_string(fires.size()) + " generations");
    expect(fires[0] == t + 2000, "round " + std::to_string(round) + ": fired at +" + std::to_string(fires[0] - t));
    fired_total += fires.size();
  }
  return std::to_string(fired_total) + " bursts";
}

std::string container_grid() {
  std::mt19937_64 rng(4);
  Engine e = mock_engine(16);
  const auto& lex = mock_language(e).lexicon();
  ImageBody src;
  src.prompt = "heron, line drawing";
  src.seed = 3;
  const auto source = e.create_element({0, 0, 40, 40}, src);
  drain(e);
  const AssetId source_asset = *e.doc().body<ImageBody>(source).asset;

  for (int i = 0; i < 500; ++i) {
    ContainerBody body;
    body.prompt = join_values(random_fragments(rng, lex, 1));
    const auto c = e.create_element({100, 0, 100, 100}, body);
    switch (rng() % 3) {
      case 0: break;
      case 1: containers::ground_container(e, c, GroundAsset{source_asset}); break;
      case 2: {
        const auto& t = kTypes[rng() % kTypes.size()];
        const auto& vals = lex.values(t);
        containers::ground_container(e, c, GroundFragment{Fragment(t, vals[rng() % vals.size()])});
      }
    }
    containers::generate_variations(e, c, rng());
    const auto done = drain(e);
    expect(done.size() == 1 && !done[0].failure && done[0].disposition == Disposition::applied,
           "prompt '" + body.prompt + "' did not complete");
    const auto& cells = e.doc().body<ContainerBody>(c).cells;
    std::set<std::string> distinct;
    for (const auto& cell : cells) {
      if (const auto* a = std::get_if<AssetId>(&cell))
        distinct.insert("p:" + e.doc().asset(*a).provenance->prompt);
      else if (const auto* f = std::get_if<Fragment>(&cell))
        distinct.insert("f:" + f->ftype + "=" + f->value);
    }
    expect(distinct.size() == 4, "prompt '" + body.prompt + "' filled " + std::to_string(distinct.size()) +
                                     " distinct cells");
    e.delete_element(c);
  }
  return "500 grids";
}

// Pixel (px,py) belongs to a region when its centre is inside it.
bool centre_inside(const NormRect& r, std::int32_t W, std::int32_t H, std::int32_t px, std::int32_t py) {
  const double cx = px + 0.5, cy = py + 0.5;
  return cx >= r.x * W && cx < (r.x + r.w) * W && cy >= r.y * H && cy < (r.y + r.h) * H;
}

std::string segmentation_oracle() {
  std::mt19937_64 rng(1000);
  MockImageAdapter image(Lexicon::builtin(), 64, 64);
  std::size_t empties = 0;
  auto grid = [&](int lo, int hi) { return static_cast<double>(lo + static_cast<int>(rng() % (hi - lo + 1))) / 128.0; };
  for (int round = 0; round < 1000; ++round) {
    const std::int32_t W = 16 + static_cast<std::int32_t>(rng() % 81), H = 16 + static_cast<std::int32_t>(rng() % 81);
    SceneSpec scene;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      SceneObject o;
      o.label = "obj" + std::to_string(i);
      o.region.x = grid(0, 120);
      o.region.y = grid(0, 120);
      o.region.w = std::min(1.0 - o.region.x, grid(1, 96));
      o.region.h = std::min(1.0 - o.region.y, grid(1, 96));
      scene.objects.push_back(o);
    }
    const ImageAsset asset = make_asset(W, H, render_scene(scene, W, H, rng()), scene, std::nullopt);
    std::vector<Point> pts;
    const int k = 1 + static_cast<int>(rng() % 32);
    std::uniform_real_distribution<double> ux(0, W), uy(0, H);
    for (int i = 0; i < k; ++i) pts.push_back({ux(rng), uy(rng)});

    // Brute force: count points per object by pixel membership, then pick
    // the most points, smaller area, lower index.
    std::optional<std::size_t> best;
    std::int64_t best_count = 0, best_area = 0;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const auto& r = scene.objects[i].region;
      std::int64_t count = 0, area = 0;
      for (const auto& p : pts)
        count += centre_inside(r, W, H, static_cast<std::int32_t>(std::floor(p.x)), static_cast<std::int32_t>(std::floor(p.y)));
      for (std::int32_t y = 0; y < H; ++y)
        for (std::int32_t x = 0; x < W; ++x) area += centre_inside(r, W, H, x, y);
      if (count == 0) continue;
      if (!best || count > best_count || (count == best_count && area < best_area)) {
        best = i;
        best_count = count;
        best_area = area;
      }
    }
    std::optional<Mask> got;
    try {
      got = image.segment(asset, pts);
    } catch (const Error& err) {
      expect(err.code() == Errc::segmentation_empty, "unexpected error " + std::string(err.what()));
    }
    if (!best) {
      expect(!got, "round " + std::to_string(round) + ": mask returned where no object holds a point");
      ++empties;
      continue;
    }
    expect(got.has_value(), "round " + std::to_string(round) + ": no mask");
    Mask want(W, H);
    for (std::int32_t y = 0; y < H; ++y)
      for (std::int32_t x = 0; x < W; ++x)
        if (centre_inside(scene.objects[*best].region, W, H, x, y)) want.set(x, y);
    expect(*got == want, "round " + std::to_string(round) + ": mask differs from the oracle");
  }
  return "1000 cases, " + std::to_string(empties) + " empty";
}

std::string inpaint_locality() {
  std::mt19937_64 rng(500);
  Engine e = mock_engine(64);
  const auto& lex = mock_language(e).lexicon();
  const auto& contents = lex.values("content");
  BrushBody bb;
  const auto brush = e.create_element({200, 200, 10, 10}, bb);
  std::size_t applied = 0, attempts = 0, untouched = 0;
  const std::vector<std::string> brush_types = {"style", "color", "content"};
  while (applied < 500) {
    expect(++attempts < 5000, "too many strokes missed every object");
    auto fs = random_fragments(rng, lex, 0);
    fs.erase(std::remove_if(fs.begin(), fs.end(), [](const Fragment& f) { return f.ftype == "content"; }), fs.end());
    const int objects = 1 + static_cast<int>(rng() % 4);
    std::string prompt;
    for (int i = 0; i < objects; ++i) prompt += (i ? ", " : "") + contents[rng() % contents.size()];
    if (!fs.empty()) prompt += ", " + join_values(fs);
    ImageBody img;
    img.prompt = prompt;
    img.seed = 1 + rng() % 1000000;
    const auto target = e.create_element({0, 0, 64, 64}, img);
    drain(e);
    const ImageAsset before = e.doc().asset(*e.doc().body<ImageBody>(target).asset);

    const auto& bt = brush_types[rng() % brush_types.size()];
    const auto& bv = lex.values(bt);
    brushes::fill_brush_from_text(e, brush, bv[rng() % bv.size()],
                                  bt == "content" ? BrushMode::content : BrushMode::style);
    brushes::Stroke stroke;
    std::uniform_real_distribution<double> u(0, 64);
    const int pts = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < pts; ++i) stroke.points.push_back({u(rng), u(rng)});
    try {
      brushes::apply_brush(e, brush, target, stroke);
    } catch (const Error& err) {
      if (err.code() != Errc::segmentation_empty && err.code() != Errc::degenerate_stroke) throw;
      e.delete_element(target);
      continue;
    }
    auto fired = e.take_ready();
    expect(fired.size() == 1, "brush did not fire one job");
    const Mask mask = std::get<BrushIntent>(fired[0].job.intent).mask;
    const auto c = e.complete(fired[0].job, fired[0].work(e.adapters()));
    expect(!c.failure && c.disposition == Disposition::applied, "inpaint did not apply");
    const ImageAsset& after = e.doc().asset(*e.doc().body<ImageBody>(target).asset);
    expect(after.width == before.width && after.height == before.height, "inpaint changed dimensions");

    for (const auto& obj : before.scene->objects) {
      const PixelBox box = rasterize(obj.region, before.width, before.height);
      if (box.empty() || mask.count_in(box) != 0) continue;
      ++untouched;
      for (std::int32_t y = box.y0; y < box.y1; ++y)
        for (std::int32_t x = box.x0; x < box.x1; ++x)
          for (int ch = 0; ch < 4; ++ch) {
            const std::size_t i = (static_cast<std::size_t>(y) * before.width + x) * 4 + ch;
            expect(before.pixels()[i] == after.pixels()[i],
                   "'" + prompt + "': pixel of untouched " + obj.label + " changed");
          }
    }
    e.delete_element(target);
    ++applied;
  }
  return std::to_string(applied) + " applications, " + std::to_string(untouched) + " untouched objects checked";
}

std::string fragment_round_trip() {
  std::mt19937_64 rng(6);
  Engine e = mock_engine(32);
  const auto& lex = mock_language(e).lexicon();
  for (int i = 0; i < 500; ++i) {
    const auto fs = random_fragments(rng, lex, 2);
    ImageBody img;
    img.prompt = join_values(fs);
    img.seed = 1 + rng() % 1000000;
    const auto id = e.create_element({0, 0, 32, 32}, img);
    drain(e);
    const ImageAsset original = e.doc().asset(*e.doc().body<ImageBody>(id).asset);
    const auto& row = original.provenance->fragments;
    expect(row.size() >= 2, "'" + img.prompt + "' decomposed into fewer than two fragments");
    const Fragment f = row[rng() % row.size()];
    fragments::apply_fragment_edit(e, id, FragmentEdit::remove(f));
    drain(e);
    fragments::apply_fragment_edit(e, id, FragmentEdit::add(f));
    drain(e);
    const ImageAsset& back = e.doc().asset(*e.doc().body<ImageBody>(id).asset);
    expect(back.id == original.id && back.pixels() == original.pixels(),
           "'" + img.prompt + "' minus/plus " + f.value + " differs");
    e.delete_element(id);
  }
  return "500 prompts";
}

std::string staleness() {
  std::mt19937_64 rng(7);
  Engine e = mock_engine(16);
  const auto& contents = mock_language(e).lexicon().values("content");
  std::size_t discarded = 0;
  for (int round = 0; round < 200; ++round) {
    ImageBody img;
    img.prompt = "castle";
    img.seed = 9;
    const auto id = e.create_element({0, 0, 16, 16}, img);
    std::vector<Dispatch> pool;
    std::string last = img.prompt;
    std::uint64_t counter = e.scheduler().counter(id);
    auto check_counter = [&] {
      const auto now = e.scheduler().counter(id);
      expect(now >= counter, "round " + std::to_string(round) + ": counter regressed");
      counter = now;
    };
    auto complete_one = [&] {
      const std::size_t k = rng() % pool.size();
      auto d = std::move(pool[k]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
      discarded += e.complete(d.job, d.work(e.adapters())).disposition == Disposition::discarded;
      check_counter();
    };
    for (auto& d : e.take_ready()) pool.push_back(std::move(d));
    const int submits = 1 + static_cast<int>(rng() % 6);
    for (int s = 0; s < submits;) {
      if (!pool.empty() && rng() % 3 == 0) {
        complete_one();
        continue;
      }
      std::string next = contents[rng() % contents.size()] + ", " + contents[rng() % contents.size()];
      if (next == last) continue;
      e.set_prompt(id, next);
      last = next;
      ++s;
      for (auto& d : e.take_ready()) pool.push_back(std::move(d));
    }
    for (;;) {
      for (auto& d : e.take_ready()) pool.push_back(std::move(d));
      if (pool.empty()) break;
      complete_one();
    }
    expect(e.scheduler().idle(), "round " + std::to_string(round) + ": work left behind");
    const auto& body = e.doc().body<ImageBody>(id);
    expect(body.prompt == last, "round " + std::to_string(round) + ": prompt is not the newest");
    expect(body.asset && e.doc().asset(*body.asset).provenance->prompt == last,
           "round " + std::to_string(round) + ": asset does not reflect '" + last + "'");
    e.delete_element(id);
  }
  return "200 schedules, " + std::to_string(discarded) + " stale results discarded";
}

fs::path script_path(const std::string& name) {
  return fs::path(ICANVAS_SOURCE_DIR) / "tests" / "scripts" / name;
}

std::string walkthroughs() {
  for (const char* name : {"containers_lenses.jsonl", "fragments_brush.jsonl"}) {
    const auto a = run_script_file(script_path(name), mock_engine(512));
    const auto b = run_script_file(script_path(name), mock_engine(512));
    expect(a.dump() == b.dump(), std::string(name) + ": transcripts differ");
    expect(replay(a.events, rasters_from(a.document)) == a.document, std::string(name) + ": replay differs");
  }
  return "2 scripts";
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::string persistence() {
  test::DocGen gen(200);
  const auto dir = fs::temp_directory_path() / "icanvas_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (int i = 0; i < 200; ++i) {
    const CanvasDocument d = gen.document();
    const auto first = dir / ("doc" + std::to_string(i) + ".json");
    const auto second = dir / ("again" + std::to_string(i) + ".json");
    save_document(d, first);
    const CanvasDocument loaded = load_document(first);
    save_document(loaded, second);
    expect(loaded == d, "document " + std::to_string(i) + " changed on load");
    expect(read_file(first) == read_file(second), "document " + std::to_string(i) + " saved differently");
    const std::string bytes = serialize(d);
    expect(serialize(deserialize(bytes, rasters_from(d))) == bytes,
           "document " + std::to_string(i) + " is not a serialization fixed point");
  }
  fs::remove_all(dir);
  return "200 documents";
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<std::string()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"fragment-decomposition-example", 1, fragment_example},
      {"lens-idle-rule", 5, idle_rule},
      {"container-four-distinct-cells", 10, container_grid},
      {"segmentation-matches-oracle", 10, segmentation_oracle},
      {"inpaint-locality", 20, inpaint_locality},
      {"fragment-remove-readd-identity", 20, fragment_round_trip},
      {"staleness-newest-wins", 10, staleness},
      {"walkthrough-determinism", 10, walkthroughs},
      {"persistence-round-trip", 10, persistence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const Failed& f) {
      ok = false;
      detail = f.why;
    } catch (const std::exception& ex) {
      ok = false;
      detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && secs > c.limit_s) {
      ok = false;
      detail += " (over time)";
    }
    failed += !ok;
    std::printf("%s %-32s %7.3fs / %.0fs  %s\n", ok ? "PASS" : "FAIL", c.name, secs, c.limit_s, detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
