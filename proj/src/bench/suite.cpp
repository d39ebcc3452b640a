#include "npptwin/bench/suite.hpp"

#include "npptwin/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

namespace npptwin::bench {

const std::vector<OperationSpec>& operations() {
  static const std::vector<OperationSpec> ops{
      {"mset100", "Plant communication (set, 100 variables)", 18.16, 3.72, 85.52},
      {"mget100", "Plant communication (get, 100 variables)", 2.37, 3.63, 426.40},
      {"camera", "Bridge: read image", 27.79, 4.56, 235.52},
      {"env_step", "Bridge: environment step", 56.70, 4.59, 255.58},
      {"env_reset", "Bridge: restart episode", 104.98, 4.61, 255.07},
      {"move", "Bridge: move 2D", 20.93, 4.60, 233.87},
      {"thermal", "Thermal vision", 87.62, 4.42, 186.06},
      {"topdown", "Real-time top-down capture", 690.55, 3.66, 76.87},
  };
  return ops;
}

const OperationSpec& operation(const std::string& key) {
  for (const auto& op : operations()) {
    if (op.key == key) return op;
  }
  throw Error(ErrorCode::not_found, "unknown operation " + key);
}

// ---- services ---------------------------------------------------------------

ProcessServices::ProcessServices(std::filesystem::path plantd, std::filesystem::path twind,
                                 std::optional<std::filesystem::path> log_dir)
    : plantd_(std::move(plantd)), twind_(std::move(twind)), log_dir_(std::move(log_dir)) {}

ProcessServices::~ProcessServices() { stop(); }

ServiceEndpoints ProcessServices::start() {
  stop();
  auto log = [&](const char* name) -> std::optional<std::filesystem::path> {
    if (!log_dir_) return std::nullopt;
    return *log_dir_ / name;
  };
  std::string last_error;
  // A free port can be taken between probing and binding; retry on that.
  for (int attempt = 0; attempt < 5; ++attempt) {
    try {
      ServiceEndpoints ep;
      ep.plant = {"127.0.0.1", free_port()};
      plant_ = std::make_unique<ChildProcess>(
          plantd_, std::vector<std::string>{"--port", std::to_string(ep.plant.port), "--mode", "rt"}, log("plantd.log"));
      wait_for_port(ep.plant, std::chrono::seconds(10), plant_.get());
      ep.twin = {"127.0.0.1", free_port()};
      twin_ = std::make_unique<ChildProcess>(twind_,
                                             std::vector<std::string>{"--bridge-port", std::to_string(ep.twin.port),
                                                                      "--http-port", "0", "--plant-addr",
                                                                      ep.plant.to_string(), "--mode", "rt"},
                                             log("twind.log"));
      wait_for_port(ep.twin, std::chrono::seconds(10), twin_.get());
      // Ready once the first plant generation is mirrored.
      twin::BridgeClient probe(ep.twin);
      const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
      while (!probe.call("vget /plant/sim_time_ms").ok) {
        if (std::chrono::steady_clock::now() > deadline) throw Error(ErrorCode::io, "twin never mirrored the plant");
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ep.pids = {{"plantd", plant_->pid()}, {"twind", twin_->pid()}};
      return ep;
    } catch (const Error& e) {
      last_error = e.what();
      stop();
    }
  }
  throw Error(ErrorCode::io, "cannot launch services: " + last_error);
}

void ProcessServices::stop() {
  if (twin_) twin_->terminate();
  if (plant_) plant_->terminate();
  twin_.reset();
  plant_.reset();
}

// ---- session ----------------------------------------------------------------

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw PostconditionFailed(what);
}

twin::BridgeReply require_ok(const twin::BridgeReply& r, const std::string& what) {
  require(r.ok, fmt::format("{}: {}", what, r.raw.substr(0, 200)));
  return r;
}

}  // namespace

BenchSession::BenchSession(const ServiceEndpoints& endpoints, const BenchOptions& options)
    : options_(options), bridge_(endpoints.twin), mirror_(endpoints.plant), rng_(options.seed) {
  registry_ = mirror_.list();
  if (registry_.size() < 100) throw Error(ErrorCode::io, "plant registry has fewer than 100 variables");
  for (std::size_t i = 0; i < 100; ++i) mget_names_.push_back(registry_[i].name);

  std::vector<std::string> writable;
  for (const auto& d : registry_) {
    if (d.access == plant::Access::read_write) writable.push_back(d.name);
  }
  if (writable.empty()) throw Error(ErrorCode::io, "plant has no writable variables");
  // Current values, so the write batch leaves the plant where it was.
  const auto current = mirror_.mget(writable);
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t k = i % writable.size();
    mset_writes_.emplace_back(writable[k], current[k]);
  }

  bridge_.expect_ok("vset /session/possess " + options_.robot);
  const auto top = bridge_.expect_ok("vget /topdown lit");
  if (!top.image) throw Error(ErrorCode::io, "top-down reply carried no image");
  map_width_ = top.image->width() / 4;
  map_height_ = top.image->height() / 4;
}

void BenchSession::check_image(const twin::BridgeReply& r, int w, int h, const char* what) {
  require_ok(r, what);
  require(r.image.has_value(), fmt::format("{}: no image", what));
  require(r.image->width() == w && r.image->height() == h,
          fmt::format("{}: image {}x{}, expected {}x{}", what, r.image->width(), r.image->height(), w, h));
}

std::int64_t BenchSession::sim_time_ms() {
  return static_cast<std::int64_t>(bridge_.expect_ok("vget /sim/time").number(0));
}

double BenchSession::topdown_capture(bool thermal) {
  twin::BridgeReply r;
  const double ms = time_ms([&] { r = bridge_.call(thermal ? "vget /topdown thermal" : "vget /topdown lit"); });
  check_image(r, map_width_ * 4, map_height_ * 4, thermal ? "thermal top-down" : "top-down");
  return ms;
}

double BenchSession::run(const std::string& key) {
  const std::string robot = options_.robot;
  if (key == "mset100") {
    std::vector<double> echoed;
    const double ms = time_ms([&] { echoed = mirror_.mset(mset_writes_); });
    require(echoed.size() == mset_writes_.size(), fmt::format("MSET echoed {} values", echoed.size()));
    for (std::size_t i = 0; i < echoed.size(); ++i) {
      require(echoed[i] == mset_writes_[i].second,
              fmt::format("MSET {} applied {} instead of {}", mset_writes_[i].first, echoed[i], mset_writes_[i].second));
    }
    return ms;
  }
  if (key == "mget100") {
    std::vector<double> values;
    const double ms = time_ms([&] { values = mirror_.mget(mget_names_); });
    require(values.size() == 100, fmt::format("MGET returned {} values", values.size()));
    for (std::size_t i = 0; i < 100; ++i) {
      const auto& d = registry_[i];
      require(std::isfinite(values[i]) && values[i] >= d.min && values[i] <= d.max,
              fmt::format("{} = {} outside [{}, {}]", d.name, values[i], d.min, d.max));
    }
    return ms;
  }
  if (key == "camera") {
    twin::BridgeReply r;
    const auto cmd = fmt::format("vget /camera/{}/lit {} {}", robot, options_.camera_width, options_.camera_height);
    const double ms = time_ms([&] { r = bridge_.call(cmd); });
    check_image(r, options_.camera_width, options_.camera_height, "camera");
    return ms;
  }
  if (key == "env_step") {
    const int action = static_cast<int>(rng_() % 4);
    twin::BridgeReply r;
    const double ms = time_ms([&] { r = bridge_.call(fmt::format("vrun /env/step {}", action)); });
    if (!r.ok && r.code == 409) {
      bridge_.expect_ok("vset /env/reset");
      return run(key);
    }
    check_image(r, 256, 144, "env step");
    require(r.fields.size() == 3, "env step: expected reward, done, distance");
    require(std::isfinite(r.number(0)), "env step: reward not finite");
    require(r.fields[1] == "0" || r.fields[1] == "1", "env step: done flag");
    require(r.number(2) >= 0.0, "env step: negative distance");
    if (r.fields[1] == "1") bridge_.expect_ok("vset /env/reset");
    return ms;
  }
  if (key == "env_reset") {
    twin::BridgeReply r;
    const double ms = time_ms([&] { r = bridge_.call("vset /env/reset"); });
    check_image(r, 256, 144, "env reset");
    const auto loc = bridge_.expect_ok("vget /robot/" + robot + "/location");
    const auto rot = bridge_.expect_ok("vget /robot/" + robot + "/rotation");
    // Reset twice in a row must land on the same pose: the spawn.
    const auto again = bridge_.expect_ok("vset /env/reset");
    require(bridge_.expect_ok("vget /robot/" + robot + "/location").fields == loc.fields &&
                bridge_.expect_ok("vget /robot/" + robot + "/rotation").fields == rot.fields,
            "env reset: pose not restored to spawn");
    require(again.image && again.image->pixels() == r.image->pixels(), "env reset: observations differ");
    return ms;
  }
  if (key == "move") {
    static const char* verbs[] = {"move forward", "move backward", "rotate left", "rotate right"};
    const int pick = static_cast<int>(rng_() % 4);
    const auto before = bridge_.expect_ok("vget /robot/" + robot + "/location");
    twin::BridgeReply r;
    const double ms = time_ms([&] { r = bridge_.call(fmt::format("vset /robot/{}/{}", robot, verbs[pick])); });
    require_ok(r, "move");
    require(r.fields.size() == 4, "move: expected x y z collided");
    const bool collided = r.fields[3] == "1";
    require(collided || r.fields[3] == "0", "move: collided flag");
    const double dx = r.number(0) - before.number(0);
    const double dy = r.number(1) - before.number(1);
    const double d = std::hypot(dx, dy);
    if (pick >= 2 || collided) {
      require(d == 0.0, fmt::format("move: {} displaced the robot by {}", verbs[pick], d));
    } else {
      require(std::abs(d - 1.0) < 1e-9, fmt::format("move: displacement {} instead of 1 m", d));
    }
    return ms;
  }
  if (key == "thermal") return topdown_capture(true);
  if (key == "topdown") return topdown_capture(false);
  throw Error(ErrorCode::not_found, "unknown operation " + key);
}

// ---- runs -------------------------------------------------------------------

BenchReport empty_report(const BenchOptions& options) {
  BenchReport r;
  r.options = options;
  for (const auto& op : operations()) r.operations.push_back({op, {}, {}, {}, {}});
  return r;
}

namespace {

OperationResult& row(BenchReport& report, const std::string& key) {
  for (auto& r : report.operations) {
    if (r.spec.key == key) return r;
  }
  throw Error(ErrorCode::not_found, "unknown operation " + key);
}

void say(const Progress& p, const std::string& text) {
  if (p) p(text);
}

}  // namespace

void run_speed(Services& services, const BenchOptions& options, BenchReport& report, const Progress& progress) {
  const auto ep = services.start();
  BenchSession session(ep, options);
  for (const auto& op : operations()) {
    std::vector<double> samples;
    if (op.key == "topdown") {
      const auto delay = std::chrono::milliseconds(options.topdown_delay_ms);
      const auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < options.topdown_images; ++i) {
        const double ms = time_ms([&] {
          session.topdown_capture(false);
          std::this_thread::sleep_for(delay);
        });
        samples.push_back(ms - static_cast<double>(options.topdown_delay_ms));
      }
      row(report, op.key).topdown_total_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    } else {
      for (int i = 0; i < options.reps; ++i) {
        try {
          samples.push_back(session.run(op.key));
        } catch (const PostconditionFailed& e) {
          throw Error(ErrorCode::io, fmt::format("{} rep {}: {}", op.key, i, e.what()));
        }
      }
    }
    row(report, op.key).speed = summarize(samples);
    const auto& s = *row(report, op.key).speed;
    say(progress, fmt::format("speed {:<10} mean {:8.3f} ms  p50 {:8.3f}  p95 {:8.3f}  max {:8.3f}", op.key, s.mean_ms,
                              s.p50_ms, s.p95_ms, s.max_ms));
  }
  services.stop();
}

ResourceSummary ResourceWindow::combined(const std::string& label) const {
  std::map<std::uint64_t, ResourceSample> per_instant;
  for (const auto& s : samples) {
    if (!label.empty() && s.label != label) continue;
    auto& acc = per_instant[s.instant];
    acc.rss_bytes += s.rss_bytes;
    acc.cpu_pct += s.cpu_pct;
  }
  std::vector<ResourceSample> sums;
  for (auto& [i, s] : per_instant) sums.push_back(s);
  return summarize(sums);
}

void run_resources(Services& services, const BenchOptions& options, BenchReport& report, const Progress& progress) {
  if (!proc_sampling_supported()) {
    report.resources_note = "process sampling unavailable on this platform";
    return;
  }
  const auto ep = services.start();
  if (ep.pids.empty()) {
    report.resources_note = "process ids of the services are unknown";
    services.stop();
    return;
  }
  const auto period = std::chrono::milliseconds(options.sample_period_ms);
  const auto n = static_cast<std::uint64_t>(std::max(1, options.resource_seconds * 1000 / options.sample_period_ms));

  say(progress, fmt::format("resources: idle baseline, {} samples", n));
  {
    ResourceSampler sampler(ep.pids, period);
    sampler.set_label("idle");
    sampler.start();
    while (sampler.instants() < n) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    report.idle = ResourceWindow{sampler.stop()};
  }

  say(progress, fmt::format("resources: active suite, {} samples", n));
  BenchSession session(ep, options);
  const auto& ops = operations();
  ResourceSampler sampler(ep.pids, period);
  sampler.start();
  for (;;) {
    const auto done = sampler.instants();
    if (done >= n) break;
    // Equal slices of the window per operation, in table order.
    const auto& op = ops[static_cast<std::size_t>(done * ops.size() / n)];
    sampler.set_label(op.key);
    if (op.key == "topdown") {
      session.topdown_capture(false);
      const auto slice_end = (done * ops.size() / n + 1) * n / ops.size();
      // The delay is cut short at the slice boundary.
      for (int waited = 0; waited < options.topdown_delay_ms && sampler.instants() < slice_end; waited += 10) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    } else {
      session.run(op.key);
    }
  }
  report.active = ResourceWindow{sampler.stop()};
  for (const auto& op : ops) row(report, op.key).resources = report.active->combined(op.key);
  services.stop();
}

void run_functional(Services& services, const BenchOptions& options, BenchReport& report, const Progress& progress) {
  for (const auto& op : operations()) {
    FunctionalResult result;
    std::optional<std::int64_t> last_final;
    std::map<std::string, pid_t> last_pids;
    for (int cycle = 0; cycle < options.functional_cycles; ++cycle) {
      std::unique_ptr<BenchSession> session;
      std::int64_t t_start = 0;
      try {
        const auto ep = services.start();
        session = std::make_unique<BenchSession>(ep, options);
        t_start = session->sim_time_ms();
        if (last_final && t_start >= *last_final) {
          throw PostconditionFailed(
              fmt::format("services not restarted: sim time {} >= previous {}", t_start, *last_final));
        }
        if (!last_pids.empty() && ep.pids == last_pids) throw PostconditionFailed("services not restarted: same pids");
        last_pids = ep.pids;
      } catch (const std::exception& e) {
        for (int run = 0; run < options.functional_runs; ++run) {
          ++result.total;
          result.failures.push_back({cycle, run, std::string("cycle setup: ") + e.what()});
        }
        session.reset();
        services.stop();
        last_final.reset();
        continue;
      }
      for (int run = 0; run < options.functional_runs; ++run) {
        ++result.total;
        try {
          session->run(op.key);
          ++result.passes;
        } catch (const std::exception& e) {
          result.failures.push_back({cycle, run, e.what()});
        }
      }
      // Let the clock run well past where a relaunched twin starts, so the
      // next cycle's fresh clock is distinguishable.
      try {
        const std::int64_t mark = std::max<std::int64_t>(1000, 2 * t_start);
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
        std::int64_t t = session->sim_time_ms();
        while (t < mark && std::chrono::steady_clock::now() < deadline) {
          std::this_thread::sleep_for(std::chrono::milliseconds(20));
          t = session->sim_time_ms();
        }
        last_final = t;
      } catch (const std::exception&) {
        last_final.reset();
      }
      session.reset();
      services.stop();
    }
    say(progress, fmt::format("functional {:<10} {}/{}", op.key, result.passes, result.total));
    row(report, op.key).functional = std::move(result);
  }
}

// ---- report -----------------------------------------------------------------

namespace {

std::string f3(double v) { return fmt::format("{:.3f}", v); }
std::string mb(double bytes) { return fmt::format("{:.1f}", bytes / (1024.0 * 1024.0)); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_csv(const BenchReport& report) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : report.operations) {
    std::vector<std::string> f{r.spec.key, csv_field(r.spec.label)};
    if (r.speed) {
      f.insert(f.end(), {std::to_string(r.speed->runs), f3(r.speed->mean_ms), f3(r.speed->p50_ms),
                         f3(r.speed->p95_ms), f3(r.speed->max_ms)});
    } else {
      f.insert(f.end(), 5, "");
    }
    f.push_back(f3(r.spec.ref_ms));
    if (r.resources) {
      f.insert(f.end(), {mb(r.resources->rss_mean_bytes), mb(r.resources->rss_max_bytes),
                         fmt::format("{:.2f}", r.resources->cpu_mean_pct),
                         fmt::format("{:.2f}", r.resources->cpu_max_pct)});
    } else {
      f.insert(f.end(), 4, "");
    }
    f.push_back(fmt::format("{:.2f}", r.spec.ref_mem_gb));
    f.push_back(fmt::format("{:.2f}", r.spec.ref_cpu_pct));
    if (r.functional) {
      f.push_back(std::to_string(r.functional->passes));
      f.push_back(std::to_string(r.functional->total));
    } else {
      f.insert(f.end(), 2, "");
    }
    out += fmt::format("{}\n", fmt::join(f, ","));
  }
  return out;
}

std::string resources_csv(const BenchReport& report) {
  std::string out = std::string(kResourcesCsvHeader) + "\n";
  auto emit = [&](const std::string& window, const std::string& process, const ResourceSummary& s) {
    out += fmt::format("{},{},{},{},{},{:.2f},{:.2f}\n", window, process, s.samples, mb(s.rss_mean_bytes),
                       mb(s.rss_max_bytes), s.cpu_mean_pct, s.cpu_max_pct);
  };
  auto per_process = [&](const std::string& window, const ResourceWindow& w, const std::string& label) {
    std::map<std::string, std::vector<ResourceSample>> by;
    for (const auto& s : w.samples) {
      if (label.empty() || s.label == label) by[s.process].push_back(s);
    }
    for (const auto& [proc, samples] : by) emit(window, proc, summarize(samples));
    emit(window, "total", w.combined(label));
  };
  if (report.idle) per_process("idle", *report.idle, "");
  if (report.active) {
    per_process("active", *report.active, "");
    for (const auto& op : operations()) per_process(op.key, *report.active, op.key);
  }
  return out;
}

std::string failures_csv(const BenchReport& report) {
  std::string out = std::string(kFailuresCsvHeader) + "\n";
  for (const auto& r : report.operations) {
    if (!r.functional) continue;
    for (const auto& f : r.functional->failures) {
      out += fmt::format("{},{},{},{}\n", r.spec.key, f.cycle, f.run, csv_field(f.detail));
    }
  }
  return out;
}

std::string report_markdown(const BenchReport& report) {
  std::string out = "# Performance metrics\n\n";
  out += "| Operation | Time (mean) | p50 | p95 | max | Memory mean / max | CPU mean / max | Functional | "
         "Ref. time | Ref. memory | Ref. CPU |\n";
  out += "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : report.operations) {
    std::string time = "n/a", p50 = "n/a", p95 = "n/a", mx = "n/a", mem = "n/a", cpu = "n/a", fn = "n/a";
    if (r.speed) {
      time = fmt::format("{:.2f} ms", r.speed->mean_ms);
      p50 = fmt::format("{:.2f} ms", r.speed->p50_ms);
      p95 = fmt::format("{:.2f} ms", r.speed->p95_ms);
      mx = fmt::format("{:.2f} ms", r.speed->max_ms);
    }
    if (r.resources && r.resources->samples > 0) {
      mem = fmt::format("{} / {} MB", mb(r.resources->rss_mean_bytes), mb(r.resources->rss_max_bytes));
      cpu = fmt::format("{:.2f}% / {:.2f}%", r.resources->cpu_mean_pct, r.resources->cpu_max_pct);
    }
    if (r.functional) {
      fn = fmt::format("{} ({}/{})", r.functional->passes == r.functional->total ? "Passed" : "Failed",
                       r.functional->passes, r.functional->total);
    }
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {:.2f} ms | {:.2f} GB | {:.2f}% |\n", r.spec.label,
                       time, p50, p95, mx, mem, cpu, fn, r.spec.ref_ms, r.spec.ref_mem_gb, r.spec.ref_cpu_pct);
  }
  if (report.idle) {
    const auto s = report.idle->combined();
    out += fmt::format("| Idle baseline | | | | | {} / {} MB | {:.2f}% / {:.2f}% | | | {:.2f} GB | {:.2f}% |\n",
                       mb(s.rss_mean_bytes), mb(s.rss_max_bytes), s.cpu_mean_pct, s.cpu_max_pct, kRefIdleMemGb,
                       kRefIdleCpuPct);
  }
  out += "\n";
  if (!report.resources_note.empty()) out += "Resources: " + report.resources_note + ".\n\n";
  const auto& o = report.options;
  out += fmt::format("- Runs per operation: {}. The first rep is included.\n", o.reps);
  out += fmt::format(
      "- Top-down: one run of {} captures with {} ms between captures; the delays are subtracted from each "
      "sample.\n",
      o.topdown_images, o.topdown_delay_ms);
  out += "- Thermal vision is timed as a full thermal top-down render over the bridge.\n";
  out += "- Set batches cycle over the writable plant inputs, writing their current values.\n";
  out += fmt::format(
      "- Memory and CPU: plantd + twind summed, sampled every {} ms for {} s; each operation owns an equal slice "
      "of the active window.\n",
      o.sample_period_ms, o.resource_seconds);
  out += fmt::format("- Functional: {} cycles x {} runs per operation, services relaunched between cycles.\n",
                     o.functional_cycles, o.functional_runs);
  out += "- Ref. columns are published figures from a different renderer on different hardware, not targets.\n";
  return out;
}

void write_report(const BenchReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error(ErrorCode::io, fmt::format("cannot write {}", (dir / name).string()));
  };
  put("report.csv", report_csv(report));
  put("resources.csv", resources_csv(report));
  put("functional_failures.csv", failures_csv(report));
  put("report.md", report_markdown(report));
}

}  // namespace npptwin::bench
