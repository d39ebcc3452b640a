#pragma once

#include "npptwin/bench/process.hpp"
#include "npptwin/bench/sampler.hpp"
#include "npptwin/bench/stats.hpp"
#include "npptwin/mirror/client.hpp"
#include "npptwin/twin/client.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace npptwin::bench {

// One profiled operation and the published reference numbers for its row.
struct OperationSpec {
  std::string key;
  std::string label;
  double ref_ms = 0.0;
  double ref_mem_gb = 0.0;
  double ref_cpu_pct = 0.0;
};

const std::vector<OperationSpec>& operations();
const OperationSpec& operation(const std::string& key);

inline constexpr double kRefIdleMemGb = 3.37;
inline constexpr double kRefIdleCpuPct = 108.75;

struct BenchOptions {
  int reps = 100;
  int topdown_images = 100;
  int topdown_delay_ms = 1000;
  int resource_seconds = 60;
  int sample_period_ms = 1000;
  int functional_cycles = 10;
  int functional_runs = 10;
  std::string robot = "r1";
  std::uint64_t seed = 1;
  int camera_width = 256;
  int camera_height = 144;
};

struct ServiceEndpoints {
  net::Endpoint plant;
  net::Endpoint twin;
  std::map<std::string, pid_t> pids;  // empty when unknown
};

// Service lifecycle owned by the orchestrator.
class Services {
public:
  virtual ~Services() = default;
  virtual ServiceEndpoints start() = 0;
  virtual void stop() = 0;
  virtual bool restartable() const = 0;
};

// plantd + twind launched as child processes on free loopback ports.
class ProcessServices : public Services {
public:
  ProcessServices(std::filesystem::path plantd, std::filesystem::path twind,
                  std::optional<std::filesystem::path> log_dir = std::nullopt);
  ~ProcessServices() override;

  ServiceEndpoints start() override;
  void stop() override;
  bool restartable() const override { return true; }

private:
  std::filesystem::path plantd_;
  std::filesystem::path twind_;
  std::optional<std::filesystem::path> log_dir_;
  std::unique_ptr<ChildProcess> plant_;
  std::unique_ptr<ChildProcess> twin_;
};

// Already-running services at fixed addresses.
class ExternalServices : public Services {
public:
  explicit ExternalServices(ServiceEndpoints endpoints) : endpoints_(std::move(endpoints)) {}
  ServiceEndpoints start() override { return endpoints_; }
  void stop() override {}
  bool restartable() const override { return false; }

private:
  ServiceEndpoints endpoints_;
};

// A postcondition that did not hold.
struct PostconditionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Client-side connections for one service lifetime. run() performs one
// operation, checks its postcondition (throws PostconditionFailed) and
// returns the timed portion in ms.
class BenchSession {
public:
  BenchSession(const ServiceEndpoints& endpoints, const BenchOptions& options);

  double run(const std::string& key);
  // Top-down capture with the configured delay; returns capture time only.
  double topdown_capture(bool thermal);
  std::int64_t sim_time_ms();

private:
  void check_image(const twin::BridgeReply& reply, int w, int h, const char* what);

  BenchOptions options_;
  twin::BridgeClient bridge_;
  mirror::MirrorClient mirror_;
  std::vector<std::string> mget_names_;
  std::vector<std::pair<std::string, double>> mset_writes_;
  std::vector<plant::VariableDescriptor> registry_;
  int map_width_ = 0;
  int map_height_ = 0;
  std::mt19937_64 rng_;
};

struct FunctionalFailure {
  int cycle = 0;
  int run = 0;
  std::string detail;
};

struct FunctionalResult {
  int passes = 0;
  int total = 0;
  std::vector<FunctionalFailure> failures;
};

struct ResourceWindow {
  std::vector<ResourceSample> samples;
  ResourceSummary combined(const std::string& label = "") const;  // summed over processes per instant
};

struct OperationResult {
  OperationSpec spec;
  std::optional<Stats> speed;
  std::optional<ResourceSummary> resources;
  std::optional<FunctionalResult> functional;
  std::optional<double> topdown_total_ms;  // raw run total, delays included
};

struct BenchReport {
  std::vector<OperationResult> operations;
  std::optional<ResourceWindow> idle;
  std::optional<ResourceWindow> active;
  std::string resources_note;  // why the section is missing, when it is
  BenchOptions options;
};

BenchReport empty_report(const BenchOptions& options);

// Log sink for progress lines; may be empty.
using Progress = std::function<void(const std::string&)>;

void run_speed(Services& services, const BenchOptions& options, BenchReport& report, const Progress& progress = {});
void run_resources(Services& services, const BenchOptions& options, BenchReport& report, const Progress& progress = {});
void run_functional(Services& services, const BenchOptions& options, BenchReport& report,
                    const Progress& progress = {});

inline constexpr const char* kReportCsvHeader =
    "operation,label,runs,mean_ms,p50_ms,p95_ms,max_ms,ref_mean_ms,rss_mean_mb,rss_max_mb,cpu_mean_pct,"
    "cpu_max_pct,ref_mem_gb,ref_cpu_pct,functional_passes,functional_total";
inline constexpr const char* kResourcesCsvHeader =
    "window,process,samples,rss_mean_mb,rss_max_mb,cpu_mean_pct,cpu_max_pct";
inline constexpr const char* kFailuresCsvHeader = "operation,cycle,run,detail";

std::string report_csv(const BenchReport& report);
std::string resources_csv(const BenchReport& report);
std::string failures_csv(const BenchReport& report);
std::string report_markdown(const BenchReport& report);
// Writes report.csv, resources.csv, functional_failures.csv and report.md.
void write_report(const BenchReport& report, const std::filesystem::path& dir);

}  // namespace npptwin::bench
