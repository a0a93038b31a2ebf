// kgbench command-line entry point.
//
// Exit codes: 0 ok, 1 configuration or fatal error, 2 finished with failed
// records or failed validations.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "kgbench/runner.hpp"

namespace {

using namespace kgbench;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPartialFailure = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgbench: knowledge-graph prompting benchmark"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir, tasks, formats, models, pseudo;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  std::string log_level = "info";
  app.add_option("--config", config_path, "Config file (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Run seed (overrides seed)");
  app.add_option("--tasks", tasks, "Comma-separated task names to enable");
  app.add_option("--formats", formats, "Comma-separated formats");
  app.add_option("--models", models, "Comma-separated endpoint model ids");
  app.add_option("--pseudo", pseudo, "off, on or both")
      ->check(CLI::IsMember({"off", "on", "both"}));
  app.add_flag("--resume", resume, "Continue an interrupted run");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  auto* build_cmd = app.add_subcommand("build", "Generate instance files");
  auto* run_cmd = app.add_subcommand("run", "Query endpoints for every instance and format");
  std::optional<std::size_t> limit;
  bool allow_mismatch = false;
  run_cmd->add_option("--limit", limit, "Stop after this many new records");
  run_cmd->add_flag("--allow-digest-mismatch", allow_mismatch,
                    "Use instance files built from a different config");
  auto* report_cmd = app.add_subcommand("report", "Aggregate records into summaries");
  auto* validate_cmd = app.add_subcommand("validate", "Re-check stored gold answers");
  auto* all_cmd = app.add_subcommand("all", "build, run and report");
  auto* render_cmd = app.add_subcommand("render", "Print one instance's prompt");
  std::string render_task, render_format = "ListOfEdges";
  std::size_t render_index = 0;
  bool render_pseudo = false;
  render_cmd->add_option("--task", render_task, "Task name")->required();
  render_cmd->add_option("--index", render_index, "Instance index");
  render_cmd->add_option("--format", render_format, "Format identifier");
  render_cmd->add_flag("--pseudonymized", render_pseudo, "Use the pseudonymized twin");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    BenchConfig config = BenchConfig::load(config_path);
    Overrides ov;
    ov.seed = seed;
    if (out_dir) ov.output_dir = *out_dir;
    if (tasks) ov.tasks = split_list(*tasks);
    if (formats) ov.formats = split_list(*formats);
    if (models) ov.models = split_list(*models);
    ov.pseudo = pseudo;
    ov.apply(config);

    auto do_build = [&] {
      const BuildResult r = build(config);
      std::cout << "built " << r.instances << " instances in " << r.files.size() << " files\n";
    };
    auto do_run = [&]() -> int {
      RunOptions opt;
      opt.resume = resume;
      opt.limit = limit;
      opt.allow_digest_mismatch = allow_mismatch;
      const RunResult r = run(config, opt);
      std::cout << "records: " << r.records << " (" << r.executed << " new, " << r.skipped
                << " resumed, " << r.errors << " errors)" << (r.complete ? "" : ", incomplete")
                << "\n";
      return r.errors ? kPartialFailure : kOk;
    };
    auto do_report = [&] {
      const ReportResult r = report(config);
      std::cout << r.summary.digest();
    };

    if (*build_cmd) {
      do_build();
      return kOk;
    }
    if (*run_cmd) return do_run();
    if (*report_cmd) {
      do_report();
      return kOk;
    }
    if (*validate_cmd) {
      const ValidateResult r = validate(config);
      for (const auto& f : r.failures) std::cout << "FAIL " << f << "\n";
      std::cout << r.instances << " instances checked, " << r.failures.size() << " failures\n";
      return r.failures.empty() ? kOk : kPartialFailure;
    }
    if (*render_cmd) {
      std::cout << render_prompt(config, task_from_string(render_task), render_index,
                                 format_from_string(render_format), render_pseudo);
      return kOk;
    }
    if (*all_cmd) {
      do_build();
      const int code = do_run();
      do_report();
      return code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
