// Copyright 2026 The segmetrics Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// segmetrics compute|audit|histogram|jml-check
//
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "segmetrics/io.hpp"
#include "segmetrics/jml.hpp"
#include "segmetrics/manifest.hpp"
#include "segmetrics/report.hpp"

namespace {

using namespace segmetrics;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  write_file(output, std::span<const std::uint8_t>(
                         reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct CommonFlags {
  std::string manifest;
  std::string output;
  std::string semantics;
  int bins = kDefaultHistogramBins;
  std::size_t jobs = 1;
};

ComputeOptions to_options(const CommonFlags& f) {
  ComputeOptions o;
  if (!f.semantics.empty()) o.semantics = parse_null_semantics(f.semantics);
  o.bins = f.bins;
  o.jobs = f.jobs;
  return o;
}

int cmd_compute(const CommonFlags& f, std::size_t top_worst, bool no_instances,
                const std::string& csv_dir) {
  const DatasetManifest manifest = load_manifest(f.manifest);
  ComputeOptions o = to_options(f);
  o.top_worst = top_worst;
  o.use_instances = !no_instances;
  const MetricReport report = run_compute(manifest, f.manifest, o);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  emit(report_to_json(report), f.output);
  if (!csv_dir.empty()) {
    const std::filesystem::path dir(csv_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "score_matrix.csv", score_matrix_csv(report.fine.score_matrix));
    write_text(dir / "per_class.csv", per_class_csv(report));
    write_text(dir / "worst_images.csv", worst_images_csv(report.worst_images));
    write_text(dir / "audit.csv", audit_csv(report.audit, report.class_names));
    if (report.instance) {
      write_text(dir / "instances.csv", instance_scores_csv(*report.instance, report.class_names));
    }
  }
  return 0;
}

int cmd_audit(const CommonFlags& f) {
  const DatasetManifest manifest = load_manifest(f.manifest);
  emit(audit_csv(run_audit(manifest, f.jobs), manifest.class_names), f.output);
  return 0;
}

int cmd_histogram(const CommonFlags& f) {
  const DatasetManifest manifest = load_manifest(f.manifest);
  emit(histogram_to_json(run_histogram(manifest, to_options(f))), f.output);
  return 0;
}

int cmd_jml_check(const jml::CheckOptions& options) {
  const auto results = jml::run_checks(options);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %-28s max_error=%.3e tolerance=%.1e trials=%zu\n", r.passed ? "PASS" : "FAIL",
                r.property.c_str(), r.max_error, r.tolerance, r.trials);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fine-grained segmentation metrics"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonFlags flags;
  std::size_t top_worst = 10;
  bool no_instances = false;
  std::string csv_dir;
  jml::CheckOptions jml_options;

  auto add_common = [&flags](CLI::App* sub, bool with_metrics) {
    sub->add_option("manifest", flags.manifest, "Dataset manifest (JSON)")->required();
    sub->add_option("-o,--output", flags.output, "Write to this file instead of stdout");
    sub->add_option("--jobs", flags.jobs, "Parallel image loads")
        ->envname("SEGMETRICS_JOBS")
        ->check(CLI::PositiveNumber);
    if (with_metrics) {
      sub->add_option("--semantics", flags.semantics, "NULL semantics override")
          ->check(CLI::IsMember({"ours", "csurka"}));
      sub->add_option("--bins", flags.bins, "Histogram bins")->check(CLI::PositiveNumber);
    }
  };

  auto* compute = app.add_subcommand("compute", "Compute the full metric report");
  add_common(compute, true);
  compute->add_option("--top-worst", top_worst, "Number of worst images to list")
      ->check(CLI::PositiveNumber);
  compute->add_flag("--no-instances", no_instances, "Skip instance-level metrics");
  compute->add_option("--csv", csv_dir, "Also write CSV tables into this directory");

  auto* audit = app.add_subcommand("audit", "Report image/instance label discrepancies as CSV");
  add_common(audit, false);

  auto* hist = app.add_subcommand("histogram", "Per-image IoU histogram as JSON");
  add_common(hist, true);

  auto* check = app.add_subcommand("jml-check", "Run the Jaccard metric loss property suites");
  check->add_option("--seed", jml_options.seed, "RNG seed");
  check->add_option("--trials", jml_options.trials, "Random trials per property");
  check->add_option("--gradient-trials", jml_options.gradient_trials,
                    "Random points for the gradient check");
  check->add_option("--perturb-gradient", jml_options.gradient_perturbation)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*compute) return cmd_compute(flags, top_worst, no_instances, csv_dir);
    if (*audit) return cmd_audit(flags);
    if (*hist) return cmd_histogram(flags);
    if (*check) return cmd_jml_check(jml_options);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
