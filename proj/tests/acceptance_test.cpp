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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and trial counts are fixed here.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "segmetrics/confusion.hpp"
#include "segmetrics/fine_metrics.hpp"
#include "segmetrics/instance_metrics.hpp"
#include "segmetrics/jml.hpp"
#include "segmetrics/report.hpp"
#include "segmetrics/worst_case.hpp"
#include "test_util.hpp"

namespace segmetrics {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = true;
  std::string detail;
};

// Records the first failed expectation.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.passed) {
      out_.passed = false;
      out_.detail = what;
    }
  }
  void note(const std::string& d) {
    if (out_.passed) out_.detail = d;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  const std::string cmd = "'" SEGMETRICS_CLI_PATH "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 65536> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

InstanceCell cell(Count tp, Count fn, InstanceId id) {
  InstanceCell c;
  c.image_id = "img";
  c.class_id = 1;
  c.instance_id = id;
  c.tp = tp;
  c.fn = fn;
  return c;
}

// 1. The 4-pixel example through the CLI, both semantics.
Outcome four_pixel() {
  Check ck;
  testing::TempDir dir;
  const auto m = quoted(testing::four_pixel_fixture(dir.path()));
  const auto t0 = Clock::now();
  const CliResult ours = cli("compute " + m + " --semantics ours");
  const CliResult csurka = cli("compute " + m + " --semantics csurka");
  const double secs = seconds_since(t0);
  ck.expect(ours.exit_code == 0 && csurka.exit_code == 0, "compute failed");
  if (!ck.result().passed) return ck.result();
  const double a = json::parse(ours.out)["metrics"]["miou_c"].get<double>();
  const double b = json::parse(csurka.out)["metrics"]["miou_c"].get<double>();
  ck.expect(fmt("%.2f", a) == "50.00", "ours miou_c " + fmt("%.2f", a));
  ck.expect(fmt("%.2f", b) == "25.00", "csurka miou_c " + fmt("%.2f", b));
  ck.expect(secs < 1.0, "runtime " + fmt("%.3f s", secs));
  ck.note("ours=" + fmt("%.2f", a) + " csurka=" + fmt("%.2f", b) + " runtime=" + fmt("%.3fs", secs));
  return ck.result();
}

// 2. Worked extremal-allocation examples.
Outcome extremal_examples() {
  Check ck;
  const std::vector<InstanceCell> a{cell(1, 0, 1), cell(10, 0, 2)};
  const auto mn = distribute_fp_extremal(a, 2, Sense::kMin);
  ck.expect(mn.fp == std::vector<Count>{2, 0}, "min allocation");
  ck.expect(std::abs(mn.total - 4.0 / 3.0) <= 1e-12, "min total " + fmt("%.17g", mn.total));
  const std::vector<InstanceCell> b{cell(10, 0, 1), cell(10, 0, 2)};
  const auto mx = distribute_fp_extremal(b, 10, Sense::kMax);
  ck.expect(mx.fp == std::vector<Count>{10, 0} || mx.fp == std::vector<Count>{0, 10},
            "max allocation is not a vertex");
  ck.expect(std::abs(mx.total - 1.5) <= 1e-12, "max total " + fmt("%.17g", mx.total));
  ck.note("min=(2,0) total=" + fmt("%.15f", mn.total) + " max total=" + fmt("%.15f", mx.total));
  return ck.result();
}

// Exact fractions for the enumeration oracle.
struct Fraction {
  std::int64_t num = 0, den = 1;
  Fraction operator+(const Fraction& o) const {
    const std::int64_t n = num * o.den + o.num * den, d = den * o.den, g = std::gcd(n, d);
    return {n / g, d / g};
  }
  bool operator<(const Fraction& o) const { return num * o.den < o.num * den; }
  bool operator==(const Fraction& o) const { return num * o.den == o.num * den; }
};

Fraction total_of(const std::vector<InstanceCell>& cells, const std::vector<Count>& fp) {
  Fraction t;
  for (std::size_t k = 0; k < cells.size(); ++k) t = t + Fraction{cells[k].tp, cells[k].size() + fp[k]};
  return t;
}

// 3. Exhaustive comparison against enumeration of all integer allocations.
Outcome extremal_oracle() {
  Check ck;
  std::vector<std::pair<Count, Count>> shapes;
  for (Count s = 1; s <= 5; ++s)
    for (Count tp = 0; tp <= s; ++tp) shapes.push_back({tp, s - tp});
  std::size_t configs = 0;
  std::function<void(std::vector<InstanceCell>&)> visit = [&](std::vector<InstanceCell>& cells) {
    for (Count fp = 0; fp <= 6; ++fp) {
      Fraction lo, hi;
      bool first = true;
      std::vector<Count> f(cells.size());
      std::function<void(std::size_t, Count)> rec = [&](std::size_t k, Count left) {
        if (k + 1 == cells.size()) {
          f[k] = left;
          const Fraction t = total_of(cells, f);
          if (first || t < lo) lo = t;
          if (first || hi < t) hi = t;
          first = false;
          return;
        }
        for (Count x = 0; x <= left; ++x) f[k] = x, rec(k + 1, left - x);
      };
      rec(0, fp);
      const auto mn = distribute_fp_extremal(cells, fp, Sense::kMin);
      const auto mx = distribute_fp_extremal(cells, fp, Sense::kMax);
      const bool sums = std::accumulate(mn.fp.begin(), mn.fp.end(), Count{0}) == fp &&
                        std::accumulate(mx.fp.begin(), mx.fp.end(), Count{0}) == fp;
      ck.expect(sums && total_of(cells, mn.fp) == lo && total_of(cells, mx.fp) == hi,
                "mismatch at K=" + std::to_string(cells.size()) + " fp=" + std::to_string(fp));
      ++configs;
    }
  };
  for (const auto& a : shapes) {
    std::vector<InstanceCell> one{cell(a.first, a.second, 1)};
    visit(one);
    for (const auto& b : shapes) {
      std::vector<InstanceCell> two{cell(a.first, a.second, 1), cell(b.first, b.second, 2)};
      visit(two);
      for (const auto& c : shapes) {
        std::vector<InstanceCell> three{cell(a.first, a.second, 1), cell(b.first, b.second, 2),
                                        cell(c.first, c.second, 3)};
        visit(three);
      }
    }
  }
  ck.note(std::to_string(configs) + " configurations, exact rational match");
  return ck.result();
}

// 4. continuous Min <= proportional <= Max on random configurations.
Outcome sandwich() {
  Check ck;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kd(1, 8);
  std::uniform_int_distribution<Count> sd(1, 5000), fpd(0, 20000);
  double worst = -1e300;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<InstanceCell> cells;
    const int k = kd(rng);
    for (int i = 0; i < k; ++i) {
      const Count s = sd(rng);
      const Count tp = std::uniform_int_distribution<Count>(0, s)(rng);
      cells.push_back(cell(tp, s - tp, static_cast<InstanceId>(i + 1)));
    }
    const Count fp = fpd(rng);
    const double lo = distribute_fp_min_continuous(cells, static_cast<double>(fp)).total;
    const double prop = distribute_fp_proportional(cells, static_cast<double>(fp)).total;
    const double hi = distribute_fp_extremal(cells, fp, Sense::kMax).total;
    worst = std::max({worst, lo - prop, prop - hi});
    ck.expect(lo <= prop + 1e-9 && prop <= hi + 1e-9, "violated at trial " + std::to_string(trial));
  }
  ck.note("10000 configurations, max violation " + fmt("%.3e", std::max(worst, 0.0)) +
          " (slack 1e-9)");
  return ck.result();
}

// 5. Quantile monotonicity, floor rule and q=100.
Outcome quantiles() {
  Check ck;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(1, 200);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> v(len(rng));
    for (double& x : v) x = u(rng);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    double prev = -1.0;
    for (int q = 1; q <= 100; ++q) {
      const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         std::floor(v.size() * (q / 100.0) + 1e-9)));
      const std::size_t n_exact = std::max<std::size_t>(1, v.size() * q / 100);
      const double direct =
          std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(n_exact), 0.0) /
          static_cast<double>(n_exact);
      const double m = worst_case_mean(v, q);
      ck.expect(n == n_exact && worst_case_count(v.size(), q) == n_exact, "floor rule");
      ck.expect(std::abs(m - direct) <= 1e-12, "direct formula");
      ck.expect(m >= prev, "monotonicity at q=" + std::to_string(q));
      prev = m;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    const auto r = quantile_suite({v});
    ck.expect(std::abs(r.per_class_q.at(100)[0].value() - mean) <= 1e-12, "q100 != mean");
  }
  ck.note("10000 lists, q=1..100");
  return ck.result();
}

// 6. The NULL semantics table, written out case by case.
Outcome null_table() {
  Check ck;
  const std::array<ConfusionCell, 4> cases{ConfusionCell{2, 1, 1}, ConfusionCell{0, 0, 0},
                                           ConfusionCell{0, 0, 3}, ConfusionCell{0, 5, 0}};
  // expected[case][mode][semantics]; -1 encodes NULL.
  const double expected[4][2][2] = {
      {{0.5, 0.5}, {0.5, 0.5}},    // present in both
      {{-1, -1}, {1.0, 1.0}},      // present in neither
      {{0.0, 0.0}, {0.0, 0.0}},    // ground truth only
      {{-1, 0.0}, {0.0, 0.0}},     // prediction only
  };
  const ScoringMode modes[2] = {ScoringMode::kMultiClass, ScoringMode::kBinaryForeground};
  const NullSemantics sems[2] = {NullSemantics::kOurs, NullSemantics::kCsurka};
  int checked = 0;
  for (int c = 0; c < 4; ++c)
    for (int m = 0; m < 2; ++m)
      for (int s = 0; s < 2; ++s) {
        const Score got = score_cell(cases[c], modes[m], sems[s]);
        const double want = expected[c][m][s];
        const bool ok = want < 0 ? got.is_null() : got == Score::of(want);
        ck.expect(ok, "case " + std::to_string(c + 1) + " mode " + std::to_string(m) +
                          " semantics " + std::to_string(s));
        ++checked;
      }
  ck.note(std::to_string(checked) + " cells match");
  return ck.result();
}

// 7. JML properties, checked with oracles written here.
Outcome jml_suites() {
  Check ck;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pd(1, 16);
  std::bernoulli_distribution coin(0.5);
  double eq_err = 0, tri_slack = 0, grad_err = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const int p = pd(rng);
    std::vector<double> x(p), y(p), z(p), b(p);
    for (int i = 0; i < p; ++i) x[i] = u(rng), y[i] = u(rng), z[i] = u(rng), b[i] = coin(rng);
    double dot = 0, nx = 0, nb = 0;
    for (int i = 0; i < p; ++i) dot += x[i] * b[i], nx += x[i], nb += b[i];
    const double sj = nx + nb - dot > 0 ? 1.0 - dot / (nx + nb - dot) : 0.0;
    eq_err = std::max(eq_err, std::abs(jml::forward(x, b) - sj));
    tri_slack = std::max(tri_slack, jml::forward(x, z) - jml::forward(x, y) - jml::forward(y, z));
  }
  const double h = 1e-6;
  std::uniform_real_distribution<double> inner(0.05, 0.95);
  for (int trial = 0; trial < 1000; ++trial) {
    const int p = pd(rng);
    std::vector<double> x(p), y(p);
    for (int i = 0; i < p; ++i) {
      x[i] = inner(rng);
      do y[i] = inner(rng); while (std::abs(x[i] - y[i]) < 1e-3);
    }
    const auto g = jml::gradient(x, y);
    double err = 0, scale = 0;
    for (int i = 0; i < p; ++i) {
      auto up = x, down = x;
      up[i] += h;
      down[i] -= h;
      const double fd = (jml::forward(up, y) - jml::forward(down, y)) / (2 * h);
      err = std::max(err, std::abs(g[i] - fd));
      scale = std::max(scale, std::abs(fd));
    }
    grad_err = std::max(grad_err, err / std::max(scale, 1e-12));
  }
  // The library's own suite, as shipped behind `jml-check`.
  bool builtin = true;
  for (const auto& r : jml::run_checks({})) builtin = builtin && r.passed;
  const double secs = seconds_since(t0);
  ck.expect(eq_err <= 1e-12, "binary equivalence " + fmt("%.3e", eq_err));
  ck.expect(tri_slack <= 1e-12, "triangle slack " + fmt("%.3e", tri_slack));
  ck.expect(grad_err <= 1e-5, "gradient rel error " + fmt("%.3e", grad_err));
  ck.expect(builtin, "jml-check suite failed");
  ck.expect(secs < 30.0, "runtime " + fmt("%.2f s", secs));
  ck.note("equiv=" + fmt("%.2e", eq_err) + " triangle=" + fmt("%.2e", std::max(tri_slack, 0.0)) +
          " grad=" + fmt("%.2e", grad_err) + " runtime=" + fmt("%.2fs", secs));
  return ck.result();
}

// 8. Confusion conservation and permutation invariance.
Outcome confusion_invariants() {
  Check ck;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::uint32_t> dim(1, 12);
  std::uniform_int_distribution<ClassId> ncls(1, 8);
  std::vector<ImageConfusion> all;
  const ClassId c = 8;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint32_t w = dim(rng), h = dim(rng);
    const ClassId used = ncls(rng);
    const auto gt = testing::random_labels(rng, w * h, used, 0.1, 255);
    const auto pred = testing::random_labels(rng, w * h, used, 0.05, 255);
    auto ic = confuse_image("i" + std::to_string(trial), testing::make_map(w, h, gt),
                            testing::make_map(w, h, pred), c);
    Count valid = 0, valid_pred = 0, tp_fn = 0, tp_fp = 0;
    for (std::size_t p = 0; p < gt.size(); ++p) {
      valid += gt[p] != 255;
      valid_pred += gt[p] != 255 && pred[p] != 255;
    }
    for (const auto& x : ic.cells) tp_fn += x.tp + x.fn, tp_fp += x.tp + x.fp;
    ck.expect(ic.cells == testing::brute_force_confusion(gt, pred, c, 255), "oracle mismatch");
    ck.expect(tp_fn == valid && tp_fp == valid_pred, "conservation");
    all.push_back(std::move(ic));
  }
  const auto totals = accumulate(all, c).totals;
  for (int k = 0; k < 20; ++k) {
    std::shuffle(all.begin(), all.end(), rng);
    ck.expect(accumulate(all, c).totals == totals, "permutation changed totals");
  }
  ck.note("1000 label-map pairs, 20 permutations");
  return ck.result();
}

// 9. One giant correct object plus nine small missed ones.
Outcome size_bias() {
  Check ck;
  testing::TempDir dir;
  std::vector<testing::FixtureImage> images;
  const std::uint32_t w = 64, h = 64;
  std::vector<std::uint32_t> gt(w * h, 0), pred(w * h, 0);
  for (std::uint32_t i = 0; i < 3000; ++i) gt[i] = pred[i] = 1;
  images.push_back({"giant", w, h, gt, pred, {}, {}});
  for (int k = 0; k < 9; ++k) {
    std::vector<std::uint32_t> g(w * h, 0), p(w * h, 0);
    for (std::uint32_t i = 0; i < 10; ++i) g[100 + i] = 1;
    images.push_back({"small" + std::to_string(k), w, h, g, p, {}, {}});
  }
  const auto path = testing::write_fixture(dir.path(), testing::manifest_proto(2), images);
  const MetricReport r = run_compute(load_manifest(path), path.string(), {});
  const double d = r.pixel.iou_d[1].value(), c = r.fine.iou_c_per_class[1].value();
  ck.expect(d > c, "iou_d " + fmt("%.4f", d) + " <= iou_c " + fmt("%.4f", c));
  ck.note("iou_d=" + fmt("%.4f", d) + " > iou_c=" + fmt("%.4f", c));
  return ck.result();
}

// 10. --jobs 1 vs --jobs 8 on 100 images at 256x256.
Outcome determinism() {
  Check ck;
  testing::TempDir dir;
  std::mt19937_64 rng(10);
  const std::uint32_t w = 256, h = 256;
  DatasetManifest m = testing::manifest_proto(8);
  m.thing_classes = std::vector<ClassId>{6, 7};
  std::vector<testing::FixtureImage> images;
  std::uniform_int_distribution<int> cls(0, 5), shift(-3, 3);
  for (int i = 0; i < 100; ++i) {
    testing::FixtureImage img;
    img.id = "img" + std::to_string(1000 + i);
    img.width = w;
    img.height = h;
    img.gt.resize(w * h);
    img.instances.assign(w * h, 0);
    // Vertical stripes of stuff classes, plus two square objects.
    std::vector<int> stripe(8);
    for (int& s : stripe) s = cls(rng);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) img.gt[y * w + x] = stripe[x / 32];
    for (InstanceId k = 1; k <= 2; ++k) {
      const std::uint32_t x0 = 20 + 100 * (k - 1) + i % 20, y0 = 30 + i % 50, side = 10 + 7 * k + i % 30;
      for (std::uint32_t y = y0; y < y0 + side; ++y)
        for (std::uint32_t x = x0; x < x0 + side; ++x) {
          img.gt[y * w + x] = 5 + k;
          img.instances[y * w + x] = k;
        }
      img.instance_classes[k] = 5 + k;
    }
    img.pred = img.gt;
    const int dx = shift(rng);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        const int sx = std::clamp(static_cast<int>(x) + dx, 0, static_cast<int>(w) - 1);
        img.pred[y * w + x] = img.gt[y * w + static_cast<std::uint32_t>(sx)];
      }
    for (int n = 0; n < 500; ++n) img.pred[rng() % (w * h)] = static_cast<std::uint32_t>(cls(rng));
    images.push_back(std::move(img));
  }
  const auto path = quoted(testing::write_fixture(dir.path(), m, images));
  const auto t0 = Clock::now();
  const CliResult one = cli("compute " + path + " --jobs 1");
  const double t_one = seconds_since(t0);
  const auto t1 = Clock::now();
  const CliResult eight = cli("compute " + path + " --jobs 8");
  const double t_eight = seconds_since(t1);
  ck.expect(one.exit_code == 0 && eight.exit_code == 0, "compute failed");
  ck.expect(!one.out.empty() && one.out == eight.out, "reports differ");
  ck.expect(t_one + t_eight < 10.0, "runtime " + fmt("%.2f s", t_one + t_eight));
  ck.note(std::to_string(one.out.size()) + " identical bytes, jobs1=" + fmt("%.2fs", t_one) +
          " jobs8=" + fmt("%.2fs", t_eight));
  return ck.result();
}

// 11. Both audit directions plus a consistent fixture.
Outcome audit() {
  Check ck;
  const std::string header = "image_id,class,instance_id,reason\n";
  testing::TempDir a, b, c;
  const auto inst = cli("audit " + quoted(testing::audit_fixture(a.path(), testing::AuditCase::kInstanceOnly, false)));
  const auto img = cli("audit " + quoted(testing::audit_fixture(b.path(), testing::AuditCase::kImageOnly, false)));
  const auto ok = cli("audit " + quoted(testing::audit_fixture(c.path(), testing::AuditCase::kConsistent, false)));
  ck.expect(inst.exit_code == 0 && inst.out == header + "img,class3,1,1\n", "reason 1 row: " + inst.out);
  ck.expect(img.exit_code == 0 && img.out == header + "img,class5,,2\n", "reason 2 row: " + img.out);
  ck.expect(ok.exit_code == 0 && ok.out == header, "false positives: " + ok.out);
  ck.note("reason 1 and 2 detected, consistent fixture clean");
  return ck.result();
}

}  // namespace
}  // namespace segmetrics

int main() {
  using namespace segmetrics;
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"AC1  four-pixel example via compute", four_pixel},
      {"AC2  extremal allocation examples", extremal_examples},
      {"AC3  extremal oracle equivalence", extremal_oracle},
      {"AC4  sum-bound sandwich", sandwich},
      {"AC5  quantile monotonicity and floor rule", quantiles},
      {"AC6  NULL semantics table", null_table},
      {"AC7  JML suites", jml_suites},
      {"AC8  confusion conservation and permutation", confusion_invariants},
      {"AC9  size-bias direction", size_bias},
      {"AC10 determinism across --jobs", determinism},
      {"AC11 audit fixtures", audit},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-46s %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failures += !o.passed;
  }
  return failures == 0 ? 0 : 1;
}
