#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ghpsnr/correlation.hpp"
#include "ghpsnr/distortion_lab.hpp"
#include "ghpsnr/errors.hpp"
#include "ghpsnr/geometry_metrics.hpp"
#include "ghpsnr/heatmap.hpp"
#include "ghpsnr/mos_table.hpp"
#include "ghpsnr/ply_io.hpp"
#include "ghpsnr/report.hpp"

namespace fs = std::filesystem;
using namespace ghpsnr;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kValidation = 3, kNumeric = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::map<std::string, DistanceKind> kKindNames{
    {"p2po", DistanceKind::PointToPoint}, {"d1", DistanceKind::PointToPoint},
    {"p2pl", DistanceKind::PointToPlane}, {"d2", DistanceKind::PointToPlane}};
const std::map<std::string, ReductionKind> kReductionNames{{"mse", ReductionKind::Mse},
                                                           {"gh", ReductionKind::GeneralizedHausdorff}};
const std::map<std::string, Pooling> kPoolingNames{
    {"min", Pooling::Min}, {"max", Pooling::Max}, {"avg", Pooling::Avg}, {"wavg", Pooling::WAvg}};
const std::map<std::string, Direction> kDirectionNames{{"ab", Direction::OriginalToDecoded},
                                                       {"ba", Direction::DecodedToOriginal}};

// Numeric range check with an open lower bound: (lo, hi] or (lo, hi).
CLI::Validator open_range(double lo, double hi, bool include_hi) {
  const std::string desc = "(" + std::to_string(lo) + ", " + std::to_string(hi) + (include_hi ? "]" : ")");
  return CLI::Validator(
      [=](std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v)) return "'" + s + "' is not a number";
        const bool ok = v > lo && (include_hi ? v <= hi : v < hi);
        return ok ? std::string() : "value " + s + " not in " + desc;
      },
      desc);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Payload to a file when a path is given, else to stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(path, text);
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Options shared by every command that reads an (original, decoded) pair.
struct PairOptions {
  std::string original;
  std::string decoded;
  std::string normals_policy = "use-file";
  std::size_t normals_k = kDefaultNormalNeighbors;

  void add_to(CLI::App* app) {
    app->add_option("original", original, "Reference point cloud (PLY)")->required();
    app->add_option("decoded", decoded, "Degraded point cloud (PLY)")->required();
    app->add_option("--normals", normals_policy,
                    "use-file: take normals from the PLY, estimating only missing ones; "
                    "estimate: always estimate")
        ->check(CLI::IsMember({"use-file", "estimate"}))
        ->capture_default_str();
    app->add_option("--normals-k", normals_k, "Neighbours used for normal estimation")
        ->check(CLI::Range(std::size_t{3}, std::size_t{1} << 20))
        ->capture_default_str();
  }

  CloudPair load() const {
    PointCloud a = load_ply(original);
    PointCloud b = load_ply(decoded);
    if (normals_policy == "estimate") {
      a = a.without_normals();
      b = b.without_normals();
    }
    return CloudPair(std::move(a), std::move(b), MetricOptions{normals_k});
  }
};

double resolve_peak(std::optional<double> peak, std::optional<int> precision, const CloudPair& pair) {
  if (peak) return *peak;
  if (precision) return peak_from_precision(*precision);
  for (const PointCloud* c : {&pair.original(), &pair.decoded()}) {
    if (c->precision_bits()) {
      std::cerr << "ghpsnr: signal peak from precision_bits " << *c->precision_bits() << " of '"
                << c->name() << "'\n";
      return *c->signal_peak();
    }
  }
  throw UsageError("no signal peak: pass --peak or --precision, or load a PLY carrying precision_bits");
}

QualityReportContext report_context(const CloudPair& pair, double peak, std::size_t normals_k,
                                    bool timestamp) {
  QualityReportContext ctx;
  ctx.original = {pair.original().name(), pair.original().size(), pair.original_normals()};
  ctx.decoded = {pair.decoded().name(), pair.decoded().size(), pair.decoded_normals()};
  ctx.signal_peak = peak;
  if (pair.original_normals() == NormalSource::Estimated || pair.decoded_normals() == NormalSource::Estimated) {
    ctx.normals_k = normals_k;
  }
  if (timestamp) ctx.timestamp = utc_timestamp();
  return ctx;
}

void add_peak_options(CLI::App* app, std::optional<double>& peak, std::optional<int>& precision) {
  auto* p = app->add_option("--peak", peak, "Signal peak p of the PSNR")->check(CLI::PositiveNumber);
  app->add_option("--precision", precision, "Coordinate bit depth; peak = 2^precision - 1")
      ->check(CLI::Range(1, 52))
      ->excludes(p);
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  PairOptions pair;
  std::string kind;
  std::string reduction = "mse";
  std::optional<double> per;
  std::string pooling = "max";
  std::optional<double> peak;
  std::optional<int> precision;
  bool grid = false;
  std::vector<double> per_grid;
  std::string output;
  std::string csv;
  bool no_timestamp = false;
};

int run_compare(const CompareArgs& args, const CLI::App& cmd) {
  CloudPair pair = args.pair.load();
  const double peak = resolve_peak(args.peak, args.precision, pair);

  std::vector<QualityResult> results;
  if (args.grid) {
    std::vector<DistanceKind> kinds(kAllKinds.begin(), kAllKinds.end());
    if (!args.kind.empty()) kinds = {kKindNames.at(args.kind)};
    const auto per_list =
        args.per_grid.empty() ? default_per_grid(std::max(pair.original().size(), pair.decoded().size()))
                              : args.per_grid;
    results = pair.grid(kinds, per_list, kAllPoolings, peak);
  } else {
    ReductionKind reduction = kReductionNames.at(args.reduction);
    if (args.per && cmd.count("--reduction") == 0) reduction = ReductionKind::GeneralizedHausdorff;
    if (args.per && reduction == ReductionKind::Mse) throw UsageError("--per applies only to --reduction gh");
    MetricConfig config;
    config.kind = args.kind.empty() ? DistanceKind::PointToPoint : kKindNames.at(args.kind);
    config.reduction = reduction == ReductionKind::Mse ? Reduction::mse() : Reduction::gh(args.per.value_or(100.0));
    config.pooling = kPoolingNames.at(args.pooling);
    config.signal_peak = peak;
    results.push_back(pair.evaluate(config));
  }

  const auto ctx = report_context(pair, peak, args.pair.normals_k, !args.no_timestamp);
  if (ctx.normals_k) std::cerr << "ghpsnr: normals estimated with k = " << *ctx.normals_k << "\n";
  if (!args.csv.empty()) emit(args.csv, quality_report_csv(results));
  emit(args.output, quality_report_json(results, ctx));
  return kOk;
}

// ---------------------------------------------------------------- distort

struct DistortArgs {
  std::string input;
  std::string output;
  std::string manifest;
  std::string op;
  int depth = 6;
  double sigma = 1.0;
  double fraction = 0.01;
  double magnitude = 1.0;
  std::uint64_t seed = 0;
  bool ascii = false;
};

int run_distort(const DistortArgs& args) {
  DistortionSpec spec;
  spec.seed = args.seed;
  if (args.op == "octree") {
    spec.kind = OctreePrune{args.depth};
  } else if (args.op == "jitter") {
    spec.kind = GaussianJitter{args.sigma};
  } else {
    spec.kind = OutlierInject{args.fraction, args.magnitude};
  }
  spec.validate();

  const PointCloud in = load_ply(args.input);
  const PointCloud out = apply_distortion(in, spec);
  save_ply(out, args.output, args.ascii ? PlyEncoding::Ascii : PlyEncoding::BinaryLittleEndian);

  nlohmann::ordered_json manifest;
  manifest["command"] = "distort";
  manifest["input"] = args.input;
  manifest["output"] = args.output;
  manifest["input_points"] = in.size();
  manifest["output_points"] = out.size();
  manifest["spec"] = nlohmann::ordered_json::parse(distortion_spec_to_json(spec));
  const std::string manifest_path = args.manifest.empty() ? args.output + ".json" : args.manifest;
  write_file(manifest_path, manifest.dump(2) + "\n");
  std::cerr << "ghpsnr: wrote " << out.size() << " points to '" << args.output << "'\n";
  return kOk;
}

// ---------------------------------------------------------------- profile

struct ProfileArgs {
  PairOptions pair;
  std::string kind = "p2po";
  std::string direction = "both";
  std::vector<double> per_grid;
  std::string output;
};

int run_profile(const ProfileArgs& args) {
  CloudPair pair = args.pair.load();
  const auto per_list = args.per_grid.empty()
                            ? default_per_grid(std::max(pair.original().size(), pair.decoded().size()))
                            : args.per_grid;
  std::vector<Direction> dirs;
  if (args.direction == "both") {
    dirs = {Direction::OriginalToDecoded, Direction::DecodedToOriginal};
  } else {
    dirs = {kDirectionNames.at(args.direction)};
  }
  std::vector<ProfileRow> rows;
  for (Direction d : dirs) {
    for (const auto& p : distance_profile(pair.errors(kKindNames.at(args.kind), d), per_list)) {
      rows.push_back({d, p.per, p.value});
    }
  }
  emit(args.output, profile_csv(rows));
  return kOk;
}

// ---------------------------------------------------------------- heatmap

struct HeatmapArgs {
  PairOptions pair;
  std::string kind = "p2po";
  std::string direction = "ab";
  std::string output;
  bool ascii = false;
};

int run_heatmap(const HeatmapArgs& args) {
  CloudPair pair = args.pair.load();
  const Direction dir = kDirectionNames.at(args.direction);
  const auto& errors = pair.point_errors(kKindNames.at(args.kind), dir);
  const PointCloud& query = dir == Direction::OriginalToDecoded ? pair.original() : pair.decoded();
  export_error_heatmap(query, errors, args.output, args.ascii ? PlyEncoding::Ascii : PlyEncoding::BinaryLittleEndian);
  std::cerr << "ghpsnr: heatmap of " << query.size() << " points written to '" << args.output << "'\n";
  return kOk;
}

// ---------------------------------------------------------------- correlate

struct CorrelateArgs {
  std::string mos_csv;
  std::vector<std::string> metrics;
  bool all = false;
  bool rank = false;
  std::string output;
  std::string csv;
  std::string regression_dir;
  bool no_timestamp = false;
};

int run_correlate(const CorrelateArgs& args) {
  const auto records = load_mos_table(args.mos_csv);
  const auto labels = args.all ? score_labels(records) : args.metrics;
  if (labels.empty()) throw ValidationError("'" + args.mos_csv + "' has no objective score columns");

  std::vector<CorrelationReport> reports;
  for (const auto& label : labels) {
    reports.push_back(evaluate_metric(records, label));
    if (reports.back().excluded_infinite > 0) {
      std::cerr << "ghpsnr: '" << label << "': " << reports.back().excluded_infinite
                << " infinite score(s) excluded\n";
    }
  }
  std::optional<std::vector<std::size_t>> ranking;
  if (args.rank) ranking = rank_by_plcc(reports);

  if (!args.regression_dir.empty()) {
    fs::create_directories(args.regression_dir);
    for (const auto& r : reports) {
      write_file(fs::path(args.regression_dir) / ("regression_" + r.metric_label + ".csv"), regression_csv(r));
    }
  }
  if (!args.csv.empty()) emit(args.csv, correlation_report_csv(reports));
  const std::optional<std::string> ts = args.no_timestamp ? std::nullopt : std::optional(utc_timestamp());
  emit(args.output, correlation_report_json(reports, ranking, ts));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point cloud geometry quality metrics: D1/D2 PSNR and generalized Hausdorff PSNR"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ghpsnr 0.1.0");

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Score a decoded cloud against its original");
  compare.pair.add_to(c);
  c->add_option("--kind", compare.kind, "p2po (D1) or p2pl (D2)")
      ->check(CLI::IsMember(kKindNames));
  c->add_option("--reduction", compare.reduction, "mse or gh")
      ->check(CLI::IsMember(kReductionNames));
  c->add_option("--per", compare.per, "Rank percentage for gh, in (0, 100]")
      ->check(open_range(0.0, 100.0, true));
  c->add_option("--pooling", compare.pooling, "min, max, avg or wavg")
      ->check(CLI::IsMember(kPoolingNames));
  add_peak_options(c, compare.peak, compare.precision);
  auto* grid = c->add_flag("--grid", compare.grid, "Evaluate every per x pooling, plus the MSE baseline");
  c->add_option("--per-grid", compare.per_grid, "Percentages for --grid (default: 100/N, 50, 60..95, 96..100)")
      ->check(open_range(0.0, 100.0, true))
      ->needs(grid);
  c->add_option("-o,--output", compare.output, "JSON report path (default: stdout)");
  c->add_option("--csv", compare.csv, "Also write the CSV mirror here");
  c->add_flag("--no-timestamp", compare.no_timestamp, "Omit the timestamp field");

  DistortArgs distort;
  auto* d = app.add_subcommand("distort", "Write a seeded synthetic distortion of a cloud");
  d->add_option("input", distort.input, "Input PLY")->required();
  d->add_option("-o,--output", distort.output, "Output PLY")->required();
  d->add_option("--op", distort.op, "octree, jitter or outliers")
      ->required()
      ->check(CLI::IsMember({"octree", "jitter", "outliers"}));
  d->add_option("--depth", distort.depth, "Octree depth")->check(CLI::Range(1, 21))->capture_default_str();
  d->add_option("--sigma", distort.sigma, "Jitter standard deviation per axis")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  d->add_option("--fraction", distort.fraction, "Share of points moved, in (0, 1)")
      ->check(open_range(0.0, 1.0, false))
      ->capture_default_str();
  d->add_option("--magnitude", distort.magnitude, "Outlier displacement")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  d->add_option("--seed", distort.seed, "RNG seed")->capture_default_str();
  d->add_option("--manifest", distort.manifest, "Manifest path (default: <output>.json)");
  d->add_flag("--ascii", distort.ascii, "Write ascii PLY instead of binary");

  ProfileArgs profile;
  auto* p = app.add_subcommand("profile", "Ranked squared distance per percentage, as CSV");
  profile.pair.add_to(p);
  p->add_option("--kind", profile.kind, "p2po or p2pl")
      ->check(CLI::IsMember(kKindNames));
  p->add_option("--direction", profile.direction, "ab, ba or both")
      ->check(CLI::IsMember({"ab", "ba", "both"}))
      ->capture_default_str();
  p->add_option("--per-grid", profile.per_grid, "Percentages (default: 100/N, 50, 60..95, 96..100)")
      ->check(open_range(0.0, 100.0, true));
  p->add_option("-o,--output", profile.output, "CSV path (default: stdout)");

  HeatmapArgs heat;
  auto* h = app.add_subcommand("heatmap", "Colour a cloud by its per-point error");
  heat.pair.add_to(h);
  h->add_option("--kind", heat.kind, "p2po or p2pl")
      ->check(CLI::IsMember(kKindNames));
  h->add_option("--direction", heat.direction, "ab colours the original, ba the decoded cloud")
      ->check(CLI::IsMember(kDirectionNames));
  h->add_option("-o,--output", heat.output, "Output PLY")->required();
  h->add_flag("--ascii", heat.ascii, "Write ascii PLY instead of binary");

  CorrelateArgs corr;
  auto* r = app.add_subcommand("correlate", "Correlate objective score columns with MOS");
  r->add_option("mos_csv", corr.mos_csv, "CSV with stimulus_id, mos and score columns")->required();
  auto* metric = r->add_option("-m,--metric", corr.metrics, "Score column to evaluate (repeatable)");
  r->add_flag("--all", corr.all, "Evaluate every numeric score column")->excludes(metric);
  r->add_flag("--rank", corr.rank, "Add a ranking of the columns by fitted PLCC");
  r->add_option("-o,--output", corr.output, "JSON report path (default: stdout)");
  r->add_option("--csv", corr.csv, "Also write a summary CSV here");
  r->add_option("--regression-dir", corr.regression_dir, "Write regression_<label>.csv per column here");
  r->add_flag("--no-timestamp", corr.no_timestamp, "Omit the timestamp field");

  try {
    app.parse(argc, argv);
    if (*r && corr.metrics.empty() && !corr.all) throw UsageError("correlate needs --metric or --all");
    if (*c) return run_compare(compare, *c);
    if (*d) return run_distort(distort);
    if (*p) return run_profile(profile);
    if (*h) return run_heatmap(heat);
    if (*r) return run_correlate(corr);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "ghpsnr: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "ghpsnr: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ghpsnr: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    std::cerr << "ghpsnr: invalid data: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericError& e) {
    std::cerr << "ghpsnr: numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "ghpsnr: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
