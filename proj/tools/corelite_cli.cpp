// SPDX-License-Identifier: Apache-2.0
//
// corelite: batch front end over the C API.
//
//   exit 0  success
//   exit 1  data or content error (bad file, k > n, missing scale, ...)
//   exit 2  usage error (unknown flag, k < 1, bad CORELITE_THREADS, ...)

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "corelite/corelite.h"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(corelite_status status) {
  if (status != CORELITE_OK) throw DataError(corelite_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Embeddings = Handle<corelite_embeddings, corelite_embeddings_free>;
using Selection = Handle<corelite_selection, corelite_selection_free>;
using TextIndex = Handle<corelite_text_index, corelite_text_index_free>;
using ImageIndex = Handle<corelite_image_index, corelite_image_index_free>;
using Report = Handle<corelite_report, corelite_report_free>;
using Scores = Handle<corelite_scores, corelite_scores_free>;
using Scales = Handle<corelite_scales, corelite_scales_free>;

std::string take_string(char* s) {
  std::string out(s);
  corelite_string_free(s);
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

unsigned threads_from_env() {
  const char* raw = std::getenv("CORELITE_THREADS");
  if (!raw || !*raw) return 0;
  try {
    std::size_t used = 0;
    const long v = std::stol(raw, &used);
    if (used != std::string(raw).size() || v < 0 || v > 4096) throw std::invalid_argument(raw);
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw UsageError(std::string("CORELITE_THREADS must be a non-negative integer, got '") + raw +
                     "'");
  }
}

/// Records what a run used: every resolved parameter and a digest of each
/// input file.
class Manifest {
 public:
  explicit Manifest(std::string subcommand) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["tool_version"] = corelite_version();
    doc_["params"] = json::object();
    doc_["inputs"] = json::object();
    doc_["seed"] = nullptr;
  }

  template <typename T>
  void param(const std::string& name, const T& value) {
    doc_["params"][name] = value;
  }

  void seed(std::uint64_t seed) { doc_["seed"] = seed; }

  void input(const std::string& flag, const std::string& path) {
    char digest[65];
    check(corelite_file_sha256(path.c_str(), digest));
    doc_["inputs"][flag] = {{"path", path}, {"sha256", digest}};
  }

  void emit(const std::string& path) const {
    if (path.empty()) {
      std::cerr << "manifest: " << doc_.dump() << "\n";
    } else {
      write_text(path, doc_.dump(2) + "\n");
    }
  }

 private:
  json doc_;
};

std::string format_real(double v) { return json(v).dump(); }

// ---- subcommands ----------------------------------------------------------

struct SelectArgs {
  std::string embeddings, text_embeddings, ids, out, manifest, dataset;
  long long k = -1;
  std::uint64_t seed = 0;
  std::string normalize = "on";
};

int run_select(const SelectArgs& a) {
  std::size_t k = 0;
  if (a.k != -1) {
    if (a.k < 1) throw UsageError("k must be ≥ 1");
    k = static_cast<std::size_t>(a.k);
  } else if (!a.dataset.empty()) {
    if (corelite_default_lite_size(a.dataset.c_str(), &k) != CORELITE_OK)
      throw UsageError(corelite_last_error());
  } else {
    throw UsageError("--k is required unless --dataset names a known benchmark");
  }
  const bool normalize = a.normalize == "on";
  Manifest manifest("select");
  manifest.param("k", k);
  manifest.param("normalize", a.normalize);
  manifest.param("metric", "l2");
  manifest.param("dataset", a.dataset);
  manifest.param("out", a.out);
  manifest.seed(a.seed);
  manifest.input("embeddings", a.embeddings);
  manifest.input("ids", a.ids);

  corelite_embeddings* raw = nullptr;
  check(corelite_embeddings_load(a.embeddings.c_str(), a.ids.c_str(), &raw));
  Embeddings image(raw);
  Embeddings combined;
  if (!a.text_embeddings.empty()) {
    manifest.input("text-embeddings", a.text_embeddings);
    check(corelite_embeddings_load(a.text_embeddings.c_str(), a.ids.c_str(), &raw));
    Embeddings text(raw);
    check(corelite_embeddings_concat(image.get(), text.get(), normalize ? 1 : 0, &raw));
    combined.reset(raw);
  } else if (normalize) {
    check(corelite_embeddings_normalize(image.get(), &raw));
    combined.reset(raw);
  } else {
    combined = std::move(image);
  }

  corelite_selection* sel = nullptr;
  check(corelite_select(combined.get(), k, a.seed, threads_from_env(), &sel));
  Selection selection(sel);
  char* text = nullptr;
  check(corelite_selection_to_json(selection.get(), combined.get(), &text));
  write_text(a.out, take_string(text));
  manifest.emit(a.manifest);
  std::cout << "k=" << k << " coverage_radius=" << format_real(corelite_selection_radius(sel))
            << "\n";
  return 0;
}

struct GapArgs {
  std::string scores, selection, out, manifest;
};

int run_gap(const GapArgs& a) {
  Manifest manifest("gap");
  manifest.param("out", a.out);
  manifest.input("scores", a.scores);
  manifest.input("selection", a.selection);

  std::ifstream in(a.selection);
  if (!in) throw DataError("cannot open " + a.selection);
  json sel;
  try {
    sel = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(a.selection + ": malformed selection JSON (" + e.what() + ")");
  }
  if (!sel.contains("center_ids") || !sel["center_ids"].is_array())
    throw DataError(a.selection + ": missing center_ids");
  std::vector<std::string> ids;
  for (const auto& id : sel["center_ids"]) {
    if (!id.is_string()) throw DataError(a.selection + ": center_ids must be strings");
    ids.push_back(id.get<std::string>());
  }
  std::vector<const char*> ptrs;
  for (const auto& id : ids) ptrs.push_back(id.c_str());

  corelite_scores* raw = nullptr;
  check(corelite_scores_load(a.scores.c_str(), &raw));
  Scores scores(raw);
  char* text = nullptr;
  check(corelite_gap(scores.get(), ptrs.data(), ptrs.size(), &text));
  write_text(a.out, take_string(text));
  manifest.emit(a.manifest);
  return 0;
}

struct IndexTextArgs {
  std::string train, out, manifest, key_mode = "exact";
  std::size_t n = 8;
  std::uint32_t freq_threshold = 10;
};

int run_index_text(const IndexTextArgs& a) {
  Manifest manifest("index-text");
  manifest.param("n", a.n);
  manifest.param("freq_threshold", a.freq_threshold);
  manifest.param("key_mode", a.key_mode);
  manifest.param("out", a.out);
  manifest.input("train", a.train);
  corelite_text_index* raw = nullptr;
  check(corelite_text_index_build(a.train.c_str(), a.n, a.freq_threshold,
                                  a.key_mode == "hashed" ? CORELITE_KEYS_HASHED : CORELITE_KEYS_EXACT,
                                  threads_from_env(), &raw));
  TextIndex index(raw);
  check(corelite_text_index_save(index.get(), a.out.c_str()));
  manifest.emit(a.manifest);
  std::cout << "ngrams=" << corelite_text_index_size(raw)
            << " meaningless=" << corelite_text_index_meaningless(raw) << "\n";
  return 0;
}

struct ScanTextArgs {
  std::string index, bench, report, manifest;
  double ratio_threshold = 0.75;
  std::optional<std::size_t> n;
};

int run_scan_text(const ScanTextArgs& a) {
  Manifest manifest("scan-text");
  manifest.param("ratio_threshold", a.ratio_threshold);
  manifest.param("report", a.report);
  manifest.input("index", a.index);
  manifest.input("bench", a.bench);
  corelite_text_index* raw = nullptr;
  check(corelite_text_index_load(a.index.c_str(), &raw));
  TextIndex index(raw);
  const std::size_t built_n = corelite_text_index_n(raw);
  if (a.n && *a.n != built_n)
    throw DataError("n mismatch: index built with n=" + std::to_string(built_n) +
                    ", scan requested n=" + std::to_string(*a.n));
  manifest.param("n", built_n);
  corelite_report* rep = nullptr;
  check(corelite_scan_text(raw, a.bench.c_str(), a.ratio_threshold, threads_from_env(), &rep));
  Report report(rep);
  char* text = nullptr;
  check(corelite_report_to_json(rep, &text));
  write_text(a.report, take_string(text));
  manifest.emit(a.manifest);
  std::cout << "text_overlap_pct=" << format_real(corelite_report_text_pct(rep)) << "\n";
  return 0;
}

struct IndexImageArgs {
  std::string train, out, manifest;
};

int run_index_image(const IndexImageArgs& a) {
  Manifest manifest("index-image");
  manifest.param("n", 8);
  manifest.param("sequence_length", 32);
  manifest.param("out", a.out);
  manifest.input("train", a.train);
  corelite_image_index* raw = nullptr;
  check(corelite_image_index_build(a.train.c_str(), &raw));
  ImageIndex index(raw);
  check(corelite_image_index_save(raw, a.out.c_str()));
  manifest.emit(a.manifest);
  std::cout << "windows=" << corelite_image_index_size(raw) << "\n";
  return 0;
}

struct ScanImageArgs {
  std::string index, bench, report, manifest;
};

int run_scan_image(const ScanImageArgs& a) {
  Manifest manifest("scan-image");
  manifest.param("n", 8);
  manifest.param("report", a.report);
  manifest.input("index", a.index);
  manifest.input("bench", a.bench);
  corelite_image_index* raw = nullptr;
  check(corelite_image_index_load(a.index.c_str(), &raw));
  ImageIndex index(raw);
  corelite_report* rep = nullptr;
  check(corelite_scan_image(raw, a.bench.c_str(), threads_from_env(), &rep));
  Report report(rep);
  char* text = nullptr;
  check(corelite_report_to_json(rep, &text));
  write_text(a.report, take_string(text));
  manifest.emit(a.manifest);
  std::cout << "image_overlap_pct=" << format_real(corelite_report_image_pct(rep)) << "\n";
  return 0;
}

struct AggregateArgs {
  std::string scores, scales, out, manifest, weighted = "off";
};

int run_aggregate(const AggregateArgs& a) {
  Manifest manifest("aggregate");
  manifest.param("weighted", a.weighted);
  manifest.param("out", a.out);
  manifest.input("scores", a.scores);
  if (!a.scales.empty()) manifest.input("scales", a.scales);
  corelite_scores* raw = nullptr;
  check(corelite_scores_load(a.scores.c_str(), &raw));
  Scores scores(raw);
  Scales scales;
  if (!a.scales.empty()) {
    corelite_scales* s = nullptr;
    check(corelite_scales_load(a.scales.c_str(), &s));
    scales.reset(s);
  }
  char* text = nullptr;
  check(corelite_aggregate(scores.get(), scales.get(),
                           a.weighted == "on" ? CORELITE_INSTANCE_WEIGHTED : CORELITE_UNWEIGHTED,
                           &text));
  write_text(a.out, take_string(text));
  manifest.emit(a.manifest);
  return 0;
}

struct CorrelateArgs {
  std::string full, lite, out, manifest, method = "pearson";
};

int run_correlate(const CorrelateArgs& a) {
  Manifest manifest("correlate");
  manifest.param("method", a.method);
  manifest.param("out", a.out);
  manifest.input("full", a.full);
  manifest.input("lite", a.lite);
  corelite_scores* raw = nullptr;
  check(corelite_scores_load(a.full.c_str(), &raw));
  Scores full(raw);
  check(corelite_scores_load(a.lite.c_str(), &raw));
  Scores lite(raw);
  char* text = nullptr;
  check(corelite_correlate(full.get(), lite.get(),
                           a.method == "spearman" ? CORELITE_SPEARMAN : CORELITE_PEARSON, &text));
  write_text(a.out, take_string(text));
  manifest.emit(a.manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corelite: lite benchmark selection, contamination scanning and score aggregation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(corelite_version()));
  const auto on_off = CLI::IsMember({"on", "off"});

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Pick a lite subset with k-center greedy");
  select->add_option("--embeddings", sel.embeddings, "EMB1 embedding file (image or sole modality)")
      ->required()->check(CLI::ExistingFile);
  select->add_option("--text-embeddings", sel.text_embeddings, "Second modality, concatenated after the first")
      ->check(CLI::ExistingFile);
  select->add_option("--ids", sel.ids, "Sidecar id file, one id per line")->required()->check(CLI::ExistingFile);
  select->add_option("--k", sel.k, "Number of centers");
  select->add_option("--dataset", sel.dataset, "Take k from the published lite size of this benchmark");
  select->add_option("--seed", sel.seed, "Seed for the first center")->capture_default_str();
  select->add_option("--normalize", sel.normalize, "Unit-normalize each modality")->check(on_off)->capture_default_str();
  select->add_option("--out", sel.out, "Selection JSON path")->required();
  select->add_option("--manifest", sel.manifest, "Manifest JSON path (default: standard error)");

  GapArgs gap;
  auto* gap_cmd = app.add_subcommand("gap", "Mean-score gap between the full set and a selection");
  gap_cmd->add_option("--scores", gap.scores, "Per-instance scores CSV (dataset column = instance id)")
      ->required()->check(CLI::ExistingFile);
  gap_cmd->add_option("--selection", gap.selection, "Selection JSON from `select`")->required()->check(CLI::ExistingFile);
  gap_cmd->add_option("--out", gap.out, "Output JSON path (default: standard output)");
  gap_cmd->add_option("--manifest", gap.manifest, "Manifest JSON path");

  IndexTextArgs itext;
  auto* index_text = app.add_subcommand("index-text", "Build a word n-gram index from training text");
  index_text->add_option("--train", itext.train, "Training corpus (JSONL id/text)")->required()->check(CLI::ExistingFile);
  index_text->add_option("--n", itext.n, "n-gram length")->check(CLI::Range(1, 65535))->capture_default_str();
  index_text->add_option("--freq-threshold", itext.freq_threshold, "n-grams seen more often are meaningless")
      ->check(CLI::Range(1u, 0xFFFFFFFFu))->capture_default_str();
  index_text->add_option("--key-mode", itext.key_mode, "exact or hashed (64-bit FNV-1a) keys")
      ->check(CLI::IsMember({"exact", "hashed"}))->capture_default_str();
  index_text->add_option("--out", itext.out, "Index file path")->required();
  index_text->add_option("--manifest", itext.manifest, "Manifest JSON path");

  ScanTextArgs stext;
  auto* scan_text = app.add_subcommand("scan-text", "Scan benchmark text against an n-gram index");
  scan_text->add_option("--index", stext.index, "Index from index-text")->required()->check(CLI::ExistingFile);
  scan_text->add_option("--bench", stext.bench, "Benchmark corpus (JSONL id/text)")->required()->check(CLI::ExistingFile);
  scan_text->add_option("--ratio-threshold", stext.ratio_threshold, "Max meaningless-token ratio of a counted n-gram")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  scan_text->add_option("--n", stext.n, "Expected n; must match the index")->check(CLI::PositiveNumber);
  scan_text->add_option("--report", stext.report, "Report JSON path")->required();
  scan_text->add_option("--manifest", stext.manifest, "Manifest JSON path");

  IndexImageArgs iimage;
  auto* index_image = app.add_subcommand("index-image", "Build an 8-gram index from 32-token image sequences");
  index_image->add_option("--train", iimage.train, "Training token corpus (JSONL id/tokens)")
      ->required()->check(CLI::ExistingFile);
  index_image->add_option("--out", iimage.out, "Index file path")->required();
  index_image->add_option("--manifest", iimage.manifest, "Manifest JSON path");

  ScanImageArgs simage;
  auto* scan_image = app.add_subcommand("scan-image", "Scan benchmark image tokens against an 8-gram index");
  scan_image->add_option("--index", simage.index, "Index from index-image")->required()->check(CLI::ExistingFile);
  scan_image->add_option("--bench", simage.bench, "Benchmark token corpus")->required()->check(CLI::ExistingFile);
  scan_image->add_option("--report", simage.report, "Report JSON path")->required();
  scan_image->add_option("--manifest", simage.manifest, "Manifest JSON path");

  AggregateArgs agg;
  auto* aggregate = app.add_subcommand("aggregate", "Normalize scores to 0..100 and average per model");
  aggregate->add_option("--scores", agg.scores, "Scores CSV")->required()->check(CLI::ExistingFile);
  aggregate->add_option("--scales", agg.scales, "Per-dataset scales JSON")->check(CLI::ExistingFile);
  aggregate->add_option("--weighted", agg.weighted, "Weight datasets by instance count")->check(on_off)->capture_default_str();
  aggregate->add_option("--out", agg.out, "Output JSON path (default: standard output)");
  aggregate->add_option("--manifest", agg.manifest, "Manifest JSON path");

  CorrelateArgs corr;
  auto* correlate = app.add_subcommand("correlate", "Correlate full and lite scores per dataset");
  correlate->add_option("--full", corr.full, "Full-set scores CSV")->required()->check(CLI::ExistingFile);
  correlate->add_option("--lite", corr.lite, "Lite-set scores CSV")->required()->check(CLI::ExistingFile);
  correlate->add_option("--method", corr.method, "pearson or spearman")
      ->check(CLI::IsMember({"pearson", "spearman"}))->capture_default_str();
  correlate->add_option("--out", corr.out, "Output JSON path (default: standard output)");
  correlate->add_option("--manifest", corr.manifest, "Manifest JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "corelite: " << e.what() << "\n";
    return 2;
  }

  try {
    threads_from_env();
    if (*select) return run_select(sel);
    if (*gap_cmd) return run_gap(gap);
    if (*index_text) return run_index_text(itext);
    if (*scan_text) return run_scan_text(stext);
    if (*index_image) return run_index_image(iimage);
    if (*scan_image) return run_scan_image(simage);
    if (*aggregate) return run_aggregate(agg);
    if (*correlate) return run_correlate(corr);
  } catch (const UsageError& e) {
    std::cerr << "corelite: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "corelite: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
