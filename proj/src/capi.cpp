// SPDX-License-Identifier: Apache-2.0
#include "corelite/corelite.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "corelite/corpus.hpp"
#include "corelite/coreset.hpp"
#include "corelite/decontam.hpp"
#include "corelite/error.hpp"
#include "corelite/scoring.hpp"
#include "io_util.hpp"

struct corelite_embeddings {
  corelite::EmbeddingMatrix matrix;
};
struct corelite_selection {
  corelite::CoresetSelection selection;
};
struct corelite_text_index {
  corelite::TextNGramIndex index;
};
struct corelite_image_index {
  corelite::ImageNGramIndex index;
};
struct corelite_report {
  corelite::OverlapReport report;
};
struct corelite_scores {
  corelite::ScoreTable table;
};
struct corelite_scales {
  corelite::ScaleSpec spec;
};

namespace {

thread_local std::string g_last_error;

corelite_status status_for(corelite::ErrorKind kind) {
  switch (kind) {
    case corelite::ErrorKind::InvalidArgument:
      return CORELITE_ERR_INVALID_ARGUMENT;
    case corelite::ErrorKind::Io:
      return CORELITE_ERR_IO;
    case corelite::ErrorKind::Format:
      return CORELITE_ERR_FORMAT;
    case corelite::ErrorKind::Data:
      return CORELITE_ERR_DATA;
  }
  return CORELITE_ERR_INTERNAL;
}

corelite_status fail(corelite_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes and the error message.
template <typename Fn>
corelite_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return CORELITE_OK;
  } catch (const corelite::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CORELITE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CORELITE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CORELITE_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw corelite::Error(corelite::ErrorKind::InvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Handle, typename... Args>
void emit(Handle** out, Args&&... args) {
  *out = new Handle{std::forward<Args>(args)...};
}

}  // namespace

extern "C" {

const char* corelite_version(void) { return "0.1.0"; }

const char* corelite_last_error(void) { return g_last_error.c_str(); }

void corelite_string_free(char* s) { std::free(s); }

corelite_status corelite_file_sha256(const char* path, char out[65]) {
  return guarded([&] {
    require(path && out, "null argument");
    const std::string bytes = corelite::detail::read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("SHA-256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
      out[2 * i] = kHex[digest[i] >> 4];
      out[2 * i + 1] = kHex[digest[i] & 0xF];
    }
    out[2 * len] = '\0';
  });
}

// ---- embeddings -----------------------------------------------------------

corelite_status corelite_embeddings_load(const char* data_path, const char* ids_path,
                                         corelite_embeddings** out) {
  return guarded([&] {
    require(data_path && ids_path && out, "null argument");
    emit(out, corelite::load_embeddings(data_path, ids_path));
  });
}

corelite_status corelite_embeddings_create(size_t n, size_t d, const float* data,
                                           const char* const* ids, corelite_embeddings** out) {
  return guarded([&] {
    require(out && (n == 0 || (data && ids)), "null argument");
    std::vector<std::string> id_list;
    id_list.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      require(ids[i] != nullptr, "null id");
      id_list.emplace_back(ids[i]);
    }
    std::vector<float> values(data, data + n * d);
    emit(out, corelite::EmbeddingMatrix(std::move(id_list), d, std::move(values)));
  });
}

corelite_status corelite_embeddings_save(const corelite_embeddings* e, const char* data_path,
                                         const char* ids_path) {
  return guarded([&] {
    require(e && data_path && ids_path, "null argument");
    corelite::save_embeddings(e->matrix, data_path, ids_path);
  });
}

size_t corelite_embeddings_rows(const corelite_embeddings* e) { return e ? e->matrix.rows() : 0; }
size_t corelite_embeddings_cols(const corelite_embeddings* e) { return e ? e->matrix.cols() : 0; }

const char* corelite_embeddings_id(const corelite_embeddings* e, size_t row) {
  if (!e || row >= e->matrix.rows()) return nullptr;
  return e->matrix.ids()[row].c_str();
}

corelite_status corelite_embeddings_concat(const corelite_embeddings* image,
                                           const corelite_embeddings* text, int normalize,
                                           corelite_embeddings** out) {
  return guarded([&] {
    require(image && text && out, "null argument");
    emit(out, corelite::concat_embeddings(image->matrix, text->matrix, normalize != 0));
  });
}

corelite_status corelite_embeddings_normalize(const corelite_embeddings* e,
                                              corelite_embeddings** out) {
  return guarded([&] {
    require(e && out, "null argument");
    emit(out, corelite::normalize_rows(e->matrix));
  });
}

void corelite_embeddings_free(corelite_embeddings* e) { delete e; }

// ---- coreset --------------------------------------------------------------

corelite_status corelite_select(const corelite_embeddings* e, size_t k, uint64_t seed,
                                unsigned threads, corelite_selection** out) {
  return guarded([&] {
    require(e && out, "null argument");
    corelite::GreedyOptions options;
    options.threads = threads;
    emit(out, corelite::k_center_greedy(e->matrix, k, seed, options));
  });
}

corelite_status corelite_select_bruteforce(const corelite_embeddings* e, size_t k,
                                           corelite_selection** out) {
  return guarded([&] {
    require(e && out, "null argument");
    emit(out, corelite::brute_force_k_center(e->matrix, k));
  });
}

size_t corelite_selection_size(const corelite_selection* s) {
  return s ? s->selection.center_indices.size() : 0;
}

size_t corelite_selection_index(const corelite_selection* s, size_t i) {
  if (!s || i >= s->selection.center_indices.size()) return SIZE_MAX;
  return s->selection.center_indices[i];
}

double corelite_selection_radius(const corelite_selection* s) {
  return s ? s->selection.coverage_radius : 0.0;
}

corelite_status corelite_selection_to_json(const corelite_selection* s,
                                           const corelite_embeddings* e, char** json) {
  return guarded([&] {
    require(s && e && json, "null argument");
    *json = copy_string(corelite::selection_to_json(s->selection, e->matrix));
  });
}

void corelite_selection_free(corelite_selection* s) { delete s; }

corelite_status corelite_coverage_radius(const corelite_embeddings* e, const size_t* centers,
                                         size_t count, double* radius) {
  return guarded([&] {
    require(e && radius && (count == 0 || centers), "null argument");
    *radius = corelite::coverage_radius(e->matrix, std::span(centers, count));
  });
}

corelite_status corelite_subset_gap(const double* scores, size_t n, const size_t* subset, size_t m,
                                    double* full_mean, double* subset_mean, double* gap) {
  return guarded([&] {
    require((n == 0 || scores) && (m == 0 || subset) && full_mean && subset_mean && gap,
            "null argument");
    const auto g = corelite::subset_gap(std::span(scores, n), std::span(subset, m));
    *full_mean = g.full_mean;
    *subset_mean = g.subset_mean;
    *gap = g.gap;
  });
}

corelite_status corelite_default_lite_size(const char* dataset, size_t* k) {
  return guarded([&] {
    require(dataset && k, "null argument");
    auto size = corelite::default_lite_size(dataset);
    if (!size)
      throw corelite::Error(corelite::ErrorKind::InvalidArgument,
                            std::string("no default lite size for dataset ") + dataset);
    *k = *size;
  });
}

// ---- decontamination ------------------------------------------------------

corelite_status corelite_text_index_build(const char* train_path, size_t n, uint32_t freq_threshold,
                                          corelite_key_mode mode, unsigned threads,
                                          corelite_text_index** out) {
  return guarded([&] {
    require(train_path && out, "null argument");
    const auto train = corelite::load_text_corpus(train_path);
    corelite::TextIndexOptions options;
    options.n = n;
    options.freq_threshold = freq_threshold;
    options.mode = mode == CORELITE_KEYS_HASHED ? corelite::KeyMode::Hashed : corelite::KeyMode::Exact;
    options.threads = threads;
    emit(out, corelite::TextNGramIndex::build(train, options));
  });
}

corelite_status corelite_text_index_load(const char* path, corelite_text_index** out) {
  return guarded([&] {
    require(path && out, "null argument");
    emit(out, corelite::TextNGramIndex::load(path));
  });
}

corelite_status corelite_text_index_save(const corelite_text_index* index, const char* path) {
  return guarded([&] {
    require(index && path, "null argument");
    index->index.save(path);
  });
}

size_t corelite_text_index_n(const corelite_text_index* index) { return index ? index->index.n() : 0; }
uint32_t corelite_text_index_freq_threshold(const corelite_text_index* index) {
  return index ? index->index.freq_threshold() : 0;
}
corelite_key_mode corelite_text_index_mode(const corelite_text_index* index) {
  return index && index->index.mode() == corelite::KeyMode::Hashed ? CORELITE_KEYS_HASHED
                                                                   : CORELITE_KEYS_EXACT;
}
size_t corelite_text_index_size(const corelite_text_index* index) {
  return index ? index->index.size() : 0;
}
size_t corelite_text_index_meaningless(const corelite_text_index* index) {
  return index ? index->index.meaningless_count() : 0;
}
void corelite_text_index_free(corelite_text_index* index) { delete index; }

corelite_status corelite_scan_text(const corelite_text_index* index, const char* bench_path,
                                   double ratio_threshold, unsigned threads, corelite_report** out) {
  return guarded([&] {
    require(index && bench_path && out, "null argument");
    const auto bench = corelite::load_text_corpus(bench_path);
    emit(out, corelite::scan_text(bench, index->index, ratio_threshold, threads));
  });
}

corelite_status corelite_image_index_build(const char* train_path, corelite_image_index** out) {
  return guarded([&] {
    require(train_path && out, "null argument");
    const auto train = corelite::load_token_corpus(train_path);
    emit(out, corelite::ImageNGramIndex::build(train));
  });
}

corelite_status corelite_image_index_load(const char* path, corelite_image_index** out) {
  return guarded([&] {
    require(path && out, "null argument");
    emit(out, corelite::ImageNGramIndex::load(path));
  });
}

corelite_status corelite_image_index_save(const corelite_image_index* index, const char* path) {
  return guarded([&] {
    require(index && path, "null argument");
    index->index.save(path);
  });
}

size_t corelite_image_index_size(const corelite_image_index* index) {
  return index ? index->index.size() : 0;
}
void corelite_image_index_free(corelite_image_index* index) { delete index; }

corelite_status corelite_scan_image(const corelite_image_index* index, const char* bench_path,
                                    unsigned threads, corelite_report** out) {
  return guarded([&] {
    require(index && bench_path && out, "null argument");
    const auto bench = corelite::load_token_corpus(bench_path);
    emit(out, corelite::scan_image(bench, index->index, threads));
  });
}

double corelite_report_text_pct(const corelite_report* r) { return r ? r->report.text_overlap_pct : 0.0; }
double corelite_report_image_pct(const corelite_report* r) { return r ? r->report.image_overlap_pct : 0.0; }
size_t corelite_report_size(const corelite_report* r) { return r ? r->report.per_instance.size() : 0; }

size_t corelite_report_category_count(const corelite_report* r, corelite_category c) {
  if (!r || c < CORELITE_CLEAN || c > CORELITE_SIMILAR_QUESTION) return 0;
  return r->report.category_counts()[static_cast<size_t>(c)];
}

corelite_status corelite_report_to_json(const corelite_report* r, char** json) {
  return guarded([&] {
    require(r && json, "null argument");
    *json = copy_string(r->report.to_json());
  });
}

void corelite_report_free(corelite_report* r) { delete r; }

// ---- scoring --------------------------------------------------------------

corelite_status corelite_scores_load(const char* path, corelite_scores** out) {
  return guarded([&] {
    require(path && out, "null argument");
    emit(out, corelite::load_scores(path));
  });
}

size_t corelite_scores_size(const corelite_scores* s) { return s ? s->table.size() : 0; }
void corelite_scores_free(corelite_scores* s) { delete s; }

corelite_status corelite_scales_load(const char* path, corelite_scales** out) {
  return guarded([&] {
    require(path && out, "null argument");
    emit(out, corelite::load_scales(path));
  });
}

void corelite_scales_free(corelite_scales* s) { delete s; }

corelite_status corelite_normalize_score(double raw, double min, double max, double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = corelite::normalize_score(raw, corelite::Scale{min, max});
  });
}

corelite_status corelite_aggregate(const corelite_scores* scores, const corelite_scales* scales,
                                   corelite_weighting weighting, char** json) {
  return guarded([&] {
    require(scores && json, "null argument");
    const auto resolved =
        corelite::resolve_scales(scores->table, scales ? scales->spec : corelite::ScaleSpec{});
    const auto result = corelite::aggregate(
        scores->table, resolved,
        weighting == CORELITE_INSTANCE_WEIGHTED ? corelite::Weighting::InstanceWeighted
                                                : corelite::Weighting::Unweighted);
    *json = copy_string(result.to_json());
  });
}

corelite_status corelite_correlate(const corelite_scores* full, const corelite_scores* lite,
                                   corelite_corr_method method, char** json) {
  return guarded([&] {
    require(full && lite && json, "null argument");
    const auto result = corelite::correlate_lite(
        full->table, lite->table,
        method == CORELITE_SPEARMAN ? corelite::CorrelationMethod::Spearman
                                    : corelite::CorrelationMethod::Pearson);
    *json = copy_string(result.to_json());
  });
}

corelite_status corelite_pearson(const double* x, const double* y, size_t n, double* r) {
  return guarded([&] {
    require(x && y && r, "null argument");
    *r = corelite::pearson(std::span(x, n), std::span(y, n));
  });
}

corelite_status corelite_spearman(const double* x, const double* y, size_t n, double* r) {
  return guarded([&] {
    require(x && y && r, "null argument");
    *r = corelite::spearman(std::span(x, n), std::span(y, n));
  });
}

corelite_status corelite_gap(const corelite_scores* per_instance, const char* const* subset_ids,
                             size_t m, char** json) {
  return guarded([&] {
    require(per_instance && json && (m == 0 || subset_ids), "null argument");
    std::vector<std::string> ids;
    ids.reserve(m);
    for (size_t i = 0; i < m; ++i) {
      require(subset_ids[i] != nullptr, "null id");
      ids.emplace_back(subset_ids[i]);
    }
    *json = copy_string(
        corelite::subset_gaps_to_json(corelite::model_subset_gaps(per_instance->table, ids)));
  });
}

}  // extern "C"
