// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "corelite/corpus.hpp"

namespace corelite::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "corelite-XXXXXX").string();
    if (!::mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Matrix with ids "p0", "p1", ... from row-major values.
inline EmbeddingMatrix make_matrix(std::size_t dim, std::vector<float> values) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < values.size() / dim; ++i) ids.push_back("p" + std::to_string(i));
  return EmbeddingMatrix(std::move(ids), dim, std::move(values));
}

inline EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                     float lo = -10.0f, float hi = 10.0f) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> values(n * dim);
  for (auto& v : values) v = dist(rng);
  return make_matrix(dim, std::move(values));
}

/// Word over an alphabet of letters disjoint from other prefixes: every
/// token starts with `prefix`, so corpora built from different prefixes
/// share no token.
inline std::string random_word(std::mt19937_64& rng, std::string_view prefix, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);
  return std::string(prefix) + std::to_string(pick(rng));
}

inline std::string random_sentence(std::mt19937_64& rng, std::string_view prefix,
                                   std::size_t words, std::size_t vocab) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += random_word(rng, prefix, vocab);
  }
  return out;
}

inline std::string jsonl_text_record(std::string_view id, std::string_view text) {
  std::string out = "{\"id\": \"";
  out += id;
  out += "\", \"text\": \"";
  out += text;
  out += "\"}\n";
  return out;
}

inline std::string jsonl_token_record(std::string_view id, const std::vector<std::uint32_t>& tokens) {
  std::string out = "{\"id\": \"";
  out += id;
  out += "\", \"tokens\": [";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(tokens[i]);
  }
  out += "]}\n";
  return out;
}

}  // namespace corelite::testing
