// SPDX-License-Identifier: Apache-2.0
#include "corelite/decontam.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include <json.hpp>

#include "corelite/error.hpp"
#include "corelite/parallel.hpp"
#include "io_util.hpp"

namespace corelite {
namespace {

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

constexpr std::string_view kIndexMagic = "NGI1";
constexpr std::uint16_t kTextExactVersion = 1;
constexpr std::uint16_t kTextHashedVersion = 2;
constexpr std::uint16_t kImageVersion = 3;

inline void fnv_byte(std::uint64_t& h, unsigned char b) {
  h ^= b;
  h *= kFnvPrime;
}

inline void fnv_u32(std::uint64_t& h, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) fnv_byte(h, static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

inline void fnv_token(std::uint64_t& h, std::string_view token) {
  fnv_u32(h, static_cast<std::uint32_t>(token.size()));
  for (char c : token) fnv_byte(h, static_cast<unsigned char>(c));
}

std::string join_key(std::span<const std::string> tokens) {
  std::size_t len = tokens.size();
  for (const auto& t : tokens) len += t.size();
  std::string key;
  key.reserve(len);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) key.push_back(' ');
    key.append(tokens[i]);
  }
  return key;
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double percent(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

template <typename Map>
void merge_counts(Map& into, Map&& from) {
  if (into.empty()) {
    into = std::move(from);
    return;
  }
  for (auto& [key, count] : from) into[key] += count;
}

struct IndexHeader {
  std::uint16_t version;
  std::uint16_t n;
  std::uint32_t freq_threshold;
  std::uint64_t entries;
};

IndexHeader read_header(detail::ByteReader& in, const std::filesystem::path& path) {
  if (in.remaining() < kIndexMagic.size() || in.bytes(kIndexMagic.size()) != kIndexMagic)
    throw Error(ErrorKind::Format, path.string() + ": magic mismatch, expected NGI1");
  IndexHeader h;
  h.version = in.u16();
  h.n = in.u16();
  h.freq_threshold = in.u32();
  h.entries = in.u64();
  return h;
}

void write_header(detail::ByteWriter& out, const IndexHeader& h) {
  out.bytes(kIndexMagic);
  out.u16(h.version);
  out.u16(h.n);
  out.u32(h.freq_threshold);
  out.u64(h.entries);
}

InstanceResult finish(InstanceResult r) {
  r.category = categorize(r.text_hit, r.image_hit, r.exact_image);
  return r;
}

void fill_percentages(OverlapReport& report) {
  std::size_t text = 0;
  std::size_t image = 0;
  for (const auto& [_, r] : report.per_instance) {
    text += r.text_hit;
    image += r.image_hit;
  }
  report.text_overlap_pct = percent(text, report.per_instance.size());
  report.image_overlap_pct = percent(image, report.per_instance.size());
}

}  // namespace

std::string_view to_string(ContaminationCategory category) {
  switch (category) {
    case ContaminationCategory::Clean:
      return "Clean";
    case ContaminationCategory::DuplicateImage:
      return "DuplicateImage";
    case ContaminationCategory::SimilarImage:
      return "SimilarImage";
    case ContaminationCategory::SimilarQuestion:
      return "SimilarQuestion";
  }
  return "Unknown";
}

ContaminationCategory categorize(bool text_hit, bool image_hit, bool exact_image) {
  if (exact_image && !image_hit)
    throw Error(ErrorKind::InvalidArgument, "inconsistent flags: exact image without image hit");
  if (exact_image) return ContaminationCategory::DuplicateImage;
  if (image_hit) return ContaminationCategory::SimilarImage;
  if (text_hit) return ContaminationCategory::SimilarQuestion;
  return ContaminationCategory::Clean;
}

std::uint64_t fnv1a_tokens(std::span<const std::string> tokens) {
  std::uint64_t h = kFnvOffset;
  for (const auto& t : tokens) fnv_token(h, t);
  return h;
}

std::uint64_t fnv1a_ids(std::span<const std::uint32_t> ids) {
  std::uint64_t h = kFnvOffset;
  for (auto id : ids) fnv_u32(h, id);
  return h;
}

// ---------------------------------------------------------------------------
// Text index

TextNGramIndex TextNGramIndex::build(std::span<const TextDocument> train,
                                     const TextIndexOptions& options) {
  if (options.n == 0 || options.n > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorKind::InvalidArgument, "n must be in 1..65535");
  if (options.freq_threshold == 0)
    throw Error(ErrorKind::InvalidArgument, "freq_threshold must be >= 1");

  TextNGramIndex index;
  index.n_ = options.n;
  index.freq_threshold_ = options.freq_threshold;
  index.mode_ = options.mode;
  const std::size_t n = options.n;
  const unsigned workers = resolve_threads(options.threads);
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, train.size()));

  if (options.mode == KeyMode::Exact) {
    std::vector<absl::flat_hash_map<std::string, std::uint64_t>> local(chunks);
    for_each_chunk(train.size(), workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
      auto& table = local[c];
      std::string key;
      for (std::size_t d = begin; d < end; ++d) {
        const auto tokens = tokenize_text(train[d].text);
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
          key.clear();
          for (std::size_t j = i; j < i + n; ++j) {
            if (j != i) key.push_back(' ');
            key.append(tokens[j]);
          }
          // Look up by the reused buffer; allocate a key only for new n-grams.
          if (auto it = table.find(key); it != table.end())
            ++it->second;
          else
            table.emplace(key, 1);
        }
      }
    });
    for (auto& table : local) merge_counts(index.exact_, std::move(table));
    for (const auto& [key, count] : index.exact_) {
      if (count <= index.freq_threshold_) continue;
      ++index.meaningless_count_;
      std::size_t start = 0;
      while (start <= key.size()) {
        std::size_t end = key.find(' ', start);
        if (end == std::string::npos) end = key.size();
        index.meaningless_tokens_.emplace(key.substr(start, end - start));
        start = end + 1;
      }
    }
  } else {
    std::vector<absl::flat_hash_map<std::uint64_t, std::uint64_t>> local(chunks);
    for_each_chunk(train.size(), workers, [&](std::size_t c, std::size_t begin, std::size_t end) {
      auto& table = local[c];
      for (std::size_t d = begin; d < end; ++d) {
        const auto tokens = tokenize_text(train[d].text);
        for (std::size_t i = 0; i + n <= tokens.size(); ++i)
          ++table[fnv1a_tokens(std::span(tokens).subspan(i, n))];
      }
    });
    for (auto& table : local) merge_counts(index.hashed_, std::move(table));
    for (const auto& [key, count] : index.hashed_)
      if (count > index.freq_threshold_) ++index.meaningless_count_;
    // Hashed keys drop the tokens, so recover them with a second pass.
    if (index.meaningless_count_ > 0) {
      for (const auto& doc : train) {
        const auto tokens = tokenize_text(doc.text);
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
          auto window = std::span(tokens).subspan(i, n);
          auto it = index.hashed_.find(fnv1a_tokens(window));
          if (it != index.hashed_.end() && it->second > index.freq_threshold_)
            index.meaningless_tokens_.insert(window.begin(), window.end());
        }
      }
    }
  }
  return index;
}

std::size_t TextNGramIndex::size() const noexcept {
  return mode_ == KeyMode::Exact ? exact_.size() : hashed_.size();
}

std::uint64_t TextNGramIndex::count(std::span<const std::string> ngram) const {
  if (ngram.size() != n_) return 0;
  if (mode_ == KeyMode::Exact) {
    auto it = exact_.find(join_key(ngram));
    return it == exact_.end() ? 0 : it->second;
  }
  auto it = hashed_.find(fnv1a_tokens(ngram));
  return it == hashed_.end() ? 0 : it->second;
}

double TextNGramIndex::overlap_ratio(std::span<const std::string> candidate) const {
  if (candidate.size() != n_)
    throw Error(ErrorKind::InvalidArgument, "candidate has " + std::to_string(candidate.size()) +
                                                " tokens, index n=" + std::to_string(n_));
  if (meaningless_tokens_.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : candidate) hits += meaningless_tokens_.contains(t);
  return static_cast<double>(hits) / static_cast<double>(candidate.size());
}

void TextNGramIndex::save(const std::filesystem::path& path) const {
  detail::ByteWriter out;
  write_header(out, {mode_ == KeyMode::Exact ? kTextExactVersion : kTextHashedVersion,
                     static_cast<std::uint16_t>(n_), freq_threshold_, size()});
  if (mode_ == KeyMode::Exact) {
    std::vector<const std::pair<const std::string, std::uint64_t>*> entries;
    entries.reserve(exact_.size());
    for (const auto& e : exact_) entries.push_back(&e);
    // ' ' sorts below every alphanumeric byte, so ordering the joined keys
    // orders the token tuples lexicographically.
    std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
    for (const auto* e : entries) {
      std::string_view key = e->first;
      std::size_t start = 0;
      for (std::size_t t = 0; t < n_; ++t) {
        std::size_t end = key.find(' ', start);
        if (end == std::string_view::npos) end = key.size();
        out.str(key.substr(start, end - start));
        start = end + 1;
      }
      out.u64(e->second);
    }
  } else {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries(hashed_.begin(), hashed_.end());
    std::sort(entries.begin(), entries.end());
    for (const auto& [key, count] : entries) {
      out.u64(key);
      out.u64(count);
    }
  }
  std::vector<std::string_view> tokens(meaningless_tokens_.begin(), meaningless_tokens_.end());
  std::sort(tokens.begin(), tokens.end());
  out.u64(tokens.size());
  for (auto t : tokens) out.str(t);
  detail::write_file(path, out.buffer());
}

TextNGramIndex TextNGramIndex::load(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  detail::ByteReader in(bytes, path.string());
  const IndexHeader h = read_header(in, path);
  if (h.version != kTextExactVersion && h.version != kTextHashedVersion)
    throw Error(ErrorKind::Format, path.string() + ": not a text n-gram index (version " +
                                       std::to_string(h.version) + ")");
  if (h.n == 0 || h.freq_threshold == 0)
    throw Error(ErrorKind::Format, path.string() + ": invalid n or freq_threshold");

  TextNGramIndex index;
  index.n_ = h.n;
  index.freq_threshold_ = h.freq_threshold;
  index.mode_ = h.version == kTextExactVersion ? KeyMode::Exact : KeyMode::Hashed;
  const auto duplicate = [&] {
    return Error(ErrorKind::Format, path.string() + ": duplicate key");
  };
  for (std::uint64_t e = 0; e < h.entries; ++e) {
    std::uint64_t count = 0;
    if (index.mode_ == KeyMode::Exact) {
      std::vector<std::string> tokens(h.n);
      for (auto& t : tokens) t = in.str();
      count = in.u64();
      if (!index.exact_.emplace(join_key(tokens), count).second) throw duplicate();
    } else {
      const std::uint64_t key = in.u64();
      count = in.u64();
      if (!index.hashed_.emplace(key, count).second) throw duplicate();
    }
    if (count == 0) throw Error(ErrorKind::Format, path.string() + ": zero count entry");
    if (count > index.freq_threshold_) ++index.meaningless_count_;
  }
  const std::uint64_t tokens = in.u64();
  for (std::uint64_t t = 0; t < tokens; ++t) index.meaningless_tokens_.insert(in.str());
  in.expect_end();
  return index;
}

// ---------------------------------------------------------------------------
// Image index

ImageNGramIndex ImageNGramIndex::build(std::span<const TokenSequence> train) {
  ImageNGramIndex index;
  for (const auto& seq : train) {
    if (seq.tokens.size() != kImageTokenLength)
      throw Error(ErrorKind::Data, "id=" + seq.id + ": length " + std::to_string(seq.tokens.size()) +
                                       ", expected " + std::to_string(kImageTokenLength));
    ImageSequence full;
    std::copy(seq.tokens.begin(), seq.tokens.end(), full.begin());
    index.sequences_.insert(full);
    for (std::size_t i = 0; i < kWindowsPerSequence; ++i) {
      ImageWindow w;
      std::copy_n(full.begin() + i, kWindow, w.begin());
      ++index.table_[w];
    }
  }
  return index;
}

std::uint64_t ImageNGramIndex::count(const ImageWindow& window) const {
  auto it = table_.find(window);
  return it == table_.end() ? 0 : it->second;
}

bool ImageNGramIndex::contains_sequence(std::span<const std::uint32_t> tokens) const {
  if (tokens.size() != kImageTokenLength) return false;
  ImageSequence full;
  std::copy(tokens.begin(), tokens.end(), full.begin());
  return sequences_.contains(full);
}

void ImageNGramIndex::save(const std::filesystem::path& path) const {
  detail::ByteWriter out;
  write_header(out, {kImageVersion, static_cast<std::uint16_t>(kWindow), 0, table_.size()});
  std::vector<std::pair<ImageWindow, std::uint64_t>> entries(table_.begin(), table_.end());
  std::sort(entries.begin(), entries.end());
  for (const auto& [window, count] : entries) {
    for (auto id : window) out.u32(id);
    out.u64(count);
  }
  std::vector<ImageSequence> seqs(sequences_.begin(), sequences_.end());
  std::sort(seqs.begin(), seqs.end());
  out.u64(seqs.size());
  for (const auto& s : seqs)
    for (auto id : s) out.u32(id);
  detail::write_file(path, out.buffer());
}

ImageNGramIndex ImageNGramIndex::load(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  detail::ByteReader in(bytes, path.string());
  const IndexHeader h = read_header(in, path);
  if (h.version != kImageVersion || h.n != kWindow)
    throw Error(ErrorKind::Format, path.string() + ": not an image 8-gram index");
  ImageNGramIndex index;
  for (std::uint64_t e = 0; e < h.entries; ++e) {
    ImageWindow w;
    for (auto& id : w) id = in.u32();
    const std::uint64_t count = in.u64();
    if (count == 0) throw Error(ErrorKind::Format, path.string() + ": zero count entry");
    if (!index.table_.emplace(w, count).second)
      throw Error(ErrorKind::Format, path.string() + ": duplicate key");
  }
  const std::uint64_t seqs = in.u64();
  for (std::uint64_t s = 0; s < seqs; ++s) {
    ImageSequence full;
    for (auto& id : full) id = in.u32();
    index.sequences_.insert(full);
  }
  in.expect_end();
  return index;
}

// ---------------------------------------------------------------------------
// Scanning and reports

std::array<std::size_t, 4> OverlapReport::category_counts() const {
  std::array<std::size_t, 4> counts{};
  for (const auto& [_, r] : per_instance) ++counts[static_cast<std::size_t>(r.category)];
  return counts;
}

std::string OverlapReport::to_json() const {
  nlohmann::json out;
  out["text_overlap_pct"] = text_overlap_pct;
  out["image_overlap_pct"] = image_overlap_pct;
  out["params"] = nlohmann::json::object();
  for (const auto& [k, v] : params) out["params"][k] = v;
  auto& instances = out["per_instance"] = nlohmann::json::object();
  for (const auto& [id, r] : per_instance) {
    instances[id] = {{"category", to_string(r.category)},
                     {"exact_image", r.exact_image},
                     {"image_hit", r.image_hit},
                     {"matched_windows", r.matched_windows},
                     {"text_hit", r.text_hit}};
  }
  return out.dump(2) + "\n";
}

OverlapReport scan_text(std::span<const TextDocument> bench, const TextNGramIndex& index,
                        double ratio_threshold, unsigned threads) {
  if (!(ratio_threshold >= 0.0 && ratio_threshold <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "ratio_threshold must be in [0, 1]");
  const std::size_t n = index.n();
  std::vector<InstanceResult> results(bench.size());
  for_each_chunk(bench.size(), resolve_threads(threads),
                 [&](std::size_t, std::size_t begin, std::size_t end) {
                   for (std::size_t d = begin; d < end; ++d) {
                     const auto tokens = tokenize_text(bench[d].text);
                     InstanceResult r;
                     for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
                       auto window = std::span(tokens).subspan(i, n);
                       const std::uint64_t count = index.count(window);
                       if (count == 0 || count > index.freq_threshold()) continue;
                       if (index.overlap_ratio(window) > ratio_threshold) continue;
                       ++r.matched_windows;
                     }
                     r.text_hit = r.matched_windows > 0;
                     results[d] = finish(r);
                   }
                 });
  OverlapReport report;
  for (std::size_t d = 0; d < bench.size(); ++d) report.per_instance[bench[d].id] = results[d];
  fill_percentages(report);
  report.params = {{"kind", "text"},
                   {"n", std::to_string(n)},
                   {"freq_threshold", std::to_string(index.freq_threshold())},
                   {"key_mode", index.mode() == KeyMode::Exact ? "exact" : "hashed"},
                   {"ratio_threshold", format_real(ratio_threshold)},
                   {"overlap_ratio", "pooled-meaningless-tokens"}};
  return report;
}

OverlapReport scan_image(std::span<const TokenSequence> bench, const ImageNGramIndex& index,
                         unsigned threads) {
  for (const auto& seq : bench)
    if (seq.tokens.size() != kImageTokenLength)
      throw Error(ErrorKind::Data, "id=" + seq.id + ": length " + std::to_string(seq.tokens.size()) +
                                       ", expected " + std::to_string(kImageTokenLength));
  std::vector<InstanceResult> results(bench.size());
  for_each_chunk(bench.size(), resolve_threads(threads),
                 [&](std::size_t, std::size_t begin, std::size_t end) {
                   for (std::size_t d = begin; d < end; ++d) {
                     const auto& tokens = bench[d].tokens;
                     InstanceResult r;
                     for (std::size_t i = 0; i < ImageNGramIndex::kWindowsPerSequence; ++i) {
                       ImageWindow w;
                       std::copy_n(tokens.begin() + i, ImageNGramIndex::kWindow, w.begin());
                       if (index.count(w) > 0) ++r.matched_windows;
                     }
                     r.image_hit = r.matched_windows > 0;
                     r.exact_image = index.contains_sequence(tokens);
                     results[d] = finish(r);
                   }
                 });
  OverlapReport report;
  for (std::size_t d = 0; d < bench.size(); ++d) report.per_instance[bench[d].id] = results[d];
  fill_percentages(report);
  report.params = {{"kind", "image"}, {"n", std::to_string(ImageNGramIndex::kWindow)}};
  return report;
}

OverlapReport merge_reports(const OverlapReport& text, const OverlapReport& image) {
  OverlapReport merged;
  for (const auto& [id, r] : text.per_instance) {
    auto& m = merged.per_instance[id];
    m.text_hit = r.text_hit;
    m.matched_windows += r.matched_windows;
  }
  for (const auto& [id, r] : image.per_instance) {
    auto& m = merged.per_instance[id];
    m.image_hit = r.image_hit;
    m.exact_image = r.exact_image;
    m.matched_windows += r.matched_windows;
  }
  for (auto& [_, r] : merged.per_instance) r = finish(r);
  fill_percentages(merged);
  for (const auto& [k, v] : text.params) merged.params["text_" + k] = v;
  for (const auto& [k, v] : image.params) merged.params["image_" + k] = v;
  merged.params["kind"] = "combined";
  return merged;
}

}  // namespace corelite
