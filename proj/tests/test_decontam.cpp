// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include "corelite/decontam.hpp"
#include "corelite/error.hpp"
#include "test_support.hpp"

using namespace corelite;
using corelite::testing::random_sentence;
using corelite::testing::TempDir;

namespace {

std::vector<std::string> words(std::string_view text) { return tokenize_text(text); }

std::string repeat_words(std::string_view prefix, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) out += std::string(prefix) + std::to_string(i) + " ";
  return out;
}

TokenSequence image(std::string id, std::uint32_t base) {
  TokenSequence s{std::move(id), std::vector<std::uint32_t>(32)};
  for (std::uint32_t i = 0; i < 32; ++i) s.tokens[i] = base + i;
  return s;
}

}  // namespace

TEST_CASE("categorize priority") {
  CHECK(categorize(false, false, false) == ContaminationCategory::Clean);
  CHECK(categorize(true, true, true) == ContaminationCategory::DuplicateImage);
  CHECK(categorize(true, true, false) == ContaminationCategory::SimilarImage);
  CHECK(categorize(false, true, false) == ContaminationCategory::SimilarImage);
  CHECK(categorize(true, false, false) == ContaminationCategory::SimilarQuestion);
  CHECK_THROWS_AS(categorize(false, false, true), Error);
}

TEST_CASE("FNV-1a over length-prefixed tokens") {
  // Empty input hashes to the offset basis.
  CHECK(fnv1a_tokens({}) == 0xCBF29CE484222325ULL);
  CHECK(fnv1a_ids({}) == 0xCBF29CE484222325ULL);
  // A single empty token feeds four zero bytes, the same as the id 0.
  const std::vector<std::string> empty_token{""};
  const std::vector<std::uint32_t> zero{0};
  CHECK(fnv1a_tokens(empty_token) == fnv1a_ids(zero));
  // Length prefixes keep token boundaries apart.
  const std::vector<std::string> ab_c{"ab", "c"}, a_bc{"a", "bc"};
  CHECK(fnv1a_tokens(ab_c) != fnv1a_tokens(a_bc));
  // FNV-1a of the single byte 'a' is a published test vector; here it is
  // preceded by its length bytes, so check the combined value by hand.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char b : {1, 0, 0, 0, int{'a'}}) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  const std::vector<std::string> a{"a"};
  CHECK(fnv1a_tokens(a) == h);
}

TEST_CASE("build_text_index window counting") {
  SUBCASE("seven tokens index nothing") {
    const std::vector<TextDocument> docs{{"d", "a b c d e f g"}};
    CHECK(TextNGramIndex::build(docs).size() == 0);
  }
  SUBCASE("eight tokens index one n-gram once") {
    const std::vector<TextDocument> docs{{"d", "a b c d e f g h"}};
    const auto index = TextNGramIndex::build(docs);
    CHECK(index.size() == 1);
    CHECK(index.count(words("a b c d e f g h")) == 1);
    CHECK(index.count(words("b c d e f g h a")) == 0);
  }
  SUBCASE("meaningless means more than the threshold") {
    std::vector<TextDocument> docs;
    for (int i = 0; i < 11; ++i) docs.push_back({"x" + std::to_string(i), "one two three four five six seven eight"});
    for (int i = 0; i < 10; ++i) docs.push_back({"y" + std::to_string(i), "alpha beta gamma delta epsilon zeta eta theta"});
    const auto index = TextNGramIndex::build(docs);
    CHECK(index.count(words("one two three four five six seven eight")) == 11);
    CHECK(index.is_meaningless(words("one two three four five six seven eight")));
    CHECK(index.count(words("alpha beta gamma delta epsilon zeta eta theta")) == 10);
    CHECK_FALSE(index.is_meaningless(words("alpha beta gamma delta epsilon zeta eta theta")));
    CHECK(index.meaningless_count() == 1);
    CHECK(index.meaningless_tokens().size() == 8);
    CHECK(index.meaningless_tokens().contains("one"));
    CHECK_FALSE(index.meaningless_tokens().contains("alpha"));
  }
  SUBCASE("invalid options") {
    TextIndexOptions bad;
    bad.n = 0;
    CHECK_THROWS_AS(TextNGramIndex::build({}, bad), Error);
    bad.n = 8;
    bad.freq_threshold = 0;
    CHECK_THROWS_AS(TextNGramIndex::build({}, bad), Error);
  }
}

TEST_CASE("overlap_ratio counts pooled meaningless tokens") {
  std::vector<TextDocument> docs;
  for (int i = 0; i < 11; ++i) docs.push_back({"b" + std::to_string(i), "t1 t2 t3 t4 t5 t6 t7 t8"});
  const auto index = TextNGramIndex::build(docs);
  CHECK(index.overlap_ratio(words("t1 t2 t3 t4 t5 t6 t7 t8")) == 1.0);
  CHECK(index.overlap_ratio(words("t1 t2 t3 t4 t5 t6 u7 u8")) == 0.75);
  CHECK(index.overlap_ratio(words("u1 u2 u3 u4 u5 u6 u7 u8")) == 0.0);
  CHECK_THROWS_AS(index.overlap_ratio(words("t1 t2")), Error);

  const std::vector<TextDocument> plain{{"p", "t1 t2 t3 t4 t5 t6 t7 t8"}};
  CHECK(TextNGramIndex::build(plain).overlap_ratio(words("t1 t2 t3 t4 t5 t6 t7 t8")) == 0.0);
}

TEST_CASE("scan_text hits, misses and thresholds") {
  std::mt19937_64 rng(1);
  std::vector<TextDocument> train;
  for (int i = 0; i < 30; ++i) train.push_back({"t" + std::to_string(i), random_sentence(rng, "w", 20, 50)});
  const auto index = TextNGramIndex::build(train);

  std::vector<TextDocument> bench{{"copy", train[3].text},
                                  {"fresh", random_sentence(rng, "z", 20, 50)},
                                  {"short", "w1 w2 w3"}};
  const auto report = scan_text(bench, index);
  CHECK(report.per_instance.at("copy").text_hit);
  CHECK(report.per_instance.at("copy").category == ContaminationCategory::SimilarQuestion);
  CHECK(report.per_instance.at("copy").matched_windows >= 13);
  CHECK_FALSE(report.per_instance.at("fresh").text_hit);
  CHECK_FALSE(report.per_instance.at("short").text_hit);
  CHECK(report.text_overlap_pct == doctest::Approx(100.0 / 3));
  CHECK(report.image_overlap_pct == 0.0);
  CHECK(report.params.at("n") == "8");
  CHECK_THROWS_AS(scan_text(bench, index, 1.5), Error);
}

TEST_CASE("scan_text skips meaningless n-grams and boilerplate candidates") {
  std::vector<TextDocument> train;
  const std::string boiler = "please answer the question using a single word";
  for (int i = 0; i < 11; ++i) train.push_back({"b" + std::to_string(i), boiler});
  // Shares six boilerplate tokens with two fresh ones.
  train.push_back({"mix", "please answer the question using a orange kiwi"});
  const auto index = TextNGramIndex::build(train);

  const std::vector<TextDocument> bench{{"boiler", boiler},
                                        {"mix", "please answer the question using a orange kiwi"}};
  // Six of eight tokens are meaningless: ratio 0.75.
  const auto at = scan_text(bench, index, 0.75);
  CHECK_FALSE(at.per_instance.at("boiler").text_hit);
  CHECK(at.per_instance.at("mix").text_hit);
  const auto below = scan_text(bench, index, 0.7);
  CHECK_FALSE(below.per_instance.at("mix").text_hit);
}

TEST_CASE("scan_text percentage is monotone in the ratio threshold") {
  std::mt19937_64 rng(17);
  std::vector<TextDocument> train;
  for (int i = 0; i < 200; ++i) train.push_back({"t" + std::to_string(i), random_sentence(rng, "w", 12, 12)});
  std::vector<TextDocument> bench;
  for (int i = 0; i < 100; ++i) bench.push_back({"b" + std::to_string(i), random_sentence(rng, "w", 12, 12)});
  TextIndexOptions opt;
  opt.n = 3;
  opt.freq_threshold = 2;
  const auto index = TextNGramIndex::build(train, opt);
  double previous = -1.0;
  for (double t = 0.0; t <= 1.0001; t += 0.125) {
    const double pct = scan_text(bench, index, std::min(t, 1.0)).text_overlap_pct;
    CHECK(pct >= previous);
    previous = pct;
  }
}

TEST_CASE("text index is independent of corpus order and thread count") {
  std::mt19937_64 rng(23);
  std::vector<TextDocument> train;
  for (int i = 0; i < 120; ++i) train.push_back({"t" + std::to_string(i), random_sentence(rng, "w", 15, 8)});
  std::vector<TextDocument> bench;
  for (int i = 0; i < 40; ++i) bench.push_back({"b" + std::to_string(i), random_sentence(rng, "w", 15, 8)});
  TextIndexOptions opt;
  opt.n = 3;
  opt.freq_threshold = 4;
  const auto base = TextNGramIndex::build(train, opt);
  auto shuffled = train;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  opt.threads = 4;
  const auto other = TextNGramIndex::build(shuffled, opt);
  CHECK(base == other);
  CHECK(scan_text(bench, base) == scan_text(bench, other, 0.75, 3));
}

TEST_CASE("hashed keys agree with exact keys") {
  std::mt19937_64 rng(31);
  std::vector<TextDocument> train;
  for (int i = 0; i < 300; ++i) train.push_back({"t" + std::to_string(i), random_sentence(rng, "w", 30, 40)});
  for (int i = 0; i < 12; ++i) train.push_back({"r" + std::to_string(i), repeat_words("boiler", 10)});
  std::vector<TextDocument> bench;
  for (int i = 0; i < 100; ++i) bench.push_back({"b" + std::to_string(i), random_sentence(rng, "w", 30, 40)});
  bench.push_back({"boiler", repeat_words("boiler", 10)});
  TextIndexOptions exact_opt;
  exact_opt.n = 4;
  TextIndexOptions hashed_opt = exact_opt;
  hashed_opt.mode = KeyMode::Hashed;
  const auto exact = TextNGramIndex::build(train, exact_opt);
  const auto hashed = TextNGramIndex::build(train, hashed_opt);
  CHECK(exact.size() == hashed.size());
  CHECK(exact.meaningless_count() == hashed.meaningless_count());
  CHECK(exact.meaningless_tokens() == hashed.meaningless_tokens());
  auto a = scan_text(bench, exact);
  auto b = scan_text(bench, hashed);
  CHECK(a.per_instance == b.per_instance);
  CHECK(a.text_overlap_pct == b.text_overlap_pct);
}

TEST_CASE("text index save/load") {
  TempDir dir;
  std::vector<TextDocument> train;
  for (int i = 0; i < 12; ++i) train.push_back({"r" + std::to_string(i), repeat_words("x", 9)});
  train.push_back({"u", "ünïcode wörds are fine here in this doc ok"});
  for (KeyMode mode : {KeyMode::Exact, KeyMode::Hashed}) {
    TextIndexOptions opt;
    opt.mode = mode;
    const auto index = TextNGramIndex::build(train, opt);
    index.save(dir / "i.ngi");
    const auto back = TextNGramIndex::load(dir / "i.ngi");
    CHECK(back == index);
    // Byte-reproducible output.
    back.save(dir / "j.ngi");
    CHECK(corelite::testing::read_file(dir / "i.ngi") == corelite::testing::read_file(dir / "j.ngi"));
  }
  const auto bytes = corelite::testing::read_file(dir / "i.ngi");
  CHECK(bytes.substr(0, 4) == "NGI1");
  corelite::testing::write_file(dir / "trunc.ngi", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(TextNGramIndex::load(dir / "trunc.ngi"), Error);
  corelite::testing::write_file(dir / "magic.ngi", "XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(TextNGramIndex::load(dir / "magic.ngi"), Error);

  ImageNGramIndex::build(std::vector<TokenSequence>{image("a", 0)}).save(dir / "img.ngi");
  CHECK_THROWS_AS(TextNGramIndex::load(dir / "img.ngi"), Error);
}

TEST_CASE("build_image_index") {
  CHECK(ImageNGramIndex::build({}).size() == 0);
  const auto one = ImageNGramIndex::build(std::vector<TokenSequence>{image("a", 0)});
  CHECK(one.size() == 25);
  CHECK(one.sequence_count() == 1);
  const auto two = ImageNGramIndex::build(std::vector<TokenSequence>{image("a", 0), image("b", 0)});
  CHECK(two.size() == 25);
  ImageWindow w{};
  for (std::uint32_t i = 0; i < 8; ++i) w[i] = 3 + i;
  CHECK(two.count(w) == 2);
  CHECK_THROWS_AS(ImageNGramIndex::build(std::vector<TokenSequence>{{"bad", {1, 2, 3}}}), Error);
}

TEST_CASE("scan_image categories") {
  const auto index = ImageNGramIndex::build(std::vector<TokenSequence>{image("train", 0)});

  auto shared = image("shared", 10'000);
  for (std::uint32_t i = 0; i < 8; ++i) shared.tokens[10 + i] = 20 + i;  // one training window
  const std::vector<TokenSequence> bench{image("dup", 0), image("disjoint", 5'000), shared};
  const auto report = scan_image(bench, index);

  const auto& dup = report.per_instance.at("dup");
  CHECK(dup.exact_image);
  CHECK(dup.matched_windows == 25);
  CHECK(dup.category == ContaminationCategory::DuplicateImage);

  const auto& disjoint = report.per_instance.at("disjoint");
  CHECK_FALSE(disjoint.image_hit);
  CHECK(disjoint.category == ContaminationCategory::Clean);

  const auto& one = report.per_instance.at("shared");
  CHECK(one.image_hit);
  CHECK_FALSE(one.exact_image);
  CHECK(one.matched_windows == 1);
  CHECK(one.category == ContaminationCategory::SimilarImage);

  const auto counts = report.category_counts();
  CHECK(counts[0] + counts[1] + counts[2] + counts[3] == bench.size());
  CHECK(report.image_overlap_pct == doctest::Approx(200.0 / 3));
}

TEST_CASE("image index save/load is byte-reproducible") {
  TempDir dir;
  const auto index = ImageNGramIndex::build(std::vector<TokenSequence>{image("a", 0), image("b", 7), image("c", 0)});
  index.save(dir / "a.ngi");
  const auto back = ImageNGramIndex::load(dir / "a.ngi");
  CHECK(back == index);
  back.save(dir / "b.ngi");
  CHECK(corelite::testing::read_file(dir / "a.ngi") == corelite::testing::read_file(dir / "b.ngi"));
}

TEST_CASE("merge_reports recomputes categories") {
  OverlapReport text, img;
  text.per_instance["q1"] = {true, false, false, ContaminationCategory::SimilarQuestion, 2};
  text.per_instance["q2"] = {true, false, false, ContaminationCategory::SimilarQuestion, 1};
  img.per_instance["q2"] = {false, true, true, ContaminationCategory::DuplicateImage, 25};
  img.per_instance["q3"] = {};
  const auto merged = merge_reports(text, img);
  CHECK(merged.per_instance.at("q1").category == ContaminationCategory::SimilarQuestion);
  CHECK(merged.per_instance.at("q2").category == ContaminationCategory::DuplicateImage);
  CHECK(merged.per_instance.at("q3").category == ContaminationCategory::Clean);
  CHECK(merged.text_overlap_pct == doctest::Approx(200.0 / 3));
  CHECK(merged.image_overlap_pct == doctest::Approx(100.0 / 3));
}

TEST_CASE("report JSON has sorted keys") {
  OverlapReport r;
  r.per_instance["b"] = {};
  r.per_instance["a"] = {true, false, false, ContaminationCategory::SimilarQuestion, 3};
  r.text_overlap_pct = 50.0;
  const auto json = r.to_json();
  CHECK(json.find("\"image_overlap_pct\"") < json.find("\"params\""));
  CHECK(json.find("\"params\"") < json.find("\"per_instance\""));
  CHECK(json.find("\"per_instance\"") < json.find("\"text_overlap_pct\": 50.0"));
  CHECK(json.find("\"a\"") < json.find("\"b\""));
  CHECK(json.find("\"category\": \"SimilarQuestion\"") != std::string::npos);
}
