#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "triage/features.hpp"
#include "triage/util.hpp"

using namespace triage;
using triage::test::toy_world;

namespace {

std::vector<std::vector<Token>> tok_docs(std::initializer_list<const char*> texts) {
  std::vector<std::vector<Token>> out;
  for (const char* t : texts) out.push_back(tokenize(t));
  return out;
}

double norm2(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [i, x] : v) s += x * x;
  return std::sqrt(s);
}

// Exchanges each _t range with its _p counterpart.
std::vector<double> swap_partitions(const FeatureVector& fv) {
  std::vector<double> out = fv.values;
  for (const auto& g : fv.group_map) {
    if (!g.name.ends_with("_t")) continue;
    const std::string other = g.name.substr(0, g.name.size() - 2) + "_p";
    for (const auto& h : fv.group_map) {
      if (h.name != other) continue;
      for (std::size_t i = 0; i < g.end - g.begin; ++i) {
        out[g.begin + i] = fv.values[h.begin + i];
        out[h.begin + i] = fv.values[g.begin + i];
      }
    }
  }
  return out;
}

void check_partitioned(const FeatureVector& fv) {
  std::size_t at = 0;
  for (const auto& g : fv.group_map) {
    CHECK(g.begin == at);
    CHECK(g.end > g.begin);
    at = g.end;
  }
  CHECK(at == fv.values.size());
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("tf-idf vocabulary and weights") {
    auto docs = tok_docs({"a b a", "a"});
    auto v = build_tfidf_vocab(docs, 1, {});
    REQUIRE(v.terms == std::vector<std::string>{"a", "b"});
    CHECK(v.df == std::vector<int>{2, 1});
    CHECK(v.idf[0] == doctest::Approx(1.0));
    CHECK(v.idf[1] == doctest::Approx(std::log(1.5) + 1.0));
    CHECK(v.idf[1] == doctest::Approx(1.4055).epsilon(1e-4));

    auto vec = tfidf_vector(docs[0], v);
    REQUIRE(vec.size() == 2);
    const double raw_b = std::log(1.5) + 1.0, len = std::hypot(2.0, raw_b);
    CHECK(vec[0].second == doctest::Approx(2.0 / len));
    CHECK(vec[1].second == doctest::Approx(raw_b / len));
    CHECK(vec[0].second == doctest::Approx(0.8183).epsilon(1e-4));
    CHECK(vec[1].second == doctest::Approx(0.5750).epsilon(1e-4));

    CHECK(tfidf_vector(tokenize("zzz qqq"), v).empty());
    auto single = tfidf_vector(tokenize("b"), v);
    REQUIRE(single.size() == 1);
    CHECK(single[0].second == doctest::Approx(1.0));
  }

  TEST_CASE("vocabulary filters") {
    auto docs = tok_docs({"a b a", "a"});
    try {
      build_tfidf_vocab(docs, 3, {});
      FAIL("expected an empty-vocabulary error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("min_df") != std::string::npos);
    }
    auto v = build_tfidf_vocab(docs, 1, {"a"});
    CHECK(v.terms == std::vector<std::string>{"b"});
    auto numeric = build_tfidf_vocab(tok_docs({"2016 x", "2016 x"}), 1, {});
    CHECK(numeric.terms == std::vector<std::string>{"x"});
  }

  TEST_CASE("property: tf-idf norms are 0 or 1") {
    auto world = toy_world(40);
    Rng rng(8);
    const auto& terms = world.res.vocab.terms;
    for (int i = 0; i < 300; ++i) {
      std::string text;
      const int n = static_cast<int>(rng.below(12));
      for (int j = 0; j < n; ++j) text += (rng.bernoulli(0.7) ? terms[rng.below(terms.size())] : "oov") + " ";
      const double nrm = norm2(tfidf_vector(tokenize(text), world.res.vocab));
      CHECK((nrm == 0.0 || std::abs(nrm - 1.0) <= 1e-9));
    }
  }

  TEST_CASE("partition featurization") {
    auto world = toy_world();
    const auto& res = world.res;
    auto empty = featurize_partition({}, res);
    for (double x : empty.liwc) CHECK(x == 0.0);
    CHECK(empty.sentiment.polarity == 0.0);
    CHECK(empty.sentiment.subjectivity == 0.0);
    for (double x : empty.lda) CHECK(x == doctest::Approx(1.0 / res.lda.topics()));
    CHECK(empty.tokens.empty());

    std::vector<Post> one = {test::make_post("t", 0, "a", 0.5, "great")};
    auto b1 = featurize_partition(one, res);
    auto b2 = featurize_text("great", res);
    CHECK(b1.liwc == b2.liwc);
    CHECK(b1.sentiment.polarity == b2.sentiment.polarity);
    CHECK(b1.lda == b2.lda);
    CHECK(b1.tokens == b2.tokens);

    std::vector<Post> two = {test::make_post("t", 0, "a", 0.5, "i feel alone"),
                             test::make_post("t", 1, "a", 0.5, "so happy today")};
    std::vector<Post> merged = {test::make_post("t", 0, "a", 0.5, "i feel alone\nso happy today")};
    auto s = featurize_partition(two, res), m = featurize_partition(merged, res);
    CHECK(s.liwc == m.liwc);
    CHECK(s.lda == m.lda);
    CHECK(s.tokens == m.tokens);
    CHECK(s.sentiment.polarity == m.sentiment.polarity);
  }

  TEST_CASE("shared features count the window") {
    auto posts = test::pattern_posts("t", "TPTT", {0.1, 0.9, 0.2, 0.3});
    posts[1].is_moderator = true;
    auto ft = extract_flagged(build_corpus(posts), {}).at(0);
    auto s = shared_features(ft);
    CHECK(s.first_reply_q == doctest::Approx(0.9));
    CHECK(s.n_target_posts == 2);
    CHECK(s.n_participant_posts == 1);
    CHECK(s.n_moderator_posts == 1);

    auto ft2 = extract_flagged(build_corpus(test::pattern_posts("u", "TPPT", {0.1, 0.2, 0.8, 0.3})), {}).at(0);
    auto s2 = shared_features(ft2);
    CHECK(s2.first_reply_q == doctest::Approx(0.2));
    CHECK(s2.n_moderator_posts == 0);
  }

  TEST_CASE("assembly dimensions and group maps") {
    auto world = toy_world();
    const auto& res = world.res;
    const std::size_t per_user = res.liwc.size() + 2 + res.lda.topics() + res.vocab.terms.size();
    const auto& ft = world.threads.at(0);
    auto sep = assemble(ft, AssemblyStrategy::SeparateSymmetric, res);
    auto avg = assemble(ft, AssemblyStrategy::Averaged, res);
    auto tgt = assemble(ft, AssemblyStrategy::TargetOnly, res);
    CHECK(sep.values.size() == 2 * per_user + 4);
    CHECK(avg.values.size() == per_user + 4);
    CHECK(tgt.values.size() == per_user + 4);
    AssemblyOptions bare;
    bare.target_only_includes_shared = false;
    CHECK(assemble(ft, AssemblyStrategy::TargetOnly, res, bare).values.size() == per_user);
    check_partitioned(sep);
    check_partitioned(avg);
    check_partitioned(tgt);
    CHECK(feature_names(AssemblyStrategy::SeparateSymmetric, res).size() == sep.values.size());
    CHECK(feature_names(AssemblyStrategy::Averaged, res)[0].starts_with("liwc_avg:"));
    CHECK(group_family("tok_p") == "tok");
    CHECK(group_family("shared") == "shared");
    // The shared tail agrees across strategies.
    for (std::size_t i = 0; i < 4; ++i) CHECK(sep.values[sep.values.size() - 4 + i] == avg.values[avg.values.size() - 4 + i]);
  }

  TEST_CASE("property: swapping partitions swaps the _t and _p ranges") {
    auto world = toy_world();
    const auto& res = world.res;
    for (const auto& ft : world.threads) {
      auto t = featurize_partition(ft.partition.target_posts, res);
      auto p = featurize_partition(ft.partition.participant_posts, res);
      auto sh = shared_features(ft);
      auto fwd = assemble_blocks(t, p, sh, AssemblyStrategy::SeparateSymmetric, res);
      auto rev = assemble_blocks(p, t, sh, AssemblyStrategy::SeparateSymmetric, res);
      CHECK(swap_partitions(fwd) == rev.values);
    }
  }

  TEST_CASE("averaging identical blocks is the identity") {
    auto world = toy_world();
    const auto& ft = world.threads.at(1);
    auto t = featurize_partition(ft.partition.target_posts, world.res);
    auto sh = shared_features(ft);
    auto avg = assemble_blocks(t, t, sh, AssemblyStrategy::Averaged, world.res);
    auto tgt = assemble_blocks(t, t, sh, AssemblyStrategy::TargetOnly, world.res);
    REQUIRE(avg.values.size() == tgt.values.size());
    for (std::size_t i = 0; i < avg.values.size(); ++i) CHECK(avg.values[i] == doctest::Approx(tgt.values[i]).epsilon(1e-12));
  }

  TEST_CASE("group selection and dataset files") {
    auto world = toy_world(60);
    auto blocks = compute_blocks(world.threads, world.res);
    auto data = dataset_from_blocks(blocks, world.threads, AssemblyStrategy::SeparateSymmetric, world.res);
    data.fingerprints["corpus"] = "abc";
    CHECK(data.size() == world.threads.size());

    auto liwc = select_groups(data, {"liwc"});
    CHECK(liwc.X.cols() == 2 * world.res.liwc.size() + 4);
    for (const auto& g : liwc.group_map) CHECK((g.name.starts_with("liwc") || g.name == "shared"));
    CHECK(liwc.feature_names.size() == liwc.X.cols());

    const auto dir = std::filesystem::temp_directory_path() / "triage_dataset_test";
    std::filesystem::remove_all(dir);
    write_dataset(dir, data);
    auto back = read_dataset(dir);
    CHECK(back.X == data.X);
    CHECK(back.y == data.y);
    CHECK(back.q == data.q);
    CHECK(back.ids == data.ids);
    CHECK(back.group_map == data.group_map);
    CHECK(back.feature_names == data.feature_names);
    CHECK(back.fingerprints == data.fingerprints);
    CHECK(back.strategy == "separate_symmetric");

    auto vocab = vocab_from_json(nlohmann::json::parse(vocab_to_json(world.res.vocab).dump()));
    CHECK(vocab.terms == world.res.vocab.terms);
    CHECK(vocab.idf == world.res.vocab.idf);
    CHECK(vocab.find(vocab.terms[2]) == 2);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("strategy names round-trip") {
    for (auto s : {AssemblyStrategy::TargetOnly, AssemblyStrategy::Averaged, AssemblyStrategy::SeparateSymmetric})
      CHECK(strategy_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(strategy_from_string("mixed"), UsageError);
  }
}
