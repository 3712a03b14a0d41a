#include "s2s/matching.hpp"

#include "s2s/embedding_io.hpp"
#include "s2s/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"

namespace s2s {
namespace {

Eigen::VectorXd basis(int d, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v[i] = 1.0;
  return v;
}

Embedding random_unit(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> g(0, 1);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = g(gen);
  return Embedding::unit(v);
}

std::vector<Embedding> random_units(std::mt19937_64& gen, int d, int n) {
  std::vector<Embedding> out;
  for (int i = 0; i < n; ++i) out.push_back(random_unit(gen, d));
  return out;
}

CandidateSet make_set(std::mt19937_64& gen, int d, int l, const std::string& scene = "s0") {
  CandidateSet set;
  set.scene_id = scene;
  set.object_id = "obj";
  for (int i = 0; i < l; ++i) {
    Candidate c;
    c.asset_id = scene + "_a" + std::to_string(i);
    c.embedding = random_unit(gen, d);
    c.scene_id = scene;
    set.candidates.push_back(c);
  }
  return set;
}

Eigen::VectorXd random_vec(std::mt19937_64& gen, int n, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

Eigen::VectorXd to_eigen(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

TEST(ModalityScores, OrthonormalBasis) {
  const std::vector<Embedding> c{Embedding::unit(basis(3, 0)), Embedding::unit(basis(3, 1))};
  const auto q = modality_scores(Embedding::unit(basis(3, 0)), c);
  EXPECT_EQ(q[0], 1.0);
  EXPECT_EQ(q[1], 0.0);
}

TEST(ModalityScores, SelfSimilarity) {
  std::mt19937_64 gen(1);
  const auto v = random_unit(gen, 16);
  const std::vector<Embedding> c{v};
  EXPECT_NEAR(modality_scores(v, c)[0], 1.0, 1e-12);
}

TEST(ModalityScores, MatchesNaiveLoopAndBounded) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    const auto q = random_unit(gen, 32);
    const auto c = random_units(gen, 32, 10);
    const auto got = modality_scores(q, c);
    for (int k = 0; k < 10; ++k) {
      double s = 0;
      for (int i = 0; i < 32; ++i) s += c[static_cast<std::size_t>(k)].values[i] * q.values[i];
      EXPECT_NEAR(got[k], s, 1e-12);
      EXPECT_LE(std::abs(got[k]), 1.0);
    }
  }
}

TEST(ModalityScores, Errors) {
  std::mt19937_64 gen(3);
  const auto q = random_unit(gen, 4);
  const std::vector<Embedding> wrong_dim{random_unit(gen, 5)};
  EXPECT_THROW(modality_scores(q, wrong_dim), Error);
  Embedding raw;
  raw.values = Eigen::VectorXd::Constant(4, 1.0);
  raw.normalized = false;
  const std::vector<Embedding> unnormalized{raw};
  EXPECT_THROW(modality_scores(q, unnormalized), Error);
  EXPECT_THROW(Embedding::unit(Eigen::VectorXd::Zero(4)), Error);
}

TEST(PointScore, Cases) {
  std::mt19937_64 gen(4);
  const auto c = random_units(gen, 8, 5);
  PointScorerWeights zero{Eigen::VectorXd::Zero(8), 0.0};
  EXPECT_TRUE(point_score(c, zero).isZero());

  PointScorerWeights e1{basis(8, 0), 0.0};
  const std::vector<Embedding> one{Embedding::unit(basis(8, 0))};
  EXPECT_EQ(point_score(one, e1)[0], 1.0);

  PointScorerWeights w{random_vec(gen, 8), 0.37};
  const auto got = point_score(c, w);
  for (int k = 0; k < 5; ++k) {
    double s = w.bias;
    for (int i = 0; i < 8; ++i) s += w.weights[i] * c[static_cast<std::size_t>(k)].values[i];
    EXPECT_NEAR(got[k], s, 1e-12);
  }
  PointScorerWeights bad{Eigen::VectorXd::Zero(3), 0.0};
  EXPECT_THROW(point_score(c, bad), Error);
}

TEST(PointScorerWeights, JsonRoundTrip) {
  const auto w = PointScorerWeights::from_json(R"({"D": 3, "weights": [0.5, -1.0, 2.0], "bias": 0.25})");
  EXPECT_EQ(w.weights.size(), 3);
  EXPECT_EQ(w.bias, 0.25);
  const auto back = PointScorerWeights::from_json(w.to_json());
  EXPECT_EQ(back.weights, w.weights);
  EXPECT_THROW(PointScorerWeights::from_json(R"({"D": 2, "weights": [1.0], "bias": 0})"), Error);
  EXPECT_THROW(PointScorerWeights::from_json("not json"), Error);
}

TEST(Rank, TruthMatchingBothQueriesFirst) {
  const int d = 6;
  CandidateSet set;
  for (int i = 0; i < 5; ++i) {
    Candidate c;
    c.asset_id = "a" + std::to_string(i);
    c.embedding = Embedding::unit(basis(d, i));
    set.candidates.push_back(c);
  }
  set.image_query = Embedding::unit(basis(d, 3));
  set.text_query = Embedding::unit(basis(d, 3));
  const auto r = rank_candidates(set);
  EXPECT_EQ(r.order.front(), 3u);
  EXPECT_EQ(r.asset_ids.front(), "a3");
  EXPECT_EQ(r.scores.fused[3], 2.0);
}

TEST(Rank, AllEqualKeepsOriginalOrder) {
  CandidateSet set;
  for (int i = 0; i < 6; ++i) {
    Candidate c;
    c.asset_id = "a" + std::to_string(i);
    c.embedding = Embedding::unit(basis(7, i));
    set.candidates.push_back(c);
  }
  set.image_query = Embedding::unit(basis(7, 6));
  const auto r = rank_candidates(set);
  std::vector<std::size_t> want(6);
  std::iota(want.begin(), want.end(), 0);
  EXPECT_EQ(r.order, want);
}

TEST(Rank, MatchesSortOracleAndShiftInvariant) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    auto set = make_set(gen, 16, 10);
    set.image_query = random_unit(gen, 16);
    set.text_query = random_unit(gen, 16);
    const PointScorerWeights w{random_vec(gen, 16, 0.5), 0.1};
    const auto r = rank_candidates(set, &w);

    const auto emb = candidate_embeddings(set);
    std::vector<double> fused(10);
    for (int k = 0; k < 10; ++k) {
      const auto& h = set.candidates[static_cast<std::size_t>(k)].embedding.values;
      fused[static_cast<std::size_t>(k)] = h.dot(set.image_query->values) + h.dot(set.text_query->values) +
                                           w.weights.dot(h) + w.bias;
    }
    std::vector<std::size_t> want(10);
    std::iota(want.begin(), want.end(), 0);
    std::stable_sort(want.begin(), want.end(), [&](auto a, auto b) { return fused[a] > fused[b]; });
    EXPECT_EQ(r.order, want);

    // A larger bias adds the same constant to every fused score.
    const PointScorerWeights shifted{w.weights, w.bias + 7.5};
    EXPECT_EQ(rank_candidates(set, &shifted).order, r.order);
  }
}

TEST(Rank, NoSignalIsError) {
  std::mt19937_64 gen(6);
  const auto set = make_set(gen, 4, 3);
  EXPECT_THROW(rank_candidates(set), Error);
}

TEST(Rank, PointScorerAloneSuffices) {
  std::mt19937_64 gen(7);
  const auto set = make_set(gen, 4, 3);
  const PointScorerWeights w{random_vec(gen, 4), 0};
  const auto r = rank_candidates(set, &w);
  EXPECT_FALSE(r.scores.image.has_value());
  EXPECT_TRUE(r.scores.point.has_value());
  EXPECT_EQ(r.order.size(), 3u);
}

TEST(Rank, OracleCandidateTop1Everywhere) {
  std::mt19937_64 gen(8);
  std::size_t hits = 0;
  for (int t = 0; t < 200; ++t) {
    auto set = make_set(gen, 32, 10);
    const auto truth = static_cast<std::size_t>(gen() % 10);
    set.image_query = set.candidates[truth].embedding;
    set.text_query = set.candidates[truth].embedding;
    hits += rank_candidates(set).order.front() == truth ? 1 : 0;
  }
  EXPECT_EQ(hits, 200u);
}

TEST(CandidateSet, Validation) {
  std::mt19937_64 gen(9);
  auto set = make_set(gen, 4, 1);
  EXPECT_THROW(set.validate(), Error);
  set = make_set(gen, 4, 3);
  set.truth_index = 3;
  EXPECT_THROW(set.validate(), Error);
  set.truth_index = 2;
  EXPECT_NO_THROW(set.validate());
  set.candidates[1].embedding = random_unit(gen, 5);
  EXPECT_THROW(set.validate(), Error);
}

ScoreVector scores_of(std::optional<Eigen::VectorXd> i, std::optional<Eigen::VectorXd> t,
                      std::optional<Eigen::VectorXd> p) {
  return ScoreVector::fuse(std::move(i), std::move(t), std::move(p));
}

TEST(MatchingLoss, ClosedForms) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  EXPECT_NEAR(matching_loss(scores_of(zero, std::nullopt, std::nullopt), 1).loss, std::log(2.0), 1e-15);

  Eigen::VectorXd one = Eigen::VectorXd::Zero(4);
  one[2] = 1.0;
  const auto r = matching_loss(scores_of(one, one, one), 2);
  EXPECT_NEAR(r.loss, oracle::logistic_loss(3.0), 1e-15);
  EXPECT_NEAR(r.loss, 0.04858735157374206, 1e-12);
  EXPECT_NEAR(r.gradient[2], 1.0 / (1.0 + std::exp(-3.0)) - 1.0, 1e-15);
  EXPECT_EQ(r.gradient[0], 0.0);
  EXPECT_THROW(matching_loss(scores_of(zero, std::nullopt, std::nullopt), 4), Error);
}

TEST(MatchingLoss, PositiveAndStrictlyDecreasing) {
  double prev = std::numeric_limits<double>::infinity();
  for (double s = -30; s <= 30; s += 0.5) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
    v[0] = s;
    const double l = matching_loss(scores_of(v, std::nullopt, std::nullopt), 0).loss;
    EXPECT_GT(l, 0.0);
    EXPECT_LT(l, prev);
    prev = l;
  }
  Eigen::VectorXd big = Eigen::VectorXd::Zero(2);
  big[0] = -800;
  EXPECT_NEAR(matching_loss(scores_of(big, std::nullopt, std::nullopt), 0).loss, 800.0, 1e-9);
}

TEST(MatchingLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(10);
  for (auto mode : {LossMode::kLogistic, LossMode::kSoftmax}) {
    for (int t = 0; t < 100; ++t) {
      const int l = 2 + static_cast<int>(gen() % 9);
      const auto x = to_std(random_vec(gen, l));
      const std::size_t truth = gen() % static_cast<std::size_t>(l);
      auto f = [&](const std::vector<double>& v) {
        return matching_loss(scores_of(to_eigen(v), std::nullopt, std::nullopt), truth, mode).loss;
      };
      const auto g = matching_loss(scores_of(to_eigen(x), std::nullopt, std::nullopt), truth, mode).gradient;
      for (int i = 0; i < l; ++i) {
        const double num = oracle::central_difference(f, x, static_cast<std::size_t>(i));
        if (g[i] == 0.0) {
          EXPECT_LT(std::abs(num), 1e-9);
        } else {
          EXPECT_LT(oracle::relative_error(g[i], num), 1e-6) << "mode " << static_cast<int>(mode);
        }
      }
    }
  }
}

TEST(MatchingLoss, SoftmaxClosedForm) {
  Eigen::VectorXd v(2);
  v << 0.0, 0.0;
  const auto r = matching_loss(scores_of(v, std::nullopt, std::nullopt), 0, LossMode::kSoftmax);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(r.gradient[0], -0.5, 1e-15);
  EXPECT_NEAR(r.gradient[1], 0.5, 1e-15);
}

TEST(AuxiliaryLoss, ClosedFormsAndPointExcluded) {
  Eigen::VectorXd i = Eigen::VectorXd::Zero(3), t = Eigen::VectorXd::Zero(3), p = Eigen::VectorXd::Constant(3, 5);
  EXPECT_NEAR(auxiliary_loss(scores_of(i, t, p), 0).loss, std::log(2.0), 1e-15);
  i[1] = 1;
  t[1] = 1;
  const auto r = auxiliary_loss(scores_of(i, t, p), 1);
  EXPECT_NEAR(r.loss, oracle::logistic_loss(2.0), 1e-15);
  EXPECT_NEAR(r.loss, 0.12692801104297263, 1e-12);
  EXPECT_THROW(auxiliary_loss(scores_of(i, std::nullopt, p), 0), Error);
  EXPECT_THROW(auxiliary_loss(scores_of(std::nullopt, t, std::nullopt), 0), Error);
}

TEST(AuxiliaryLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int l = 2 + static_cast<int>(gen() % 9);
    const auto img = random_vec(gen, l);
    const auto x = to_std(random_vec(gen, l));  // text scores
    const std::size_t truth = gen() % static_cast<std::size_t>(l);
    auto f = [&](const std::vector<double>& v) { return auxiliary_loss(scores_of(img, to_eigen(v), std::nullopt), truth).loss; };
    const auto g = auxiliary_loss(scores_of(img, to_eigen(x), std::nullopt), truth).gradient;
    for (int i = 0; i < l; ++i) {
      const double num = oracle::central_difference(f, x, static_cast<std::size_t>(i));
      if (g[i] == 0.0) {
        EXPECT_LT(std::abs(num), 1e-9);
      } else {
        EXPECT_LT(oracle::relative_error(g[i], num), 1e-6);
      }
    }
  }
}

TEST(QueryGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 8, l = 6;
    const auto cands = random_units(gen, d, l);
    const auto x = to_std(random_vec(gen, d, 1.0));  // raw query, not constrained to the sphere
    const std::size_t truth = gen() % l;
    auto scores = [&](const std::vector<double>& q) {
      Eigen::VectorXd s(l);
      for (int k = 0; k < l; ++k) s[k] = cands[static_cast<std::size_t>(k)].values.dot(to_eigen(q));
      return s;
    };
    auto f = [&](const std::vector<double>& q) {
      return matching_loss(scores_of(scores(q), std::nullopt, std::nullopt), truth, LossMode::kSoftmax).loss;
    };
    const auto dl = matching_loss(scores_of(scores(x), std::nullopt, std::nullopt), truth, LossMode::kSoftmax);
    const auto g = query_gradient(cands, dl.gradient);
    for (int i = 0; i < d; ++i) {
      EXPECT_LT(oracle::relative_error(g[i], oracle::central_difference(f, x, static_cast<std::size_t>(i))), 1e-6);
    }
  }
}

TEST(ScorerGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 5, l = 7;
    const auto cands = random_units(gen, d, l);
    const std::size_t truth = gen() % l;
    auto x = to_std(random_vec(gen, d + 1, 1.0));  // weights then bias
    auto f = [&](const std::vector<double>& wb) {
      PointScorerWeights w{to_eigen(std::vector<double>(wb.begin(), wb.end() - 1)), wb.back()};
      return matching_loss(scores_of(std::nullopt, std::nullopt, point_score(cands, w)), truth,
                           LossMode::kLogistic).loss;
    };
    PointScorerWeights w{to_eigen(std::vector<double>(x.begin(), x.end() - 1)), x.back()};
    const auto dl = matching_loss(scores_of(std::nullopt, std::nullopt, point_score(cands, w)), truth,
                                  LossMode::kLogistic);
    const auto g = scorer_gradient(cands, dl.gradient);
    for (int i = 0; i < d; ++i)
      EXPECT_LT(oracle::relative_error(g.weights[i], oracle::central_difference(f, x, static_cast<std::size_t>(i))),
                1e-6);
    EXPECT_LT(oracle::relative_error(g.bias, oracle::central_difference(f, x, static_cast<std::size_t>(d))), 1e-6);
  }
}

TEST(TotalObjective, Additive) {
  const LossResult zero{0.0, Eigen::VectorXd::Zero(2)};
  EXPECT_EQ(total_objective(zero, zero).loss, 0.0);
  const LossResult l2{std::log(2.0), Eigen::VectorXd::Constant(2, -0.5)};
  const auto t = total_objective(l2, l2);
  EXPECT_EQ(t.loss, 2 * std::log(2.0));
  EXPECT_EQ(t.gradient.size(), 4);

  std::mt19937_64 gen(14);
  std::vector<LossResult> items;
  double sum = 0;
  for (int i = 0; i < 8; ++i) {
    const auto img = random_vec(gen, 10), txt = random_vec(gen, 10), pt = random_vec(gen, 10);
    const std::size_t truth = gen() % 10;
    const auto m = matching_loss(scores_of(img, txt, pt), truth);
    const auto a = auxiliary_loss(scores_of(img, txt, pt), truth);
    const auto obj = total_objective(m, a);
    const double want = oracle::logistic_loss(img[truth] + txt[truth] + pt[truth]) +
                        oracle::logistic_loss(img[truth] + txt[truth]);
    EXPECT_LT(oracle::relative_error(obj.loss, want), 1e-12);
    sum += obj.loss;
    items.push_back(obj);
  }
  const auto mean = batch_mean(items);
  EXPECT_NEAR(mean.loss, sum / 8.0, 1e-12);
  EXPECT_EQ(mean.gradient.size(), 8 * 20);
  EXPECT_NEAR(mean.gradient[0], items[0].gradient[0] / 8.0, 1e-15);
}

std::vector<Candidate> make_pool(std::size_t n) {
  std::vector<Candidate> pool;
  std::mt19937_64 gen(99);
  for (std::size_t i = 0; i < n; ++i) {
    Candidate c;
    c.asset_id = "p" + std::to_string(i);
    c.scene_id = "other" + std::to_string(i % 5);
    c.embedding = random_unit(gen, 4);
    pool.push_back(c);
  }
  return pool;
}

// Independent reference sampler over the raw 64-bit engine: rejection-sampled
// bounded draws, partial Fisher-Yates, then the truth slot.
std::pair<std::vector<std::size_t>, std::size_t> reference_sample(std::uint64_t seed, std::size_t pool, std::size_t n) {
  std::mt19937_64 e(seed);
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t max = ~std::uint64_t{0};
    const std::uint64_t limit = max - max % bound;
    std::uint64_t x;
    do x = e(); while (x >= limit);
    return x % bound;
  };
  std::vector<std::size_t> idx(pool);
  for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + below(pool - i)]);
  idx.resize(n);
  return {idx, below(n + 1)};
}

TEST(NegativeSet, Preconditions) {
  std::mt19937_64 gen(15);
  auto set = make_set(gen, 4, 3);
  set.truth_index = 0;
  const auto pool = make_pool(50);
  EXPECT_THROW(build_negative_set(set, pool, 0, 1), Error);
  EXPECT_THROW(build_negative_set(set, std::span(pool).first(3), 4, 1), Error);
  auto tainted = pool;
  tainted[7].scene_id = set.scene_id;
  EXPECT_THROW(build_negative_set(set, tainted, 9, 1), Error);
}

TEST(NegativeSet, DeterministicAndMatchesReferenceSampler) {
  std::mt19937_64 gen(16);
  auto set = make_set(gen, 4, 10);
  set.truth_index = 4;
  const auto pool = make_pool(50);
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
    const auto a = build_negative_set(set, pool, 9, seed);
    const auto b = build_negative_set(set, pool, 9, seed);
    ASSERT_EQ(a.candidates.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.candidates[i].asset_id, b.candidates[i].asset_id);

    const auto [picked, slot] = reference_sample(seed, 50, 9);
    EXPECT_EQ(*a.truth_index, slot);
    EXPECT_EQ(a.candidates[slot].asset_id, set.candidates[4].asset_id);
    std::vector<std::string> want;
    for (auto i : picked) want.push_back(pool[i].asset_id);
    want.insert(want.begin() + static_cast<std::ptrdiff_t>(slot), set.candidates[4].asset_id);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.candidates[i].asset_id, want[i]);
    std::set<std::string> distinct(want.begin(), want.end());
    EXPECT_EQ(distinct.size(), 10u);
  }
}

TEST(EmbeddingIo, RoundTripWithSidecar) {
  std::mt19937_64 gen(17);
  EmbeddingTable t;
  t.dim = 8;
  for (int i = 0; i < 5; ++i) t.add("point", "asset" + std::to_string(i), random_unit(gen, 8).values);
  const auto path = std::filesystem::temp_directory_path() / "s2s_emb_test.bin";
  write_embedding_table(path, t);
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
  const auto back = read_embedding_table(path);
  EXPECT_EQ(back.dim, 8u);
  ASSERT_EQ(back.rows.size(), 5u);
  const auto* row = back.find("point", "asset3");
  ASSERT_NE(row, nullptr);
  EXPECT_LT((*row - t.rows[3]).norm(), 1e-6);
  std::filesystem::remove(path);
  std::filesystem::remove(sidecar_path(path));
}

}  // namespace
}  // namespace s2s
