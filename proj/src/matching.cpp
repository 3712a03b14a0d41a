#include "s2s/matching.hpp"

#include "s2s/error.hpp"
#include "s2s/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace s2s {

Embedding Embedding::unit(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!v.allFinite() || !(n > 0.0)) fail(ErrorCode::kInvalidArgument, "cannot normalize embedding");
  return Embedding{v / n, true};
}

namespace {

void check_unit(const Embedding& e, const char* what) {
  if (!e.values.allFinite()) fail(ErrorCode::kInvalidArgument, std::string(what) + ": non-finite entries");
  if (!e.normalized || std::abs(e.values.norm() - 1.0) > kUnitNormTolerance) {
    fail(ErrorCode::kInvalidArgument, std::string(what) + ": embedding is not unit-norm");
  }
}

}  // namespace

void CandidateSet::validate() const {
  if (candidates.size() < 2) fail(ErrorCode::kPrecondition, object_id + ": fewer than 2 candidates");
  const std::size_t d = candidates.front().embedding.dim();
  for (const auto& c : candidates) {
    if (c.embedding.dim() != d) fail(ErrorCode::kDimensionMismatch, object_id + ": embedding dimensions differ");
  }
  for (const auto* q : {&image_query, &text_query}) {
    if (q->has_value() && (*q)->dim() != d) {
      fail(ErrorCode::kDimensionMismatch, object_id + ": query dimension differs from candidates");
    }
  }
  if (truth_index && *truth_index >= candidates.size()) {
    fail(ErrorCode::kPrecondition, object_id + ": truth index out of range");
  }
}

ScoreVector ScoreVector::fuse(std::optional<Eigen::VectorXd> image, std::optional<Eigen::VectorXd> text,
                              std::optional<Eigen::VectorXd> point) {
  ScoreVector s{std::move(image), std::move(text), std::move(point), {}};
  Eigen::Index n = -1;
  for (const auto* v : {&s.image, &s.text, &s.point}) {
    if (!v->has_value()) continue;
    if (n >= 0 && (*v)->size() != n) fail(ErrorCode::kDimensionMismatch, "score vectors differ in length");
    n = (*v)->size();
  }
  if (n < 0) fail(ErrorCode::kPrecondition, "no score vector present");
  s.fused = Eigen::VectorXd::Zero(n);
  for (const auto* v : {&s.image, &s.text, &s.point}) {
    if (v->has_value()) s.fused += **v;
  }
  return s;
}

PointScorerWeights PointScorerWeights::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kMalformed, std::string("scorer weights: ") + e.what());
  }
  if (!j.contains("D") || !j.contains("weights") || !j.contains("bias")) {
    fail(ErrorCode::kMalformed, "scorer weights need D, weights and bias");
  }
  const auto d = j.at("D").get<std::size_t>();
  const auto w = j.at("weights").get<std::vector<double>>();
  if (w.size() != d) fail(ErrorCode::kDimensionMismatch, "scorer weights length differs from D");
  PointScorerWeights out;
  out.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  out.bias = j.at("bias").get<double>();
  if (!out.weights.allFinite() || !std::isfinite(out.bias)) {
    fail(ErrorCode::kMalformed, "scorer weights are not finite");
  }
  return out;
}

std::string PointScorerWeights::to_json() const {
  nlohmann::json j;
  j["D"] = weights.size();
  j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
  j["bias"] = bias;
  return j.dump();
}

Eigen::VectorXd modality_scores(const Embedding& query, std::span<const Embedding> candidates) {
  check_unit(query, "query");
  Eigen::VectorXd q(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    check_unit(candidates[k], "candidate");
    if (candidates[k].dim() != query.dim()) fail(ErrorCode::kDimensionMismatch, "embedding dimension mismatch");
    q[static_cast<Eigen::Index>(k)] = std::clamp(candidates[k].values.dot(query.values), -1.0, 1.0);
  }
  return q;
}

Eigen::VectorXd point_score(std::span<const Embedding> candidates, const PointScorerWeights& w) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k].values.size() != w.weights.size()) {
      fail(ErrorCode::kDimensionMismatch, "scorer weights do not match embedding dimension");
    }
    q[static_cast<Eigen::Index>(k)] = w.weights.dot(candidates[k].values) + w.bias;
  }
  return q;
}

std::vector<Embedding> candidate_embeddings(const CandidateSet& set) {
  std::vector<Embedding> out;
  out.reserve(set.candidates.size());
  for (const auto& c : set.candidates) out.push_back(c.embedding);
  return out;
}

Ranking rank_candidates(const CandidateSet& set, const PointScorerWeights* scorer) {
  set.validate();
  if (!set.image_query && !set.text_query && scorer == nullptr) {
    fail(ErrorCode::kPrecondition, set.object_id + ": no image, text or point scorer available");
  }
  const auto embeddings = candidate_embeddings(set);
  std::optional<Eigen::VectorXd> qi, qt, qp;
  if (set.image_query) qi = modality_scores(*set.image_query, embeddings);
  if (set.text_query) qt = modality_scores(*set.text_query, embeddings);
  if (scorer) qp = point_score(embeddings, *scorer);

  Ranking r;
  r.scores = ScoreVector::fuse(std::move(qi), std::move(qt), std::move(qp));
  r.order.resize(set.candidates.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  const auto& f = r.scores.fused;
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    return f[static_cast<Eigen::Index>(a)] > f[static_cast<Eigen::Index>(b)];
  });
  for (auto k : r.order) r.asset_ids.push_back(set.candidates[k].asset_id);
  return r;
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double neg_log_logistic(double x) {
  if (x >= 0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

namespace {

LossResult loss_on(const Eigen::VectorXd& s, std::size_t truth, LossMode mode) {
  if (truth >= static_cast<std::size_t>(s.size())) fail(ErrorCode::kPrecondition, "truth index out of range");
  const auto t = static_cast<Eigen::Index>(truth);
  LossResult out;
  out.gradient = Eigen::VectorXd::Zero(s.size());
  if (mode == LossMode::kLogistic) {
    out.loss = neg_log_logistic(s[t]);
    out.gradient[t] = -logistic(-s[t]);  // sigma(s) - 1
  } else {
    const double m = s.maxCoeff();
    const Eigen::VectorXd e = (s.array() - m).exp();
    const double z = e.sum();
    out.loss = -(s[t] - m - std::log(z));
    out.gradient = e / z;
    out.gradient[t] -= 1.0;
  }
  return out;
}

}  // namespace

LossResult matching_loss(const ScoreVector& scores, std::size_t truth_index, LossMode mode) {
  return loss_on(scores.fused, truth_index, mode);
}

LossResult auxiliary_loss(const ScoreVector& scores, std::size_t truth_index, LossMode mode) {
  if (!scores.image || !scores.text) {
    fail(ErrorCode::kPrecondition, "auxiliary loss needs both image and text scores");
  }
  if (scores.image->size() != scores.text->size()) {
    fail(ErrorCode::kDimensionMismatch, "image and text score lengths differ");
  }
  return loss_on(*scores.image + *scores.text, truth_index, mode);
}

LossResult total_objective(const LossResult& match, const LossResult& aux) {
  LossResult out;
  out.loss = match.loss + aux.loss;
  out.gradient.resize(match.gradient.size() + aux.gradient.size());
  out.gradient << match.gradient, aux.gradient;
  return out;
}

LossResult batch_mean(std::span<const LossResult> items) {
  require(!items.empty(), "batch_mean: empty batch");
  const double inv = 1.0 / static_cast<double>(items.size());
  Eigen::Index total = 0;
  for (const auto& it : items) total += it.gradient.size();
  LossResult out;
  out.gradient.resize(total);
  Eigen::Index at = 0;
  for (const auto& it : items) {
    out.loss += it.loss;
    out.gradient.segment(at, it.gradient.size()) = it.gradient * inv;
    at += it.gradient.size();
  }
  out.loss *= inv;
  return out;
}

Eigen::VectorXd query_gradient(std::span<const Embedding> candidates, const Eigen::VectorXd& g) {
  require(static_cast<Eigen::Index>(candidates.size()) == g.size() && !candidates.empty(),
          "query_gradient: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(candidates.front().values.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) out += g[static_cast<Eigen::Index>(k)] * candidates[k].values;
  return out;
}

ScorerGradient scorer_gradient(std::span<const Embedding> candidates, const Eigen::VectorXd& g) {
  require(static_cast<Eigen::Index>(candidates.size()) == g.size() && !candidates.empty(),
          "scorer_gradient: size mismatch");
  ScorerGradient out{Eigen::VectorXd::Zero(candidates.front().values.size()), g.sum()};
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    out.weights += g[static_cast<Eigen::Index>(k)] * candidates[k].values;
  }
  return out;
}

CandidateSet build_negative_set(const CandidateSet& set, std::span<const Candidate> pool, std::size_t n,
                                std::uint64_t seed) {
  require(n >= 1, "negative set needs n >= 1");
  require(set.truth_index.has_value(), "negative set needs a truth index");
  require(*set.truth_index < set.candidates.size(), "truth index out of range");
  if (pool.size() < n) fail(ErrorCode::kPrecondition, "negative pool smaller than n");
  for (const auto& c : pool) {
    if (!set.scene_id.empty() && c.scene_id == set.scene_id) {
      fail(ErrorCode::kPrecondition, "negative pool contains candidates from the same scene");
    }
  }
  Rng rng(seed);
  const auto picked = rng.sample_without_replacement(pool.size(), n);
  const auto slot = static_cast<std::size_t>(rng.below(n + 1));

  CandidateSet out;
  out.scene_id = set.scene_id;
  out.object_id = set.object_id;
  out.image_query = set.image_query;
  out.text_query = set.text_query;
  for (auto i : picked) out.candidates.push_back(pool[i]);
  out.candidates.insert(out.candidates.begin() + static_cast<std::ptrdiff_t>(slot),
                        set.candidates[*set.truth_index]);
  out.truth_index = slot;
  return out;
}

}  // namespace s2s
