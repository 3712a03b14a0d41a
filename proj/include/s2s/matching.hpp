#pragma once

// Candidate scoring and the retrieval losses. Embeddings come from external
// encoders; this module only consumes them.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace s2s {

struct Embedding {
  Eigen::VectorXd values;
  bool normalized = false;

  std::size_t dim() const { return static_cast<std::size_t>(values.size()); }
  // Unit-norm copy; throws kInvalidArgument for zero or non-finite vectors.
  static Embedding unit(const Eigen::VectorXd& v);
};

inline constexpr double kUnitNormTolerance = 1e-6;

struct Candidate {
  std::string asset_id;
  std::string cloud_ref;  // bundle-relative path
  Embedding embedding;
  std::string provenance;
  std::string scene_id;
};

struct CandidateSet {
  std::string scene_id;
  std::string object_id;
  std::vector<Candidate> candidates;
  std::optional<std::size_t> truth_index;
  std::optional<Embedding> image_query;
  std::optional<Embedding> text_query;

  // L >= 2, shared dimension, truth index in range.
  void validate() const;
};

struct ScoreVector {
  std::optional<Eigen::VectorXd> image;
  std::optional<Eigen::VectorXd> text;
  std::optional<Eigen::VectorXd> point;
  Eigen::VectorXd fused;  // sum of the present vectors

  static ScoreVector fuse(std::optional<Eigen::VectorXd> image, std::optional<Eigen::VectorXd> text,
                          std::optional<Eigen::VectorXd> point);
  std::size_t size() const { return static_cast<std::size_t>(fused.size()); }
};

// Affine stand-in for the learned point-cloud scorer: q = w . h + b.
struct PointScorerWeights {
  Eigen::VectorXd weights;
  double bias = 0.0;

  static PointScorerWeights from_json(const std::string& text);
  std::string to_json() const;
};

// q[k] = <h_k, query>. Inputs must be unit-norm and share a dimension.
Eigen::VectorXd modality_scores(const Embedding& query, std::span<const Embedding> candidates);

Eigen::VectorXd point_score(std::span<const Embedding> candidates, const PointScorerWeights& w);

struct Ranking {
  std::vector<std::size_t> order;  // candidate indices, best first
  std::vector<std::string> asset_ids;
  ScoreVector scores;
};

// Descending by fused score; equal scores keep ascending candidate index.
// Throws kPrecondition when no image, text or point scorer is available.
Ranking rank_candidates(const CandidateSet& set, const PointScorerWeights* scorer = nullptr);

enum class LossMode { kLogistic, kSoftmax };

struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // d loss / d score entry
};

double logistic(double x);
// -log(logistic(x)), stable for large |x|.
double neg_log_logistic(double x);

// Logistic mode: -log sigma(fused[truth]); softmax mode: -log softmax(fused)[truth].
LossResult matching_loss(const ScoreVector& scores, std::size_t truth_index,
                         LossMode mode = LossMode::kLogistic);

// Same form over q_image + q_text only; both must be present.
LossResult auxiliary_loss(const ScoreVector& scores, std::size_t truth_index,
                          LossMode mode = LossMode::kLogistic);

// Sum of losses; gradients concatenated [match, aux].
LossResult total_objective(const LossResult& match, const LossResult& aux);

// Mean over a batch; gradients concatenated and scaled by 1/N.
LossResult batch_mean(std::span<const LossResult> items);

// Chain rule through q[k] = <h_k, query>: d loss / d query.
Eigen::VectorXd query_gradient(std::span<const Embedding> candidates, const Eigen::VectorXd& score_gradient);

struct ScorerGradient {
  Eigen::VectorXd weights;
  double bias = 0.0;
};
// Chain rule through the affine point scorer.
ScorerGradient scorer_gradient(std::span<const Embedding> candidates, const Eigen::VectorXd& score_gradient);

// {truth candidate} plus n candidates drawn without replacement from a pool of
// other scenes. The truth is inserted at a seeded position, recorded in
// truth_index.
CandidateSet build_negative_set(const CandidateSet& set, std::span<const Candidate> pool, std::size_t n,
                                std::uint64_t seed);

std::vector<Embedding> candidate_embeddings(const CandidateSet& set);

}  // namespace s2s
