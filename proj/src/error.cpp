#include "s2s/error.hpp"

#include "s2s/rng.hpp"

#include <limits>
#include <numeric>

namespace s2s {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "OK";
    case ErrorCode::kInvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::kPrecondition: return "E_PRECONDITION";
    case ErrorCode::kDegenerate: return "E_DEGENERATE";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kMissingFile: return "E_MISSING_FILE";
    case ErrorCode::kDuplicateId: return "E_DUP_ID";
    case ErrorCode::kDimensionMismatch: return "E_DIM";
    case ErrorCode::kMalformed: return "E_MALFORMED";
    case ErrorCode::kNotFound: return "E_NOT_FOUND";
    case ErrorCode::kValidation: return "E_VALIDATION";
    case ErrorCode::kConflict: return "E_CONFLICT";
    case ErrorCode::kUnknown: return "E_UNKNOWN";
  }
  return "E_UNKNOWN";
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "Rng::below: zero bound");
  // Largest multiple of bound that fits; draws at or above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw Error(ErrorCode::kPrecondition, "sample_without_replacement: k > n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace s2s
