#include "latiso/errors.hpp"

namespace latiso {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_argument: return "invalid-argument";
    case errc::degenerate_restriction: return "degenerate-restriction";
    case errc::invalid_block_size: return "invalid-block-size";
    case errc::non_square_block: return "non-square-block";
    case errc::zero_scale: return "zero-scale";
    case errc::empty_locations: return "empty-locations";
    case errc::too_few_points: return "too-few-points";
    case errc::too_few_vectors: return "too-few-vectors";
    case errc::too_few_weighted: return "too-few-weighted";
    case errc::singular_scatter: return "singular-scatter";
    case errc::no_testable_contrasts: return "no-testable-contrasts";
    case errc::irreparable_covariance: return "irreparable-covariance";
    case errc::block_too_small_for_lagset: return "block-too-small-for-lagset";
    case errc::all_windows_failed: return "all-windows-failed";
    case errc::grid_too_small: return "grid-too-small";
    case errc::size_guard_exceeded: return "size-guard-exceeded";
    case errc::factorization_failed: return "factorization-failed";
    case errc::block_exceeds_grid: return "block-exceeds-grid";
    case errc::parse_error: return "parse-error";
  }
  return "unknown-error";
}

}  // namespace latiso
