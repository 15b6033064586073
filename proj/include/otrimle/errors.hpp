// Error types thrown across the library. Every failure mode that callers are
// expected to recover from (degenerate restarts, undefined discrepancies, ...)
// has its own type so it can be caught selectively.
#pragma once

#include <stdexcept>
#include <string>

namespace otrimle {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A covariance matrix is singular or all eigenvalues vanish.
struct DegenerateCovarianceError : Error {
  using Error::Error;
};

// The mixture density is zero at some observation.
struct DegenerateModelError : Error {
  using Error::Error;
};

// A cluster has too little effective weight or a rank-deficient scatter.
struct DegenerateClusterError : Error {
  using Error::Error;
};

// Every EM restart collapsed for a given (G, delta).
struct DegenerateFitError : Error {
  using Error::Error;
};

// The Kolmogorov discrepancy is undefined (essentially all weight on noise).
struct DiscrepancyUndefinedError : Error {
  using Error::Error;
};

// No delta grid point produced an admissible fit.
struct NoValidDeltaError : Error {
  using Error::Error;
};

// A fit violates its own invariants (e.g. positive noise weight but zero
// noise posteriors everywhere).
struct InconsistentFitError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace otrimle
