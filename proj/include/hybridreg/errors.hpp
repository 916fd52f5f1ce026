#pragma once

#include <stdexcept>
#include <string>

namespace hybridreg {

// Base type for all domain errors; the CLI maps these to exit code 1
// (computation failure) vs. 2 (usage/input error, see UsageError).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error {
    using Error::Error;
};

// geom
struct DegenerateConfiguration : Error { using Error::Error; };
struct EmptyCloud : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };

// autodiff
struct ShapeMismatch : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct RootNotScalar : Error { using Error::Error; };

// attention
struct EmptyPatch : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };

// matching
struct NotNormalized : Error { using Error::Error; };
struct ZeroRowOrColumn : Error { using Error::Error; };

// losses
struct NonPositiveVariance : Error { using Error::Error; };
struct DivergedLoss : Error { using Error::Error; };

// estimation
struct TooFewCorrespondences : Error { using Error::Error; };
struct NoValidModel : Error { using Error::Error; };
struct NoUsablePatch : Error { using Error::Error; };

// scenegen
struct NoValidPose : Error { using Error::Error; };
struct NoQualifyingPair : Error { using Error::Error; };
struct EmptyOverlap : Error { using Error::Error; };
struct QuotaUnreachable : Error { using Error::Error; };

// metrics
struct EmptyCorrespondences : Error { using Error::Error; };
struct EmptyBatch : Error { using Error::Error; };
struct InvalidRotation : Error { using Error::Error; };

// io
struct IoError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace hybridreg
