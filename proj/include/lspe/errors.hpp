#pragma once

#include <stdexcept>

namespace lspe {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define LSPE_DEFINE_ERROR(NAME) \
  struct NAME : Error {         \
    using Error::Error;         \
  }

// chain
LSPE_DEFINE_ERROR(NotStochastic);
LSPE_DEFINE_ERROR(NotIrreducible);
LSPE_DEFINE_ERROR(DimensionMismatch);
LSPE_DEFINE_ERROR(NotMixedByTmax);
LSPE_DEFINE_ERROR(InvalidState);

// exact model
LSPE_DEFINE_ERROR(SingularB);
LSPE_DEFINE_ERROR(SingularA);
LSPE_DEFINE_ERROR(UnstableN);
LSPE_DEFINE_ERROR(NotPositiveDefinite);

// runner
LSPE_DEFINE_ERROR(InvalidSchedule);
LSPE_DEFINE_ERROR(NumericalBreakdown);

// ledger
LSPE_DEFINE_ERROR(HorizonTooLarge);
LSPE_DEFINE_ERROR(MissingConstant);
LSPE_DEFINE_ERROR(UnknownSelector);
LSPE_DEFINE_ERROR(ConditionViolated);

// experiment
LSPE_DEFINE_ERROR(ParseError);
LSPE_DEFINE_ERROR(ConstraintError);
LSPE_DEFINE_ERROR(IoError);

#undef LSPE_DEFINE_ERROR

}  // namespace lspe
