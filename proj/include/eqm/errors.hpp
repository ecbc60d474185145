#pragma once

#include <stdexcept>
#include <string>

namespace eqm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define EQM_DEFINE_ERROR(Name)                  \
  struct Name : Error {                         \
    using Error::Error;                         \
    Name() : Error(#Name) {}                    \
  }

EQM_DEFINE_ERROR(EmptyMeasure);
EQM_DEFINE_ERROR(NegativeWeight);
EQM_DEFINE_ERROR(DimensionMismatch);
EQM_DEFINE_ERROR(EmptyRestriction);
EQM_DEFINE_ERROR(OutOfGrid);
EQM_DEFINE_ERROR(NonpositiveDistance);
EQM_DEFINE_ERROR(ZeroFrequency);
EQM_DEFINE_ERROR(SupportTooLarge);
EQM_DEFINE_ERROR(TooFewAtoms);
EQM_DEFINE_ERROR(SupportViolation);
EQM_DEFINE_ERROR(ProblemTooLarge);
EQM_DEFINE_ERROR(Infeasible);
EQM_DEFINE_ERROR(NotConverged);
EQM_DEFINE_ERROR(PlanNotOptimal);
EQM_DEFINE_ERROR(DegenerateCandidates);
EQM_DEFINE_ERROR(NoSupport);
EQM_DEFINE_ERROR(NotTwoDimensional);
EQM_DEFINE_ERROR(TargetVanishes);
EQM_DEFINE_ERROR(EmptyBall);
EQM_DEFINE_ERROR(CflViolation);
EQM_DEFINE_ERROR(NegativeDensity);
EQM_DEFINE_ERROR(NonFiniteEnergy);
EQM_DEFINE_ERROR(TooFewSamples);
EQM_DEFINE_ERROR(WrongDimension);
EQM_DEFINE_ERROR(WrongTarget);
EQM_DEFINE_ERROR(ConfigParse);
EQM_DEFINE_ERROR(MissingInput);
EQM_DEFINE_ERROR(ManifestMissing);

#undef EQM_DEFINE_ERROR

}  // namespace eqm
