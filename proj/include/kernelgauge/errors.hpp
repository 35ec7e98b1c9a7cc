#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kernelgauge {

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the CLI when a numerical stage fails.
class Error : public std::runtime_error {
 public:
  Error(std::string_view name, const std::string& what)
      : std::runtime_error(std::string(name) + ": " + what), name_(name) {}
  std::string_view name() const noexcept { return name_; }

 private:
  std::string_view name_;
};

#define KERNELGAUGE_DEFINE_ERROR(Type)                                   \
  class Type : public Error {                                            \
   public:                                                               \
    explicit Type(const std::string& what) : Error(#Type, what) {}       \
  };

// numerics
KERNELGAUGE_DEFINE_ERROR(SingularGram)
KERNELGAUGE_DEFINE_ERROR(InconsistentConstraints)
KERNELGAUGE_DEFINE_ERROR(NonConvergent)
// domain_geometry
KERNELGAUGE_DEFINE_ERROR(PatchTooLarge)
// potential
KERNELGAUGE_DEFINE_ERROR(PoleTooCloseToBoundary)
KERNELGAUGE_DEFINE_ERROR(TruncationInsufficient)
// weights
KERNELGAUGE_DEFINE_ERROR(InvalidProfile)
KERNELGAUGE_DEFINE_ERROR(EvaluationAtPole)
KERNELGAUGE_DEFINE_ERROR(InvalidConfig)
// gfunctional
KERNELGAUGE_DEFINE_ERROR(EmptySublevel)
KERNELGAUGE_DEFINE_ERROR(NotEqualityShape)
KERNELGAUGE_DEFINE_ERROR(BranchInconsistency)
// verifier
KERNELGAUGE_DEFINE_ERROR(RouteMismatch)

#undef KERNELGAUGE_DEFINE_ERROR

}  // namespace kernelgauge
