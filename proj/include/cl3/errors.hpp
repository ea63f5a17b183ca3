#pragma once

#include <stdexcept>
#include <string>

namespace cl3 {

// Singular/lightlike element: p*bar(p) below the invertibility threshold.
struct NullElement : std::runtime_error {
  explicit NullElement(const std::string& what) : std::runtime_error(what) {}
};

// l*dagger(l) numerically singular in the boost/rotation factorization.
struct DegenerateFactor : std::runtime_error {
  explicit DegenerateFactor(const std::string& what) : std::runtime_error(what) {}
};

// |det(phi)| fell below the nodal threshold where the exact equation is singular.
struct NodalPoint : std::runtime_error {
  explicit NodalPoint(const std::string& what) : std::runtime_error(what) {}
};

// (N, J) pair violates det(J) = N^2.
struct InconsistentPair : std::runtime_error {
  explicit InconsistentPair(const std::string& what) : std::runtime_error(what) {}
};

// J^0 + N = 0 with J != 0 in the prefactor reconstruction.
struct DegenerateJ : std::runtime_error {
  explicit DegenerateJ(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite coefficient produced by a time step.
struct BlowUp : std::runtime_error {
  explicit BlowUp(const std::string& what) : std::runtime_error(what) {}
};

// L2 norm exceeded the exp(2mt) envelope.
struct GrowthViolation : std::runtime_error {
  explicit GrowthViolation(const std::string& what) : std::runtime_error(what) {}
};

// Fewer snapshots than a time-derivative law needs.
struct InsufficientSnapshots : std::runtime_error {
  explicit InsufficientSnapshots(const std::string& what) : std::runtime_error(what) {}
};

// Flowline left the region where the velocity field is defined.
struct LeftDomain : std::runtime_error {
  explicit LeftDomain(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration or input file.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cl3
