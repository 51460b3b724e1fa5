#pragma once

#include <memory>

namespace testsupport {

/// Extended-precision reference for the two-parameter Mittag-Leffler function
/// E_{alpha,beta}(z) on the closed negative axis, z in [-50, 0]: 50-decimal-
/// digit floats summing 200 Taylor terms.  The series alternates for z <= 0,
/// so truncation error is bounded by the first omitted term (far below double
/// precision for |z| <= 50); intermediate cancellation stays within the
/// 50-digit budget for the whole admissible range.
///
/// One instance fixes (alpha, beta) and caches the Gamma table, so both
/// point evaluation and envelope calibration amortize the expensive part.
class MlfOracle {
  public:
    MlfOracle(double alpha, double beta);
    ~MlfOracle();
    MlfOracle(MlfOracle&&) noexcept;
    MlfOracle& operator=(MlfOracle&&) noexcept;

    /// E_{alpha,beta}(z), valid for z in [-50, 0].
    double eval(double z) const;

    /// Decay-envelope constant: 1.05 * max over a 201-point grid on [-50, 0]
    /// of (1 + |z|) |E_{alpha,beta}(z)|.  The bound |E(z)| <= C / (1 + |z|)
    /// then holds on the grid by construction and off the grid by the 5%
    /// headroom (the profile is smooth).
    double envelope_c() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience one-shot evaluation (builds a throwaway table).
double oracle_mlf(double alpha, double beta, double z);

}  // namespace testsupport
