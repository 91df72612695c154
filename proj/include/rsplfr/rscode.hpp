#pragma once

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsplfr/ff.hpp"

namespace rsplfr::rscode {

using ff::FieldElement;
using ff::FieldVector;

/// H pairwise-distinct nonzero evaluation points, H < q.
class EvalPoints {
  public:
    explicit EvalPoints(FieldVector alphas);
    /// alpha_h = h for h = 1..H.
    static EvalPoints sequential(const ff::PrimeField& field, std::size_t h);

    std::size_t size() const noexcept { return alphas_.size(); }
    const FieldElement& operator[](std::size_t h) const { return alphas_.at(h); }
    const FieldVector& values() const noexcept { return alphas_; }
    std::uint32_t modulus() const noexcept { return alphas_.front().modulus(); }

  private:
    FieldVector alphas_;
};

/// Positions indexed by server h in [0, H); absent positions are erasures.
struct Codeword {
    std::vector<std::optional<FieldElement>> positions;
    std::size_t dimension = 1;

    std::size_t present() const;
    std::vector<std::size_t> present_indices() const;
};

enum class FailureKind {
    Inconsistent,   // key equation system has no solution
    NotDivisible,   // error locator does not divide the interpolant
    TooManyErrors,  // candidate disagrees with more than A positions
    NoCandidate,
    AmbiguousCandidate,
};

class DecodingFailure : public std::runtime_error {
  public:
    DecodingFailure(FailureKind kind, const std::string& detail);
    FailureKind kind() const noexcept { return kind_; }

  private:
    FailureKind kind_;
};

struct DecodeResult {
    FieldVector message;                 // coefficients, degree < dimension
    std::set<std::size_t> error_positions;
};

/// Position h holds sum message[i] * alpha_h^i.
Codeword encode(std::span<const FieldElement> message, const EvalPoints& points);

/// Berlekamp-Welch unique decoding with the locator degree fixed at `max_errors`
/// over the present positions. Requires present - dimension >= 2 * max_errors.
DecodeResult decode(const Codeword& received, const EvalPoints& points, std::size_t max_errors);

/// Exhaustive oracle: every error support of size <= max_errors is erased and the
/// remainder interpolated. Only for small instances.
DecodeResult brute_force_decode(const Codeword& received, const EvalPoints& points,
                                std::size_t max_errors);

/// Lagrange interpolation through (xs[i], ys[i]) returning monomial coefficients.
FieldVector interpolate(std::span<const FieldElement> xs, std::span<const FieldElement> ys);

}  // namespace rsplfr::rscode
