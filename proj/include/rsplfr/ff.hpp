#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsplfr::ff {

/// Thrown when two operands live in different prime fields.
class ModulusMismatch : public std::invalid_argument {
  public:
    ModulusMismatch(std::uint32_t lhs, std::uint32_t rhs);
};

class FieldElement;

/// A prime field F_q with q < 2^32. Validated prime at construction.
class PrimeField {
  public:
    explicit PrimeField(std::uint64_t q);

    std::uint32_t modulus() const noexcept { return q_; }

    FieldElement element(std::uint64_t value) const;
    FieldElement element_signed(std::int64_t value) const;
    FieldElement zero() const;
    FieldElement one() const;

    /// Uniform sample by rejection, so the draw is exact for every q.
    FieldElement uniform(std::mt19937_64& rng) const;

    /// Vector of `n` zeros.
    std::vector<FieldElement> zeros(std::size_t n) const;

    bool operator==(const PrimeField& other) const noexcept { return q_ == other.q_; }

  private:
    std::uint32_t q_;
};

bool is_prime(std::uint64_t n) noexcept;

/// Canonically reduced residue tagged with its modulus.
class FieldElement {
  public:
    std::uint32_t value() const noexcept { return value_; }
    std::uint32_t modulus() const noexcept { return modulus_; }
    bool is_zero() const noexcept { return value_ == 0; }

    FieldElement operator+(const FieldElement& rhs) const;
    FieldElement operator-(const FieldElement& rhs) const;
    FieldElement operator*(const FieldElement& rhs) const;
    FieldElement operator/(const FieldElement& rhs) const;
    FieldElement operator-() const noexcept;

    FieldElement& operator+=(const FieldElement& rhs) { return *this = *this + rhs; }
    FieldElement& operator-=(const FieldElement& rhs) { return *this = *this - rhs; }
    FieldElement& operator*=(const FieldElement& rhs) { return *this = *this * rhs; }

    /// Multiplicative inverse; throws std::domain_error on zero.
    FieldElement inv() const;
    FieldElement pow(std::uint64_t exponent) const;

    bool operator==(const FieldElement& rhs) const noexcept {
        return value_ == rhs.value_ && modulus_ == rhs.modulus_;
    }

  private:
    friend class PrimeField;
    FieldElement(std::uint32_t value, std::uint32_t modulus) noexcept
        : value_(value), modulus_(modulus) {}

    void check_same(const FieldElement& rhs) const;

    std::uint32_t value_;
    std::uint32_t modulus_;
};

using FieldVector = std::vector<FieldElement>;

FieldElement add(const FieldElement& a, const FieldElement& b);
FieldElement mul(const FieldElement& a, const FieldElement& b);
FieldElement inv(const FieldElement& a);

/// Horner evaluation of sum coeffs[i] * x^i. Empty coefficients evaluate to zero.
FieldElement poly_eval(std::span<const FieldElement> coeffs, const FieldElement& x);

/// Throws ModulusMismatch unless every element has modulus `q`.
void require_modulus(std::span<const FieldElement> v, std::uint32_t q);

/// out[i] += scale * in[i]
void axpy(std::span<FieldElement> out, const FieldElement& scale,
          std::span<const FieldElement> in);

std::vector<std::uint32_t> values(std::span<const FieldElement> v);

}  // namespace rsplfr::ff
