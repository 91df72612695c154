#include "rsplfr/ff.hpp"

#include <limits>

namespace rsplfr::ff {

ModulusMismatch::ModulusMismatch(std::uint32_t lhs, std::uint32_t rhs)
    : std::invalid_argument("field modulus mismatch: " + std::to_string(lhs) + " vs " +
                            std::to_string(rhs)) {}

bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

PrimeField::PrimeField(std::uint64_t q) {
    if (q > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("field modulus " + std::to_string(q) + " exceeds 32 bits");
    }
    if (!is_prime(q)) {
        throw std::invalid_argument("field modulus " + std::to_string(q) + " is not prime");
    }
    q_ = static_cast<std::uint32_t>(q);
}

FieldElement PrimeField::element(std::uint64_t value) const {
    return FieldElement(static_cast<std::uint32_t>(value % q_), q_);
}

FieldElement PrimeField::element_signed(std::int64_t value) const {
    std::int64_t r = value % static_cast<std::int64_t>(q_);
    if (r < 0) r += q_;
    return FieldElement(static_cast<std::uint32_t>(r), q_);
}

FieldElement PrimeField::zero() const { return FieldElement(0, q_); }
FieldElement PrimeField::one() const { return FieldElement(1, q_); }

FieldElement PrimeField::uniform(std::mt19937_64& rng) const {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % q_;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return FieldElement(static_cast<std::uint32_t>(draw % q_), q_);
}

std::vector<FieldElement> PrimeField::zeros(std::size_t n) const {
    return std::vector<FieldElement>(n, zero());
}

void FieldElement::check_same(const FieldElement& rhs) const {
    if (modulus_ != rhs.modulus_) throw ModulusMismatch(modulus_, rhs.modulus_);
}

FieldElement FieldElement::operator+(const FieldElement& rhs) const {
    check_same(rhs);
    std::uint64_t s = std::uint64_t{value_} + rhs.value_;
    if (s >= modulus_) s -= modulus_;
    return FieldElement(static_cast<std::uint32_t>(s), modulus_);
}

FieldElement FieldElement::operator-(const FieldElement& rhs) const {
    check_same(rhs);
    std::uint64_t s = std::uint64_t{value_} + modulus_ - rhs.value_;
    if (s >= modulus_) s -= modulus_;
    return FieldElement(static_cast<std::uint32_t>(s), modulus_);
}

FieldElement FieldElement::operator*(const FieldElement& rhs) const {
    check_same(rhs);
    return FieldElement(static_cast<std::uint32_t>(std::uint64_t{value_} * rhs.value_ % modulus_),
                        modulus_);
}

FieldElement FieldElement::operator/(const FieldElement& rhs) const { return *this * rhs.inv(); }

FieldElement FieldElement::operator-() const noexcept {
    return FieldElement(value_ == 0 ? 0 : modulus_ - value_, modulus_);
}

FieldElement FieldElement::pow(std::uint64_t exponent) const {
    std::uint64_t base = value_;
    std::uint64_t acc = 1 % modulus_;
    while (exponent > 0) {
        if (exponent & 1) acc = acc * base % modulus_;
        base = base * base % modulus_;
        exponent >>= 1;
    }
    return FieldElement(static_cast<std::uint32_t>(acc), modulus_);
}

FieldElement FieldElement::inv() const {
    if (value_ == 0) throw std::domain_error("inverse of zero field element");
    // Fermat: a^(q-2) = a^-1 for prime q.
    return pow(modulus_ - 2);
}

FieldElement add(const FieldElement& a, const FieldElement& b) { return a + b; }
FieldElement mul(const FieldElement& a, const FieldElement& b) { return a * b; }
FieldElement inv(const FieldElement& a) { return a.inv(); }

FieldElement poly_eval(std::span<const FieldElement> coeffs, const FieldElement& x) {
    FieldElement acc = x - x;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

void require_modulus(std::span<const FieldElement> v, std::uint32_t q) {
    for (const auto& e : v) {
        if (e.modulus() != q) throw ModulusMismatch(q, e.modulus());
    }
}

void axpy(std::span<FieldElement> out, const FieldElement& scale,
          std::span<const FieldElement> in) {
    if (out.size() != in.size()) throw std::invalid_argument("axpy: length mismatch");
    if (scale.is_zero()) {
        require_modulus(in, scale.modulus());
        return;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * in[i];
}

std::vector<std::uint32_t> values(std::span<const FieldElement> v) {
    std::vector<std::uint32_t> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(e.value());
    return out;
}

}  // namespace rsplfr::ff
