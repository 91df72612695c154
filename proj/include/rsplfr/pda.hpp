#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsplfr::pda {

/// Either a star or an ordinary symbol s >= 1. Symbol 0 encodes the star.
class PdaEntry {
  public:
    static constexpr PdaEntry star() noexcept { return PdaEntry(0); }
    static PdaEntry symbol(std::uint32_t s);

    constexpr bool is_star() const noexcept { return value_ == 0; }
    /// Ordinary symbol; undefined for stars.
    constexpr std::uint32_t symbol_value() const noexcept { return value_; }

    constexpr bool operator==(const PdaEntry&) const noexcept = default;

  private:
    constexpr explicit PdaEntry(std::uint32_t v) noexcept : value_(v) {}
    std::uint32_t value_;
};

using Grid = std::vector<std::vector<PdaEntry>>;

enum class PdaErrorKind {
    Empty,
    RaggedRows,
    MalformedToken,
    UnequalStarCount,
    SymbolGap,
    ConditionA,
    ConditionB,
    TOutOfRange,
};

std::string_view to_string(PdaErrorKind kind);

class PdaError : public std::invalid_argument {
  public:
    PdaError(PdaErrorKind kind, const std::string& detail);
    PdaErrorKind kind() const noexcept { return kind_; }

  private:
    PdaErrorKind kind_;
};

/// A validated (K,F,Z,S) placement delivery array. Rows are packets, columns users.
/// Indices in the public API are 0-based; symbols are 1-based as in the array text.
class Pda {
  public:
    /// Validates the grid; throws PdaError naming the offending coordinates (1-based).
    static Pda validate(Grid grid);

    std::size_t users() const noexcept { return k_; }      // K
    std::size_t rows() const noexcept { return f_; }       // F
    std::size_t stars_per_column() const noexcept { return z_; }  // Z
    std::size_t symbols() const noexcept { return s_; }    // S

    const PdaEntry& at(std::size_t row, std::size_t col) const { return grid_.at(row).at(col); }
    const Grid& grid() const noexcept { return grid_; }

    struct Cell {
        std::size_t row;
        std::size_t col;
    };
    /// All cells carrying ordinary symbol s (1-based), in row-major order.
    const std::vector<Cell>& occurrences(std::uint32_t s) const { return occurrences_.at(s - 1); }

    bool operator==(const Pda& other) const { return grid_ == other.grid_; }

  private:
    Pda() = default;
    Grid grid_;
    std::size_t k_ = 0, f_ = 0, z_ = 0, s_ = 0;
    std::vector<std::vector<Cell>> occurrences_;
};

/// MAN-PDA for K users and parameter t. Seed 0 keeps the lexicographic labelling of
/// (t+1)-subsets; any other seed relabels symbols by a seeded permutation.
Pda man_pda(std::size_t k, std::size_t t, std::uint64_t bijection_seed = 0);

/// Grid text: newline-separated rows, whitespace-separated entries, `*` for stars.
Pda parse(std::string_view text);
std::string serialize(const Pda& pda);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace rsplfr::pda
