#include "rsplfr/pda.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace rsplfr::pda {

namespace {

std::string coord(std::size_t row, std::size_t col) {
    return "(" + std::to_string(row + 1) + "," + std::to_string(col + 1) + ")";
}

}  // namespace

PdaEntry PdaEntry::symbol(std::uint32_t s) {
    if (s == 0) throw std::invalid_argument("ordinary PDA symbols start at 1");
    return PdaEntry(s);
}

std::string_view to_string(PdaErrorKind kind) {
    switch (kind) {
        case PdaErrorKind::Empty: return "Empty";
        case PdaErrorKind::RaggedRows: return "RaggedRows";
        case PdaErrorKind::MalformedToken: return "MalformedToken";
        case PdaErrorKind::UnequalStarCount: return "UnequalStarCount";
        case PdaErrorKind::SymbolGap: return "SymbolGap";
        case PdaErrorKind::ConditionA: return "ConditionA";
        case PdaErrorKind::ConditionB: return "ConditionB";
        case PdaErrorKind::TOutOfRange: return "TOutOfRange";
    }
    return "Unknown";
}

PdaError::PdaError(PdaErrorKind kind, const std::string& detail)
    : std::invalid_argument(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

Pda Pda::validate(Grid grid) {
    if (grid.empty() || grid.front().empty()) {
        throw PdaError(PdaErrorKind::Empty, "PDA needs F >= 1 rows and K >= 1 columns");
    }
    const std::size_t f = grid.size();
    const std::size_t k = grid.front().size();
    for (std::size_t j = 0; j < f; ++j) {
        if (grid[j].size() != k) {
            throw PdaError(PdaErrorKind::RaggedRows,
                           "row " + std::to_string(j + 1) + " has " +
                               std::to_string(grid[j].size()) + " entries, expected " +
                               std::to_string(k));
        }
    }

    std::map<std::uint32_t, std::vector<Cell>> cells;
    for (std::size_t j = 0; j < f; ++j) {
        for (std::size_t c = 0; c < k; ++c) {
            if (!grid[j][c].is_star()) cells[grid[j][c].symbol_value()].push_back({j, c});
        }
    }

    // Pairwise conditions. Coordinates in messages are 1-based (row,col).
    for (const auto& [s, list] : cells) {
        for (std::size_t a = 0; a < list.size(); ++a) {
            for (std::size_t b = a + 1; b < list.size(); ++b) {
                const Cell& x = list[a];
                const Cell& y = list[b];
                if (x.row == y.row || x.col == y.col) {
                    throw PdaError(PdaErrorKind::ConditionA,
                                   "symbol " + std::to_string(s) + " repeats at " +
                                       coord(x.row, x.col) + " and " + coord(y.row, y.col));
                }
                if (!grid[x.row][y.col].is_star() || !grid[y.row][x.col].is_star()) {
                    throw PdaError(PdaErrorKind::ConditionB,
                                   "symbol " + std::to_string(s) + " at " + coord(x.row, x.col) +
                                       " and " + coord(y.row, y.col) + " needs stars at " +
                                       coord(x.row, y.col) + " and " + coord(y.row, x.col));
                }
            }
        }
    }

    std::size_t z = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t stars = 0;
        for (std::size_t j = 0; j < f; ++j) stars += grid[j][c].is_star() ? 1 : 0;
        if (c == 0) {
            z = stars;
        } else if (stars != z) {
            throw PdaError(PdaErrorKind::UnequalStarCount,
                           "column " + std::to_string(c + 1) + " has " + std::to_string(stars) +
                               " stars, column 1 has " + std::to_string(z));
        }
    }

    const std::uint32_t s_max = cells.empty() ? 0 : cells.rbegin()->first;
    for (std::uint32_t s = 1; s <= s_max; ++s) {
        if (!cells.contains(s)) {
            throw PdaError(PdaErrorKind::SymbolGap,
                           "symbol " + std::to_string(s) + " missing below maximum " +
                               std::to_string(s_max));
        }
    }

    Pda pda;
    pda.grid_ = std::move(grid);
    pda.k_ = k;
    pda.f_ = f;
    pda.z_ = z;
    pda.s_ = s_max;
    pda.occurrences_.resize(s_max);
    for (auto& [s, list] : cells) pda.occurrences_[s - 1] = std::move(list);
    return pda;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

namespace {

/// All size-t subsets of {0..k-1} in lexicographic order, as sorted index lists.
std::vector<std::vector<std::size_t>> subsets(std::size_t k, std::size_t t) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(t);
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = t;
        while (i > 0 && cur[i - 1] == k - t + i - 1) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t j = i; j < t; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

}  // namespace

Pda man_pda(std::size_t k, std::size_t t, std::uint64_t bijection_seed) {
    if (k == 0) throw PdaError(PdaErrorKind::Empty, "MAN-PDA needs K >= 1");
    if (t > k) {
        throw PdaError(PdaErrorKind::TOutOfRange,
                       "t=" + std::to_string(t) + " outside [0," + std::to_string(k) + "]");
    }
    const auto rows = subsets(k, t);

    std::map<std::vector<std::size_t>, std::uint32_t> rank;
    if (t < k) {
        std::uint32_t r = 0;
        for (auto& sub : subsets(k, t + 1)) rank.emplace(std::move(sub), r++);
    }
    std::vector<std::uint32_t> label(rank.size());
    std::iota(label.begin(), label.end(), 1u);
    if (bijection_seed != 0 && label.size() > 1) {
        std::mt19937_64 rng(bijection_seed);
        for (std::size_t i = label.size() - 1; i > 0; --i) {
            std::swap(label[i], label[rng() % (i + 1)]);
        }
    }

    Grid grid(rows.size(), std::vector<PdaEntry>(k, PdaEntry::star()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const auto& row_set = rows[j];
        for (std::size_t c = 0; c < k; ++c) {
            if (std::binary_search(row_set.begin(), row_set.end(), c)) continue;
            std::vector<std::size_t> ext = row_set;
            ext.insert(std::upper_bound(ext.begin(), ext.end(), c), c);
            grid[j][c] = PdaEntry::symbol(label[rank.at(ext)]);
        }
    }
    return Pda::validate(std::move(grid));
}

Pda parse(std::string_view text) {
    Grid grid;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        std::vector<PdaEntry> row;
        std::size_t token_no = 0;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i >= line.size()) break;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            std::string_view tok = line.substr(i, j - i);
            i = j;
            ++token_no;
            if (tok == "*") {
                row.push_back(PdaEntry::star());
                continue;
            }
            std::uint32_t v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
                throw PdaError(PdaErrorKind::MalformedToken,
                               "row " + std::to_string(line_no) + " token " +
                                   std::to_string(token_no) + " '" + std::string(tok) + "'");
            }
            row.push_back(PdaEntry::symbol(v));
        }
        // Blank lines (e.g. a trailing newline) carry no row.
        if (!row.empty()) grid.push_back(std::move(row));
    }
    return Pda::validate(std::move(grid));
}

std::string serialize(const Pda& pda) {
    std::ostringstream out;
    for (std::size_t j = 0; j < pda.rows(); ++j) {
        for (std::size_t c = 0; c < pda.users(); ++c) {
            if (c) out << ' ';
            const auto& e = pda.at(j, c);
            if (e.is_star()) {
                out << '*';
            } else {
                out << e.symbol_value();
            }
        }
        if (j + 1 < pda.rows()) out << '\n';
    }
    return out.str();
}

}  // namespace rsplfr::pda
