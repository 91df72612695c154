#include "rsplfr/rscode.hpp"

#include <algorithm>
#include <functional>

namespace rsplfr::rscode {

EvalPoints::EvalPoints(FieldVector alphas) : alphas_(std::move(alphas)) {
    if (alphas_.empty()) throw std::invalid_argument("EvalPoints: need at least one point");
    const std::uint32_t q = alphas_.front().modulus();
    ff::require_modulus(alphas_, q);
    if (alphas_.size() >= q) {
        throw std::invalid_argument("EvalPoints: H=" + std::to_string(alphas_.size()) +
                                    " must be below q=" + std::to_string(q));
    }
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
        if (alphas_[i].is_zero()) {
            throw std::invalid_argument("EvalPoints: alpha_" + std::to_string(i + 1) + " is zero");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (alphas_[i] == alphas_[j]) {
                throw std::invalid_argument("EvalPoints: alpha_" + std::to_string(j + 1) +
                                            " and alpha_" + std::to_string(i + 1) + " coincide");
            }
        }
    }
}

EvalPoints EvalPoints::sequential(const ff::PrimeField& field, std::size_t h) {
    FieldVector a;
    for (std::size_t i = 1; i <= h; ++i) a.push_back(field.element(i));
    return EvalPoints(std::move(a));
}

std::size_t Codeword::present() const {
    return static_cast<std::size_t>(
        std::count_if(positions.begin(), positions.end(), [](const auto& p) { return p.has_value(); }));
}

std::vector<std::size_t> Codeword::present_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < positions.size(); ++h) {
        if (positions[h]) out.push_back(h);
    }
    return out;
}

DecodingFailure::DecodingFailure(FailureKind kind, const std::string& detail)
    : std::runtime_error("decoding failure: " + detail), kind_(kind) {}

Codeword encode(std::span<const FieldElement> message, const EvalPoints& points) {
    if (message.empty()) throw std::invalid_argument("encode: empty message");
    if (message.size() > points.size()) {
        throw std::invalid_argument("encode: dimension " + std::to_string(message.size()) +
                                    " exceeds length " + std::to_string(points.size()));
    }
    Codeword cw;
    cw.dimension = message.size();
    cw.positions.reserve(points.size());
    for (std::size_t h = 0; h < points.size(); ++h) {
        cw.positions.emplace_back(ff::poly_eval(message, points[h]));
    }
    return cw;
}

namespace {

void check_received(const Codeword& received, const EvalPoints& points) {
    if (received.dimension == 0) throw std::invalid_argument("decode: dimension must be >= 1");
    if (received.positions.size() > points.size()) {
        throw std::invalid_argument("decode: more positions than evaluation points");
    }
    for (const auto& p : received.positions) {
        if (p && p->modulus() != points.modulus()) throw ff::ModulusMismatch(points.modulus(), p->modulus());
    }
}

std::set<std::size_t> disagreements(const Codeword& received, const EvalPoints& points,
                                    std::span<const FieldElement> message) {
    std::set<std::size_t> out;
    for (std::size_t h = 0; h < received.positions.size(); ++h) {
        if (received.positions[h] && *received.positions[h] != ff::poly_eval(message, points[h])) {
            out.insert(h);
        }
    }
    return out;
}

/// Gauss-Jordan over F_q on an augmented matrix. Returns one solution with free
/// variables set to zero, or nullopt when inconsistent.
std::optional<FieldVector> solve(std::vector<FieldVector> rows, std::size_t unknowns,
                                 const ff::PrimeField& field) {
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < unknowns && r < rows.size(); ++c) {
        std::size_t p = r;
        while (p < rows.size() && rows[p][c].is_zero()) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[p], rows[r]);
        const FieldElement scale = rows[r][c].inv();
        for (auto& v : rows[r]) v *= scale;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c].is_zero()) continue;
            const FieldElement factor = rows[i][c];
            for (std::size_t j = c; j <= unknowns; ++j) rows[i][j] -= factor * rows[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < rows.size(); ++i) {
        if (!rows[i][unknowns].is_zero()) return std::nullopt;
    }
    FieldVector x = field.zeros(unknowns);
    for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = rows[i][unknowns];
    return x;
}

}  // namespace

DecodeResult decode(const Codeword& received, const EvalPoints& points, std::size_t max_errors) {
    check_received(received, points);
    const std::size_t k = received.dimension;
    const std::size_t e = max_errors;
    const auto idx = received.present_indices();
    if (idx.size() < k + 2 * e) {
        throw std::invalid_argument("decode: " + std::to_string(idx.size()) +
                                    " present positions cannot resolve dimension " +
                                    std::to_string(k) + " with " + std::to_string(e) + " errors");
    }
    const ff::PrimeField field(points.modulus());

    // Unknowns: Q_0..Q_{k+e-1}, then E_0..E_{e-1}; E is monic of degree e.
    // Q(x_i) - r_i E(x_i) = 0  =>  sum Q_j x^j - r_i sum E_j x^j = r_i x^e.
    const std::size_t nq = k + e;
    const std::size_t unknowns = nq + e;
    std::vector<FieldVector> rows;
    rows.reserve(idx.size());
    for (std::size_t h : idx) {
        const FieldElement x = points[h];
        const FieldElement y = *received.positions[h];
        FieldVector row = field.zeros(unknowns + 1);
        FieldElement xp = field.one();
        for (std::size_t j = 0; j < nq; ++j) {
            row[j] = xp;
            if (j < e) row[nq + j] = -(y * xp);
            xp *= x;
        }
        row[unknowns] = y * x.pow(e);
        rows.push_back(std::move(row));
    }
    auto sol = solve(std::move(rows), unknowns, field);
    if (!sol) throw DecodingFailure(FailureKind::Inconsistent, "key equation has no solution");

    // Long division Q / E.
    FieldVector rem(sol->begin(), sol->begin() + static_cast<std::ptrdiff_t>(nq));
    FieldVector locator(sol->begin() + static_cast<std::ptrdiff_t>(nq), sol->end());
    locator.push_back(field.one());
    FieldVector message = field.zeros(k);
    for (std::size_t d = nq; d-- > e;) {
        const FieldElement lead = rem[d];
        if (lead.is_zero()) continue;
        message[d - e] = lead;
        for (std::size_t j = 0; j <= e; ++j) rem[d - e + j] -= lead * locator[j];
    }
    for (std::size_t j = 0; j < e; ++j) {
        if (!rem[j].is_zero()) {
            throw DecodingFailure(FailureKind::NotDivisible, "error locator does not divide");
        }
    }

    auto errors = disagreements(received, points, message);
    if (errors.size() > e) {
        throw DecodingFailure(FailureKind::TooManyErrors,
                              std::to_string(errors.size()) + " disagreements exceed " +
                                  std::to_string(e));
    }
    return {std::move(message), std::move(errors)};
}

FieldVector interpolate(std::span<const FieldElement> xs, std::span<const FieldElement> ys) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw std::invalid_argument("interpolate: need equal, nonzero numbers of points");
    }
    const ff::PrimeField field(xs.front().modulus());
    const std::size_t n = xs.size();
    FieldVector out = field.zeros(n);
    for (std::size_t i = 0; i < n; ++i) {
        // basis = prod_{j != i} (x - x_j) / (x_i - x_j)
        FieldVector basis{field.one()};
        FieldElement denom = field.one();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            FieldVector next = field.zeros(basis.size() + 1);
            for (std::size_t c = 0; c < basis.size(); ++c) {
                next[c + 1] += basis[c];
                next[c] -= basis[c] * xs[j];
            }
            basis = std::move(next);
            denom *= xs[i] - xs[j];
        }
        const FieldElement scale = ys[i] / denom;
        for (std::size_t c = 0; c < n; ++c) out[c] += basis[c] * scale;
    }
    return out;
}

DecodeResult brute_force_decode(const Codeword& received, const EvalPoints& points,
                                std::size_t max_errors) {
    check_received(received, points);
    const std::size_t k = received.dimension;
    const auto idx = received.present_indices();
    if (idx.size() < k) {
        throw DecodingFailure(FailureKind::NoCandidate, "fewer present positions than dimension");
    }

    std::vector<FieldVector> candidates;
    std::vector<bool> in_support(idx.size(), false);

    auto try_support = [&]() {
        FieldVector xs, ys;
        for (std::size_t i = 0; i < idx.size() && xs.size() < k; ++i) {
            if (in_support[i]) continue;
            xs.push_back(points[idx[i]]);
            ys.push_back(*received.positions[idx[i]]);
        }
        if (xs.size() < k) return;
        FieldVector cand = interpolate(xs, ys);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (in_support[i]) continue;
            if (ff::poly_eval(cand, points[idx[i]]) != *received.positions[idx[i]]) return;
        }
        if (std::find(candidates.begin(), candidates.end(), cand) == candidates.end()) {
            candidates.push_back(std::move(cand));
        }
    };

    // Enumerate supports of size 0..max_errors over the present positions.
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t left) {
        try_support();
        if (left == 0) return;
        for (std::size_t i = start; i < idx.size(); ++i) {
            in_support[i] = true;
            rec(i + 1, left - 1);
            in_support[i] = false;
        }
    };
    rec(0, std::min(max_errors, idx.size()));

    if (candidates.empty()) {
        throw DecodingFailure(FailureKind::NoCandidate, "no codeword within the error radius");
    }
    if (candidates.size() > 1) {
        throw DecodingFailure(FailureKind::AmbiguousCandidate,
                              std::to_string(candidates.size()) + " codewords within the radius");
    }
    auto errors = disagreements(received, points, candidates.front());
    return {std::move(candidates.front()), std::move(errors)};
}

}  // namespace rsplfr::rscode
