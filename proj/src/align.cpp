#include "stratx/align.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "stratx/errors.hpp"

namespace stratx {

namespace {

ScoreMatrix fill(std::span<const Event> a, std::span<const Event> b, double match, double mismatch, double gap,
                 const WeightFunction& weight) {
    ScoreMatrix h(a.size() + 1, b.size() + 1);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const double w = weight(i - 1, j - 1);
            const double diag = h.value(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? match : mismatch) * w;
            const double left = h.value(i, j - 1) - gap;
            const double up = h.value(i - 1, j) - gap;

            double best = diag;
            Pred pred = Pred::diagonal;
            if (left > best) {
                best = left;
                pred = Pred::left;
            }
            if (up > best) {
                best = up;
                pred = Pred::up;
            }
            if (best <= 0.0) h.set(i, j, 0.0, Pred::none);
            else h.set(i, j, best, pred);
        }
    }
    return h;
}

}  // namespace

void AlignParams::validate() const {
    if (!(match > 0.0)) throw ConfigError("alignment match score must be positive");
    if (!(mismatch <= 0.0)) throw ConfigError("alignment mismatch score must be <= 0");
    if (!(gap >= 0.0)) throw ConfigError("alignment gap penalty must be >= 0");
}

ScoreMatrix::Cell ScoreMatrix::max_cell() const {
    Cell best;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double v = value(i, j);
            const bool better = v > best.value ||
                                (v == best.value && v > 0.0 &&
                                 (i + j > best.row + best.col || (i + j == best.row + best.col && i < best.row)));
            if (better) best = Cell{i, j, v};
        }
    }
    return best;
}

ScoreMatrix build_matrix(std::span<const Event> a, std::span<const Event> b, const AlignParams& params,
                         const WeightFunction& weight) {
    params.validate();
    return fill(a, b, params.match, params.mismatch, 0.0, weight);
}

Strategy traceback(const ScoreMatrix& matrix, std::span<const Event> a, std::span<const Event> b) {
    Strategy out;
    const bool from_a = a.size() <= b.size();
    auto cell = matrix.max_cell();
    std::size_t i = cell.row, j = cell.col;
    while (i > 0 && j > 0 && matrix.value(i, j) > 0.0) {
        switch (matrix.pred(i, j)) {
            case Pred::diagonal:
                out.events.push_back(from_a ? a[i - 1] : b[j - 1]);
                --i;
                --j;
                break;
            case Pred::left: --j; break;
            case Pred::up: --i; break;
            case Pred::none: i = 0; break;
        }
    }
    std::reverse(out.events.begin(), out.events.end());
    return out;
}

LocalAlignment classic_sw(std::span<const Event> a, std::span<const Event> b, const AlignParams& params) {
    params.validate();
    LocalAlignment out;
    out.matrix = fill(a, b, params.match, params.mismatch, params.gap, [](std::size_t, std::size_t) { return 1.0; });
    out.score = out.matrix.max_cell().value;
    out.strategy = traceback(out.matrix, a, b);
    return out;
}

Strategy align_weighted(std::span<const Event> a, std::span<const Event> b, const LikelihoodTable& likelihoods,
                        const AlignParams& params) {
    std::vector<double> la, lb;
    la.reserve(a.size());
    lb.reserve(b.size());
    for (const auto& e : a) la.push_back(likelihoods.at(e));
    for (const auto& e : b) lb.push_back(likelihoods.at(e));
    const auto matrix =
        build_matrix(a, b, params, [&](std::size_t i, std::size_t j) { return std::max(la[i], lb[j]); });
    return traceback(matrix, a, b);
}

std::string dump_matrix(const ScoreMatrix& matrix, std::span<const Event> a, std::span<const Event> b) {
    std::set<std::pair<std::size_t, std::size_t>> path;
    {
        auto cell = matrix.max_cell();
        std::size_t i = cell.row, j = cell.col;
        while (i > 0 && j > 0 && matrix.value(i, j) > 0.0) {
            path.emplace(i, j);
            switch (matrix.pred(i, j)) {
                case Pred::diagonal: --i; --j; break;
                case Pred::left: --j; break;
                case Pred::up: --i; break;
                case Pred::none: i = 0; break;
            }
        }
    }

    std::string out = "\t";
    for (const auto& e : b) out += "\t" + e.label;
    out += "\n";
    char buf[64];
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out += i == 0 ? std::string() : a[i - 1].label;
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            const char* arrow = "";
            switch (matrix.pred(i, j)) {
                case Pred::diagonal: arrow = "\\"; break;
                case Pred::left: arrow = "<"; break;
                case Pred::up: arrow = "^"; break;
                case Pred::none: break;
            }
            std::snprintf(buf, sizeof buf, "%g%s%s", matrix.value(i, j), arrow, path.count({i, j}) ? "*" : "");
            out += "\t";
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace stratx
