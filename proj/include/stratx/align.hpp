#pragma once

// Smith-Waterman local alignment over event sequences: the classic scoring
// recurrence and the weighted, gap-free variant used for strategy extraction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stratx/likelihood.hpp"
#include "stratx/trajectory.hpp"

namespace stratx {

struct AlignParams {
    double match = 1.0;
    double mismatch = -1.0;
    double gap = 0.0;  // ignored by build_matrix, which never penalises gaps

    /// Throws ConfigError unless match > 0, mismatch <= 0 and gap >= 0.
    void validate() const;
};

enum class Pred : std::uint8_t { none, diagonal, left, up };

/// (m+1) x (n+1) scores with the predecessor chosen for each cell. Row i
/// pairs with A[i-1], column j with B[j-1]; row 0 and column 0 stay zero.
class ScoreMatrix {
public:
    struct Cell {
        std::size_t row = 0;
        std::size_t col = 0;
        double value = 0.0;
    };

    ScoreMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0), preds_(rows * cols, Pred::none) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double value(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    Pred pred(std::size_t i, std::size_t j) const { return preds_[i * cols_ + j]; }
    void set(std::size_t i, std::size_t j, double value, Pred pred) {
        values_[i * cols_ + j] = value;
        preds_[i * cols_ + j] = pred;
    }

    /// Highest cell; ties go to the greatest i + j, then the smallest i.
    Cell max_cell() const;

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
    std::vector<Pred> preds_;
};

/// Weight for pairing A[i] with B[j] (0-based). Must be pure and non-negative.
using WeightFunction = std::function<double(std::size_t i, std::size_t j)>;

/// Weighted local-alignment matrix with unpenalised gaps:
///   H(i,j) = max(0, H(i-1,j-1) + s*W or d*W, H(i,j-1), H(i-1,j)).
/// Argmax ties prefer diagonal, then left, then up. A cell whose best branch is <= 0
/// stores 0 with no predecessor.
ScoreMatrix build_matrix(std::span<const Event> a, std::span<const Event> b, const AlignParams& params,
                         const WeightFunction& weight);

/// Walks predecessors back from the maximal cell until a zero cell. Each cell
/// reached by a diagonal predecessor contributes the element of the shorter
/// input (A on equal length); left/up moves contribute nothing.
Strategy traceback(const ScoreMatrix& matrix, std::span<const Event> a, std::span<const Event> b);

struct LocalAlignment {
    Strategy strategy;
    double score = 0.0;
    ScoreMatrix matrix{1, 1};
};

/// Unweighted Smith-Waterman with match/mismatch/gap scores (gap subtracted on
/// left/up moves). Empty input gives an empty alignment with score 0.
LocalAlignment classic_sw(std::span<const Event> a, std::span<const Event> b, const AlignParams& params);

/// build_matrix with W(i,j) = max(l(A_i), l(B_j)) and s = 1, d = -1, then traceback.
Strategy align_weighted(std::span<const Event> a, std::span<const Event> b, const LikelihoodTable& likelihoods,
                        const AlignParams& params = {});

/// Tab-separated dump: header row of B labels, one row per A element, each cell
/// "value<arrow>" with '*' marking cells on the traceback path.
std::string dump_matrix(const ScoreMatrix& matrix, std::span<const Event> a, std::span<const Event> b);

}  // namespace stratx
