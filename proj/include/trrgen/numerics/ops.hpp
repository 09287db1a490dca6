#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "trrgen/numerics/tape.hpp"

namespace trrgen::num {

// Boolean attention mask, rows = queries, cols = keys. true means "may attend".
class AttentionMask {
public:
    AttentionMask() = default;
    AttentionMask(std::size_t rows, std::size_t cols, bool allowed = true)
        : rows_(rows), cols_(cols), allowed_(rows * cols, allowed ? 1 : 0) {}

    // Lower-triangular: query t sees keys 0..t.
    static AttentionMask causal(std::size_t n);
    // Every query sees exactly the keys flagged valid.
    static AttentionMask key_padding(std::size_t queries, std::span<const std::uint8_t> key_valid);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool allowed(std::size_t r, std::size_t c) const noexcept { return allowed_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool allowed) noexcept { allowed_[r * cols_ + c] = allowed ? 1 : 0; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> allowed_;
};

Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
// a + b; b either matches a or is a single row broadcast over a's rows.
Var add(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var x);

// axis 1 normalises each row, axis 0 each column. Stable (max-subtracted).
Var softmax(Var x, int axis = 1);
// Row softmax where disallowed entries get weight exactly 0, as if their logit
// were -inf. A row with no allowed entry yields zeros.
Var masked_softmax(Var x, const AttentionMask& mask);

Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var x, std::size_t begin, std::size_t count);

Var embedding_lookup(Var table, std::span<const std::int32_t> ids);

// Identity when !training or p == 0; otherwise zeroes entries with
// probability p and rescales survivors by 1/(1-p).
Var dropout(Var x, double p, bool training, std::mt19937_64* rng);

// Mean over non-ignored rows of -log softmax(logits)[target].
Var cross_entropy_logits(Var logits, std::span<const std::int32_t> targets, std::int32_t ignore_id);

Var sum(Var x);

// Plain (untaped) helpers.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor log_softmax_row(std::span<const double> logits);

}  // namespace trrgen::num
