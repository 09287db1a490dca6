#include "trrgen/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trrgen/error.hpp"
#include "trrgen/numerics/kernels.hpp"

namespace trrgen::num {

namespace {

Tape& tape_of(Var a) {
    if (!a.valid()) throw Error("tape", "operation on an unbound Var");
    return *a.tape();
}

Tape& tape_of(Var a, Var b) {
    Tape& t = tape_of(a);
    if (b.tape() != &t) throw Error("tape", "operands live on different tapes");
    return t;
}

std::string dims(const Tensor& t) { return shape_string(t.shape()); }

void require_matrix(const Tensor& t, const char* op) {
    if (t.rank() > 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + dims(t));
}

}  // namespace

AttentionMask AttentionMask::causal(std::size_t n) {
    AttentionMask mask(n, n, false);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c <= r; ++c) mask.set(r, c, true);
    return mask;
}

AttentionMask AttentionMask::key_padding(std::size_t queries, std::span<const std::uint8_t> key_valid) {
    AttentionMask mask(queries, key_valid.size(), false);
    for (std::size_t r = 0; r < queries; ++r)
        for (std::size_t c = 0; c < key_valid.size(); ++c) mask.set(r, c, key_valid[c] != 0);
    return mask;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ, " + dims(a) + " x " + dims(b));
    Tensor out = Tensor::matrix(a.rows(), b.cols());
    kernels::active().gemm_nn(a.rows(), a.cols(), b.cols(), a.data(), b.data(), out.data());
    return out;
}

Var matmul(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    const std::size_t ia = a.id(), ib = b.id();
    Tensor out = matmul(a.value(), b.value());
    return tape.record("matmul", std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
        const auto& kern = kernels::active();
        if (t.requires_grad(ia)) kern.gemm_nt(m, n, k, g.data(), bv.data(), t.grad_slot(ia).data());
        if (t.requires_grad(ib)) kern.gemm_tn(m, k, n, av.data(), g.data(), t.grad_slot(ib).data());
    });
}

Var matmul_nt(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_matrix(av, "matmul_nt");
    require_matrix(bv, "matmul_nt");
    if (av.cols() != bv.cols())
        throw ShapeError("matmul_nt: inner dimensions differ, " + dims(av) + " x " + dims(bv) + "^T");
    Tensor out = Tensor::matrix(av.rows(), bv.rows());
    kernels::active().gemm_nt(av.rows(), av.cols(), bv.rows(), av.data(), bv.data(), out.data());
    const std::size_t ia = a.id(), ib = b.id();
    return tape.record("matmul_nt", std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
        const auto& kern = kernels::active();
        if (t.requires_grad(ia)) kern.gemm_nn(m, n, k, g.data(), bv.data(), t.grad_slot(ia).data());
        if (t.requires_grad(ib)) kern.gemm_tn(m, n, k, g.data(), av.data(), t.grad_slot(ib).data());
    });
}

Var add(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const bool broadcast = bv.rows() == 1 && av.rows() != 1;
    if (av.cols() != bv.cols() || (!broadcast && av.rows() != bv.rows()))
        throw ShapeError("add: incompatible shapes " + dims(av) + " + " + dims(bv));
    Tensor out = av;
    const std::size_t cols = av.cols();
    for (std::size_t r = 0; r < av.rows(); ++r) {
        const double* src = bv.data() + (broadcast ? 0 : r * cols);
        double* dst = out.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
    const std::size_t ia = a.id(), ib = b.id();
    return tape.record("add", std::move(out), {a, b}, [ia, ib, broadcast](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        if (t.requires_grad(ia)) {
            Tensor& ga = t.grad_slot(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.requires_grad(ib)) {
            Tensor& gb = t.grad_slot(ib);
            if (!broadcast) {
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
            } else {
                const std::size_t cols = g.cols();
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
            }
        }
    });
}

Var scale(Var a, double factor) {
    Tape& tape = tape_of(a);
    Tensor out = a.value();
    for (double& v : out.values()) v *= factor;
    const std::size_t ia = a.id();
    return tape.record("scale", std::move(out), {a}, [ia, factor](Tape& t, std::size_t self) {
        kernels::active().axpy(t.output_grad(self).size(), factor, t.output_grad(self).data(),
                               t.grad_slot(ia).data());
    });
}

Var relu(Var x) {
    Tape& tape = tape_of(x);
    Tensor out = x.value();
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    const std::size_t ix = x.id();
    return tape.record("relu", std::move(out), {x}, [ix](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        const Tensor& in = t.value(ix);
        Tensor& gx = t.grad_slot(ix);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (in[i] > 0.0) gx[i] += g[i];
    });
}

namespace {

// Softmax over `count` slices of `length` elements; element e of slice s sits
// at s * slice_stride + e * elem_stride.
struct SliceLayout {
    std::size_t count, length, slice_stride, elem_stride;
};

SliceLayout layout_for(const Tensor& x, int axis) {
    require_matrix(x, "softmax");
    const std::size_t rows = x.rows(), cols = x.cols();
    if (axis == 1 || axis == -1) return {rows, cols, cols, 1};
    if (axis == 0) return {cols, rows, 1, cols};
    throw ShapeError("softmax: axis must be 0 or 1, got " + std::to_string(axis));
}

void softmax_backward(Tape& t, std::size_t self, std::size_t ix, SliceLayout l) {
    const Tensor& g = t.output_grad(self);
    const Tensor& y = t.value(self);
    Tensor& gx = t.grad_slot(ix);
    for (std::size_t s = 0; s < l.count; ++s) {
        double inner = 0.0;
        for (std::size_t e = 0; e < l.length; ++e) {
            const std::size_t i = s * l.slice_stride + e * l.elem_stride;
            inner += g[i] * y[i];
        }
        for (std::size_t e = 0; e < l.length; ++e) {
            const std::size_t i = s * l.slice_stride + e * l.elem_stride;
            gx[i] += y[i] * (g[i] - inner);
        }
    }
}

}  // namespace

Var softmax(Var x, int axis) {
    Tape& tape = tape_of(x);
    const Tensor& in = x.value();
    const SliceLayout l = layout_for(in, axis);
    Tensor out(in.shape(), 0.0);
    for (std::size_t s = 0; s < l.count; ++s) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < l.length; ++e) peak = std::max(peak, in[s * l.slice_stride + e * l.elem_stride]);
        double total = 0.0;
        for (std::size_t e = 0; e < l.length; ++e) {
            const std::size_t i = s * l.slice_stride + e * l.elem_stride;
            out[i] = std::exp(in[i] - peak);
            total += out[i];
        }
        for (std::size_t e = 0; e < l.length; ++e) out[s * l.slice_stride + e * l.elem_stride] /= total;
    }
    const std::size_t ix = x.id();
    return tape.record("softmax", std::move(out), {x},
                       [ix, l](Tape& t, std::size_t self) { softmax_backward(t, self, ix, l); });
}

Var masked_softmax(Var x, const AttentionMask& mask) {
    Tape& tape = tape_of(x);
    const Tensor& in = x.value();
    require_matrix(in, "masked_softmax");
    const std::size_t rows = in.rows(), cols = in.cols();
    if (mask.rows() != rows || mask.cols() != cols)
        throw ShapeError("masked_softmax: mask " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                         " does not match scores " + dims(in));
    Tensor out(in.shape(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cols; ++c)
            if (mask.allowed(r, c)) peak = std::max(peak, in.at(r, c));
        if (peak == -std::numeric_limits<double>::infinity()) continue;
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c)
            if (mask.allowed(r, c)) total += (out.at(r, c) = std::exp(in.at(r, c) - peak));
        for (std::size_t c = 0; c < cols; ++c) out.at(r, c) /= total;
    }
    const std::size_t ix = x.id();
    const SliceLayout l{rows, cols, cols, 1};
    // Masked entries have y == 0, so the plain softmax rule gives them zero gradient.
    return tape.record("softmax", std::move(out), {x},
                       [ix, l](Tape& t, std::size_t self) { softmax_backward(t, self, ix, l); });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    Tape& tape = tape_of(x, gamma);
    tape_of(x, beta);
    const Tensor& in = x.value();
    require_matrix(in, "layer_norm");
    const std::size_t rows = in.rows(), cols = in.cols();
    if (gamma.value().size() != cols || beta.value().size() != cols)
        throw ShapeError("layer_norm: gamma/beta must have " + std::to_string(cols) + " entries");
    if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
    const Tensor& gv = gamma.value();
    const Tensor& bv = beta.value();

    Tensor normalized(in.shape(), 0.0);
    Tensor inv_std = Tensor::matrix(rows, 1);
    Tensor out(in.shape(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = in.row_span(r);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        var /= static_cast<double>(cols);
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[r] = inv;
        for (std::size_t c = 0; c < cols; ++c) {
            const double xhat = (row[c] - mean) * inv;
            normalized.at(r, c) = xhat;
            out.at(r, c) = gv[c] * xhat + bv[c];
        }
    }
    const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
    return tape.record(
        "layer_norm", std::move(out), {x, gamma, beta},
        [ix, ig, ib, normalized = std::move(normalized), inv_std = std::move(inv_std)](Tape& t, std::size_t self) {
            const Tensor& g = t.output_grad(self);
            const Tensor& gv = t.value(ig);
            const std::size_t rows = g.rows(), cols = g.cols();
            if (t.requires_grad(ig)) {
                Tensor& gg = t.grad_slot(ig);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) gg[c] += g.at(r, c) * normalized.at(r, c);
            }
            if (t.requires_grad(ib)) {
                Tensor& gb = t.grad_slot(ib);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) gb[c] += g.at(r, c);
            }
            if (t.requires_grad(ix)) {
                Tensor& gx = t.grad_slot(ix);
                const double n = static_cast<double>(cols);
                for (std::size_t r = 0; r < rows; ++r) {
                    double mean_d = 0.0, mean_dx = 0.0;
                    for (std::size_t c = 0; c < cols; ++c) {
                        const double d = g.at(r, c) * gv[c];
                        mean_d += d;
                        mean_dx += d * normalized.at(r, c);
                    }
                    mean_d /= n;
                    mean_dx /= n;
                    for (std::size_t c = 0; c < cols; ++c) {
                        const double d = g.at(r, c) * gv[c];
                        gx.at(r, c) += inv_std[r] * (d - mean_d - normalized.at(r, c) * mean_dx);
                    }
                }
            }
        });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: nothing to concatenate");
    Tape& tape = tape_of(parts.front());
    const std::size_t cols = parts.front().value().cols();
    std::size_t rows = 0;
    for (const Var& p : parts) {
        tape_of(parts.front(), p);
        if (p.value().cols() != cols) throw ShapeError("concat_rows: column counts differ");
        rows += p.value().rows();
    }
    Tensor out = Tensor::matrix(rows, cols);
    std::vector<std::size_t> ids;
    std::size_t offset = 0;
    for (const Var& p : parts) {
        std::copy(p.value().values().begin(), p.value().values().end(), out.values().begin() + offset);
        offset += p.value().size();
        ids.push_back(p.id());
    }
    return tape.record("concat_rows", std::move(out), parts, [ids](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        std::size_t offset = 0;
        for (std::size_t id : ids) {
            const std::size_t n = t.value(id).size();
            if (t.requires_grad(id)) {
                Tensor& gp = t.grad_slot(id);
                for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
            }
            offset += n;
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
    Tape& tape = tape_of(parts.front());
    const std::size_t rows = parts.front().value().rows();
    std::size_t cols = 0;
    for (const Var& p : parts) {
        tape_of(parts.front(), p);
        if (p.value().rows() != rows) throw ShapeError("concat_cols: row counts differ");
        cols += p.value().cols();
    }
    Tensor out = Tensor::matrix(rows, cols);
    std::vector<std::size_t> ids;
    std::size_t offset = 0;
    for (const Var& p : parts) {
        const Tensor& v = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(v.data() + r * v.cols(), v.cols(), out.data() + r * cols + offset);
        offset += v.cols();
        ids.push_back(p.id());
    }
    return tape.record("concat_cols", std::move(out), parts, [ids](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        const std::size_t rows = g.rows(), cols = g.cols();
        std::size_t offset = 0;
        for (std::size_t id : ids) {
            const std::size_t w = t.value(id).cols();
            if (t.requires_grad(id)) {
                Tensor& gp = t.grad_slot(id);
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < w; ++c) gp[r * w + c] += g[r * cols + offset + c];
            }
            offset += w;
        }
    });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
    Tape& tape = tape_of(x);
    const Tensor& in = x.value();
    require_matrix(in, "slice_cols");
    if (count == 0 || begin + count > in.cols())
        throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + dims(in));
    const std::size_t rows = in.rows(), cols = in.cols();
    Tensor out = Tensor::matrix(rows, count);
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(in.data() + r * cols + begin, count, out.data() + r * count);
    const std::size_t ix = x.id();
    return tape.record("slice_cols", std::move(out), {x}, [ix, begin, count](Tape& t, std::size_t self) {
        const Tensor& g = t.output_grad(self);
        Tensor& gx = t.grad_slot(ix);
        const std::size_t cols = gx.cols();
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < count; ++c) gx[r * cols + begin + c] += g[r * count + c];
    });
}

Var embedding_lookup(Var table, std::span<const std::int32_t> ids) {
    Tape& tape = tape_of(table);
    const Tensor& tv = table.value();
    require_matrix(tv, "embedding_lookup");
    if (ids.empty()) throw ShapeError("embedding_lookup: empty id list");
    const std::size_t width = tv.cols();
    Tensor out = Tensor::matrix(ids.size(), width);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows())
            throw ValidationError("embedding_lookup: id " + std::to_string(ids[i]) + " outside vocabulary of " +
                                  std::to_string(tv.rows()));
        std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * width, width, out.data() + i * width);
    }
    const std::size_t it = table.id();
    return tape.record("embedding_lookup", std::move(out), {table},
                       [it, rows = std::vector<std::int32_t>(ids.begin(), ids.end())](Tape& t, std::size_t self) {
                           const Tensor& g = t.output_grad(self);
                           Tensor& gt = t.grad_slot(it);
                           const std::size_t width = gt.cols();
                           for (std::size_t i = 0; i < rows.size(); ++i)
                               kernels::active().axpy(width, 1.0, g.data() + i * width,
                                                      gt.data() + static_cast<std::size_t>(rows[i]) * width);
                       });
}

Var dropout(Var x, double p, bool training, std::mt19937_64* rng) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout: p must lie in [0, 1), got " + std::to_string(p));
    if (!training || p == 0.0) return x;
    if (rng == nullptr) throw ConfigError("dropout: training mode needs a random generator");
    Tape& tape = tape_of(x);
    const double keep_scale = 1.0 / (1.0 - p);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Tensor factors(x.value().shape(), 0.0);
    for (double& f : factors.values()) f = unit(*rng) < p ? 0.0 : keep_scale;
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factors[i];
    const std::size_t ix = x.id();
    return tape.record("dropout", std::move(out), {x},
                       [ix, factors = std::move(factors)](Tape& t, std::size_t self) {
                           const Tensor& g = t.output_grad(self);
                           Tensor& gx = t.grad_slot(ix);
                           for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factors[i];
                       });
}

Tensor log_softmax_row(std::span<const double> logits) {
    Tensor out({1, logits.size()}, 0.0);
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : logits) peak = std::max(peak, v);
    double total = 0.0;
    for (double v : logits) total += std::exp(v - peak);
    const double lse = peak + std::log(total);
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
    return out;
}

Var cross_entropy_logits(Var logits, std::span<const std::int32_t> targets, std::int32_t ignore_id) {
    Tape& tape = tape_of(logits);
    const Tensor& lv = logits.value();
    require_matrix(lv, "cross_entropy_logits");
    const std::size_t rows = lv.rows(), vocab = lv.cols();
    if (targets.size() != rows)
        throw ShapeError("cross_entropy_logits: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(rows) + " rows");
    Tensor probs(lv.shape(), 0.0);
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (targets[r] == ignore_id) continue;
        if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= vocab)
            throw ValidationError("cross_entropy_logits: target " + std::to_string(targets[r]) + " outside [0, " +
                                  std::to_string(vocab) + ")");
        const Tensor logp = log_softmax_row(lv.row_span(r));
        total -= logp[static_cast<std::size_t>(targets[r])];
        for (std::size_t c = 0; c < vocab; ++c) probs.at(r, c) = std::exp(logp[c]);
        ++counted;
    }
    if (counted == 0) throw ValidationError("cross_entropy_logits: every position is ignored");
    const double inv_count = 1.0 / static_cast<double>(counted);
    const std::size_t il = logits.id();
    return tape.record("cross_entropy", Tensor::scalar(total * inv_count), {logits},
                       [il, inv_count, probs = std::move(probs),
                        tgt = std::vector<std::int32_t>(targets.begin(), targets.end()),
                        ignore_id](Tape& t, std::size_t self) {
                           const double g = t.output_grad(self)[0] * inv_count;
                           Tensor& gl = t.grad_slot(il);
                           const std::size_t vocab = gl.cols();
                           for (std::size_t r = 0; r < tgt.size(); ++r) {
                               if (tgt[r] == ignore_id) continue;
                               for (std::size_t c = 0; c < vocab; ++c) gl.at(r, c) += g * probs.at(r, c);
                               gl.at(r, static_cast<std::size_t>(tgt[r])) -= g;
                           }
                       });
}

Var sum(Var x) {
    Tape& tape = tape_of(x);
    double total = 0.0;
    for (double v : x.value().values()) total += v;
    const std::size_t ix = x.id();
    return tape.record("sum", Tensor::scalar(total), {x}, [ix](Tape& t, std::size_t self) {
        const double g = t.output_grad(self)[0];
        for (double& v : t.grad_slot(ix).values()) v += g;
    });
}

}  // namespace trrgen::num
