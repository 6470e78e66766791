#include "fjl/fast_multiply.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "fjl/error.hpp"
#include "fjl/parallel.hpp"

namespace fjl {
namespace {

// Strided column-major views used inside the recursion.
struct ConstView {
    const double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t ld;

    const double* col(std::size_t j) const { return data + j * ld; }
    ConstView block(std::size_t i, std::size_t j, std::size_t r, std::size_t c) const {
        return {data + j * ld + i, r, c, ld};
    }
};

struct View {
    double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t ld;

    double* col(std::size_t j) const { return data + j * ld; }
    View block(std::size_t i, std::size_t j, std::size_t r, std::size_t c) const {
        return {data + j * ld + i, r, c, ld};
    }
    operator ConstView() const { return {data, rows, cols, ld}; }
};

ConstView view_of(const DenseMatrix& m) { return {m.data().data(), m.rows(), m.cols(), m.rows()}; }
View view_of(DenseMatrix& m) { return {m.data().data(), m.rows(), m.cols(), m.rows()}; }

// Owning scratch matrix with a View.
struct Buffer {
    std::vector<double> storage;
    View view;

    Buffer(std::size_t rows, std::size_t cols)
        : storage(rows * cols, 0.0), view{storage.data(), rows, cols, rows} {}
};

constexpr std::size_t kMicroRows = 8;
constexpr std::size_t kMicroCols = 4;
constexpr std::size_t kDepthBlock = 256;
constexpr std::size_t kRowBlock = 128;

typedef double Vec4 __attribute__((vector_size(32)));

// C(8 x 4) += A_packed(8 x depth) * B_packed(depth x 4). A is packed as
// depth groups of 8 rows, B as depth groups of 4 columns.
inline void micro_kernel(const double* __restrict a, const double* __restrict b, double* c,
                         std::size_t ldc, std::size_t depth) {
    Vec4 acc[kMicroCols][2] = {};
    for (std::size_t p = 0; p < depth; ++p) {
        Vec4 a0, a1;
        __builtin_memcpy(&a0, a + p * kMicroRows, sizeof a0);
        __builtin_memcpy(&a1, a + p * kMicroRows + 4, sizeof a1);
        const double* bp = b + p * kMicroCols;
        for (std::size_t jj = 0; jj < kMicroCols; ++jj) {
            acc[jj][0] += a0 * bp[jj];
            acc[jj][1] += a1 * bp[jj];
        }
    }
    for (std::size_t jj = 0; jj < kMicroCols; ++jj) {
        double* cj = c + jj * ldc;
        for (std::size_t ii = 0; ii < 4; ++ii) {
            cj[ii] += acc[jj][0][ii];
            cj[ii + 4] += acc[jj][1][ii];
        }
    }
}

// C(rows x cols) += A_packed * B_packed for a ragged edge tile.
inline void edge_kernel(const double* a, const double* b, double* c, std::size_t ldc,
                        std::size_t rows, std::size_t cols, std::size_t depth) {
    for (std::size_t jj = 0; jj < cols; ++jj) {
        double* cj = c + jj * ldc;
        for (std::size_t p = 0; p < depth; ++p) {
            const double bv = b[p * kMicroCols + jj];
            const double* ap = a + p * kMicroRows;
            for (std::size_t ii = 0; ii < rows; ++ii) cj[ii] += ap[ii] * bv;
        }
    }
}

// C = A * B, overwriting C. Blocks of A and B are packed into contiguous
// panels (zero-filled past the edges) before the micro-kernel runs.
void naive_product(ConstView a, ConstView b, View c, MultiplyCounter* counter) {
    for (std::size_t j = 0; j < c.cols; ++j) std::fill_n(c.col(j), c.rows, 0.0);
    const std::size_t m = a.rows;
    const std::size_t k = a.cols;
    const std::size_t n = b.cols;
    thread_local std::vector<double> a_pack, b_pack;
    for (std::size_t p0 = 0; p0 < k; p0 += kDepthBlock) {
        const std::size_t depth = std::min(kDepthBlock, k - p0);
        for (std::size_t i0 = 0; i0 < m; i0 += kRowBlock) {
            const std::size_t mb = std::min(kRowBlock, m - i0);
            const std::size_t panels = (mb + kMicroRows - 1) / kMicroRows;
            a_pack.assign(panels * depth * kMicroRows, 0.0);
            for (std::size_t q = 0; q < panels; ++q) {
                const std::size_t rb = std::min(kMicroRows, mb - q * kMicroRows);
                double* dst = a_pack.data() + q * depth * kMicroRows;
                for (std::size_t p = 0; p < depth; ++p) {
                    const double* src = a.col(p0 + p) + i0 + q * kMicroRows;
                    std::copy_n(src, rb, dst + p * kMicroRows);
                }
            }
            for (std::size_t j = 0; j < n; j += kMicroCols) {
                const std::size_t nb = std::min(kMicroCols, n - j);
                b_pack.assign(depth * kMicroCols, 0.0);
                for (std::size_t jj = 0; jj < nb; ++jj) {
                    const double* src = b.col(j + jj) + p0;
                    for (std::size_t p = 0; p < depth; ++p) b_pack[p * kMicroCols + jj] = src[p];
                }
                for (std::size_t q = 0; q < panels; ++q) {
                    const std::size_t rb = std::min(kMicroRows, mb - q * kMicroRows);
                    const double* ap = a_pack.data() + q * depth * kMicroRows;
                    double* cp = c.col(j) + i0 + q * kMicroRows;
                    if (rb == kMicroRows && nb == kMicroCols) {
                        micro_kernel(ap, b_pack.data(), cp, c.ld, depth);
                    } else {
                        edge_kernel(ap, b_pack.data(), cp, c.ld, rb, nb, depth);
                    }
                }
            }
        }
    }
    if (counter) counter->multiplications += static_cast<std::uint64_t>(m) * k * n;
}

void add_into(ConstView x, ConstView y, View out, double sign) {
    for (std::size_t j = 0; j < out.cols; ++j) {
        const double* xj = x.col(j);
        const double* yj = y.col(j);
        double* oj = out.col(j);
        for (std::size_t i = 0; i < out.rows; ++i) oj[i] = xj[i] + sign * yj[i];
    }
}

void copy_into(ConstView x, View out) {
    for (std::size_t j = 0; j < out.cols; ++j) std::copy_n(x.col(j), out.rows, out.col(j));
}

// Scratch doubles strassen() needs below a node with A (s x s), B (s x w).
std::size_t strassen_workspace(std::size_t s, std::size_t w, unsigned levels) {
    if (levels == 0) return 0;
    const std::size_t h = s / 2;
    const std::size_t hw = w / 2;
    return h * h + 2 * h * hw + strassen_workspace(h, hw, levels - 1);
}

// C = A * B with A (s x s), B (s x w); s and w divisible by 2^levels.
// work must hold strassen_workspace(s, w, levels) doubles.
void strassen(ConstView a, ConstView b, View c, unsigned levels, MultiplyCounter* counter,
              double* work) {
    if (levels == 0) {
        naive_product(a, b, c, counter);
        return;
    }
    const std::size_t h = a.rows / 2;
    const std::size_t hw = b.cols / 2;
    const ConstView a11 = a.block(0, 0, h, h), a12 = a.block(0, h, h, h);
    const ConstView a21 = a.block(h, 0, h, h), a22 = a.block(h, h, h, h);
    const ConstView b11 = b.block(0, 0, h, hw), b12 = b.block(0, hw, h, hw);
    const ConstView b21 = b.block(h, 0, h, hw), b22 = b.block(h, hw, h, hw);
    View c11 = c.block(0, 0, h, hw), c12 = c.block(0, hw, h, hw);
    View c21 = c.block(h, 0, h, hw), c22 = c.block(h, hw, h, hw);

    const View ta{work, h, h, h};
    const View tb{work + h * h, h, hw, h};
    const View mv{work + h * h + h * hw, h, hw, h};
    double* deeper = work + h * h + 2 * h * hw;
    const unsigned next = levels - 1;

    // M1 = (A11 + A22)(B11 + B22) -> C11, C22
    add_into(a11, a22, ta, 1.0);
    add_into(b11, b22, tb, 1.0);
    strassen(ta, tb, mv, next, counter, deeper);
    copy_into(mv, c11);
    copy_into(mv, c22);
    // M2 = (A21 + A22) B11 -> C21, -C22
    add_into(a21, a22, ta, 1.0);
    strassen(ta, b11, mv, next, counter, deeper);
    copy_into(mv, c21);
    add_into(c22, mv, c22, -1.0);
    // M3 = A11 (B12 - B22) -> C12, C22
    add_into(b12, b22, tb, -1.0);
    strassen(a11, tb, mv, next, counter, deeper);
    copy_into(mv, c12);
    add_into(c22, mv, c22, 1.0);
    // M4 = A22 (B21 - B11) -> C11, C21
    add_into(b21, b11, tb, -1.0);
    strassen(a22, tb, mv, next, counter, deeper);
    add_into(c11, mv, c11, 1.0);
    add_into(c21, mv, c21, 1.0);
    // M5 = (A11 + A12) B22 -> -C11, C12
    add_into(a11, a12, ta, 1.0);
    strassen(ta, b22, mv, next, counter, deeper);
    add_into(c11, mv, c11, -1.0);
    add_into(c12, mv, c12, 1.0);
    // M6 = (A21 - A11)(B11 + B12) -> C22
    add_into(a21, a11, ta, -1.0);
    add_into(b11, b12, tb, 1.0);
    strassen(ta, tb, mv, next, counter, deeper);
    add_into(c22, mv, c22, 1.0);
    // M7 = (A12 - A22)(B21 + B22) -> C11
    add_into(a12, a22, ta, -1.0);
    add_into(b21, b22, tb, 1.0);
    strassen(ta, tb, mv, next, counter, deeper);
    add_into(c11, mv, c11, 1.0);
}

struct RecursionShape {
    unsigned levels;
    std::size_t leaf;    // side of the square leaf blocks
    std::size_t padded;  // leaf * 2^levels

    std::size_t pad_width(std::size_t w) const {
        const std::size_t unit = std::size_t{1} << levels;
        return (w + unit - 1) / unit * unit;
    }
};

RecursionShape recursion_shape(std::size_t s, std::size_t cutoff) {
    unsigned levels = 0;
    std::size_t leaf = s;
    while (leaf > cutoff) {
        ++levels;
        leaf = (s + (std::size_t{1} << levels) - 1) >> levels;
    }
    return {levels, leaf, leaf << levels};
}

// C (s x k) = A (s x s) * B (s x k).
void strassen_product(ConstView a, ConstView b, View c, std::size_t cutoff,
                      MultiplyCounter* counter) {
    const std::size_t s = a.rows;
    const RecursionShape shape = recursion_shape(s, cutoff);
    if (shape.levels == 0) {
        naive_product(a, b, c, counter);
        return;
    }
    Buffer a_pad(shape.padded, shape.padded);
    for (std::size_t j = 0; j < s; ++j) std::copy_n(a.col(j), s, a_pad.view.col(j));

    // Buffers are sized for the widest column block and reused across blocks.
    const std::size_t wmax = shape.pad_width(std::min(s, b.cols));
    Buffer b_pad(shape.padded, wmax);
    Buffer c_pad(shape.padded, wmax);
    std::vector<double> work(strassen_workspace(shape.padded, wmax, shape.levels));
    for (std::size_t j0 = 0; j0 < b.cols; j0 += s) {
        const std::size_t w = std::min(s, b.cols - j0);
        const std::size_t wp = shape.pad_width(w);
        const View bv{b_pad.storage.data(), shape.padded, wp, shape.padded};
        const View cv{c_pad.storage.data(), shape.padded, wp, shape.padded};
        std::fill(b_pad.storage.begin(), b_pad.storage.end(), 0.0);
        for (std::size_t j = 0; j < w; ++j) std::copy_n(b.col(j0 + j), s, bv.col(j));
        strassen(a_pad.view, bv, cv, shape.levels, counter, work.data());
        for (std::size_t j = 0; j < w; ++j) std::copy_n(cv.col(j), s, c.col(j0 + j));
    }
}

void require_inner(std::size_t a_cols, std::size_t b_rows) {
    if (a_cols != b_rows) {
        throw DimensionError("inner dimensions differ: " + std::to_string(a_cols) + " vs " +
                             std::to_string(b_rows));
    }
}

}  // namespace

void MultiplyPlan::validate() const {
    if (strassen_cutoff < 8) {
        throw DimensionError("strassen_cutoff must be >= 8, got " + std::to_string(strassen_cutoff));
    }
    if (block_rows && *block_rows == 0) throw DimensionError("block_rows must be >= 1");
}

DenseMatrix multiply_naive(const DenseMatrix& a, const DenseMatrix& b, MultiplyCounter* counter) {
    require_inner(a.cols(), b.rows());
    DenseMatrix c(a.rows(), b.cols());
    naive_product(view_of(a), view_of(b), view_of(c), counter);
    return c;
}

DenseMatrix multiply_strassen(const DenseMatrix& a, const DenseMatrix& b, std::size_t cutoff,
                              MultiplyCounter* counter) {
    if (a.rows() != a.cols()) throw DimensionError("multiply_strassen needs a square left factor");
    require_inner(a.cols(), b.rows());
    MultiplyPlan{MultiplyStrategy::blocked_fast, cutoff, std::nullopt}.validate();
    DenseMatrix c(a.rows(), b.cols());
    strassen_product(view_of(a), view_of(b), view_of(c), cutoff, counter);
    return c;
}

DenseMatrix multiply_blocked(const DenseMatrix& g, const DenseMatrix& m2, const MultiplyPlan& plan,
                             MultiplyCounter* counter) {
    plan.validate();
    require_inner(g.cols(), m2.rows());
    if (plan.strategy == MultiplyStrategy::naive) return multiply_naive(g, m2, counter);

    const std::size_t m = g.rows();
    const std::size_t n = g.cols();
    const std::size_t p = m2.cols();
    const std::size_t width = plan.block_rows.value_or(m);
    const std::size_t side = std::max(m, width);
    const std::size_t r = (n + width - 1) / width;

    DenseMatrix result(m, p);
    const std::size_t wave = std::max<std::size_t>(thread_count(), 1);
    std::vector<MultiplyCounter> counts(r);

    for (std::size_t first = 0; first < r; first += wave) {
        const std::size_t last = std::min(r, first + wave);
        std::vector<DenseMatrix> partial(last - first);
        parallel_for(first, last, [&](std::size_t blk) {
            const std::size_t c0 = blk * width;
            const std::size_t cw = std::min(width, n - c0);
            // G_j padded to side x side, V_j padded to side x p.
            DenseMatrix gj(side, side);
            for (std::size_t j = 0; j < cw; ++j) {
                std::copy_n(g.col(c0 + j).data(), m, gj.col(j).data());
            }
            DenseMatrix vj(side, p);
            for (std::size_t j = 0; j < p; ++j) {
                std::copy_n(m2.col(j).data() + c0, cw, vj.col(j).data());
            }
            DenseMatrix prod(side, p);
            strassen_product(view_of(gj), view_of(vj), view_of(prod), plan.strassen_cutoff,
                             &counts[blk]);
            partial[blk - first] = std::move(prod);
        });
        for (std::size_t blk = first; blk < last; ++blk) {
            const DenseMatrix& prod = partial[blk - first];
            for (std::size_t j = 0; j < p; ++j) {
                const double* src = prod.col(j).data();
                double* dst = result.col(j).data();
                for (std::size_t i = 0; i < m; ++i) dst[i] += src[i];
            }
        }
    }
    if (counter) {
        for (const auto& c : counts) counter->multiplications += c.multiplications;
    }
    return result;
}

std::uint64_t strassen_multiplications(std::size_t s, std::size_t k, std::size_t cutoff) {
    const RecursionShape shape = recursion_shape(s, cutoff);
    if (shape.levels == 0) return static_cast<std::uint64_t>(s) * s * k;
    std::uint64_t seven = 1;
    for (unsigned l = 0; l < shape.levels; ++l) seven *= 7;
    std::uint64_t total = 0;
    for (std::size_t j0 = 0; j0 < k; j0 += s) {
        const std::size_t w = std::min(s, k - j0);
        const std::size_t leaf_width = shape.pad_width(w) >> shape.levels;
        total += seven * shape.leaf * shape.leaf * leaf_width;
    }
    return total;
}

std::uint64_t flop_estimate(std::size_t m, std::size_t n, std::size_t p, const MultiplyPlan& plan) {
    if (plan.strategy == MultiplyStrategy::naive) return static_cast<std::uint64_t>(m) * n * p;
    plan.validate();
    const std::size_t width = plan.block_rows.value_or(m);
    const std::size_t side = std::max(m, width);
    const std::size_t r = (n + width - 1) / width;
    return r * strassen_multiplications(side, p, plan.strassen_cutoff);
}

}  // namespace fjl
