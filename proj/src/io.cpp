#include "fjl/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fjl/error.hpp"

namespace fjl {
namespace {

class Writer {
public:
    void raw(const char (&tag)[5]) { bytes_.insert(bytes_.end(), tag, tag + 4); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void i8(std::int8_t v) { bytes_.push_back(static_cast<std::uint8_t>(v)); }

    Bytes take() { return std::move(bytes_); }

private:
    Bytes bytes_;
};

class Reader {
public:
    explicit Reader(const Bytes& bytes) : bytes_(bytes) {}

    void expect(const char (&tag)[5]) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) {
            throw FormatError(std::string("bad magic, expected ") + tag);
        }
        pos_ += 4;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::int8_t i8() {
        need(1);
        return static_cast<std::int8_t>(bytes_[pos_++]);
    }
    void finish() const {
        if (pos_ != bytes_.size()) throw FormatError("trailing bytes after payload");
    }
    void need(std::uint64_t count) const {
        if (count > bytes_.size() - pos_) throw FormatError("truncated input");
    }

private:
    const Bytes& bytes_;
    std::size_t pos_ = 0;
};

struct Header {
    TransformScheme scheme;
    std::uint32_t flags;
    std::uint64_t seed, n_input, n_pad, n, m;
};

void write_header(Writer& w, TransformScheme scheme, std::uint32_t flags, std::uint64_t seed,
                  std::uint64_t n_input, std::uint64_t n_pad, std::uint64_t n, std::uint64_t m) {
    w.raw("FJL1");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(scheme));
    w.u32(kRngScheme);
    w.u32(flags);
    w.u32(0);
    w.u64(seed);
    w.u64(n_input);
    w.u64(n_pad);
    w.u64(n);
    w.u64(m);
}

Header read_header(Reader& r) {
    r.expect("FJL1");
    if (r.u32() != kFormatVersion) throw FormatError("unsupported FJL1 version");
    const std::uint32_t scheme = r.u32();
    if (scheme < 1 || scheme > 3) throw FormatError("unknown transform scheme tag");
    if (r.u32() != kRngScheme) throw FormatError("unknown RNG scheme tag");
    Header h{static_cast<TransformScheme>(scheme), r.u32(), 0, 0, 0, 0, 0};
    if (r.u32() != 0) throw FormatError("reserved header field must be zero");
    h.seed = r.u64();
    h.n_input = r.u64();
    h.n_pad = r.u64();
    h.n = r.u64();
    h.m = r.u64();
    return h;
}

std::vector<std::int8_t> read_signs(Reader& r, std::uint64_t count) {
    r.need(count);
    std::vector<std::int8_t> out(count);
    for (auto& s : out) s = r.i8();
    return out;
}

void write_signs(Writer& w, std::span<const std::int8_t> signs) {
    for (auto s : signs) w.i8(s);
}

void require_scheme(const Header& h, TransformScheme want) {
    if (h.scheme != want) throw FormatError("FJL1 container holds a different transform scheme");
}

}  // namespace

Bytes encode_point_set(const DenseMatrix& points) {
    if (points.rows() > UINT32_MAX || points.cols() > UINT32_MAX) {
        throw FormatError("point set too large for FJLM");
    }
    Writer w;
    w.raw("FJLM");
    w.u32(static_cast<std::uint32_t>(points.rows()));
    w.u32(static_cast<std::uint32_t>(points.cols()));
    w.u32(0);
    for (double v : points.data()) w.f64(v);
    return w.take();
}

DenseMatrix decode_point_set(const Bytes& bytes) {
    Reader r(bytes);
    r.expect("FJLM");
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    const std::uint32_t flags = r.u32();
    if ((flags & 0xFFu) != 0) throw FormatError("unsupported FJLM element type");
    if ((flags & ~0xFFu) != 0) throw FormatError("unknown FJLM flag bits");
    if (rows == 0 || cols == 0) throw FormatError("FJLM dimensions must be positive");
    const std::uint64_t count = std::uint64_t{rows} * cols;
    r.need(count * 8);
    std::vector<double> data(count);
    for (auto& v : data) v = r.f64();
    r.finish();
    return DenseMatrix(rows, cols, std::move(data));
}

Bytes read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + path.string());
}

void write_point_set(const std::filesystem::path& path, const DenseMatrix& points) {
    write_bytes(path, encode_point_set(points));
}

DenseMatrix read_point_set(const std::filesystem::path& path) {
    return decode_point_set(read_bytes(path));
}

void write_point_set_csv(const std::filesystem::path& path, const DenseMatrix& points) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    char buf[64];
    for (std::size_t j = 0; j < points.cols(); ++j) {
        const auto col = points.col(j);
        for (std::size_t i = 0; i < col.size(); ++i) {
            auto res = std::to_chars(buf, buf + sizeof buf, col[i]);
            if (i) out << ',';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

DenseMatrix read_point_set_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t count = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            double v = 0.0;
            auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc()) throw FormatError("bad number in " + path.string());
            data.push_back(v);
            ++count;
            p = res.ptr;
            if (p < end) {
                if (*p != ',') throw FormatError("expected ',' in " + path.string());
                ++p;
            }
        }
        if (cols == 0) rows = count;
        if (count != rows) throw FormatError("ragged CSV rows in " + path.string());
        ++cols;
    }
    if (cols == 0) throw FormatError("empty CSV " + path.string());
    return DenseMatrix(rows, cols, std::move(data));
}

Bytes encode_transform(const ComposedTransform& t) {
    Writer w;
    write_header(w, TransformScheme::composed, t.plan.saturated ? 1u : 0u, t.seed,
                 t.stage.input_dim(), t.stage.padded_dim(), t.stage.output_dim(), t.g.rows());
    write_signs(w, t.stage.xi().signs());
    for (auto idx : t.stage.rows().indices()) w.u32(idx);
    write_signs(w, t.g.signs());
    return w.take();
}

Bytes encode_transform(const DenseSignMatrix& g, std::uint64_t seed) {
    Writer w;
    write_header(w, TransformScheme::dense, 0, seed, g.cols(), g.cols(), g.cols(), g.rows());
    write_signs(w, g.signs());
    return w.take();
}

Bytes encode_transform(const FjltTransform& t) {
    Writer w;
    write_header(w, TransformScheme::fjlt, 0, t.seed, t.input_dim, t.padded_dim, 0, t.m);
    w.f64(t.q);
    w.u64(t.entries.size());
    write_signs(w, t.xi.signs());
    for (const auto& e : t.entries) {
        w.u32(e.row);
        w.u32(e.col);
        w.f64(e.value);
    }
    return w.take();
}

TransformScheme peek_scheme(const Bytes& bytes) {
    Reader r(bytes);
    return read_header(r).scheme;
}

ComposedTransform decode_composed(const Bytes& bytes, const DimensionPlan* plan) {
    Reader r(bytes);
    const Header h = read_header(r);
    require_scheme(h, TransformScheme::composed);
    const bool saturated = (h.flags & 1u) != 0;
    if (h.flags & ~1u) throw FormatError("unknown FJL1 flag bits");
    DimensionPlan p;
    try {
        p = plan ? *plan : explicit_plan(h.n_input, h.m, h.n, 0.5, 0.1, saturated);
    } catch (const PlanningError& e) {
        throw FormatError(std::string("inconsistent FJL1 dimensions: ") + e.what());
    }
    if (p.N != h.n_input || p.N_pad != h.n_pad || p.n != h.n || p.m != h.m ||
        p.saturated != saturated) {
        throw FormatError("FJL1 dimensions disagree with the supplied plan");
    }
    auto xi = read_signs(r, h.n_pad);
    r.need(h.n * 4);
    std::vector<std::uint32_t> rows(h.n);
    for (auto& idx : rows) idx = r.u32();
    auto g = read_signs(r, h.m * h.n);
    r.finish();
    try {
        return ComposedTransform{p, h.seed,
                                 HadamardStage(h.n_input, SignVector(std::move(xi)),
                                               RowSample(std::move(rows), h.n_pad)),
                                 DenseSignMatrix(h.m, h.n, std::move(g))};
    } catch (const DimensionError& e) {
        throw FormatError(std::string("invalid FJL1 payload: ") + e.what());
    }
}

DenseSignMatrix decode_dense(const Bytes& bytes) {
    Reader r(bytes);
    const Header h = read_header(r);
    require_scheme(h, TransformScheme::dense);
    if (h.m == 0 || h.n_input == 0) throw FormatError("FJL1 dimensions must be positive");
    auto g = read_signs(r, h.m * h.n_input);
    r.finish();
    try {
        return DenseSignMatrix(h.m, h.n_input, std::move(g));
    } catch (const DimensionError& e) {
        throw FormatError(std::string("invalid FJL1 payload: ") + e.what());
    }
}

FjltTransform decode_fjlt(const Bytes& bytes) {
    Reader r(bytes);
    const Header h = read_header(r);
    require_scheme(h, TransformScheme::fjlt);
    FjltTransform t;
    t.m = h.m;
    t.input_dim = h.n_input;
    t.padded_dim = h.n_pad;
    t.seed = h.seed;
    t.q = r.f64();
    const std::uint64_t nnz = r.u64();
    try {
        t.xi = SignVector(read_signs(r, h.n_pad));
    } catch (const DimensionError& e) {
        throw FormatError(std::string("invalid FJL1 payload: ") + e.what());
    }
    r.need(nnz * 16);
    t.entries.resize(nnz);
    for (auto& e : t.entries) {
        e.row = r.u32();
        e.col = r.u32();
        e.value = r.f64();
        if (e.row >= t.m || e.col >= t.padded_dim) throw FormatError("FJLT entry out of range");
    }
    r.finish();
    return t;
}

nlohmann::json plan_to_json(const DimensionPlan& plan) {
    return {{"p", plan.p},   {"epsilon", plan.epsilon}, {"eta", plan.eta},
            {"N", plan.N},   {"c1", plan.c1},           {"c2", plan.c2},
            {"m", plan.m},   {"n", plan.n},             {"N_pad", plan.N_pad},
            {"saturated", plan.saturated}};
}

DimensionPlan plan_from_json(const nlohmann::json& j) {
    try {
        DimensionPlan plan;
        plan.p = j.at("p").get<std::size_t>();
        plan.epsilon = j.at("epsilon").get<double>();
        plan.eta = j.at("eta").get<double>();
        plan.N = j.at("N").get<std::size_t>();
        plan.c1 = j.at("c1").get<double>();
        plan.c2 = j.at("c2").get<double>();
        plan.m = j.at("m").get<std::size_t>();
        plan.n = j.at("n").get<std::size_t>();
        plan.N_pad = j.at("N_pad").get<std::size_t>();
        plan.saturated = j.at("saturated").get<bool>();
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad plan JSON: ") + e.what());
    }
}

}  // namespace fjl
